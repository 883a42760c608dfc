use std::f64::consts::PI;

use maslovlab::bvp::*;
use maslovlab::linalg::{c, gap_hat, hermitian_eig, CMat, Frame};
use maslovlab::maslov::MaslovOptions;

#[test]
fn scalar_periodic_spectrum() {
    let fam = HamiltonianFamily::scalar_shift();
    let d = discretize(&fam, &BoundaryCondition::periodic(&fam), 0.3, 64).unwrap();
    assert!(d.hermiticity_residual < 1e-10);
    let (vals, _) = hermitian_eig(&d.matrix);
    for k in -3i32..=3 {
        let target = 2.0 * PI * k as f64 + 0.3;
        let err = vals.iter().map(|v| (v - target).abs()).fold(f64::INFINITY, f64::min);
        assert!(err < 1e-3, "k = {k}: {err}");
    }
}

fn periodic(fam: &HamiltonianFamily) -> impl Fn(f64) -> BoundaryCondition + Send + Sync + Clone + 'static {
    let bc = BoundaryCondition::periodic(fam);
    move |_| bc.clone()
}

#[test]
fn scalar_desuspension_and_endpoint_conventions() {
    let m = MaslovOptions::default();
    let fam = HamiltonianFamily::scalar_shift();
    for (range, expected) in [((-1.0, 1.0), 1), ((0.0, 1.0), 0), ((-1.0, 0.0), 1)] {
        let opts = BvpOptions { s_range: range, ..Default::default() };
        let r = desuspension_check(&fam, periodic(&fam), &opts, &m).unwrap();
        assert_eq!((r.sf, r.neg_mas), (expected, expected), "{range:?}");
    }
}

#[test]
fn planar_dirichlet_desuspension() {
    let fam = HamiltonianFamily::planar_shift();
    let bc = BoundaryCondition::dirichlet_first(&fam).unwrap();
    let r = desuspension_check(&fam, move |_| bc.clone(), &BvpOptions::default(), &MaslovOptions::default()).unwrap();
    assert_eq!((r.sf, r.neg_mas), (1, 1));
}

#[test]
fn planar_dirichlet_spectrum_is_shifted_lattice() {
    let fam = HamiltonianFamily::planar_shift();
    let bc = BoundaryCondition::dirichlet_first(&fam).unwrap();
    let (vals, _) = hermitian_eig(&discretize(&fam, &bc, 0.2, 64).unwrap().matrix);
    for m in -4i32..=4 {
        let target = 0.2 + PI * m as f64;
        let err = vals.iter().map(|v| (v - target).abs()).fold(f64::INFINITY, f64::min);
        assert!(err < 1e-6, "m = {m}: {err}");
    }
}

#[test]
fn modulated_family_matches_tracked_eigenvalues() {
    let fam = HamiltonianFamily::planar_modulated();
    let opts = BvpOptions { s_range: (-3.0, 3.0), samples: 60, ..Default::default() };
    let r = desuspension_check(&fam, periodic(&fam), &opts, &MaslovOptions::default()).unwrap();
    assert!(r.sf != 0);
    assert_eq!(r.sf, r.neg_mas);
}

#[test]
fn constant_family_has_no_flow() {
    let j0 = CMat::from_element(1, 1, c(0.0, -1.0));
    let fam = HamiltonianFamily::constant(j0, CMat::from_element(1, 1, c(0.4, 0.0)), 1.0).unwrap();
    let r = desuspension_check(&fam, periodic(&fam), &BvpOptions::default(), &MaslovOptions::default()).unwrap();
    assert_eq!((r.sf, r.neg_mas, r.agree), (0, 0, true));
    let s = splitting_check(&fam, 0.5, &BvpOptions::default(), &MaslovOptions::default()).unwrap();
    assert_eq!((s.sf_whole, s.neg_mas_cut, s.agree), (0, 0, true));
}

#[test]
fn splitting_at_the_middle() {
    let m = MaslovOptions::default();
    let o = BvpOptions::default();
    let s = splitting_check(&HamiltonianFamily::scalar_shift(), 0.5, &o, &m).unwrap();
    assert_eq!((s.sf_whole, s.neg_mas_cut), (1, 1));
    let d = splitting_check(&HamiltonianFamily::diagonal_shift(2), 0.5, &o, &m).unwrap();
    assert_eq!((d.sf_whole, d.neg_mas_cut), (2, 2));
    let p = splitting_check(&HamiltonianFamily::planar_modulated(), 0.3, &BvpOptions { s_range: (-3.0, 3.0), samples: 60, ..o }, &m).unwrap();
    assert_eq!(p.sf_whole, p.neg_mas_cut);
}

#[test]
fn cauchy_data_examples() {
    let j0 = CMat::from_element(1, 1, c(0.0, -1.0));
    let zero = HamiltonianFamily::constant(j0.clone(), CMat::zeros(1, 1), 1.0).unwrap();
    let cd = cauchy_data(&zero, 0.0, 1e-10).unwrap();
    assert!(gap_hat(&cd, &maslovlab::symplectic::diagonal(1)).unwrap() < 1e-9);
    let cc = 0.7;
    let fam = HamiltonianFamily::constant(j0, CMat::from_element(1, 1, c(cc, 0.0)), 1.0).unwrap();
    let cd = cauchy_data(&fam, 0.0, 1e-10).unwrap();
    let expected = Frame::span(&CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(0.0, -cc).exp()]));
    assert!(gap_hat(&cd, &expected).unwrap() < 1e-8);
}

#[test]
fn green_form_of_scalar_family() {
    let g = green_form(&HamiltonianFamily::scalar_shift());
    let j = g.matrix();
    assert!((j[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15 && (j[(1, 1)] - c(0.0, -1.0)).norm() < 1e-15);
    assert!(j[(0, 1)].norm() == 0.0 && j[(1, 0)].norm() == 0.0);
}

#[test]
fn kernel_dimension_matches_near_zero_eigenvalues() {
    let fam = HamiltonianFamily::planar_shift();
    let bc = BoundaryCondition::dirichlet_first(&fam).unwrap();
    for s in [0.0, 0.2, PI, -PI + 1e-3] {
        let (geo, eig) = kernel_dimensions(&fam, &bc, s, 64, 1e-6).unwrap();
        assert_eq!(geo, eig, "s = {s}");
    }
    let d = HamiltonianFamily::diagonal_shift(2);
    let (geo, eig) = kernel_dimensions(&d, &BoundaryCondition::periodic(&d), 0.0, 64, 1e-6).unwrap();
    assert_eq!((geo, eig), (2, 2));
}

#[test]
fn refinement_keeps_small_eigenvalues() {
    let fam = HamiltonianFamily::planar_modulated();
    let bc = BoundaryCondition::periodic(&fam);
    let small = |m: usize| {
        let (v, _) = hermitian_eig(&discretize(&fam, &bc, 0.35, m).unwrap().matrix);
        let mut near: Vec<f64> = v.into_iter().filter(|x| x.abs() < 8.0).collect();
        near.sort_by(|a, b| a.partial_cmp(b).unwrap());
        near
    };
    let (a, b) = (small(64), small(128));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-3);
    }
}

#[test]
fn random_boundary_conditions_have_exact_low_spectrum() {
    use maslovlab::linalg::{hstack, smallest_singular_value};
    use maslovlab::random;
    for seed in 0..4u64 {
        let mut rng = random::rng(seed);
        let h = random::hermitian(&mut rng, 2);
        let fam = HamiltonianFamily::constant(CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]), h.clone(), 1.0).unwrap();
        let bc = BoundaryCondition::new(&fam, random::lagrangian(&mut rng, &green_form(&fam))).unwrap();
        let (vals, _) = hermitian_eig(&discretize(&fam, &bc, 0.0, 64).unwrap().matrix);
        let det = |lam: f64| {
            let shifted = HamiltonianFamily::constant(fam.j0().clone(), &h - CMat::identity(2, 2) * c(lam, 0.0), 1.0).unwrap();
            let cd = cauchy_data(&shifted, 0.0, 1e-12).unwrap();
            smallest_singular_value(&hstack(&[bc.lagrangian().matrix(), cd.matrix()]))
        };
        let low: Vec<f64> = vals.iter().copied().filter(|v| v.abs() < 10.0).collect();
        for v in &low {
            assert!(det(*v) < 1e-6, "seed {seed}: spurious eigenvalue {v} ({})", det(*v));
        }
        // count exact eigenvalues on a fine scan of sign changes of a shifted determinant proxy
        let mut exact = 0;
        let grid: Vec<f64> = (0..=4000).map(|i| -9.5 + 19.0 * i as f64 / 4000.0).collect();
        let d: Vec<f64> = grid.iter().map(|&l| det(l)).collect();
        for i in 1..grid.len() - 1 {
            if d[i] < d[i - 1] && d[i] <= d[i + 1] && d[i] < 1e-2 {
                exact += 1;
            }
        }
        let inner = low.iter().filter(|v| v.abs() < 9.5).count();
        assert_eq!(inner, exact, "seed {seed}: {low:?}");
    }
}

#[test]
fn grid_doubles_until_low_spectrum_settles() {
    let fam = HamiltonianFamily::scalar_shift();
    let bc = BoundaryCondition::periodic(&fam);
    let periodic = move |_: f64| bc.clone();
    let opts = BvpOptions { grid: 4, ..Default::default() };
    let grid = resolved_grid(&fam, &periodic, &opts).unwrap();
    assert!(grid > 4);
    for s in [-1.0, 0.0, 1.0] {
        let (vals, _) = hermitian_eig(&discretize(&fam, &periodic(s), s, grid).unwrap().matrix);
        for k in -1..=1 {
            let exact = 2.0 * PI * k as f64 + s;
            let err = vals.iter().map(|v| (v - exact).abs()).fold(f64::INFINITY, f64::min);
            assert!(err < 1e-3, "grid {grid}, s {s}, k {k}: {err:.2e}");
        }
    }
    assert_eq!(resolved_grid(&fam, &periodic, &BvpOptions::default()).unwrap(), 64);
}
