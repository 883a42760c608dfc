use maslovlab::linalg::{c, CMat, Frame};
use maslovlab::maslov::*;
use maslovlab::symplectic::standard_form;

fn line(x: f64, y: f64) -> Frame {
    Frame::span(&CMat::from_column_slice(2, 1, &[c(x, 0.0), c(y, 0.0)]))
}

fn benchmark() -> LagrangianPairPath {
    LagrangianPairPath::from_fn(|s| Ok(PairSample::new(standard_form(1), line(1.0, s - 0.5), line(1.0, 0.0))), 20).unwrap()
}

#[test]
fn benchmark_winding() {
    let r = maslov_winding(&benchmark(), &MaslovOptions::default()).unwrap();
    assert_eq!((r.mas_plus, r.mas_minus), (1, 1));
}

#[test]
fn benchmark_crossing() {
    let opts = MaslovOptions::default();
    let p = benchmark();
    let r = maslov_crossings(&p, &opts).unwrap();
    assert_eq!((r.mas_plus, r.mas_minus), (1, 1));
    assert_eq!(r.crossings.len(), 1);
    assert!((r.crossings[0].t - 0.5).abs() < 1e-9);
    let g = r.crossings[0].gamma.matrix()[(0, 0)].re;
    assert!((g - 1.0).abs() < 1e-6, "{g}");
    let gf = crossing_form_fixed(&p, 0.5, 1e-5, &opts).unwrap();
    assert!((gf.matrix()[(0, 0)].re - 1.0).abs() < 1e-6, "{}", gf.matrix()[(0,0)]);
}

#[test]
fn benchmark_reduced() {
    let r = maslov_reduced(&benchmark(), &MaslovOptions::default()).unwrap();
    assert_eq!((r.mas_plus, r.mas_minus), (1, 1));
}

mod transported {
    use super::*;
    use maslovlab::linalg::{hermitian_eig, HermitianMatrix};
    use maslovlab::random;
    use maslovlab::symplectic::hermitian_graph;

    fn negatives(a: &CMat) -> i64 {
        let (e, _) = hermitian_eig(&HermitianMatrix::new(a.clone()).unwrap());
        e.iter().filter(|&&x| x < 0.0).count() as i64
    }

    /// Graphs of A0 + s A1 against Graph(B), transported by T(s) = I + s G.
    fn case(seed: u64, n: usize) -> (LagrangianPairPath, i64) {
        let mut rng = random::rng(seed);
        let a0 = random::hermitian(&mut rng, n);
        let a1 = random::hermitian(&mut rng, n) * c(3.0, 0.0);
        let b = random::hermitian(&mut rng, n);
        let g = random::matrix(&mut rng, 2 * n, 2 * n) * c(0.3 / (2.0 * n as f64).sqrt(), 0.0);
        let expected = negatives(&(&a0 - &b)) - negatives(&(&a0 + &a1 - &b));
        let path = LagrangianPairPath::from_fn(
            move |s| {
                let t = CMat::identity(2 * n, 2 * n) + &g * c(s, 0.0);
                let form = standard_form(n).push_forward(&t)?;
                let lam = hermitian_graph(&(&a0 + &a1 * c(s, 0.0))).transform(&t);
                let mu = hermitian_graph(&b).transform(&t);
                Ok(PairSample::new(form, lam, mu))
            },
            24,
        )
        .unwrap();
        (path, expected)
    }

    #[test]
    fn three_methods_agree_with_eigenvalue_count() {
        let opts = MaslovOptions::default();
        for seed in 0..6 {
            let (path, expected) = case(seed, 3);
            let w = maslov_winding(&path, &opts).unwrap();
            let x = maslov_crossings(&path, &opts).unwrap();
            let r = maslov_reduced(&path, &opts).unwrap();
            assert_eq!(w.mas_plus, expected, "winding seed {seed}");
            assert_eq!(x.mas_plus, expected, "crossing seed {seed}");
            assert_eq!(r.mas_plus, expected, "reduced seed {seed}");
        }
    }
}
