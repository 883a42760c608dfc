use maslovlab::linalg::{
    c, gap_delta, gap_hat, hermitian_eig, orthonormalize, singular_values, CMat, HermitianMatrix,
};
use maslovlab::maslov::{counting_function_e, maslov_winding, MaslovOptions};
use maslovlab::random;
use maslovlab::spectral_flow::{sf_eigen, HermitianPath};
use maslovlab::verification::RandomPath;
use nalgebra::DVector;
use proptest::prelude::*;

fn clustered(seed: u64, rows: usize, cols: usize, spectrum: &[f64]) -> CMat {
    let mut rng = random::rng(seed);
    let u = random::unitary(&mut rng, rows);
    let v = random::unitary(&mut rng, cols);
    let mut s = CMat::zeros(rows, cols);
    for (i, x) in spectrum.iter().enumerate() {
        s[(i, i)] = c(*x, 0.0);
    }
    u * s * v.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counting_function_is_ceiling_like(a in -50.0f64..50.0) {
        let e = counting_function_e(a);
        prop_assert!(e as f64 >= a && (e as f64) - a < 1.0);
        prop_assert_eq!(counting_function_e(a + 1.0), e + 1);
        prop_assert_eq!(counting_function_e(a.round()), a.round() as i64);
    }

    #[test]
    fn rank_survives_repeated_singular_values(seed in any::<u64>(), big in 1.0f64..5e3, small in 1e-6f64..1e-2, ones in 1usize..6) {
        let mut spectrum = vec![big];
        spectrum.extend(std::iter::repeat_n(1.0, ones));
        spectrum.push(small);
        spectrum.push(0.0);
        let cols = spectrum.len();
        let m = clustered(seed, 2 * cols, cols, &spectrum);
        let f = orthonormalize(&m, 1e-9);
        prop_assert_eq!(f.dim(), cols - 1);
        let q = f.matrix();
        prop_assert!((q.adjoint() * q - CMat::identity(f.dim(), f.dim())).norm() < 1e-12);
        prop_assert!((q * (q.adjoint() * &m) - &m).norm() < 1e-10 * big);
        let sv = singular_values(&m);
        for (got, want) in sv.iter().zip(spectrum.iter()) {
            prop_assert!((got - want).abs() < 1e-10 * big);
        }
    }

    #[test]
    fn gaps_are_bounded_and_symmetric(seed in any::<u64>(), ambient in 2usize..8) {
        let mut rng = random::rng(seed);
        let k = 1 + (seed as usize) % (ambient - 1);
        let a = random::frame(&mut rng, ambient, k);
        let b = random::frame(&mut rng, ambient, k);
        let g = gap_hat(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&g));
        prop_assert!((g - gap_hat(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(gap_delta(&a, &b).unwrap() <= g + 1e-12);
        prop_assert!(gap_hat(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn shifted_hermitian_flow_counts_passing_eigenvalues(seed in any::<u64>(), n in 1usize..6, t0 in -4.0f64..0.0, t1 in 0.0f64..4.0) {
        let mut rng = random::rng(seed);
        let a = random::hermitian(&mut rng, n);
        let (vals, _) = hermitian_eig(&HermitianMatrix::new(a.clone()).unwrap());
        prop_assume!(vals.iter().all(|l| (l + t0).abs() > 1e-6 && (l + t1).abs() > 1e-6));
        let shift = |s: f64| -> CMat { &a + CMat::from_diagonal(&DVector::from_element(n, c(t0 + s * (t1 - t0), 0.0))) };
        let path = HermitianPath::from_fn(|s| HermitianMatrix::new(shift(s)), 30).unwrap();
        let back = HermitianPath::from_fn(|s| HermitianMatrix::new(shift(1.0 - s)), 30).unwrap();
        let expected = vals.iter().filter(|&&l| -t1 < l && l < -t0).count() as i64;
        prop_assert_eq!(sf_eigen(&path, None).sf, expected);
        prop_assert_eq!(sf_eigen(&back, None).sf, -expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn flipping_and_catenation(seed in any::<u64>(), n in 1usize..4, cut in 0.2f64..0.8) {
        let opts = MaslovOptions::default();
        let mut rng = random::rng(seed);
        let path = RandomPath::draw(&mut rng, n, false).path(24).unwrap();
        let whole = maslov_winding(&path, &opts).unwrap();
        let flipped = maslov_winding(&path.flipped().unwrap(), &opts).unwrap();
        prop_assert_eq!((whole.mas_plus, whole.mas_minus), (flipped.mas_plus, flipped.mas_minus));
        let reversed = maslov_winding(&path.reversed().unwrap(), &opts).unwrap();
        prop_assert_eq!(reversed.mas_plus, -whole.mas_minus);
        let left = maslov_winding(&path.restricted(0.0, cut).unwrap(), &opts).unwrap();
        let right = maslov_winding(&path.restricted(cut, 1.0).unwrap(), &opts).unwrap();
        prop_assert_eq!(left.mas_plus + right.mas_plus, whole.mas_plus);
        prop_assert_eq!(left.mas_minus + right.mas_minus, whole.mas_minus);
    }
}
