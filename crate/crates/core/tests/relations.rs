use maslovlab::linalg::{c, gap_hat, hermitian_eig, CMat, HermitianMatrix, DEFAULT_RANK_TOL};
use maslovlab::maslov::MaslovOptions;
use maslovlab::random;
use maslovlab::spectral_flow::*;
use maslovlab::symplectic::{classify, SubspaceClass};

const TOL: f64 = DEFAULT_RANK_TOL;

fn same(a: &LinearRelation, b: &LinearRelation) -> bool {
    gap_hat(a.subspace(), b.subspace()).unwrap() < 1e-9
}

#[test]
fn parts_of_simple_relations() {
    let z = LinearRelation::graph(&CMat::zeros(2, 2)).parts(TOL).unwrap();
    assert_eq!((z.domain.dim(), z.range.dim(), z.kernel.dim(), z.indeterminate.dim()), (2, 0, 2, 0));
    let xt = LinearRelation::zero_target(3, 2).parts(TOL).unwrap();
    assert_eq!((xt.domain.dim(), xt.range.dim(), xt.kernel.dim()), (3, 0, 3));
    let ys = LinearRelation::zero_source(2, 3).parts(TOL).unwrap();
    assert_eq!((ys.domain.dim(), ys.indeterminate.dim()), (0, 3));
}

#[test]
fn inverse_sum_compose_match_matrix_algebra() {
    let mut rng = random::rng(11);
    let m = random::matrix(&mut rng, 3, 3);
    let n = random::matrix(&mut rng, 3, 3);
    let minv = maslovlab::linalg::inverse(&m).unwrap();
    assert!(same(&LinearRelation::graph(&m).inverse(), &LinearRelation::graph(&minv)));
    let s = LinearRelation::graph(&m).sum(&LinearRelation::graph(&n), TOL).unwrap();
    assert!(same(&s, &LinearRelation::graph(&(&m + &n))));
    let p = LinearRelation::graph(&m).compose(&LinearRelation::graph(&n), TOL).unwrap();
    assert!(same(&p, &LinearRelation::graph(&(&n * &m))));
}

#[test]
fn relation_indices() {
    let mut rng = random::rng(3);
    let m = random::matrix(&mut rng, 4, 4);
    assert_eq!(LinearRelation::graph(&m).index(TOL).unwrap(), 0);
    let low = random::matrix(&mut rng, 4, 2) * random::matrix(&mut rng, 2, 4);
    assert_eq!(LinearRelation::graph(&low).index(TOL).unwrap(), 0);
    assert_eq!(LinearRelation::zero_target(5, 2).index(TOL).unwrap(), 3);
}

#[test]
fn adjoints() {
    let mut rng = random::rng(5);
    let h = random::hermitian(&mut rng, 3);
    let g = LinearRelation::graph(&h);
    let id = CMat::identity(3, 3);
    assert!(same(&g.adjoint(&id).unwrap(), &g));
    let m = random::matrix(&mut rng, 3, 3);
    assert!(same(&LinearRelation::graph(&m).adjoint(&id).unwrap(), &LinearRelation::graph(&m.adjoint())));
    let f = canonical_standard(3);
    assert_eq!(classify(&f, LinearRelation::zero_target(3, 3).subspace(), TOL).unwrap(), SubspaceClass::Lagrangian);
}

#[test]
fn cayley_spectral_mapping() {
    let mut rng = random::rng(9);
    for n in 1..=6 {
        let a = HermitianMatrix::new(random::hermitian(&mut rng, n) * c(3.0, 0.0)).unwrap();
        let k = cayley(&a).unwrap();
        assert!((k.adjoint() * &k - CMat::identity(n, n)).norm() < 1e-10);
        let (vals, vecs) = hermitian_eig(&a);
        for (j, v) in vals.iter().enumerate() {
            let x = vecs.column(j).into_owned();
            assert!((&k * &x - x * cayley_scalar(*v)).norm() < 1e-9);
        }
    }
}

#[test]
fn bridge_on_random_hermitian_paths() {
    let opts = MaslovOptions::default();
    let mut rng = random::rng(21);
    for n in 1..=4 {
        let a0 = random::hermitian(&mut rng, n);
        let a1 = random::hermitian(&mut rng, n) * c(2.0, 0.0);
        let path = HermitianPath::from_fn(|s| HermitianMatrix::new(&a0 + &a1 * c(s, 0.0)), 40).unwrap();
        let sf = sf_eigen(&path, None).sf;
        let mas = maslovlab::maslov::maslov_winding(&path.graph_pair_path().unwrap(), &opts).unwrap();
        assert_eq!(sf, mas.mas_minus, "n = {n}");
    }
}

#[test]
fn multivalued_endpoint_is_handled_as_relation() {
    // Graph(s - 1/2) + Graph(s)^{-1}; the second summand is {0} x C at s = 0
    let opts = MaslovOptions::default();
    let r = sf_relation_fn(
        |s| {
            let a = LinearRelation::graph(&CMat::from_element(1, 1, c(s - 0.5, 0.0)));
            let b = LinearRelation::graph(&CMat::from_element(1, 1, c(s, 0.0))).inverse();
            Ok((canonical_standard(2), relation_direct_sum(&a, &b)))
        },
        20,
        &opts,
    )
    .unwrap();
    assert_eq!(r.mas_minus, 1);
    let b0 = LinearRelation::graph(&CMat::from_element(1, 1, c(0.0, 0.0))).inverse();
    assert!(!b0.is_operator(TOL).unwrap());
}

#[test]
fn constant_relation_has_no_flow() {
    let opts = MaslovOptions::default();
    let r = sf_relation_fn(|_| Ok((canonical_standard(1), LinearRelation::graph(&CMat::from_element(1, 1, c(0.7, 0.0))))), 4, &opts).unwrap();
    assert_eq!(r.mas_minus, 0);
}
