//! Seeded generators for random matrices, subspaces, forms and paths.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, orthonormalize, CMat, Frame, C64, DEFAULT_RANK_TOL};
use crate::symplectic::{graph_of_unitary, splitting, standard_form, SymplecticForm};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> CMat {
    let g = matrix(rng, n, n);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> CMat {
    orthonormalize(&matrix(rng, n, n), DEFAULT_RANK_TOL).matrix().clone()
}

pub fn frame<R: Rng>(rng: &mut R, ambient: usize, k: usize) -> Frame {
    orthonormalize(&matrix(rng, ambient, k), DEFAULT_RANK_TOL)
}

/// Invertible matrix close to the identity scaled by `spread`.
pub fn invertible<R: Rng>(rng: &mut R, n: usize, spread: f64) -> CMat {
    CMat::identity(n, n) + matrix(rng, n, n) * c(spread / (n as f64).sqrt(), 0.0)
}

/// T^{-H} J_{2n} T^{-1} for a random T, i.e. J_{2n} transported by T.
pub fn form<R: Rng>(rng: &mut R, n: usize) -> SymplecticForm {
    let t = invertible(rng, 2 * n, 0.6);
    standard_form(n).push_forward(&t).expect("random transport is invertible")
}

pub fn lagrangian<R: Rng>(rng: &mut R, f: &SymplecticForm) -> Frame {
    let split = splitting(f).expect("valid form");
    let u = unitary(rng, split.x_minus.dim());
    graph_of_unitary(&split, &u).expect("square generator")
}
