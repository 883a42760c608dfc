//! Symplectic reduction by co-isotropic subspaces and the intrinsic
//! decomposition X = lam0 + V + lam1 + mu1 attached to a pair of Lagrangians.

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, gap_hat, hstack, intersect, inverse, max_abs, null_space, orth_complement, orthonormalize,
    smallest_singular_value, spectral_norm, subspace_sum, vstack, CMat, Frame, Projection,
};
use crate::random;
use crate::symplectic::{annihilator, is_coisotropic, require_lagrangian, SymplecticForm};

#[derive(Debug, Clone)]
pub struct ReducedSpace {
    pub representative: Frame,
    pub induced_form: SymplecticForm,
}

pub fn reduce_space(f: &SymplecticForm, w: &Frame, rank_tol: f64) -> Result<ReducedSpace> {
    check_dim(f.dim(), w.ambient_dim())?;
    if !is_coisotropic(f, w, rank_tol)? {
        return Err(Error::NotCoisotropic);
    }
    let w_om = annihilator(f, w);
    let representative = intersect(w, &orth_complement(&w_om), rank_tol)?;
    check_dim(w.dim() - w_om.dim(), representative.dim())?;
    let r = representative.matrix();
    let induced_form = SymplecticForm::new(r.adjoint() * f.matrix() * r)?;
    Ok(ReducedSpace { representative, induced_form })
}

/// R_W(lam) in the coordinates of the representative of W / W^omega.
pub fn reduce_subspace(f: &SymplecticForm, w: &Frame, lam: &Frame, rank_tol: f64) -> Result<Frame> {
    let red = reduce_space(f, w, rank_tol)?;
    let w_om = annihilator(f, w);
    let r = red.representative.matrix();

    let via_sum = intersect(&subspace_sum(lam, &w_om, rank_tol)?, w, rank_tol)?;
    let via_cap = subspace_sum(&intersect(lam, w, rank_tol)?, &w_om, rank_tol)?;
    let first = orthonormalize(&(r.adjoint() * via_sum.matrix()), rank_tol);
    let second = orthonormalize(&(r.adjoint() * via_cap.matrix()), rank_tol);
    if first.dim() != second.dim() || gap_hat(&first, &second)? > 1e-6 {
        return Err(Error::Structural("the two reduction formulas disagree".into()));
    }
    Ok(first)
}

/// X = lam0 + V + lam1 + mu1, with X0 = lam0 + V and X1 = lam1 + mu1.
#[derive(Debug, Clone)]
pub struct IntrinsicDecomposition {
    pub lam0: Frame,
    pub v: Frame,
    pub lam1: Frame,
    pub mu1: Frame,
    pub x0: Frame,
    pub x1: Frame,
    pub p0: Projection,
}

/// Smallest singular value of the stacked frames; a direct-sum margin.
fn stacked_margin(frames: &[&Frame]) -> f64 {
    let mats: Vec<&CMat> = frames.iter().map(|f| f.matrix()).collect();
    let m = hstack(&mats);
    if m.ncols() == 0 {
        return 1.0;
    }
    smallest_singular_value(&m)
}

/// {x in lam : omega(x, V) = 0}, computed exactly as a null space.
fn annihilated_part(f: &SymplecticForm, v: &Frame, lam: &Frame, rank_tol: f64) -> Frame {
    if v.is_empty() {
        return lam.clone();
    }
    let pairing = v.matrix().adjoint() * f.matrix() * lam.matrix();
    let kernel = null_space(&pairing, rank_tol);
    orthonormalize(&(lam.matrix() * kernel.matrix()), rank_tol)
}

/// Shear V along lam0 until it is isotropic. The pairing V x lam0 must be
/// nondegenerate.
pub fn isotropic_shear(f: &SymplecticForm, v: &Frame, lam0: &Frame) -> Result<Frame> {
    if v.is_empty() {
        return Ok(v.clone());
    }
    let p = f.gram(lam0.matrix(), v.matrix());
    let omega_v = f.gram(v.matrix(), v.matrix());
    let s = -inverse(&p)? * omega_v * c(0.5, 0.0);
    Ok(orthonormalize(&(v.matrix() + lam0.matrix() * s), crate::linalg::DEFAULT_RANK_TOL))
}

impl IntrinsicDecomposition {
    /// Completes a fixed (lam0, V) by lam1 = V^omega cap lam and mu1 = V^omega cap mu.
    /// Fails with a structural error unless the four pieces span X directly
    /// with at least `margin` as smallest singular value of the stacked frames.
    pub fn from_parts(
        f: &SymplecticForm,
        lam: &Frame,
        mu: &Frame,
        lam0: &Frame,
        v: &Frame,
        rank_tol: f64,
        margin: f64,
    ) -> Result<IntrinsicDecomposition> {
        let lam1 = annihilated_part(f, v, lam, rank_tol);
        let mu1 = annihilated_part(f, v, mu, rank_tol);
        let n = f.dim();
        if lam0.dim() + v.dim() + lam1.dim() + mu1.dim() != n {
            return Err(Error::Structural(format!(
                "dimensions ({}, {}, {}, {}) do not fill C^{}",
                lam0.dim(),
                v.dim(),
                lam1.dim(),
                mu1.dim(),
                n
            )));
        }
        let m = stacked_margin(&[lam0, v, &lam1, &mu1]);
        if m < margin {
            return Err(Error::Structural(format!("decomposition is not direct (margin {m:.2e})")));
        }
        let x0 = subspace_sum(lam0, v, rank_tol)?;
        let x1 = subspace_sum(&lam1, &mu1, rank_tol)?;
        let p0 = Projection::along(&x0, &x1)?;
        Ok(IntrinsicDecomposition { lam0: lam0.clone(), v: v.clone(), lam1, mu1, x0, x1, p0 })
    }

    pub fn k(&self) -> usize {
        self.lam0.dim()
    }
}

/// Complement V of lam + mu: orthogonal complement, sheared into lam + mu by
/// a seeded amount (seed 0 means no shear), then made isotropic along lam0.
pub fn complement_for(
    f: &SymplecticForm,
    lam: &Frame,
    mu: &Frame,
    lam0: &Frame,
    seed: u64,
    rank_tol: f64,
) -> Result<Frame> {
    let sum = subspace_sum(lam, mu, rank_tol)?;
    let raw = orth_complement(&sum);
    let raw = if seed == 0 || raw.is_empty() {
        raw
    } else {
        let mut r = random::rng(seed);
        let mix = random::matrix(&mut r, sum.dim(), raw.dim()) * c(0.3 * r.gen::<f64>() + 0.1, 0.0);
        orthonormalize(&(raw.matrix() + sum.matrix() * mix), rank_tol)
    };
    isotropic_shear(f, &raw, lam0)
}

pub fn intrinsic_decomposition(
    f: &SymplecticForm,
    lam: &Frame,
    mu: &Frame,
    v_choice: Option<&Frame>,
    seed: u64,
    rank_tol: f64,
) -> Result<IntrinsicDecomposition> {
    require_lagrangian(f, lam, rank_tol)?;
    require_lagrangian(f, mu, rank_tol)?;
    let idx = crate::linalg::fredholm_pair_index(lam, mu, rank_tol)?;
    if idx.index != 0 {
        return Err(Error::Invariant {
            identity: "Lagrangian pairs have index 0".into(),
            detail: format!("index {}", idx.index),
        });
    }
    let lam0 = intersect(lam, mu, rank_tol)?;
    let v = match v_choice {
        Some(v) => {
            let sum = subspace_sum(lam, mu, rank_tol)?;
            if v.dim() != lam0.dim() || stacked_margin(&[v, &sum]) < 1e-8 {
                return Err(Error::Complement);
            }
            v.clone()
        }
        None => complement_for(f, lam, mu, &lam0, seed, rank_tol)?,
    };
    IntrinsicDecomposition::from_parts(f, lam, mu, &lam0, &v, rank_tol, 1e-8)
}

/// Lagrangian mu~ = V + mu1 with X = lam + mu~ (V isotropic complement).
pub fn complementary_lagrangian(f: &SymplecticForm, lam: &Frame, mu: &Frame, seed: u64, rank_tol: f64) -> Result<Frame> {
    let dec = intrinsic_decomposition(f, lam, mu, None, seed, rank_tol)?;
    subspace_sum(&dec.v, &dec.mu1, rank_tol)
}

/// Coefficients of lam = {x0 + A1 x0 + x1 + A2 x0} and mu = {y0 + B1 y0 + B2 y0 + y1}
/// in the bases of the decomposition frames: A1, B1 map lam0-coordinates to
/// V-coordinates, A2 to mu1-coordinates and B2 to lam1-coordinates.
#[derive(Debug, Clone)]
pub struct GraphCoefficients {
    pub a1: CMat,
    pub a2: CMat,
    pub b1: CMat,
    pub b2: CMat,
}

/// Splits the frame of `sub` in the basis [base | v | own | other] and returns
/// the (v, other) coefficients of the graph over base + own. The base block
/// may be any basis of lam0, not necessarily orthonormal.
fn graph_over(
    base: &CMat,
    v: &CMat,
    own: &CMat,
    other: &CMat,
    sub: &CMat,
) -> Result<(CMat, CMat, f64)> {
    let (k, kv, m, mo) = (base.ncols(), v.ncols(), own.ncols(), other.ncols());
    let b = hstack(&[base, v, own, other]);
    let coords = inverse(&b).map_err(|_| Error::Structural("decomposition basis is singular".into()))? * sub;
    let g = vstack(&[&coords.rows(0, k).into_owned(), &coords.rows(k + kv, m).into_owned()]);
    let gi = inverse(&g).map_err(|_| Error::Structural("subspace is not a graph over lam0 + own part".into()))?;
    let norm = coords * gi;
    let cv = norm.rows(k, kv).into_owned();
    let co = norm.rows(k + kv + m, mo).into_owned();
    // columns belonging to the own part must carry no V or other component
    let stray = if m > 0 { max_abs(&cv.columns(k, m).into_owned()).max(max_abs(&co.columns(k, m).into_owned())) } else { 0.0 };
    Ok((cv.columns(0, k).into_owned(), co.columns(0, k).into_owned(), stray))
}

pub fn graph_coefficients(
    f: &SymplecticForm,
    dec: &IntrinsicDecomposition,
    lam: &Frame,
    mu: &Frame,
) -> Result<GraphCoefficients> {
    check_dim(f.dim(), lam.ambient_dim())?;
    let (l0, v, l1, m1) = (dec.lam0.matrix(), dec.v.matrix(), dec.lam1.matrix(), dec.mu1.matrix());
    let (a1, a2, s1) = graph_over(l0, v, l1, m1, lam.matrix())?;
    let (b1, b2, s2) = graph_over(l0, v, m1, l1, mu.matrix())?;
    // round-off in the coordinates grows with the conditioning of the basis
    let sigma = smallest_singular_value(&hstack(&[l0, v, l1, m1])).max(1e-300);
    let tol = |base: f64| base.max(1e-13 / (sigma * sigma));
    if s1.max(s2) > tol(1e-8) {
        return Err(Error::Structural(format!("lam1/mu1 not contained in lam/mu (residual {:.2e})", s1.max(s2))));
    }
    let coeffs = GraphCoefficients { a1, a2, b1, b2 };
    let (rl, rm) = reassembly_residual(dec, &coeffs, lam, mu)?;
    if rl.max(rm) > tol(1e-9) {
        return Err(Error::Structural(format!("graph reassembly residual {:.2e}", rl.max(rm))));
    }
    Ok(coeffs)
}

/// Gap between lam, mu and their reassembly from the coefficients.
pub fn reassembly_residual(
    dec: &IntrinsicDecomposition,
    g: &GraphCoefficients,
    lam: &Frame,
    mu: &Frame,
) -> Result<(f64, f64)> {
    let (l0, v, l1, m1) = (dec.lam0.matrix(), dec.v.matrix(), dec.lam1.matrix(), dec.mu1.matrix());
    let lam_cols = l0 + v * &g.a1 + m1 * &g.a2;
    let mu_cols = l0 + v * &g.b1 + l1 * &g.b2;
    let lam_r = Frame::span(&hstack(&[&lam_cols, l1]));
    let mu_r = Frame::span(&hstack(&[&mu_cols, m1]));
    Ok((gap_hat(&lam_r, lam)?, gap_hat(&mu_r, mu)?))
}

/// The reduced pair (P0 lam, P0 mu) in coordinates of the orthonormal frame
/// `dec.x0`, with the induced form omega_l.
#[derive(Debug, Clone)]
pub struct ReducedPair {
    pub form: SymplecticForm,
    pub lam: Frame,
    pub mu: Frame,
    /// omega_l by the lift x0 + v + A2 x0, by the subtraction formula, and
    /// omega_r by the lift x0 + v + B2 x0
    pub omega_l: CMat,
    pub omega_l_subtracted: CMat,
    pub omega_r: CMat,
}

pub fn reduced_pair(f: &SymplecticForm, dec: &IntrinsicDecomposition, lam: &Frame, mu: &Frame) -> Result<ReducedPair> {
    let k = dec.k();
    let f0 = dec.x0.matrix();
    if k == 0 {
        let empty = SymplecticForm::new(CMat::zeros(0, 0))?;
        return Ok(ReducedPair {
            form: empty,
            lam: Frame::empty(0),
            mu: Frame::empty(0),
            omega_l: CMat::zeros(0, 0),
            omega_l_subtracted: CMat::zeros(0, 0),
            omega_r: CMat::zeros(0, 0),
        });
    }
    let g = graph_coefficients(f, dec, lam, mu)?;
    let basis = hstack(&[dec.lam0.matrix(), dec.v.matrix()]);
    // coordinates of the x0 frame in the basis [lam0 | V]
    let e = inverse(&(basis.adjoint() * &basis))? * basis.adjoint() * f0;
    let c0 = e.rows(0, k).into_owned();
    let j = f.matrix();

    let lift_l = f0 + dec.mu1.matrix() * &g.a2 * &c0;
    let lift_r = f0 + dec.lam1.matrix() * &g.b2 * &c0;
    let graph_a1 = (dec.lam0.matrix() + dec.v.matrix() * &g.a1) * &c0;
    let omega_l = lift_l.adjoint() * j * &lift_l;
    let omega_r = lift_r.adjoint() * j * &lift_r;
    let omega_l_subtracted = f0.adjoint() * j * f0 - graph_a1.adjoint() * j * &graph_a1;

    let size = [&lift_l, &lift_r, &graph_a1, f0].iter().map(|m| spectral_norm(m).powi(2)).fold(1.0, f64::max);
    let scale = spectral_norm(j) * size;
    let dev = max_abs(&(&omega_l - &omega_r)).max(max_abs(&(&omega_l - &omega_l_subtracted)));
    if dev > 1e-9 * scale {
        return Err(Error::Structural(format!("omega_l and omega_r differ by {dev:.2e}")));
    }
    let form = SymplecticForm::new((&omega_l - omega_l.adjoint()) * c(0.5, 0.0))?;
    let p = dec.p0.matrix();
    let lam_red = orthonormalize(&(f0.adjoint() * p * lam.matrix()), crate::linalg::DEFAULT_RANK_TOL);
    let mu_red = orthonormalize(&(f0.adjoint() * p * mu.matrix()), crate::linalg::DEFAULT_RANK_TOL);
    if lam_red.dim() != k || mu_red.dim() != k {
        return Err(Error::Structural("projected pair has the wrong dimension".into()));
    }
    Ok(ReducedPair { form, lam: lam_red, mu: mu_red, omega_l, omega_l_subtracted, omega_r })
}

/// Transitivity of reduction for W1 inside W2, both co-isotropic.
pub fn check_transitivity(f: &SymplecticForm, w1: &Frame, w2: &Frame, lam: &Frame, rank_tol: f64) -> Result<bool> {
    if intersect(w1, w2, rank_tol)?.dim() != w1.dim() {
        return Err(Error::Invalid("W1 is not contained in W2".into()));
    }
    let outer = reduce_space(f, w2, rank_tol)?;
    let r2 = outer.representative.matrix();
    let w1_in_y = orthonormalize(&(r2.adjoint() * w1.matrix()), rank_tol);
    let inner = reduce_space(&outer.induced_form, &w1_in_y, rank_tol)?;
    let lam_y = reduce_subspace(f, w2, lam, rank_tol)?;
    let lhs = reduce_subspace(&outer.induced_form, &w1_in_y, &lam_y, rank_tol)?;

    let direct = reduce_space(f, w1, rank_tol)?;
    let rhs = reduce_subspace(f, w1, lam, rank_tol)?;
    let k = inner.representative.matrix().adjoint() * r2.adjoint() * direct.representative.matrix();
    // K must carry one induced form onto the other
    let sympl = max_abs(&(k.adjoint() * inner.induced_form.matrix() * &k - direct.induced_form.matrix()));
    if sympl > 1e-8 * max_abs(f.matrix()).max(1.0) {
        return Ok(false);
    }
    let mapped = orthonormalize(&(&k * rhs.matrix()), rank_tol);
    Ok(mapped.dim() == lhs.dim() && gap_hat(&mapped, &lhs)? < 1e-6)
}

/// Block coefficients of lam over alpha0 + alpha1 into V + beta1 and of mu over
/// alpha0 + beta1 into V + alpha1, together with both evaluations of A1 f and
/// A2 f (direct extraction and the composite formulas).
#[derive(Debug, Clone)]
pub struct CompositeCheck {
    pub a1f_direct: CMat,
    pub a1f_formula: CMat,
    pub a2f_direct: CMat,
    pub a2f_formula: CMat,
}

pub fn composite_coefficients(
    f: &SymplecticForm,
    alpha0: &Frame,
    v: &Frame,
    alpha1: &Frame,
    beta1: &Frame,
    lam: &Frame,
    mu: &Frame,
    rank_tol: f64,
) -> Result<CompositeCheck> {
    let (a0, vv, a1m, b1m) = (alpha0.matrix(), v.matrix(), alpha1.matrix(), beta1.matrix());
    let (k, m) = (a0.ncols(), a1m.ncols());
    let basis = hstack(&[a0, vv, a1m, b1m]);
    let binv = inverse(&basis).map_err(|_| Error::Invalid("alpha0 + V + alpha1 + beta1 is not direct".into()))?;

    let normalize = |coords: CMat, rows: [usize; 2]| -> Result<CMat> {
        let g = vstack(&[&coords.rows(rows[0], k).into_owned(), &coords.rows(rows[1], m).into_owned()]);
        Ok(coords * inverse(&g)?)
    };
    // row offsets in the basis: alpha0 at 0, V at k, alpha1 at 2k, beta1 at 2k + m
    let cl = normalize(&binv * lam.matrix(), [0, 2 * k])?;
    let cm = normalize(&binv * mu.matrix(), [0, 2 * k + m])?;
    let a11 = cl.view((k, 0), (k, k)).into_owned();
    let a12 = cl.view((k, k), (k, m)).into_owned();
    let a21 = cl.view((2 * k + m, 0), (m, k)).into_owned();
    let a22 = cl.view((2 * k + m, k), (m, m)).into_owned();
    let b11 = cm.view((k, 0), (k, k)).into_owned();
    let b12 = cm.view((k, k), (k, m)).into_owned();
    let b21 = cm.view((2 * k, 0), (m, k)).into_owned();
    let b22 = cm.view((2 * k, k), (m, m)).into_owned();

    let im = CMat::identity(m, m);
    let core = &im - &a22 * &b22;
    let core_inv = inverse(&core).map_err(|_| Error::NotApplicable("I - A22 B22 is singular".into()))?;
    let w = &core_inv * (&a21 + &a22 * &b21);
    let a1f_formula = &a11 - &b11 + &a12 * &b21 - (&b12 - &a12 * &b22) * &w;
    let g = vv * &b12 + a1m * &b22 + b1m;
    let a2f_formula = g * &w;

    // direct route: lam0 = f(alpha0) with its non-orthonormal basis
    let fvec = a0 + vv * &b11 + a1m * &b21;
    let lam0 = orthonormalize(&fvec, rank_tol);
    let dec = IntrinsicDecomposition::from_parts(f, lam, mu, &lam0, v, rank_tol, 1e-10)?;
    let (a1_direct, a2_direct, _) = graph_over(&fvec, vv, dec.lam1.matrix(), dec.mu1.matrix(), lam.matrix())?;
    Ok(CompositeCheck {
        a1f_direct: a1_direct,
        a1f_formula,
        a2f_direct: dec.mu1.matrix() * a2_direct,
        a2f_formula,
    })
}
