//! Symplectic forms omega(x, y) = <Jx, y> = y^H J x on C^N, annihilators,
//! classification of subspaces, the X^+/X^- splitting and unitary generators.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, hermitian_eig, intersect, inverse, max_abs, orth_complement, orthonormalize,
    singular_values, CMat, CVec, Frame, HermitianMatrix, C64, DEFAULT_RANK_TOL,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    j: CMat,
}

impl SymplecticForm {
    pub fn new(j: CMat) -> Result<SymplecticForm> {
        if j.nrows() != j.ncols() {
            return Err(Error::Invalid(format!("form matrix must be square, got {}x{}", j.nrows(), j.ncols())));
        }
        if j.nrows() == 0 {
            return Ok(SymplecticForm { j });
        }
        let scale = max_abs(&j).max(1.0);
        let skew = max_abs(&(&j + j.adjoint()));
        if skew > 1e-12 * scale {
            return Err(Error::Invalid(format!("form is not skew-Hermitian (residual {skew:.2e})")));
        }
        let sv = singular_values(&j);
        if sv[sv.len() - 1] <= 1e-10 * sv[0] {
            return Err(Error::Degenerate(format!(
                "smallest singular value {:.2e} vs largest {:.2e}",
                sv[sv.len() - 1],
                sv[0]
            )));
        }
        let j = (&j - j.adjoint()) * c(0.5, 0.0);
        Ok(SymplecticForm { j })
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.j
    }

    pub fn negated(&self) -> SymplecticForm {
        SymplecticForm { j: -&self.j }
    }

    pub fn direct_sum(&self, other: &SymplecticForm) -> SymplecticForm {
        SymplecticForm { j: crate::linalg::block_diag(&self.j, &other.j) }
    }

    /// The form J' with L^H J' L = J, i.e. the push-forward under L.
    pub fn push_forward(&self, l: &CMat) -> Result<SymplecticForm> {
        let linv = inverse(l)?;
        SymplecticForm::new(linv.adjoint() * &self.j * linv)
    }

    /// Gram matrix of omega between frames: entry (i, j) = omega(x_j, y_i).
    pub fn gram(&self, x: &CMat, y: &CMat) -> CMat {
        y.adjoint() * &self.j * x
    }

    /// Max deviation from isotropy, relative to |J|.
    pub fn isotropy_residual(&self, lam: &Frame) -> f64 {
        if lam.is_empty() {
            return 0.0;
        }
        max_abs(&self.gram(lam.matrix(), lam.matrix())) / max_abs(&self.j).max(f64::MIN_POSITIVE)
    }
}

pub fn standard_form(n: usize) -> SymplecticForm {
    let mut j = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = c(-1.0, 0.0);
        j[(n + i, i)] = c(1.0, 0.0);
    }
    SymplecticForm { j }
}

pub fn omega_eval(f: &SymplecticForm, x: &CVec, y: &CVec) -> C64 {
    (y.adjoint() * f.matrix() * x)[(0, 0)]
}

pub fn annihilator(f: &SymplecticForm, lam: &Frame) -> Frame {
    if lam.is_empty() {
        return Frame::full(f.dim());
    }
    orth_complement(&orthonormalize(&(f.matrix() * lam.matrix()), DEFAULT_RANK_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceClass {
    Symplectic,
    Isotropic,
    Coisotropic,
    Lagrangian,
    Generic,
}

impl SubspaceClass {
    pub fn name(self) -> &'static str {
        match self {
            SubspaceClass::Symplectic => "symplectic",
            SubspaceClass::Isotropic => "isotropic",
            SubspaceClass::Coisotropic => "coisotropic",
            SubspaceClass::Lagrangian => "lagrangian",
            SubspaceClass::Generic => "generic",
        }
    }
}

pub fn classify(f: &SymplecticForm, lam: &Frame, rank_tol: f64) -> Result<SubspaceClass> {
    check_dim(f.dim(), lam.ambient_dim())?;
    let ann = annihilator(f, lam);
    let common = intersect(lam, &ann, rank_tol)?.dim();
    let isotropic = common == lam.dim();
    let coisotropic = common == ann.dim();
    Ok(match (isotropic, coisotropic) {
        (true, true) => SubspaceClass::Lagrangian,
        (true, false) => SubspaceClass::Isotropic,
        (false, true) => SubspaceClass::Coisotropic,
        _ if common == 0 => SubspaceClass::Symplectic,
        _ => SubspaceClass::Generic,
    })
}

pub fn is_coisotropic(f: &SymplecticForm, w: &Frame, rank_tol: f64) -> Result<bool> {
    Ok(matches!(classify(f, w, rank_tol)?, SubspaceClass::Coisotropic | SubspaceClass::Lagrangian))
}

pub fn require_lagrangian(f: &SymplecticForm, lam: &Frame, rank_tol: f64) -> Result<()> {
    match classify(f, lam, rank_tol)? {
        SubspaceClass::Lagrangian => Ok(()),
        other => Err(Error::Classification { expected: "lagrangian", found: other.name() }),
    }
}

/// Eigenspaces of -iJ. `plus_metric[j]` is -i omega(x, x) for the j-th column
/// of `x_plus`; `minus_metric[j]` is i omega(x, x) on `x_minus`. Both positive.
#[derive(Debug, Clone)]
pub struct SymplecticSplitting {
    pub x_plus: Frame,
    pub x_minus: Frame,
    pub plus_metric: Vec<f64>,
    pub minus_metric: Vec<f64>,
}

impl SymplecticSplitting {
    /// Bases orthonormal in the induced metrics.
    pub fn plus_basis(&self) -> CMat {
        scale_columns(self.x_plus.matrix(), &self.plus_metric, -0.5)
    }

    pub fn minus_basis(&self) -> CMat {
        scale_columns(self.x_minus.matrix(), &self.minus_metric, -0.5)
    }
}

fn scale_columns(m: &CMat, w: &[f64], power: f64) -> CMat {
    let mut out = m.clone();
    for (j, &x) in w.iter().enumerate() {
        let s = x.powf(power);
        out.column_mut(j).scale_mut(s);
    }
    out
}

pub fn splitting(f: &SymplecticForm) -> Result<SymplecticSplitting> {
    let n = f.dim();
    let h = HermitianMatrix::new(f.matrix() * c(0.0, -1.0))?;
    let (vals, vecs) = hermitian_eig(&h);
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let zero_tol = 1e-10 * top.max(f64::MIN_POSITIVE);
    if vals.iter().any(|v| v.abs() <= zero_tol) {
        return Err(Error::Degenerate("-iJ has an eigenvalue at zero".into()));
    }
    let minus: Vec<usize> = (0..n).filter(|&i| vals[i] < 0.0).collect();
    let plus: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.0).collect();
    let pick = |idx: &[usize]| {
        let mut m = CMat::zeros(n, idx.len());
        for (out, &i) in idx.iter().enumerate() {
            m.set_column(out, &vecs.column(i));
        }
        m
    };
    Ok(SymplecticSplitting {
        x_plus: Frame::from_orthonormal(pick(&plus))?,
        x_minus: Frame::from_orthonormal(pick(&minus))?,
        plus_metric: plus.iter().map(|&i| vals[i]).collect(),
        minus_metric: minus.iter().map(|&i| -vals[i]).collect(),
    })
}

/// Returns (J', T) with J'^2 = -I and T^H J' T = J.
pub fn normalize_strong(f: &SymplecticForm) -> Result<(SymplecticForm, CMat)> {
    let n = f.dim();
    let h = HermitianMatrix::new(f.matrix() * c(0.0, -1.0))?;
    let (vals, vecs) = hermitian_eig(&h);
    if vals.contains(&0.0) {
        return Err(Error::Degenerate("-iJ has an eigenvalue at zero".into()));
    }
    let phase = CVec::from_iterator(n, vals.iter().map(|&v| c(0.0, v.signum())));
    let root = CVec::from_iterator(n, vals.iter().map(|&v| c(v.abs().sqrt(), 0.0)));
    let jp = &vecs * CMat::from_diagonal(&phase) * vecs.adjoint();
    let t = &vecs * CMat::from_diagonal(&root) * vecs.adjoint();
    Ok((SymplecticForm::new(jp)?, t))
}

/// lam = Graph(U) for U : X^- -> X^+, expressed in the induced-orthonormal
/// bases of the splitting.
#[derive(Debug, Clone)]
pub struct Generator {
    pub u: CMat,
    pub split: SymplecticSplitting,
}

pub fn generator_in(split: &SymplecticSplitting, lam: &Frame) -> Result<CMat> {
    let (p, m) = (split.x_plus.dim(), split.x_minus.dim());
    if p != m {
        return Err(Error::NoGenerator { plus: p, minus: m });
    }
    check_dim(m, lam.dim())?;
    let mut alpha = split.x_minus.matrix().adjoint() * lam.matrix();
    let mut beta = split.x_plus.matrix().adjoint() * lam.matrix();
    for i in 0..m {
        alpha.row_mut(i).scale_mut(split.minus_metric[i].sqrt());
        beta.row_mut(i).scale_mut(split.plus_metric[i].sqrt());
    }
    let ainv = inverse(&alpha).map_err(|_| Error::Classification { expected: "lagrangian", found: "generic" })?;
    Ok(beta * ainv)
}

pub fn unitary_generator(f: &SymplecticForm, lam: &Frame, rank_tol: f64) -> Result<Generator> {
    let split = splitting(f)?;
    if split.x_plus.dim() != split.x_minus.dim() {
        return Err(Error::NoGenerator { plus: split.x_plus.dim(), minus: split.x_minus.dim() });
    }
    require_lagrangian(f, lam, rank_tol)?;
    let u = generator_in(&split, lam)?;
    let k = u.nrows();
    let err = max_abs(&(u.adjoint() * &u - CMat::identity(k, k)));
    if err > 1e-8 {
        return Err(Error::Structural(format!("generator not unitary (residual {err:.2e})")));
    }
    Ok(Generator { u, split })
}

/// {v + Uv : v in X^-} for U unitary in the induced metrics.
pub fn graph_of_unitary(split: &SymplecticSplitting, u: &CMat) -> Result<Frame> {
    check_dim(split.x_minus.dim(), u.ncols())?;
    check_dim(split.x_plus.dim(), u.nrows())?;
    let m = split.minus_basis() + split.plus_basis() * u;
    Ok(orthonormalize(&m, DEFAULT_RANK_TOL))
}

/// {(x, Ax)} for Hermitian A, Lagrangian for J_{2n}.
pub fn hermitian_graph(a: &CMat) -> Frame {
    let n = a.nrows();
    orthonormalize(&crate::linalg::vstack(&[&CMat::identity(n, n), a]), DEFAULT_RANK_TOL)
}

/// Columns spanning lam1 + lam2 as a direct sum in the doubled space.
pub fn frame_direct_sum(a: &Frame, b: &Frame) -> Frame {
    Frame::from_orthonormal(crate::linalg::block_diag(a.matrix(), b.matrix())).expect("block diagonal of frames")
}

/// The diagonal {(x, x)} in C^N x C^N.
pub fn diagonal(n: usize) -> Frame {
    let i = CMat::identity(n, n);
    orthonormalize(&crate::linalg::vstack(&[&i, &i]), DEFAULT_RANK_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_splitting_n1() {
        let s = splitting(&standard_form(1)).unwrap();
        let v = s.x_plus.matrix().column(0).into_owned();
        // (1, -i)/sqrt2 up to phase
        let target = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0)]) / c(2f64.sqrt(), 0.0);
        assert!((v.dotc(&target).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_form_normalizes_to_standard() {
        let f = SymplecticForm::new(standard_form(2).matrix() * c(2.0, 0.0)).unwrap();
        let (jp, t) = normalize_strong(&f).unwrap();
        assert!(max_abs(&(jp.matrix() - standard_form(2).matrix())) < 1e-12);
        assert!(max_abs(&(t.adjoint() * jp.matrix() * &t - f.matrix())) < 1e-12);
    }
}
