//! Linear relations, the Cayley transform, and spectral flow of Hermitian and
//! self-adjoint relation paths.

use std::f64::consts::PI;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, default_zero_tol, fredholm_pair_index, hermitian_eig, hstack, intersect, inverse, null_space, orthonormalize,
    vstack, CMat, Frame, HermitianMatrix, C64, DEFAULT_RANK_TOL,
};
use crate::maslov::{maslov_winding, LagrangianPairPath, MaslovOptions, MaslovResult, PairSample};
use crate::symplectic::{annihilator, SymplecticForm};

#[derive(Debug, Clone)]
pub struct LinearRelation {
    x_dim: usize,
    y_dim: usize,
    subspace: Frame,
}

#[derive(Debug, Clone)]
pub struct RelationParts {
    pub domain: Frame,
    pub range: Frame,
    pub kernel: Frame,
    pub indeterminate: Frame,
}

impl LinearRelation {
    pub fn new(x_dim: usize, y_dim: usize, subspace: Frame) -> Result<LinearRelation> {
        check_dim(x_dim + y_dim, subspace.ambient_dim())?;
        Ok(LinearRelation { x_dim, y_dim, subspace })
    }

    pub fn graph(m: &CMat) -> LinearRelation {
        let (y, x) = m.shape();
        let sub = orthonormalize(&vstack(&[&CMat::identity(x, x), m]), DEFAULT_RANK_TOL);
        LinearRelation { x_dim: x, y_dim: y, subspace: sub }
    }

    /// X x {0}
    pub fn zero_target(x_dim: usize, y_dim: usize) -> LinearRelation {
        LinearRelation { x_dim, y_dim, subspace: Frame::coordinate(x_dim + y_dim, &(0..x_dim).collect::<Vec<_>>()) }
    }

    /// {0} x Y
    pub fn zero_source(x_dim: usize, y_dim: usize) -> LinearRelation {
        let idx: Vec<usize> = (x_dim..x_dim + y_dim).collect();
        LinearRelation { x_dim, y_dim, subspace: Frame::coordinate(x_dim + y_dim, &idx) }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.x_dim, self.y_dim)
    }

    pub fn subspace(&self) -> &Frame {
        &self.subspace
    }

    fn x_rows(&self) -> CMat {
        self.subspace.matrix().rows(0, self.x_dim).into_owned()
    }

    fn y_rows(&self) -> CMat {
        self.subspace.matrix().rows(self.x_dim, self.y_dim).into_owned()
    }

    pub fn parts(&self, rank_tol: f64) -> Result<RelationParts> {
        let zero_t = Self::zero_target(self.x_dim, self.y_dim).subspace;
        let zero_s = Self::zero_source(self.x_dim, self.y_dim).subspace;
        let ker = intersect(&self.subspace, &zero_t, rank_tol)?;
        let ind = intersect(&self.subspace, &zero_s, rank_tol)?;
        Ok(RelationParts {
            domain: orthonormalize(&self.x_rows(), rank_tol),
            range: orthonormalize(&self.y_rows(), rank_tol),
            kernel: orthonormalize(&ker.matrix().rows(0, self.x_dim).into_owned(), rank_tol),
            indeterminate: orthonormalize(&ind.matrix().rows(self.x_dim, self.y_dim).into_owned(), rank_tol),
        })
    }

    pub fn is_operator(&self, rank_tol: f64) -> Result<bool> {
        Ok(self.parts(rank_tol)?.indeterminate.is_empty())
    }

    pub fn inverse(&self) -> LinearRelation {
        let m = vstack(&[&self.y_rows(), &self.x_rows()]);
        LinearRelation { x_dim: self.y_dim, y_dim: self.x_dim, subspace: orthonormalize(&m, DEFAULT_RANK_TOL) }
    }

    /// {(x, y + z) : (x, y) in A, (x, z) in B}
    pub fn sum(&self, other: &LinearRelation, rank_tol: f64) -> Result<LinearRelation> {
        if self.dims() != other.dims() {
            return Err(Error::Invalid("relation sum needs equal spaces".into()));
        }
        let (ax, ay, bx, by) = (self.x_rows(), self.y_rows(), other.x_rows(), other.y_rows());
        let fiber = null_space(&hstack(&[&ax, &(-&bx)]), rank_tol);
        let k = ax.ncols();
        let a = fiber.matrix().rows(0, k).into_owned();
        let b = fiber.matrix().rows(k, bx.ncols()).into_owned();
        let m = vstack(&[&(&ax * &a), &(&ay * &a + &by * &b)]);
        LinearRelation::new(self.x_dim, self.y_dim, orthonormalize(&m, rank_tol))
    }

    /// C . A = {(x, z) : (x, y) in A, (y, z) in C}
    pub fn compose(&self, after: &LinearRelation, rank_tol: f64) -> Result<LinearRelation> {
        check_dim(self.y_dim, after.x_dim)?;
        let (ax, ay, cx, cy) = (self.x_rows(), self.y_rows(), after.x_rows(), after.y_rows());
        let fiber = null_space(&hstack(&[&ay, &(-&cx)]), rank_tol);
        let k = ax.ncols();
        let a = fiber.matrix().rows(0, k).into_owned();
        let b = fiber.matrix().rows(k, cx.ncols()).into_owned();
        let m = vstack(&[&(&ax * &a), &(&cy * &b)]);
        LinearRelation::new(self.x_dim, after.y_dim, orthonormalize(&m, rank_tol))
    }

    /// dim ker - dim Y/ran, cross-checked against Index(A, X x {0}).
    pub fn index(&self, rank_tol: f64) -> Result<i64> {
        let parts = self.parts(rank_tol)?;
        let direct = parts.kernel.dim() as i64 - (self.y_dim as i64 - parts.range.dim() as i64);
        let zero_t = Self::zero_target(self.x_dim, self.y_dim).subspace;
        let pair = fredholm_pair_index(&self.subspace, &zero_t, rank_tol)?.index;
        if direct != pair {
            return Err(Error::Invariant {
                identity: "relation index".into(),
                detail: format!("kernel/cokernel count {direct}, pair index {pair}"),
            });
        }
        Ok(direct)
    }

    /// Annihilator in the form induced on X x Y by Omega(x, y) = (tau y)^H x.
    pub fn adjoint(&self, tau: &CMat) -> Result<LinearRelation> {
        if self.x_dim != self.y_dim {
            return Err(Error::Invalid("adjoint is implemented for X = Y".into()));
        }
        let f = canonical_form(tau)?;
        Ok(LinearRelation { x_dim: self.x_dim, y_dim: self.y_dim, subspace: annihilator(&f, &self.subspace) })
    }
}

/// omega((x1, y1), (x2, y2)) = Omega(x1, y2) - conj(Omega(x2, y1)).
pub fn canonical_form(tau: &CMat) -> Result<SymplecticForm> {
    let n = tau.nrows();
    check_dim(n, tau.ncols())?;
    let mut j = CMat::zeros(2 * n, 2 * n);
    j.view_mut((0, n), (n, n)).copy_from(&(-tau));
    j.view_mut((n, 0), (n, n)).copy_from(&tau.adjoint());
    SymplecticForm::new(j)
}

pub fn canonical_standard(n: usize) -> SymplecticForm {
    canonical_form(&CMat::identity(n, n)).expect("identity is invertible")
}

pub fn cayley(a: &HermitianMatrix) -> Result<CMat> {
    let n = a.dim();
    let i = CMat::identity(n, n) * c(0.0, 1.0);
    Ok((a.matrix() - &i) * inverse(&(a.matrix() + &i))?)
}

pub fn cayley_scalar(x: f64) -> C64 {
    (c(x, -1.0)) / (c(x, 1.0))
}

#[derive(Debug, Clone)]
pub struct HermitianPath {
    samples: Vec<(f64, HermitianMatrix)>,
}

impl HermitianPath {
    pub fn new(samples: Vec<(f64, HermitianMatrix)>) -> Result<HermitianPath> {
        if samples.len() < 2 || samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
            return Err(Error::Invalid("a path needs samples from s = 0 to s = 1".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Invalid("sample parameters must be strictly increasing".into()));
        }
        let n = samples[0].1.dim();
        for (_, a) in &samples {
            check_dim(n, a.dim())?;
        }
        Ok(HermitianPath { samples })
    }

    pub fn from_fn<F>(f: F, n: usize) -> Result<HermitianPath>
    where
        F: Fn(f64) -> Result<HermitianMatrix>,
    {
        let n = n.max(1);
        let samples = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                f(s).map(|a| (s, a))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(f64, HermitianMatrix)] {
        &self.samples
    }

    pub fn dim(&self) -> usize {
        self.samples[0].1.dim()
    }

    /// Pair path (Graph A(s), X x {0}) in the canonical form.
    pub fn graph_pair_path(&self) -> Result<LagrangianPairPath> {
        let n = self.dim();
        let form = canonical_standard(n);
        let base = LinearRelation::zero_target(n, n).subspace;
        let samples = self
            .samples
            .iter()
            .map(|(s, a)| (*s, PairSample::new(form.clone(), LinearRelation::graph(a.matrix()).subspace, base.clone())))
            .collect();
        LagrangianPairPath::from_samples(samples)
    }
}

#[derive(Debug, Clone, Default)]
pub struct EigenCurves {
    pub s: Vec<f64>,
    /// values[i][j]: j-th smallest eigenvalue at s[i]
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SpectralFlow {
    pub sf: i64,
    pub curves: EigenCurves,
}

fn floor_turns(a: f64) -> i64 {
    // theta = 2 arctan(a) lies in (-pi, pi), so the turn count is -1 or 0
    (2.0 * a.atan() / (2.0 * PI)).floor() as i64
}

/// Net count of eigenvalues crossing zero, with the same floor bookkeeping as
/// Mas_- applied to theta_j = 2 arctan(a_j) of the sorted spectrum.
/// An eigenvalue within `zero_tol` of zero is read as zero.
pub fn sf_eigen(path: &HermitianPath, zero_tol: Option<f64>) -> SpectralFlow {
    let mut curves = EigenCurves::default();
    for (s, a) in path.samples() {
        let (vals, _) = hermitian_eig(a);
        let tol = zero_tol.unwrap_or_else(|| default_zero_tol(a.matrix()));
        curves.s.push(*s);
        curves.values.push(vals.into_iter().map(|v| if v.abs() < tol { 0.0 } else { v }).collect());
    }
    let first = &curves.values[0];
    let last = &curves.values[curves.values.len() - 1];
    let sf = first.iter().zip(last).map(|(a0, a1)| floor_turns(*a1) - floor_turns(*a0)).sum();
    SpectralFlow { sf, curves }
}

#[derive(Debug, Clone)]
pub struct RelationSample {
    pub s: f64,
    pub form: SymplecticForm,
    pub relation: LinearRelation,
}

/// SF{A(s)} = Mas_-{A(s), X x {0}; omega(s)} by the winding method.
pub fn sf_relation(path: &[RelationSample], opts: &MaslovOptions) -> Result<MaslovResult> {
    let samples = path
        .iter()
        .map(|r| {
            let (x, y) = r.relation.dims();
            (r.s, PairSample::new(r.form.clone(), r.relation.subspace.clone(), LinearRelation::zero_target(x, y).subspace))
        })
        .collect();
    maslov_winding(&LagrangianPairPath::from_samples(samples)?, opts)
}

pub fn sf_relation_fn<F>(f: F, n: usize, opts: &MaslovOptions) -> Result<MaslovResult>
where
    F: Fn(f64) -> Result<(SymplecticForm, LinearRelation)> + Send + Sync + 'static,
{
    let path = LagrangianPairPath::from_fn(
        move |s| {
            let (form, rel) = f(s)?;
            let (x, y) = rel.dims();
            Ok(PairSample::new(form, rel.subspace, LinearRelation::zero_target(x, y).subspace))
        },
        n,
    )?;
    maslov_winding(&path, opts)
}

pub fn relation_direct_sum(a: &LinearRelation, b: &LinearRelation) -> LinearRelation {
    // reorder (xa, ya, xb, yb) into (xa, xb, ya, yb)
    let (ax, ay, bx, by) = (a.x_rows(), a.y_rows(), b.x_rows(), b.y_rows());
    let (ka, kb) = (ax.ncols(), bx.ncols());
    let mut m = CMat::zeros(a.x_dim + b.x_dim + a.y_dim + b.y_dim, ka + kb);
    m.view_mut((0, 0), (a.x_dim, ka)).copy_from(&ax);
    m.view_mut((a.x_dim, ka), (b.x_dim, kb)).copy_from(&bx);
    let y0 = a.x_dim + b.x_dim;
    m.view_mut((y0, 0), (a.y_dim, ka)).copy_from(&ay);
    m.view_mut((y0 + a.y_dim, ka), (b.y_dim, kb)).copy_from(&by);
    LinearRelation { x_dim: a.x_dim + b.x_dim, y_dim: a.y_dim + b.y_dim, subspace: orthonormalize(&m, DEFAULT_RANK_TOL) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_of_zero_and_identity() {
        let z = cayley(&HermitianMatrix::new(CMat::zeros(2, 2)).unwrap()).unwrap();
        assert!((z - CMat::identity(2, 2) * c(-1.0, 0.0)).norm() < 1e-14);
        let i = cayley(&HermitianMatrix::new(CMat::identity(2, 2)).unwrap()).unwrap();
        assert!((i - CMat::identity(2, 2) * c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn scalar_flows() {
        let up = HermitianPath::from_fn(|s| Ok(HermitianMatrix::from_real_diagonal(&[s - 0.5])), 8).unwrap();
        let down = HermitianPath::from_fn(|s| Ok(HermitianMatrix::from_real_diagonal(&[0.5 - s])), 8).unwrap();
        let flat = HermitianPath::from_fn(|_| Ok(HermitianMatrix::from_real_diagonal(&[0.3, -2.0])), 8).unwrap();
        assert_eq!(sf_eigen(&up, None).sf, 1);
        assert_eq!(sf_eigen(&down, None).sf, -1);
        assert_eq!(sf_eigen(&flat, None).sf, 0);
    }
}
