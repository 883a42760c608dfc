//! Dense complex linear algebra over orthonormal frames, and the gap calculus
//! of subspaces.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const DEFAULT_RANK_TOL: f64 = 1e-8;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn to_faer(m: &CMat) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn faer_thin_svd(m: &Mat<C64>) -> Option<(Mat<C64>, Vec<f64>)> {
    let svd = m.thin_svd().ok()?;
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    Some((svd.U().to_owned(), s))
}

/// Thin SVD: left singular vectors and singular values, largest first.
/// The faer solver occasionally stalls on tightly clustered spectra; the
/// retries go through a QR factor and then exact power-of-two rescalings.
fn thin_svd_faer(m: &Mat<C64>) -> (Mat<C64>, Vec<f64>) {
    if let Some(out) = faer_thin_svd(m) {
        return out;
    }
    if m.nrows() > m.ncols() {
        let qr = m.qr();
        if let Some((u, s)) = faer_thin_svd(&qr.thin_R().to_owned()) {
            return (qr.compute_thin_Q() * u, s);
        }
    }
    if let Some(((u, s), f)) = rescaled(m, faer_thin_svd) {
        return (u, s.into_iter().map(|x| x / f).collect());
    }
    panic!("SVD did not converge on a {}x{} matrix", m.nrows(), m.ncols())
}

/// Runs `solve` on m, then on m * 2^k for small k until it succeeds.
fn rescaled<T>(m: &Mat<C64>, solve: impl Fn(&Mat<C64>) -> Option<T>) -> Option<(T, f64)> {
    [0, -1, 1, -2, 2, -3, 3].into_iter().find_map(|k| {
        let f = 2f64.powi(k);
        solve(&Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * f)).map(|t| (t, f))
    })
}

fn thin_svd(m: &CMat) -> (CMat, Vec<f64>) {
    let (u, s) = thin_svd_faer(&to_faer(m));
    (from_faer(u.as_ref()), s)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv = thin_svd_faer(&to_faer(m)).1;
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Eigenvalues of a general square matrix, in no particular order.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let m = to_faer(m);
    rescaled(&m, |a| a.eigenvalues().ok().map(|v| v.into_iter().map(|z| c(z.re, z.im)).collect::<Vec<_>>()))
        .map(|(v, f)| v.into_iter().map(|z| z / f).collect())
        .expect("eigensolver did not converge")
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn smallest_singular_value(m: &CMat) -> f64 {
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Zero tolerance scaled to the operator: 1e-9 * max(1, |A|).
pub fn default_zero_tol(a: &CMat) -> f64 {
    1e-9 * spectral_norm(a).max(1.0)
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    if m.nrows() != m.ncols() {
        return Err(Error::Invalid(format!("cannot invert {}x{} matrix", m.nrows(), m.ncols())));
    }
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let sv = singular_values(m);
    if sv[sv.len() - 1] <= 1e-13 * sv[0].max(f64::MIN_POSITIVE) {
        return Err(Error::Invalid("matrix is numerically singular".into()));
    }
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Invalid("matrix is singular".into()))
}

pub fn hstack(blocks: &[&CMat]) -> CMat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, at), (rows, b.ncols())).copy_from(b);
        at += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[&CMat]) -> CMat {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((at, 0), (b.nrows(), cols)).copy_from(b);
        at += b.nrows();
    }
    out
}

pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let mut out = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Orthonormal basis of a subspace of C^N.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    ambient: usize,
    cols: CMat,
}

impl Frame {
    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(cols: CMat) -> Result<Frame> {
        let k = cols.ncols();
        let gram = cols.adjoint() * &cols;
        let err = max_abs(&(gram - CMat::identity(k, k)));
        if err > 1e-12 {
            return Err(Error::Invalid(format!("columns not orthonormal (residual {err:.2e})")));
        }
        Ok(Frame { ambient: cols.nrows(), cols })
    }

    pub fn empty(ambient: usize) -> Frame {
        Frame { ambient, cols: CMat::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Frame {
        Frame { ambient, cols: CMat::identity(ambient, ambient) }
    }

    /// span of the given standard basis vectors
    pub fn coordinate(ambient: usize, indices: &[usize]) -> Frame {
        let mut cols = CMat::zeros(ambient, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            cols[(i, j)] = c(1.0, 0.0);
        }
        Frame { ambient, cols }
    }

    pub fn span(m: &CMat) -> Frame {
        orthonormalize(m, DEFAULT_RANK_TOL)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.cols.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.ncols() == 0
    }

    pub fn matrix(&self) -> &CMat {
        &self.cols
    }

    pub fn projector(&self) -> CMat {
        &self.cols * self.cols.adjoint()
    }

    /// Image under an invertible map, re-orthonormalized.
    pub fn transform(&self, t: &CMat) -> Frame {
        orthonormalize(&(t * &self.cols), DEFAULT_RANK_TOL)
    }

    /// distance of v from the subspace, relative to |v|
    pub fn residual(&self, v: &CVec) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        (v - &self.cols * (self.cols.adjoint() * v)).norm() / nv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    matrix: CMat,
}

impl Projection {
    pub fn new(matrix: CMat) -> Result<Projection> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Invalid("projection must be square".into()));
        }
        let err = max_abs(&(&matrix * &matrix - &matrix));
        if err > 1e-10 * max_abs(&matrix).powi(2).max(1.0) {
            return Err(Error::Invalid(format!("not idempotent (residual {err:.2e})")));
        }
        Ok(Projection { matrix })
    }

    pub fn orthogonal(f: &Frame) -> Projection {
        Projection { matrix: f.projector() }
    }

    /// Projection onto ran along ker, for complementary subspaces.
    pub fn along(ran: &Frame, ker: &Frame) -> Result<Projection> {
        check_dim(ran.ambient_dim(), ker.ambient_dim())?;
        check_dim(ran.ambient_dim(), ran.dim() + ker.dim())?;
        let b = hstack(&[ran.matrix(), ker.matrix()]);
        let binv = inverse(&b).map_err(|_| Error::Invalid("subspaces are not complementary".into()))?;
        let k = ran.dim();
        let matrix = ran.matrix() * binv.rows(0, k);
        Projection::new(matrix)
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn range(&self, rank_tol: f64) -> Frame {
        orthonormalize(&self.matrix, rank_tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    matrix: CMat,
}

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<HermitianMatrix> {
        if m.nrows() != m.ncols() {
            return Err(Error::Invalid("Hermitian matrix must be square".into()));
        }
        let matrix = (&m + m.adjoint()) * c(0.5, 0.0);
        Ok(HermitianMatrix { matrix })
    }

    pub fn from_real_diagonal(d: &[f64]) -> HermitianMatrix {
        let v = CVec::from_iterator(d.len(), d.iter().map(|&x| c(x, 0.0)));
        HermitianMatrix { matrix: CMat::from_diagonal(&v) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }
}

pub fn orthonormalize(m: &CMat, rank_tol: f64) -> Frame {
    let n = m.nrows();
    if m.ncols() == 0 || n == 0 {
        return Frame::empty(n);
    }
    let (u, sv) = thin_svd(m);
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax <= f64::MIN_POSITIVE {
        return Frame::empty(n);
    }
    let mut keep: Vec<(f64, usize)> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rank_tol * smax)
        .map(|(j, &s)| (s, j))
        .collect();
    keep.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut cols = CMat::zeros(n, keep.len());
    for (out, &(_, j)) in keep.iter().enumerate() {
        cols.set_column(out, &u.column(j));
    }
    Frame { ambient: n, cols }
}

/// Principal vectors of a whose cosine with b exceeds 1 - rank_tol.
pub fn intersect(a: &Frame, b: &Frame, rank_tol: f64) -> Result<Frame> {
    check_dim(a.ambient, b.ambient)?;
    if a.is_empty() || b.is_empty() {
        return Ok(Frame::empty(a.ambient));
    }
    let m = a.matrix().adjoint() * b.matrix();
    let (u, sv) = thin_svd(&m);
    let common: Vec<usize> = sv
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1.0 - rank_tol)
        .map(|(j, _)| j)
        .collect();
    let mut coeff = CMat::zeros(a.dim(), common.len());
    for (out, &j) in common.iter().enumerate() {
        coeff.set_column(out, &u.column(j));
    }
    Ok(orthonormalize(&(a.matrix() * coeff), rank_tol))
}

pub fn subspace_sum(a: &Frame, b: &Frame, rank_tol: f64) -> Result<Frame> {
    check_dim(a.ambient, b.ambient)?;
    Ok(orthonormalize(&hstack(&[a.matrix(), b.matrix()]), rank_tol))
}

pub fn orth_complement(a: &Frame) -> Frame {
    let n = a.ambient;
    if a.is_empty() {
        return Frame::full(n);
    }
    if a.dim() == n {
        return Frame::empty(n);
    }
    // I - P has eigenvalues exactly 0 and 1, so a 1/2 cut is unambiguous
    let p = CMat::identity(n, n) - a.projector();
    let (vals, vecs) = hermitian_eig(&HermitianMatrix::new(p).expect("square"));
    let idx: Vec<usize> = (0..n).filter(|&j| vals[j] > 0.5).collect();
    let mut cols = CMat::zeros(n, idx.len());
    for (out, &j) in idx.iter().enumerate() {
        cols.set_column(out, &vecs.column(j));
    }
    orthonormalize(&cols, DEFAULT_RANK_TOL)
}

/// Basis of {x : m x = 0}.
pub fn null_space(m: &CMat, rank_tol: f64) -> Frame {
    let row_space = orthonormalize(&m.adjoint(), rank_tol);
    orth_complement(&row_space)
}

pub fn gap_delta(m: &Frame, n: &Frame) -> Result<f64> {
    check_dim(m.ambient, n.ambient)?;
    if m.is_empty() {
        return Ok(0.0);
    }
    if n.is_empty() {
        return Ok(1.0);
    }
    let r = m.matrix() - n.matrix() * (n.matrix().adjoint() * m.matrix());
    Ok(spectral_norm(&r).clamp(0.0, 1.0))
}

pub fn gap_hat(m: &Frame, n: &Frame) -> Result<f64> {
    Ok(gap_delta(m, n)?.max(gap_delta(n, m)?))
}

pub fn minimum_gap(m: &Frame, n: &Frame, rank_tol: f64) -> Result<f64> {
    let common = intersect(m, n, rank_tol)?;
    let rest = intersect(m, &orth_complement(&common), rank_tol)?;
    if rest.is_empty() {
        return Ok(1.0);
    }
    let r = rest.matrix() - n.matrix() * (n.matrix().adjoint() * rest.matrix());
    Ok(smallest_singular_value(&r).clamp(0.0, 1.0))
}

fn numerical_rank(m: &CMat, rank_tol: f64) -> usize {
    orthonormalize(m, rank_tol).dim()
}

/// Index of QP : ran P -> ran Q.
pub fn relative_index(p: &Projection, q: &Projection, rank_tol: f64) -> Result<i64> {
    check_dim(p.matrix.nrows(), q.matrix.nrows())?;
    let ran_p = p.range(rank_tol);
    let ran_q = q.range(rank_tol);
    let qp = q.matrix() * ran_p.matrix();
    let r = if ran_q.is_empty() {
        0
    } else {
        numerical_rank(&(ran_q.matrix().adjoint() * qp), rank_tol)
    };
    let kernel = ran_p.dim() as i64 - r as i64;
    let cokernel = ran_q.dim() as i64 - r as i64;
    Ok(kernel - cokernel)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub intersection_dim: usize,
    pub codim_sum: usize,
    pub index: i64,
}

pub fn fredholm_pair_index(m: &Frame, n: &Frame, rank_tol: f64) -> Result<PairIndex> {
    let i = intersect(m, n, rank_tol)?.dim();
    let s = subspace_sum(m, n, rank_tol)?.dim();
    let codim = m.ambient - s;
    Ok(PairIndex { intersection_dim: i, codim_sum: codim, index: i as i64 - codim as i64 })
}

/// Eigenvalues ascending with matching unitary eigenvector columns.
pub fn hermitian_eig(a: &HermitianMatrix) -> (Vec<f64>, CMat) {
    let n = a.dim();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let ((vals, vecs), f) = rescaled(&to_faer(a.matrix()), |m| {
        let eig = m.self_adjoint_eigen(Side::Lower).ok()?;
        Some((eig.S().column_vector().iter().map(|z| z.re).collect::<Vec<f64>>(), from_faer(eig.U())))
    })
    .expect("eigensolver did not converge");
    let vals: Vec<f64> = vals.into_iter().map(|x| x / f).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());
    let mut sorted = CMat::zeros(n, n);
    for (out, &i) in order.iter().enumerate() {
        sorted.set_column(out, &vecs.column(i));
    }
    (order.iter().map(|&i| vals[i]).collect(), sorted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MorseCounts {
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

pub fn morse_counts(q: &HermitianMatrix, zero_tol: f64) -> MorseCounts {
    let (vals, _) = hermitian_eig(q);
    let mut out = MorseCounts::default();
    for v in vals {
        if v > zero_tol {
            out.plus += 1;
        } else if v < -zero_tol {
            out.minus += 1;
        } else {
            out.zero += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_columns_give_a_line() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let f = orthonormalize(&m, 1e-10);
        assert_eq!(f.dim(), 1);
        assert!(f.residual(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)])) < 1e-14);
    }

    #[test]
    fn zero_matrix_is_empty() {
        assert!(orthonormalize(&CMat::zeros(3, 2), 1e-8).is_empty());
    }

    #[test]
    fn complement_of_line() {
        let e1 = Frame::coordinate(2, &[0]);
        let perp = orth_complement(&e1);
        assert_eq!(perp.dim(), 1);
        assert!(perp.residual(&CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)])) < 1e-14);
    }
}
