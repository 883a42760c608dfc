//! First-order self-adjoint systems J0 u' + C(s, t) u on [0, T]: boundary
//! Lagrangians, Cauchy data by monodromy, a Legendre-Galerkin realization, and
//! the spectral flow versus Maslov index comparisons.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, hermitian_eig, max_abs, null_space, orth_complement, orthonormalize, smallest_singular_value, vstack,
    CMat, Frame, HermitianMatrix, DEFAULT_RANK_TOL,
};
use crate::maslov::{intersection_dim, maslov_winding, LagrangianPairPath, MaslovOptions, MaslovResult, PairSample};
use crate::spectral_flow::{sf_eigen, HermitianPath, SpectralFlow};
use crate::symplectic::{diagonal, require_lagrangian, SymplecticForm};

pub type Coefficient = Arc<dyn Fn(f64, f64) -> CMat + Send + Sync>;

#[derive(Clone)]
pub struct HamiltonianFamily {
    j0: CMat,
    coefficient: Coefficient,
    length: f64,
}

impl std::fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianFamily").field("j0", &self.j0).field("length", &self.length).finish()
    }
}

impl HamiltonianFamily {
    pub fn new<F>(j0: CMat, coefficient: F, length: f64) -> Result<HamiltonianFamily>
    where
        F: Fn(f64, f64) -> CMat + Send + Sync + 'static,
    {
        let k = j0.nrows();
        check_dim(k, j0.ncols())?;
        if k == 0 || !(length > 0.0) {
            return Err(Error::Invalid("need a nonempty system on an interval of positive length".into()));
        }
        if max_abs(&(&j0 + j0.adjoint())) > 1e-12 * max_abs(&j0).max(1.0) {
            return Err(Error::Invalid("J0 must be skew-Hermitian".into()));
        }
        if smallest_singular_value(&j0) < 1e-10 {
            return Err(Error::Degenerate("J0 is singular".into()));
        }
        let probe = coefficient(0.0, 0.0);
        if probe.shape() != (k, k) || max_abs(&(&probe - probe.adjoint())) > 1e-12 * max_abs(&probe).max(1.0) {
            return Err(Error::Invalid("C(s, t) must be Hermitian of the size of J0".into()));
        }
        Ok(HamiltonianFamily { j0, coefficient: Arc::new(coefficient), length })
    }

    /// -i d/dt + s on [0, 1]
    pub fn scalar_shift() -> HamiltonianFamily {
        Self::new(CMat::from_element(1, 1, c(0.0, -1.0)), |s, _| CMat::from_element(1, 1, c(s, 0.0)), 1.0)
            .expect("valid family")
    }

    /// -i d/dt + s on C^k, k decoupled copies of the scalar family
    pub fn diagonal_shift(k: usize) -> HamiltonianFamily {
        Self::new(CMat::identity(k, k) * c(0.0, -1.0), move |s, _| CMat::identity(k, k) * c(s, 0.0), 1.0)
            .expect("valid family")
    }

    /// J d/dt + s with the real symplectic J on C^2
    pub fn planar_shift() -> HamiltonianFamily {
        Self::new(planar_j(), |s, _| CMat::identity(2, 2) * c(s, 0.0), 1.0).expect("valid family")
    }

    /// J d/dt + C(s, t) with a time-dependent coupling on C^2
    pub fn planar_modulated() -> HamiltonianFamily {
        Self::new(
            planar_j(),
            |s, t| {
                let w = 2.0 * std::f64::consts::PI * t;
                let off = c(0.3 * w.sin(), 0.2 * w.cos());
                CMat::from_row_slice(2, 2, &[c(s + 0.4 * w.cos(), 0.0), off, off.conj(), c(2.0 * s - 0.3, 0.0)])
            },
            1.0,
        )
        .expect("valid family")
    }

    pub fn constant(j0: CMat, c0: CMat, length: f64) -> Result<HamiltonianFamily> {
        Self::new(j0, move |_, _| c0.clone(), length)
    }

    pub fn k(&self) -> usize {
        self.j0.nrows()
    }

    pub fn j0(&self) -> &CMat {
        &self.j0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn coefficient(&self, s: f64, t: f64) -> CMat {
        (self.coefficient)(s, t)
    }
}

fn planar_j() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

/// Lagrangian subspace of the trace space of (u(0), u(T)).
#[derive(Debug, Clone)]
pub struct BoundaryCondition {
    lagrangian: Frame,
}

impl BoundaryCondition {
    pub fn new(fam: &HamiltonianFamily, lagrangian: Frame) -> Result<BoundaryCondition> {
        require_lagrangian(&green_form(fam), &lagrangian, DEFAULT_RANK_TOL)?;
        Ok(BoundaryCondition { lagrangian })
    }

    pub fn periodic(fam: &HamiltonianFamily) -> BoundaryCondition {
        BoundaryCondition { lagrangian: diagonal(fam.k()) }
    }

    /// u_1(0) = u_1(T) = 0 for a planar family
    pub fn dirichlet_first(fam: &HamiltonianFamily) -> Result<BoundaryCondition> {
        check_dim(2, fam.k())?;
        Self::new(fam, Frame::coordinate(4, &[1, 3]))
    }

    pub fn lagrangian(&self) -> &Frame {
        &self.lagrangian
    }
}

/// omega_G((x0, x1), (y0, y1)) = <J0 x1, y1> - <J0 x0, y0>
pub fn green_form(fam: &HamiltonianFamily) -> SymplecticForm {
    let k = fam.k();
    let mut j = CMat::zeros(2 * k, 2 * k);
    j.view_mut((0, 0), (k, k)).copy_from(&(-fam.j0()));
    j.view_mut((k, k), (k, k)).copy_from(fam.j0());
    SymplecticForm::new(j).expect("J0 is skew-Hermitian and invertible")
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of Y' = F(t) Y from t0 to t1 (either direction).
pub fn integrate_linear<F>(f: F, y0: &CMat, t0: f64, t1: f64, tol: f64) -> Result<CMat>
where
    F: Fn(f64) -> CMat,
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0.clone());
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.clone();
    let mut h = dir * span.abs().min(0.05);
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > 200_000 {
            return Err(Error::Integration(format!("step budget exhausted at t = {t}")));
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k: Vec<CMat> = Vec::with_capacity(7);
        for i in 0..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if DP_A[i][j] != 0.0 {
                    yi += kj * c(h * DP_A[i][j], 0.0);
                }
            }
            k.push(f(t + DP_C[i] * h) * yi);
        }
        let mut next = y.clone();
        let mut err = CMat::zeros(y.nrows(), y.ncols());
        for i in 0..7 {
            next += &k[i] * c(h * DP_B[i], 0.0);
            err += &k[i] * c(h * DP_E[i], 0.0);
        }
        let scale = tol * (1.0 + max_abs(&y).max(max_abs(&next)));
        let ratio = max_abs(&err) / scale;
        if !ratio.is_finite() {
            return Err(Error::Integration(format!("non-finite step at t = {t}")));
        }
        if ratio <= 1.0 {
            t += h;
            y = next;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * span.abs() {
            return Err(Error::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

/// Fundamental solution of J0 u' + C(s, t) u = 0 from t0 to t1.
pub fn propagator(fam: &HamiltonianFamily, s: f64, t0: f64, t1: f64, ode_tol: f64) -> Result<CMat> {
    let k = fam.k();
    let jinv = crate::linalg::inverse(fam.j0())?;
    let fam = fam.clone();
    integrate_linear(move |t| -(&jinv * fam.coefficient(s, t)), &CMat::identity(k, k), t0, t1, ode_tol)
}

pub fn monodromy(fam: &HamiltonianFamily, s: f64, ode_tol: f64) -> Result<CMat> {
    propagator(fam, s, 0.0, fam.length(), ode_tol)
}

fn graph_frame(m: &CMat) -> Frame {
    let k = m.ncols();
    orthonormalize(&vstack(&[&CMat::identity(k, k), m]), DEFAULT_RANK_TOL)
}

/// {(v, Phi(T) v)}: traces of solutions of the homogeneous equation.
pub fn cauchy_data(fam: &HamiltonianFamily, s: f64, ode_tol: f64) -> Result<Frame> {
    let phi = monodromy(fam, s, ode_tol)?;
    // only the zero solution vanishes at both ends
    if smallest_singular_value(&phi) < 1e-8 {
        return Err(Error::Integration(format!("monodromy is numerically singular at s = {s}")));
    }
    let cd = graph_frame(&phi);
    let iso = green_form(fam).isotropy_residual(&cd);
    if iso > 1e-6 {
        return Err(Error::Integration(format!("Cauchy data not Lagrangian at s = {s} (residual {iso:.2e})")));
    }
    Ok(cd)
}

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let p2 = ((2 * m + 1) as f64 * x * p1 - m as f64 * p0) / (m + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

fn legendre_values(m: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(m);
    let (mut p0, mut p1) = (1.0, x);
    for n in 0..m {
        match n {
            0 => out.push(1.0),
            1 => out.push(x),
            _ => {
                let p2 = ((2 * n - 1) as f64 * x * p1 - (n - 1) as f64 * p0) / n as f64;
                p0 = p1;
                p1 = p2;
                out.push(p2);
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Discretization {
    pub matrix: HermitianMatrix,
    pub hermiticity_residual: f64,
}

/// Galerkin realization of A(s) on polynomials of degree < m whose traces lie in bc.
pub fn discretize(fam: &HamiltonianFamily, bc: &BoundaryCondition, s: f64, m: usize) -> Result<Discretization> {
    let k = fam.k();
    check_dim(2 * k, bc.lagrangian().ambient_dim())?;
    if m < 2 {
        return Err(Error::Invalid("need at least two modes".into()));
    }
    let len = fam.length();
    let norm: Vec<f64> = (0..m).map(|n| ((2 * n + 1) as f64 / len).sqrt()).collect();
    let size = m * k;
    let mut big = CMat::zeros(size, size);
    for a in 0..m {
        for b in (a + 1)..m {
            if (a + b) % 2 == 1 {
                // integral of p_a p_b' over [0, T]
                let d = 2.0 * norm[a] * norm[b];
                big.view_mut((a * k, b * k), (k, k)).copy_from(&(fam.j0() * c(d, 0.0)));
            }
        }
    }
    let (nodes, weights) = gauss_legendre(m + 20);
    for (x, w) in nodes.iter().zip(&weights) {
        let t = 0.5 * len * (x + 1.0);
        let cq = fam.coefficient(s, t);
        let p = legendre_values(m, *x);
        let scale = 0.5 * len * w;
        for a in 0..m {
            for b in 0..m {
                let f = scale * norm[a] * norm[b] * p[a] * p[b];
                let mut blk = big.view_mut((a * k, b * k), (k, k));
                blk += &cq * c(f, 0.0);
            }
        }
    }
    let mut trace = CMat::zeros(2 * k, size);
    for n in 0..m {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..k {
            trace[(i, n * k + i)] = c(norm[n] * sign, 0.0);
            trace[(k + i, n * k + i)] = c(norm[n], 0.0);
        }
    }
    // the top-degree layer is kept only along directions whose traces are
    // orthogonal to the boundary Lagrangian; otherwise the trial space carries
    // a spurious near-kernel mode
    let mut top = CMat::zeros(2 * k, size);
    top.columns_mut((m - 1) * k, k).copy_from(&trace.columns((m - 1) * k, k));
    let perp = orth_complement(bc.lagrangian());
    let constraints = vstack(&[&(perp.matrix().adjoint() * &trace), &(bc.lagrangian().matrix().adjoint() * top)]);
    let z = null_space(&constraints, DEFAULT_RANK_TOL);
    let a = z.matrix().adjoint() * big * z.matrix();
    let residual = max_abs(&(&a - a.adjoint())) / max_abs(&a).max(1.0);
    if residual > 1e-10 {
        return Err(Error::Structural(format!("discretized operator not Hermitian (residual {residual:.2e})")));
    }
    Ok(Discretization { matrix: HermitianMatrix::new(a)?, hermiticity_residual: residual })
}

#[derive(Debug, Clone, Copy)]
pub struct BvpOptions {
    pub grid: usize,
    pub samples: usize,
    pub ode_tol: f64,
    pub s_range: (f64, f64),
    /// eigenvalue zero tolerance for the spectral side; None scales with |A|
    pub zero_tol: Option<f64>,
}

impl Default for BvpOptions {
    fn default() -> Self {
        BvpOptions { grid: 64, samples: 40, ode_tol: 1e-10, s_range: (-1.0, 1.0), zero_tol: None }
    }
}

impl BvpOptions {
    fn s_at(&self, x: f64) -> f64 {
        self.s_range.0 + (self.s_range.1 - self.s_range.0) * x
    }
}

const GRID_STABILITY: f64 = 1e-3;
const MAX_GRID: usize = 1024;

fn near_zero(fam: &HamiltonianFamily, bc: &BoundaryCondition, s: f64, grid: usize, count: usize) -> Result<Vec<f64>> {
    let (mut vals, _) = hermitian_eig(&discretize(fam, bc, s, grid)?.matrix);
    vals.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    vals.truncate(count);
    Ok(vals)
}

/// Smallest grid, doubling from `opts.grid`, at which the eigenvalues nearest
/// zero at both ends and the middle of the path move by less than 1e-3 under
/// one more doubling.
pub fn resolved_grid<B>(fam: &HamiltonianFamily, bc: &B, opts: &BvpOptions) -> Result<usize>
where
    B: Fn(f64) -> BoundaryCondition,
{
    let mut grid = opts.grid;
    loop {
        let mut worst = 0.0f64;
        for x in [0.0, 0.5, 1.0] {
            let s = opts.s_at(x);
            let b = bc(s);
            let coarse = near_zero(fam, &b, s, grid, 4)?;
            let fine = near_zero(fam, &b, s, 2 * grid, 8)?;
            for v in coarse {
                let d = fine.iter().map(|w| (v - w).abs()).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        if worst < GRID_STABILITY {
            return Ok(grid);
        }
        if 2 * grid > MAX_GRID {
            return Err(Error::Resolution {
                s: opts.s_range.0,
                detail: format!("near-zero eigenvalues still move by {worst:.2e} at grid {grid}"),
            });
        }
        grid *= 2;
    }
}

pub fn discretized_path<B>(fam: &HamiltonianFamily, bc: B, opts: &BvpOptions) -> Result<HermitianPath>
where
    B: Fn(f64) -> BoundaryCondition,
{
    HermitianPath::from_fn(
        |x| {
            let s = opts.s_at(x);
            Ok(discretize(fam, &bc(s), s, opts.grid)?.matrix)
        },
        opts.samples,
    )
}

#[derive(Debug, Clone)]
pub struct DesuspensionReport {
    pub sf: i64,
    pub neg_mas: i64,
    pub agree: bool,
    /// grid actually used after refinement
    pub grid: usize,
    pub flow: SpectralFlow,
    pub maslov: MaslovResult,
}

/// SF{A(s, D(s))} against -Mas{bc(s), CD(s); omega_G}.
pub fn desuspension_check<B>(
    fam: &HamiltonianFamily,
    bc: B,
    opts: &BvpOptions,
    mopts: &MaslovOptions,
) -> Result<DesuspensionReport>
where
    B: Fn(f64) -> BoundaryCondition + Send + Sync + Clone + 'static,
{
    let grid = resolved_grid(fam, &bc, opts)?;
    let flow = sf_eigen(&discretized_path(fam, bc.clone(), &BvpOptions { grid, ..*opts })?, opts.zero_tol);
    let form = green_form(fam);
    let (f2, o2, ode_tol) = (fam.clone(), *opts, opts.ode_tol);
    let path = LagrangianPairPath::from_fn(
        move |x| {
            let s = o2.s_at(x);
            Ok(PairSample::new(form.clone(), bc(s).lagrangian, cauchy_data(&f2, s, ode_tol)?))
        },
        opts.samples,
    )?;
    let maslov = maslov_winding(&path, mopts)?;
    let neg_mas = -maslov.mas_plus;
    Ok(DesuspensionReport { sf: flow.sf, neg_mas, agree: flow.sf == neg_mas, grid, flow, maslov })
}

#[derive(Debug, Clone)]
pub struct SplittingReport {
    pub sf_whole: i64,
    pub neg_mas_cut: i64,
    pub agree: bool,
    pub grid: usize,
    pub flow: SpectralFlow,
    pub maslov: MaslovResult,
}

/// Pair of Cauchy data at the cut for the periodic problem, in coordinates
/// (u(0) = u(T), u(cut)): solutions on [0, cut] and on [cut, T].
pub fn cut_pair(fam: &HamiltonianFamily, s: f64, cut: f64, ode_tol: f64) -> Result<PairSample> {
    let k = fam.k();
    let left = propagator(fam, s, 0.0, cut, ode_tol)?;
    let right = propagator(fam, s, cut, fam.length(), ode_tol)?;
    let minus = graph_frame(&left);
    let plus = orthonormalize(&vstack(&[&right, &CMat::identity(k, k)]), DEFAULT_RANK_TOL);
    Ok(PairSample::new(green_form(fam).negated(), minus, plus))
}

/// SF of the periodic problem on [0, T] against -Mas of the Cauchy data pair at the cut.
pub fn splitting_check(fam: &HamiltonianFamily, cut: f64, opts: &BvpOptions, mopts: &MaslovOptions) -> Result<SplittingReport> {
    if !(cut > 0.0 && cut < fam.length()) {
        return Err(Error::Invalid(format!("cut {cut} outside the open interval")));
    }
    let periodic = BoundaryCondition::periodic(fam);
    let bc = move |_| periodic.clone();
    let grid = resolved_grid(fam, &bc, opts)?;
    let flow = sf_eigen(&discretized_path(fam, bc, &BvpOptions { grid, ..*opts })?, opts.zero_tol);
    let (f2, o2) = (fam.clone(), *opts);
    let path = LagrangianPairPath::from_fn(move |x| cut_pair(&f2, o2.s_at(x), cut, o2.ode_tol), opts.samples)?;
    let maslov = maslov_winding(&path, mopts)?;
    let neg_mas_cut = -maslov.mas_plus;
    Ok(SplittingReport { sf_whole: flow.sf, neg_mas_cut, agree: flow.sf == neg_mas_cut, grid, flow, maslov })
}

/// dim(bc cap CD(s)) and the number of eigenvalues of the discretization below `eig_tol`.
pub fn kernel_dimensions(fam: &HamiltonianFamily, bc: &BoundaryCondition, s: f64, grid: usize, eig_tol: f64) -> Result<(usize, usize)> {
    let cd = cauchy_data(fam, s, 1e-11)?;
    let pair = PairSample::new(green_form(fam), bc.lagrangian().clone(), cd);
    let geometric = intersection_dim(&pair, 1e-6);
    let (vals, _) = hermitian_eig(&discretize(fam, bc, s, grid)?.matrix);
    Ok((geometric, vals.iter().filter(|v| v.abs() < eig_tol).count()))
}
