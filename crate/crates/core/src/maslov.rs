//! Maslov index of paths of Lagrangian pairs under varying symplectic forms.
//!
//! The winding method follows the eigenvalues e^{i theta_j(s)} of U(s) V(s)^{-1},
//! where U, V are the unitary generators of lam(s), mu(s). The crossing method
//! sums signatures of crossing forms. The reduced method sums winding numbers
//! of the reduced pairs P0(lam), P0(mu) on segments around each crossing.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    c, eigenvalues, gap_hat, hstack, intersect, inverse, max_abs, morse_counts, orthonormalize, singular_values,
    smallest_singular_value, spectral_norm, CMat, Frame, HermitianMatrix, MorseCounts, DEFAULT_RANK_TOL,
};
use crate::random;
use crate::reduction::{complement_for, graph_coefficients, reduced_pair, IntrinsicDecomposition};
use crate::symplectic::{
    diagonal, frame_direct_sum, generator_in, require_lagrangian, splitting, SymplecticForm,
};

#[derive(Debug, Clone)]
pub struct PairSample {
    pub form: SymplecticForm,
    pub lam: Frame,
    pub mu: Frame,
}

impl PairSample {
    pub fn new(form: SymplecticForm, lam: Frame, mu: Frame) -> PairSample {
        PairSample { form, lam, mu }
    }
}

pub type PairSource = Arc<dyn Fn(f64) -> Result<PairSample> + Send + Sync>;

#[derive(Clone)]
pub struct LagrangianPairPath {
    samples: Vec<(f64, PairSample)>,
    source: Option<PairSource>,
}

impl std::fmt::Debug for LagrangianPairPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LagrangianPairPath")
            .field("samples", &self.samples.len())
            .field("analytic", &self.source.is_some())
            .finish()
    }
}

fn validate(s: f64, p: &PairSample, rank_tol: f64) -> Result<()> {
    let n = p.form.dim();
    if p.lam.ambient_dim() != n || p.mu.ambient_dim() != n {
        return Err(Error::PathInvariant { s, detail: "frame and form dimensions differ".into() });
    }
    for (name, sub) in [("lam", &p.lam), ("mu", &p.mu)] {
        require_lagrangian(&p.form, sub, rank_tol)
            .map_err(|e| Error::PathInvariant { s, detail: format!("{name} is not Lagrangian: {e}") })?;
    }
    Ok(())
}

impl LagrangianPairPath {
    pub fn from_samples(samples: Vec<(f64, PairSample)>) -> Result<LagrangianPairPath> {
        Self::build(samples, None)
    }

    /// Samples `n + 1` equispaced points and keeps `source` for refinement.
    pub fn from_fn<F>(source: F, n: usize) -> Result<LagrangianPairPath>
    where
        F: Fn(f64) -> Result<PairSample> + Send + Sync + 'static,
    {
        Self::from_source(Arc::new(source), n)
    }

    pub fn from_source(source: PairSource, n: usize) -> Result<LagrangianPairPath> {
        let n = n.max(1);
        let samples = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                source(s).map(|p| (s, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::build(samples, Some(source))
    }

    fn build(samples: Vec<(f64, PairSample)>, source: Option<PairSource>) -> Result<LagrangianPairPath> {
        if samples.len() < 2 {
            return Err(Error::Invalid("a path needs at least two samples".into()));
        }
        if samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
            return Err(Error::Invalid("samples must start at s = 0 and end at s = 1".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Invalid("sample parameters must be strictly increasing".into()));
        }
        let n = samples[0].1.form.dim();
        for (s, p) in &samples {
            check_dim(n, p.form.dim())?;
            validate(*s, p, DEFAULT_RANK_TOL)?;
        }
        Ok(LagrangianPairPath { samples, source })
    }

    pub fn samples(&self) -> &[(f64, PairSample)] {
        &self.samples
    }

    pub fn ambient_dim(&self) -> usize {
        self.samples[0].1.form.dim()
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn source(&self) -> Option<PairSource> {
        self.source.clone()
    }

    pub fn sample_at(&self, s: f64) -> Result<PairSample> {
        if let Some(src) = &self.source {
            return src(s);
        }
        self.samples
            .iter()
            .find(|(t, _)| *t == s)
            .map(|(_, p)| p.clone())
            .ok_or_else(|| Error::Resolution { s, detail: "no sample here and no analytic source".into() })
    }

    fn map_with<G>(&self, g: G) -> Result<LagrangianPairPath>
    where
        G: Fn(f64, PairSample) -> Result<PairSample> + Send + Sync + 'static,
    {
        let g = Arc::new(g);
        let samples = self
            .samples
            .iter()
            .map(|(s, p)| g(*s, p.clone()).map(|q| (*s, q)))
            .collect::<Result<Vec<_>>>()?;
        let source = self.source.clone().map(|src| {
            let g = g.clone();
            Arc::new(move |s: f64| g(s, src(s)?)) as PairSource
        });
        Self::build(samples, source)
    }

    /// Same pair with lam and mu exchanged.
    pub fn swapped(&self) -> Result<LagrangianPairPath> {
        self.map_with(|_, p| Ok(PairSample::new(p.form, p.mu, p.lam)))
    }

    /// (mu, lam; -omega)
    pub fn flipped(&self) -> Result<LagrangianPairPath> {
        self.map_with(|_, p| Ok(PairSample::new(p.form.negated(), p.mu, p.lam)))
    }

    /// (L lam, L mu; J') with L^H J' L = J, for a path of invertible L(s).
    pub fn transformed<L>(&self, l: L) -> Result<LagrangianPairPath>
    where
        L: Fn(f64) -> CMat + Send + Sync + 'static,
    {
        self.map_with(move |s, p| {
            let m = l(s);
            Ok(PairSample::new(p.form.push_forward(&m)?, p.lam.transform(&m), p.mu.transform(&m)))
        })
    }

    pub fn reversed(&self) -> Result<LagrangianPairPath> {
        let samples = self.samples.iter().rev().map(|(s, p)| (1.0 - s, p.clone())).collect();
        let source = self.source.clone().map(|src| Arc::new(move |s: f64| src(1.0 - s)) as PairSource);
        Self::build(samples, source)
    }

    /// The restriction to [a, b], reparametrized over [0, 1].
    pub fn restricted(&self, a: f64, b: f64) -> Result<LagrangianPairPath> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::Invalid(format!("bad sub-interval [{a}, {b}]")));
        }
        let scale = b - a;
        let mut samples = vec![(0.0, self.sample_at(a)?)];
        for (s, p) in &self.samples {
            if *s > a && *s < b {
                samples.push(((s - a) / scale, p.clone()));
            }
        }
        samples.push((1.0, self.sample_at(b)?));
        let source = self.source.clone().map(|src| Arc::new(move |s: f64| src(a + scale * s)) as PairSource);
        Self::build(samples, source)
    }

    /// Direct sum on the doubled space. Both paths need analytic sources
    /// unless their sample grids coincide.
    pub fn direct_sum(&self, other: &LagrangianPairPath) -> Result<LagrangianPairPath> {
        let join = |p: PairSample, q: PairSample| {
            PairSample::new(p.form.direct_sum(&q.form), frame_direct_sum(&p.lam, &q.lam), frame_direct_sum(&p.mu, &q.mu))
        };
        match (&self.source, &other.source) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                let n = self.samples.len().max(other.samples.len()) - 1;
                Self::from_source(Arc::new(move |s| Ok(join(a(s)?, b(s)?))), n)
            }
            _ => {
                if self.samples.len() != other.samples.len()
                    || self.samples.iter().zip(&other.samples).any(|(x, y)| x.0 != y.0)
                {
                    return Err(Error::Invalid("direct sum of sampled paths needs a common grid".into()));
                }
                let samples = self
                    .samples
                    .iter()
                    .zip(&other.samples)
                    .map(|((s, p), (_, q))| (*s, join(p.clone(), q.clone())))
                    .collect();
                Self::build(samples, None)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MaslovOptions {
    pub rank_tol: f64,
    /// distance (in full turns) under which theta / 2pi is read as an integer
    pub snap_tol: f64,
    pub max_depth: usize,
    pub fd_step: f64,
    pub scan_points: usize,
    /// smallest principal sine below which a located minimum is a crossing
    pub crossing_tol: f64,
    pub adequacy_margin: f64,
    pub seed: u64,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        MaslovOptions {
            rank_tol: DEFAULT_RANK_TOL,
            snap_tol: 1e-7,
            max_depth: 30,
            fd_step: 1e-5,
            scan_points: 400,
            crossing_tol: 1e-6,
            adequacy_margin: 1e-3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Winding,
    Crossing,
    Reduced,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Winding => "winding",
            Method::Crossing => "crossing",
            Method::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CrossingRecord {
    pub t: f64,
    pub intersection: Frame,
    pub gamma: HermitianMatrix,
    pub signature: MorseCounts,
}

#[derive(Debug, Clone, Default)]
pub struct ThetaCurves {
    pub s: Vec<f64>,
    /// theta[i][j]: branch j at parameter s[i]
    pub theta: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct MaslovResult {
    pub mas_plus: i64,
    pub mas_minus: i64,
    pub method: Method,
    pub theta_curves: ThetaCurves,
    pub crossings: Vec<CrossingRecord>,
    pub dim_start: usize,
    pub dim_end: usize,
}

pub fn counting_function_e(a: f64) -> i64 {
    let f = a.floor();
    if f == a {
        a as i64
    } else {
        f as i64 + 1
    }
}

fn wrap(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Minimum-cost perfect matching; returns the column assigned to each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Eigenvalue angles in (-pi, pi] of a unitary matrix.
pub fn unitary_angles(w: &CMat) -> Vec<f64> {
    eigenvalues(w).iter().map(|z| z.arg()).collect()
}

/// Angles of U V^{-1} for the generators of lam and mu.
pub fn pair_angles(p: &PairSample) -> Result<Vec<f64>> {
    let split = splitting(&p.form)?;
    let u = generator_in(&split, &p.lam)?;
    let v = generator_in(&split, &p.mu)?;
    Ok(unitary_angles(&(u * inverse(&v)?)))
}

fn sampling_adequate(a: &PairSample, b: &PairSample) -> Result<bool> {
    if gap_hat(&a.lam, &b.lam)? >= 0.5 || gap_hat(&a.mu, &b.mu)? >= 0.5 {
        return Ok(false);
    }
    let dj = spectral_norm(&(b.form.matrix() - a.form.matrix()));
    Ok(dj < 0.5 * smallest_singular_value(a.form.matrix()))
}

fn continue_branches(prev: &[f64], phis: &[f64]) -> (Vec<f64>, f64) {
    let cost: Vec<Vec<f64>> = prev.iter().map(|&t| phis.iter().map(|&p| wrap(p - t).abs()).collect()).collect();
    let assign = hungarian(&cost);
    let mut moved = 0.0f64;
    let lifted = prev
        .iter()
        .zip(&assign)
        .map(|(&t, &j)| {
            let d = wrap(phis[j] - t);
            moved = moved.max(d.abs());
            t + d
        })
        .collect();
    (lifted, moved)
}

struct Node {
    s: f64,
    sample: PairSample,
    phis: Vec<f64>,
}

struct Walker<'a> {
    path: &'a LagrangianPairPath,
    opts: &'a MaslovOptions,
    out: ThetaCurves,
}

impl Walker<'_> {
    fn node(&self, s: f64, sample: PairSample) -> Result<Node> {
        let phis = pair_angles(&sample)?;
        Ok(Node { s, sample, phis })
    }

    fn step(&mut self, a: &Node, b: Node, theta_a: &[f64], depth: usize) -> Result<Vec<f64>> {
        let (lifted, moved) = continue_branches(theta_a, &b.phis);
        let adequate = sampling_adequate(&a.sample, &b.sample)?;
        let limit = if self.path.has_source() { PI / 4.0 } else { PI / 2.0 };
        if moved <= limit && adequate {
            self.out.s.push(b.s);
            self.out.theta.push(lifted.clone());
            return Ok(lifted);
        }
        if self.path.has_source() && depth < self.opts.max_depth {
            let mid = 0.5 * (a.s + b.s);
            let sample = self.path.sample_at(mid)?;
            validate(mid, &sample, self.opts.rank_tol)?;
            let m = self.node(mid, sample)?;
            let theta_m = self.step(a, m_clone(&m), theta_a, depth + 1)?;
            return self.step(&m, b, &theta_m, depth + 1);
        }
        Err(Error::Resolution {
            s: a.s,
            detail: format!("spectral movement {moved:.3} rad over [{}, {}] (adequate sampling: {adequate})", a.s, b.s),
        })
    }
}

fn m_clone(n: &Node) -> Node {
    Node { s: n.s, sample: n.sample.clone(), phis: n.phis.clone() }
}

fn snapped_turns(theta: f64, snap_tol: f64) -> f64 {
    let a = theta / (2.0 * PI);
    let r = a.round();
    if (a - r).abs() < snap_tol {
        r
    } else {
        a
    }
}

pub fn maslov_winding(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<MaslovResult> {
    let mut walker = Walker { path, opts, out: ThetaCurves::default() };
    let samples = path.samples();
    let first = walker.node(samples[0].0, samples[0].1.clone())?;
    let mut theta = first.phis.clone();
    walker.out.s.push(first.s);
    walker.out.theta.push(theta.clone());
    let mut prev = first;
    for (s, p) in &samples[1..] {
        let next = walker.node(*s, p.clone())?;
        let keep = m_clone(&next);
        theta = walker.step(&prev, next, &theta, 0)?;
        prev = keep;
    }
    let curves = walker.out;
    let start: Vec<f64> = curves.theta[0].iter().map(|&t| snapped_turns(t, opts.snap_tol)).collect();
    let end: Vec<f64> = curves.theta[curves.theta.len() - 1].iter().map(|&t| snapped_turns(t, opts.snap_tol)).collect();
    let mut mas_plus = 0;
    let mut mas_minus = 0;
    for (a0, a1) in start.iter().zip(&end) {
        mas_plus += counting_function_e(*a1) - counting_function_e(*a0);
        mas_minus += a1.floor() as i64 - a0.floor() as i64;
    }
    let integral = |v: &[f64]| v.iter().filter(|a| a.fract() == 0.0).count();
    Ok(MaslovResult {
        mas_plus,
        mas_minus,
        method: Method::Winding,
        dim_start: integral(&start),
        dim_end: integral(&end),
        theta_curves: curves,
        crossings: Vec::new(),
    })
}

/// Sines of the principal angles between lam and mu, ascending.
pub fn principal_sines(p: &PairSample) -> Vec<f64> {
    let l = p.lam.matrix();
    let m = p.mu.matrix();
    let r = l - m * (m.adjoint() * l);
    let mut sv = singular_values(&r);
    sv.reverse();
    sv
}

fn smallest_sine(path: &LagrangianPairPath, s: f64) -> Result<f64> {
    Ok(principal_sines(&path.sample_at(s)?).first().copied().unwrap_or(1.0))
}

pub fn intersection_dim(p: &PairSample, tol: f64) -> usize {
    principal_sines(p).iter().filter(|&&x| x < tol).count()
}

fn scan_grid(path: &LagrangianPairPath, points: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=points).map(|i| i as f64 / points as f64).collect();
    grid.extend(path.samples().iter().map(|(s, _)| *s));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    grid
}

/// Crossing times, located on a scan of the smallest principal sine and
/// refined by golden-section search to about 1e-10.
pub fn locate_crossings(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<Vec<f64>> {
    if !path.has_source() {
        return Err(Error::Invalid("locating crossings needs an analytic path".into()));
    }
    let grid = scan_grid(path, opts.scan_points);
    let vals = grid.iter().map(|&s| smallest_sine(path, s)).collect::<Result<Vec<_>>>()?;
    let n = grid.len();
    let mut out: Vec<f64> = Vec::new();
    for i in 0..n {
        let left = if i > 0 { vals[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < n { vals[i + 1] } else { f64::INFINITY };
        if !(vals[i] <= left && vals[i] <= right) || vals[i] > 0.5 {
            continue;
        }
        let mut a = grid[i.saturating_sub(1)];
        let mut b = grid[(i + 1).min(n - 1)];
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = smallest_sine(path, x1)?;
        let mut f2 = smallest_sine(path, x2)?;
        while b - a > 1e-11 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = smallest_sine(path, x1)?;
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = smallest_sine(path, x2)?;
            }
        }
        let mut t = 0.5 * (a + b);
        let mut ft = smallest_sine(path, t)?;
        // the minimum may sit on the closed end of the parameter interval
        for end in [0.0, 1.0] {
            if (t - end).abs() < 1e-9 {
                let fe = smallest_sine(path, end)?;
                if fe <= ft.max(opts.crossing_tol) {
                    t = end;
                    ft = fe;
                }
            }
        }
        if ft < opts.crossing_tol && !out.iter().any(|&x| (x - t).abs() < 1e-8) {
            out.push(t);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Finite-difference derivative of a matrix-valued function at t in [0, 1],
/// central inside and one-sided second order near the ends.
fn derivative<F>(q: &F, t: f64, h: f64) -> Result<CMat>
where
    F: Fn(f64) -> Result<CMat>,
{
    let two_h = c(2.0 * h, 0.0);
    if t - 2.0 * h < 0.0 {
        Ok((q(t)? * c(-3.0, 0.0) + q(t + h)? * c(4.0, 0.0) - q(t + 2.0 * h)?) / two_h)
    } else if t + 2.0 * h > 1.0 {
        Ok((q(t)? * c(3.0, 0.0) - q(t - h)? * c(4.0, 0.0) + q(t - 2.0 * h)?) / two_h)
    } else {
        Ok((q(t + h)? - q(t - h)?) / two_h)
    }
}

fn signature(g: &HermitianMatrix) -> MorseCounts {
    let tol = 1e-6 * spectral_norm(g.matrix()).max(1.0);
    morse_counts(g, tol)
}

/// Crossing form d/ds omega(s)(x, (A1(s) - B1(s)) y) on lam0 = lam(t) cap mu(t),
/// for the isotropic complement V obtained from `seed`.
fn crossing_gamma(path: &LagrangianPairPath, t: f64, h: f64, lam0: &Frame, seed: u64, opts: &MaslovOptions) -> Result<HermitianMatrix> {
    let base = path.sample_at(t)?;
    let v = complement_for(&base.form, &base.lam, &base.mu, lam0, seed, opts.rank_tol)?;
    let q = |s: f64| -> Result<CMat> {
        let p = path.sample_at(s)?;
        let dec = IntrinsicDecomposition::from_parts(&p.form, &p.lam, &p.mu, lam0, &v, opts.rank_tol, 1e-10)?;
        let g = graph_coefficients(&p.form, &dec, &p.lam, &p.mu)?;
        let d = v.matrix() * (&g.a1 - &g.b1);
        Ok(d.adjoint() * p.form.matrix() * lam0.matrix())
    };
    HermitianMatrix::new(derivative(&q, t, h)?)
}

pub fn crossing_form(path: &LagrangianPairPath, t: f64, fd_step: f64, opts: &MaslovOptions) -> Result<CrossingRecord> {
    let base = path.sample_at(t)?;
    let lam0 = intersect(&base.lam, &base.mu, opts.rank_tol)?;
    if lam0.is_empty() {
        return Err(Error::NoCrossing { t });
    }
    let gamma = crossing_gamma(path, t, fd_step, &lam0, 0, opts)?;
    let sig = signature(&gamma);
    let half = signature(&crossing_gamma(path, t, 0.5 * fd_step, &lam0, 0, opts)?);
    if sig != half {
        return Err(Error::DegenerateCrossing { t });
    }
    let other = signature(&crossing_gamma(path, t, fd_step, &lam0, opts.seed.max(1), opts)?);
    if other != sig {
        return Err(Error::Invariant {
            identity: "crossing form independence".into(),
            detail: format!("signatures {sig:?} and {other:?} at t = {t}"),
        });
    }
    Ok(CrossingRecord { t, intersection: lam0, gamma, signature: sig })
}

/// Q(lam, t) as a matrix in the basis of the frame of lam(t): the derivative of
/// omega(x, A(s) y) where lam(s) = Graph(A(s) : lam(t) -> W) and W is the
/// Lagrangian complement Graph(-U).
pub fn one_sided_form(path: &LagrangianPairPath, t: f64, fd_step: f64, use_mu: bool) -> Result<CMat> {
    let pick = |p: &PairSample| if use_mu { p.mu.clone() } else { p.lam.clone() };
    let base = path.sample_at(t)?;
    let split = splitting(&base.form)?;
    let at_t = pick(&base);
    let u = generator_in(&split, &at_t)?;
    let w = crate::symplectic::graph_of_unitary(&split, &(-u))?;
    let basis = hstack(&[at_t.matrix(), w.matrix()]);
    let binv = inverse(&basis)?;
    let n = at_t.dim();
    let q = |s: f64| -> Result<CMat> {
        let p = path.sample_at(s)?;
        let coords = &binv * pick(&p).matrix();
        let a = coords.rows(n, n) * inverse(&coords.rows(0, n).into_owned())?;
        Ok(a.adjoint() * w.matrix().adjoint() * p.form.matrix() * at_t.matrix())
    };
    Ok(HermitianMatrix::new(derivative(&q, t, fd_step)?)?.into_matrix())
}

/// Gamma = (Q(lam, t) - Q(mu, t)) restricted to lam(t) cap mu(t), valid for a
/// fixed form.
pub fn crossing_form_fixed(path: &LagrangianPairPath, t: f64, fd_step: f64, opts: &MaslovOptions) -> Result<HermitianMatrix> {
    let base = path.sample_at(t)?;
    let lam0 = intersect(&base.lam, &base.mu, opts.rank_tol)?;
    if lam0.is_empty() {
        return Err(Error::NoCrossing { t });
    }
    let ql = one_sided_form(path, t, fd_step, false)?;
    let qm = one_sided_form(path, t, fd_step, true)?;
    let cl = base.lam.matrix().adjoint() * lam0.matrix();
    let cm = base.mu.matrix().adjoint() * lam0.matrix();
    HermitianMatrix::new(cl.adjoint() * ql * cl - cm.adjoint() * qm * cm)
}

pub fn maslov_crossings(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<MaslovResult> {
    let times = locate_crossings(path, opts)?;
    let mut records = Vec::with_capacity(times.len());
    let mut mas_plus = 0i64;
    let (mut dim_start, mut dim_end) = (0, 0);
    for t in times {
        let rec = crossing_form(path, t, opts.fd_step, opts)?;
        if rec.signature.zero > 0 {
            return Err(Error::DegenerateCrossing { t });
        }
        let (p, m) = (rec.signature.plus as i64, rec.signature.minus as i64);
        if t == 0.0 {
            mas_plus += p;
            dim_start = rec.intersection.dim();
        } else if t == 1.0 {
            mas_plus -= m;
            dim_end = rec.intersection.dim();
        } else {
            mas_plus += p - m;
        }
        records.push(rec);
    }
    Ok(MaslovResult {
        mas_plus,
        mas_minus: mas_plus - (dim_start as i64 - dim_end as i64),
        method: Method::Crossing,
        theta_curves: ThetaCurves::default(),
        crossings: records,
        dim_start,
        dim_end,
    })
}

/// Counting rule for semi-positive paths against a constant mu in a fixed form.
pub fn maslov_semipositive(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<i64> {
    let (_, first) = &path.samples()[0];
    let scale = max_abs(first.form.matrix()).max(1.0);
    for (s, p) in path.samples() {
        if max_abs(&(p.form.matrix() - first.form.matrix())) > 1e-12 * scale {
            return Err(Error::Invalid(format!("form varies at s = {s}")));
        }
        if gap_hat(&p.mu, &first.mu)? > 1e-9 {
            return Err(Error::Invalid(format!("mu varies at s = {s}")));
        }
    }
    let checks = opts.scan_points.clamp(2, 200);
    for i in 0..=checks {
        let s = i as f64 / checks as f64;
        let q = HermitianMatrix::new(one_sided_form(path, s, opts.fd_step, false)?)?;
        let tol = 1e-6 * spectral_norm(q.matrix()).max(1.0);
        if morse_counts(&q, tol).minus > 0 {
            return Err(Error::NotSemipositive { t: s });
        }
    }
    let dim_tol = 0.1 * opts.crossing_tol;
    let mut total = 0i64;
    for t in locate_crossings(path, opts)? {
        if t == 0.0 {
            continue;
        }
        let here = intersection_dim(&path.sample_at(t)?, dim_tol) as i64;
        let before = intersection_dim(&path.sample_at((t - 1e-4).max(0.0))?, dim_tol) as i64;
        total += here - before;
    }
    Ok(total)
}

fn adequate_at(p: &PairSample, lam0: &Frame, v: &Frame, opts: &MaslovOptions) -> bool {
    let dec = match IntrinsicDecomposition::from_parts(&p.form, &p.lam, &p.mu, lam0, v, opts.rank_tol, opts.adequacy_margin) {
        Ok(d) => d,
        Err(_) => return false,
    };
    let m1 = smallest_singular_value(&hstack(&[p.lam.matrix(), v.matrix(), dec.mu1.matrix()]));
    let m2 = smallest_singular_value(&hstack(&[p.mu.matrix(), v.matrix(), dec.lam1.matrix()]));
    m1 >= opts.adequacy_margin && m2 >= opts.adequacy_margin
}

fn reduced_segment(
    path: &LagrangianPairPath,
    lam0: &Frame,
    v: &Frame,
    a: f64,
    b: f64,
    opts: &MaslovOptions,
) -> Result<MaslovResult> {
    let src = path.source().expect("checked by caller");
    let (lam0, v) = (lam0.clone(), v.clone());
    let rank_tol = opts.rank_tol;
    let reduced = LagrangianPairPath::from_fn(
        move |x: f64| {
            let s = a + (b - a) * x;
            let p = src(s)?;
            let dec = IntrinsicDecomposition::from_parts(&p.form, &p.lam, &p.mu, &lam0, &v, rank_tol, 1e-10)?;
            let r = reduced_pair(&p.form, &dec, &p.lam, &p.mu)?;
            Ok(PairSample::new(r.form, r.lam, r.mu))
        },
        16,
    )?;
    maslov_winding(&reduced, opts)
}

/// Finds the extent of the segment around crossing `c` within [lo, hi] on
/// which (lam0, V) stays admissible.
fn segment_extent(path: &LagrangianPairPath, c0: f64, lo: f64, hi: f64, lam0: &Frame, v: &Frame, opts: &MaslovOptions) -> Result<(f64, f64)> {
    let step = 1.0 / opts.scan_points as f64;
    let mut ends = [c0, c0];
    for (k, dir) in [(0usize, -1.0f64), (1, 1.0)] {
        let limit = if dir < 0.0 { lo } else { hi };
        if (limit - c0).abs() < 1e-15 {
            continue;
        }
        let mut best = c0;
        let mut s = c0;
        loop {
            let next = s + dir * step;
            let next = if dir < 0.0 { next.max(limit) } else { next.min(limit) };
            if !adequate_at(&path.sample_at(next)?, lam0, v, opts) {
                break;
            }
            best = next;
            s = next;
            if next == limit {
                break;
            }
        }
        if best == c0 {
            // shrink toward the crossing until the decomposition is admissible
            let mut d = step;
            while d > 1e-9 {
                d *= 0.5;
                let s = c0 + dir * d.min((limit - c0).abs());
                if adequate_at(&path.sample_at(s)?, lam0, v, opts) {
                    best = s;
                    break;
                }
            }
            if best == c0 {
                return Err(Error::Resolution { s: c0, detail: "no admissible segment around crossing".into() });
            }
        }
        ends[k] = best;
    }
    Ok((ends[0], ends[1]))
}

fn reduced_total(path: &LagrangianPairPath, crossings: &[f64], seed: u64, refine: bool, opts: &MaslovOptions) -> Result<(i64, i64)> {
    let (mut plus, mut minus) = (0, 0);
    for (j, &c0) in crossings.iter().enumerate() {
        let base = path.sample_at(c0)?;
        let lam0 = intersect(&base.lam, &base.mu, opts.rank_tol)?;
        let v = complement_for(&base.form, &base.lam, &base.mu, &lam0, seed, opts.rank_tol)?;
        let lo = if j > 0 { 0.5 * (crossings[j - 1] + c0) } else { 0.0 };
        let hi = if j + 1 < crossings.len() { 0.5 * (c0 + crossings[j + 1]) } else { 1.0 };
        let (l, r) = segment_extent(path, c0, lo, hi, &lam0, &v, opts)?;
        let pieces: Vec<(f64, f64)> = if refine { vec![(l, c0), (c0, r)] } else { vec![(l, r)] };
        for (a, b) in pieces {
            if b - a < 1e-14 {
                continue;
            }
            let res = reduced_segment(path, &lam0, &v, a, b, opts)?;
            plus += res.mas_plus;
            minus += res.mas_minus;
        }
    }
    Ok((plus, minus))
}

/// Sum of segmental reduced Maslov indices. Segments between crossings reduce
/// to the zero space and contribute nothing; each crossing gets a segment on
/// which a fixed isotropic complement stays admissible. The computation is
/// repeated on a refined partition with another complement and must agree.
pub fn maslov_reduced(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<MaslovResult> {
    let crossings = locate_crossings(path, opts)?;
    let coarse = reduced_total(path, &crossings, 0, false, opts)?;
    let refined = reduced_total(path, &crossings, opts.seed.max(1), true, opts)?;
    if coarse != refined {
        return Err(Error::Invariant {
            identity: "partition independence of the reduced Maslov index".into(),
            detail: format!("{coarse:?} vs {refined:?}"),
        });
    }
    let dim_of = |s: f64| -> Result<usize> {
        let p = path.sample_at(s)?;
        Ok(intersect(&p.lam, &p.mu, opts.rank_tol)?.dim())
    };
    Ok(MaslovResult {
        mas_plus: coarse.0,
        mas_minus: coarse.1,
        method: Method::Reduced,
        theta_curves: ThetaCurves::default(),
        crossings: Vec::new(),
        dim_start: dim_of(0.0)?,
        dim_end: dim_of(1.0)?,
    })
}

/// A path from lam1 to lam2 by linear interpolation of graphs over lam1 with a
/// seeded random Lagrangian complement transversal to both ends.
pub fn connecting_path(f: &SymplecticForm, lam1: &Frame, lam2: &Frame, seed: u64) -> Result<Arc<dyn Fn(f64) -> Result<Frame> + Send + Sync>> {
    let mut rng = random::rng(seed);
    let mut w = None;
    for _ in 0..100 {
        let cand = random::lagrangian(&mut rng, f);
        let m1 = smallest_singular_value(&hstack(&[lam1.matrix(), cand.matrix()]));
        let m2 = smallest_singular_value(&hstack(&[lam2.matrix(), cand.matrix()]));
        if m1.min(m2) > 0.05 + 0.1 * rng.gen::<f64>() {
            w = Some(cand);
            break;
        }
    }
    let w = w.ok_or_else(|| Error::Structural("no common transversal Lagrangian found".into()))?;
    let n = lam1.dim();
    let basis = hstack(&[lam1.matrix(), w.matrix()]);
    let coords = inverse(&basis)? * lam2.matrix();
    let a2 = coords.rows(n, n) * inverse(&coords.rows(0, n).into_owned())?;
    let (l, wm) = (lam1.matrix().clone(), w.matrix().clone());
    Ok(Arc::new(move |s: f64| Ok(orthonormalize(&(&l + &wm * (&a2 * c(s, 0.0))), DEFAULT_RANK_TOL))))
}

/// s(lam1, lam2; mu1, mu2) = Mas{lam, mu2} - Mas{lam, mu1} along a connecting path.
/// Evaluated on two independently seeded paths, which must agree.
pub fn hormander(
    f: &SymplecticForm,
    lam1: &Frame,
    lam2: &Frame,
    mu1: &Frame,
    mu2: &Frame,
    seed: u64,
    opts: &MaslovOptions,
) -> Result<i64> {
    for x in [lam1, lam2, mu1, mu2] {
        require_lagrangian(f, x, opts.rank_tol)?;
    }
    let eval = |seed: u64| -> Result<i64> {
        let lam = connecting_path(f, lam1, lam2, seed)?;
        let against = |mu: &Frame| -> Result<i64> {
            let (lam, mu, f) = (lam.clone(), mu.clone(), f.clone());
            let path = LagrangianPairPath::from_fn(move |s| Ok(PairSample::new(f.clone(), lam(s)?, mu.clone())), 32)?;
            Ok(maslov_winding(&path, opts)?.mas_plus)
        };
        Ok(against(mu2)? - against(mu1)?)
    };
    let first = eval(seed)?;
    let second = eval(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))?;
    if first != second {
        return Err(Error::Invariant {
            identity: "path independence of the Hormander index".into(),
            detail: format!("{first} vs {second}"),
        });
    }
    Ok(first)
}

#[derive(Debug, Clone)]
pub struct DiagonalLift {
    pub direct: MaslovResult,
    /// Mas{lam + mu, Delta; omega + (-omega)}
    pub doubled: MaslovResult,
    /// Mas{Delta, lam + mu; (-omega) + omega}
    pub swapped: MaslovResult,
}

pub fn diagonal_lift(path: &LagrangianPairPath, opts: &MaslovOptions) -> Result<DiagonalLift> {
    let n = path.ambient_dim();
    let doubled = path.map_with(move |_, p| {
        let form = p.form.direct_sum(&p.form.negated());
        Ok(PairSample::new(form, frame_direct_sum(&p.lam, &p.mu), diagonal(n)))
    })?;
    let swapped = path.map_with(move |_, p| {
        let form = p.form.negated().direct_sum(&p.form);
        Ok(PairSample::new(form, diagonal(n), frame_direct_sum(&p.lam, &p.mu)))
    })?;
    let lift = DiagonalLift {
        direct: maslov_winding(path, opts)?,
        doubled: maslov_winding(&doubled, opts)?,
        swapped: maslov_winding(&swapped, opts)?,
    };
    let key = |r: &MaslovResult| (r.mas_plus, r.mas_minus);
    if key(&lift.direct) != key(&lift.doubled) || key(&lift.direct) != key(&lift.swapped) {
        return Err(Error::Invariant {
            identity: "diagonal lift of the Maslov index".into(),
            detail: format!("{:?}, {:?}, {:?}", key(&lift.direct), key(&lift.doubled), key(&lift.swapped)),
        });
    }
    Ok(lift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hungarian_picks_the_cheap_diagonal() {
        let cost = vec![vec![4.0, 1.0, 3.0], vec![2.0, 0.0, 5.0], vec![3.0, 2.0, 2.0]];
        let a = hungarian(&cost);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn e_counts_up_from_non_integers() {
        assert_eq!(counting_function_e(0.0), 0);
        assert_eq!(counting_function_e(0.3), 1);
        assert_eq!(counting_function_e(-0.3), 0);
        assert_eq!(counting_function_e(2.0), 2);
    }

    #[test]
    fn wrap_stays_in_half_open_circle() {
        assert!((wrap(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap(-0.5) + 0.5).abs() < 1e-15);
    }
}
