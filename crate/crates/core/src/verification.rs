//! Seeded property batteries over random paths, shared by the command line
//! driver and the acceptance suite.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c, gap_delta, hermitian_eig, orthonormalize, CMat, Frame, HermitianMatrix, DEFAULT_RANK_TOL,
};
use crate::maslov::{
    diagonal_lift, hormander, hungarian, intersection_dim, maslov_crossings, maslov_reduced, maslov_winding,
    LagrangianPairPath, MaslovOptions, PairSample,
};
use crate::random::{self, SeededRng};
use crate::spectral_flow::{cayley, sf_eigen, HermitianPath, LinearRelation};
use crate::symplectic::{frame_direct_sum, hermitian_graph, standard_form, SymplecticForm};

#[derive(Debug, Clone)]
pub struct BatteryReport {
    pub suite: String,
    pub identity: String,
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub seconds: f64,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

type Trial = fn(&mut SeededRng, usize, &MaslovOptions) -> Result<Option<String>>;

pub struct Suite {
    pub name: &'static str,
    pub identity: &'static str,
    pub default_trials: usize,
    trial: Trial,
}

pub fn suites() -> &'static [Suite] {
    &SUITES
}

pub fn find_suite(name: &str) -> Option<&'static Suite> {
    SUITES.iter().find(|s| s.name == name)
}

static SUITES: [Suite; 16] = [
    Suite { name: "flipping", identity: "Mas+{l,m} + Mas+{m,l} = dim jump; Mas{l,m;w} = Mas{m,l;-w}", default_trials: 100, trial: trial_flipping },
    Suite { name: "catenation", identity: "Mas over [0,1] = Mas over [0,a] + Mas over [a,1]", default_trials: 100, trial: trial_catenation },
    Suite { name: "direct_sum", identity: "Mas of a direct sum = sum of Mas", default_trials: 100, trial: trial_direct_sum },
    Suite { name: "naturality", identity: "Mas{L l, L m; J'} = Mas{l, m; J}", default_trials: 100, trial: trial_naturality },
    Suite { name: "vanishing", identity: "Mas = 0 for constant intersection dimension", default_trials: 100, trial: trial_vanishing },
    Suite { name: "homotopy", identity: "homotopic paths with fixed ends have equal Mas", default_trials: 30, trial: trial_homotopy },
    Suite { name: "method_agreement", identity: "winding Mas = crossing-form Mas", default_trials: 50, trial: trial_method_agreement },
    Suite { name: "reduction", identity: "Mas = sum of segmental reduced indices, refinement invariant", default_trials: 20, trial: trial_reduction },
    Suite { name: "embedding", identity: "Mas unchanged by adding a constant transversal pair", default_trials: 30, trial: trial_embedding },
    Suite { name: "diagonal", identity: "Mas{l+m, D; w+(-w)} = Mas{l,m;w} = Mas{D, l+m; (-w)+w}", default_trials: 50, trial: trial_diagonal },
    Suite { name: "hormander", identity: "two connecting paths give the same Hormander index", default_trials: 20, trial: trial_hormander },
    Suite { name: "sf_bridge", identity: "sf_eigen = Mas-{Graph A(s), X x 0; w_can}", default_trials: 100, trial: trial_sf_bridge },
    Suite { name: "sf_additivity", identity: "spectral flow additive under catenation, direct sum, unitary conjugation", default_trials: 100, trial: trial_sf_additivity },
    Suite { name: "relation_index", identity: "Index Graph(M) = 0 by both routes", default_trials: 100, trial: trial_relation_index },
    Suite { name: "gap_estimate", identity: "d(M,N) <= 2^(n-1) n d(N,M) / (1 - d(N,M))^n", default_trials: 200, trial: trial_gap_estimate },
    Suite { name: "cayley", identity: "spectrum of k(A) = k(spectrum of A)", default_trials: 100, trial: trial_cayley },
];

/// Runs `trials` seeded trials; trial i draws from a generator seeded by (seed, i).
pub fn run_suite(suite: &Suite, trials: usize, seed: u64, opts: &MaslovOptions) -> BatteryReport {
    let start = Instant::now();
    let mut failures = 0;
    let mut first_failure = None;
    for i in 0..trials {
        let mut rng = random::rng(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
        let outcome = match (suite.trial)(&mut rng, i, opts) {
            Ok(None) => None,
            Ok(Some(msg)) => Some(msg),
            Err(e) => Some(format!("error: {e}")),
        };
        if let Some(msg) = outcome {
            failures += 1;
            if first_failure.is_none() {
                first_failure = Some(format!("trial {i}: {msg}"));
            }
        }
    }
    BatteryReport {
        suite: suite.name.to_string(),
        identity: suite.identity.to_string(),
        trials,
        failures,
        first_failure,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<Option<String>> {
    Ok(if ok { None } else { Some(msg()) })
}

fn scaled(m: CMat, x: f64) -> CMat {
    m * c(x, 0.0)
}

/// Hermitian matrix with prescribed kernel dimension.
fn hermitian_with_kernel(rng: &mut SeededRng, n: usize, kernel: usize) -> CMat {
    let u = random::unitary(rng, n);
    let d: Vec<C> = (0..n).map(|j| if j < kernel { c(0.0, 0.0) } else { c(rng.gen_range(0.5..2.0) * sign(rng), 0.0) }).collect();
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(d));
    &u * d * u.adjoint()
}

type C = crate::linalg::C64;

fn sign(rng: &mut SeededRng) -> f64 {
    if rng.gen::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Parameters of a random smooth path of Lagrangian pairs under a varying form:
/// lam(s) = T(s) Graph(A0 + s A1 + s^2 A2), mu(s) = T(s) Graph(B0 + s B1),
/// omega(s) = J_{2n} transported by T(s) = T0 (I + s G).
#[derive(Debug, Clone)]
pub struct RandomPath {
    pub n: usize,
    t0: CMat,
    g: CMat,
    a: [CMat; 3],
    b: [CMat; 2],
}

impl RandomPath {
    pub fn draw(rng: &mut SeededRng, n: usize, contact_at_start: bool) -> RandomPath {
        let t0 = random::invertible(rng, 2 * n, 0.5);
        let g = scaled(random::matrix(rng, 2 * n, 2 * n), 0.25 / (2.0 * n as f64).sqrt());
        let a0 = random::hermitian(rng, n);
        let a1 = scaled(random::hermitian(rng, n), 6.0);
        let a2 = scaled(random::hermitian(rng, n), 1.5);
        let b0 = if contact_at_start {
            let kernel = 1 + rng.gen_range(0..n.min(2));
            &a0 - hermitian_with_kernel(rng, n, kernel)
        } else {
            random::hermitian(rng, n)
        };
        let b1 = scaled(random::hermitian(rng, n), 0.5);
        RandomPath { n, t0, g, a: [a0, a1, a2], b: [b0, b1] }
    }

    pub fn transport(&self, s: f64) -> CMat {
        let m = 2 * self.n;
        &self.t0 * (CMat::identity(m, m) + &self.g * c(s, 0.0))
    }

    pub fn sample(&self, s: f64) -> Result<PairSample> {
        let t = self.transport(s);
        let a = &self.a[0] + &self.a[1] * c(s, 0.0) + &self.a[2] * c(s * s, 0.0);
        let b = &self.b[0] + &self.b[1] * c(s, 0.0);
        Ok(PairSample::new(standard_form(self.n).push_forward(&t)?, hermitian_graph(&a).transform(&t), hermitian_graph(&b).transform(&t)))
    }

    pub fn path(&self, samples: usize) -> Result<LagrangianPairPath> {
        let me = self.clone();
        LagrangianPairPath::from_fn(move |s| me.sample(s), samples)
    }
}

fn random_path(rng: &mut SeededRng, max_n: usize) -> Result<LagrangianPairPath> {
    let n = rng.gen_range(1..=max_n);
    let contact = rng.gen_range(0..4) == 0;
    RandomPath::draw(rng, n, contact).path(24)
}

fn dims(path: &LagrangianPairPath) -> Result<(i64, i64)> {
    let d = |s: f64| -> Result<i64> {
        let p = path.sample_at(s)?;
        Ok(crate::linalg::intersect(&p.lam, &p.mu, DEFAULT_RANK_TOL)?.dim() as i64)
    };
    Ok((d(0.0)?, d(1.0)?))
}

fn trial_flipping(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = random_path(rng, 3)?;
    let direct = maslov_winding(&path, opts)?;
    let swapped = maslov_winding(&path.swapped()?, opts)?;
    let flipped = maslov_winding(&path.flipped()?, opts)?;
    let (d0, d1) = dims(&path)?;
    check(
        direct.mas_plus + swapped.mas_plus == d0 - d1
            && direct.mas_plus - direct.mas_minus == d0 - d1
            && (flipped.mas_plus, flipped.mas_minus) == (direct.mas_plus, direct.mas_minus),
        || {
            format!(
                "direct ({}, {}), swapped {}, flipped ({}, {}), dims ({d0}, {d1})",
                direct.mas_plus, direct.mas_minus, swapped.mas_plus, flipped.mas_plus, flipped.mas_minus
            )
        },
    )
}

fn trial_catenation(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = random_path(rng, 3)?;
    let a = rng.gen_range(0.15..0.85);
    let whole = maslov_winding(&path, opts)?;
    let left = maslov_winding(&path.restricted(0.0, a)?, opts)?;
    let right = maslov_winding(&path.restricted(a, 1.0)?, opts)?;
    check(
        whole.mas_plus == left.mas_plus + right.mas_plus && whole.mas_minus == left.mas_minus + right.mas_minus,
        || format!("split at {a}: whole {} vs {} + {}", whole.mas_plus, left.mas_plus, right.mas_plus),
    )
}

fn trial_direct_sum(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let p = random_path(rng, 2)?;
    let q = random_path(rng, 2)?;
    let sum = maslov_winding(&p.direct_sum(&q)?, opts)?;
    let (a, b) = (maslov_winding(&p, opts)?, maslov_winding(&q, opts)?);
    check(
        sum.mas_plus == a.mas_plus + b.mas_plus && sum.mas_minus == a.mas_minus + b.mas_minus,
        || format!("sum {} vs {} + {}", sum.mas_plus, a.mas_plus, b.mas_plus),
    )
}

fn trial_naturality(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = random_path(rng, 3)?;
    let m = path.ambient_dim();
    let l0 = random::invertible(rng, m, 0.6);
    let l1 = scaled(random::matrix(rng, m, m), 0.3 / (m as f64).sqrt());
    let moved = path.transformed(move |s| &l0 + &l1 * c(s, 0.0))?;
    let (a, b) = (maslov_winding(&path, opts)?, maslov_winding(&moved, opts)?);
    check((a.mas_plus, a.mas_minus) == (b.mas_plus, b.mas_minus), || format!("{} vs {}", a.mas_plus, b.mas_plus))
}

fn trial_vanishing(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    // A(s) - B(s) = W(s) D(s) W(s)^H with a fixed kernel dimension and
    // nonzero eigenvalues of fixed sign
    let n = rng.gen_range(1..=3);
    let kernel = rng.gen_range(0..=n);
    let b0 = random::hermitian(rng, n);
    let b1 = random::hermitian(rng, n);
    let h = random::hermitian(rng, n);
    let diag: Vec<f64> = (0..n).map(|j| if j < kernel { 0.0 } else { rng.gen_range(0.5..2.0) * sign(rng) }).collect();
    let growth: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.5)).collect();
    let t0 = random::invertible(rng, 2 * n, 0.5);
    let path = LagrangianPairPath::from_fn(
        move |s| {
            let (vals, vecs) = hermitian_eig(&HermitianMatrix::new(&h * c(s, 0.0))?);
            let w = {
                let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| c(0.0, *v).exp())));
                &vecs * phases * vecs.adjoint()
            };
            let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
                n,
                diag.iter().zip(&growth).map(|(d, g)| c(d * (1.0 + g * s), 0.0)),
            ));
            let b = &b0 + &b1 * c(s, 0.0);
            let a = &b + &w * d * w.adjoint();
            let f = standard_form(n).push_forward(&t0)?;
            Ok(PairSample::new(f, hermitian_graph(&a).transform(&t0), hermitian_graph(&b).transform(&t0)))
        },
        24,
    )?;
    let r = maslov_winding(&path, opts)?;
    check(r.mas_plus == 0 && r.mas_minus == 0, || format!("({}, {}) with kernel {kernel}", r.mas_plus, r.mas_minus))
}

fn trial_homotopy(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=3);
    let a0 = random::hermitian(rng, n);
    let a1 = scaled(random::hermitian(rng, n), 3.0);
    let bump = scaled(random::hermitian(rng, n), 4.0);
    let mu = random::lagrangian(rng, &standard_form(n));
    let make = |k: CMat, mu: Frame| {
        let (a0, a1) = (a0.clone(), a1.clone());
        LagrangianPairPath::from_fn(
            move |s| {
                let a = &a0 + &a1 * c(s, 0.0) + &k * c(s * (1.0 - s), 0.0);
                Ok(PairSample::new(standard_form(n), hermitian_graph(&a), mu.clone()))
            },
            24,
        )
    };
    let straight = maslov_winding(&make(CMat::zeros(n, n), mu.clone())?, opts)?;
    let bent = maslov_winding(&make(bump, mu)?, opts)?;
    check(straight.mas_plus == bent.mas_plus, || format!("{} vs {}", straight.mas_plus, bent.mas_plus))
}

fn trial_method_agreement(rng: &mut SeededRng, i: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    // dimensions 2n cycle through 2, 4, 6, 8
    let n = 1 + i % 4;
    let path = RandomPath::draw(rng, n, false).path(24)?;
    let w = maslov_winding(&path, opts)?;
    let x = maslov_crossings(&path, opts)?;
    check((w.mas_plus, w.mas_minus) == (x.mas_plus, x.mas_minus), || {
        format!("n = {n}: winding ({}, {}), crossing ({}, {})", w.mas_plus, w.mas_minus, x.mas_plus, x.mas_minus)
    })
}

fn trial_reduction(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = RandomPath::draw(rng, 8, false).path(24)?;
    let w = maslov_winding(&path, opts)?;
    let r = maslov_reduced(&path, opts)?;
    check((w.mas_plus, w.mas_minus) == (r.mas_plus, r.mas_minus), || {
        format!("winding ({}, {}), reduced ({}, {})", w.mas_plus, w.mas_minus, r.mas_plus, r.mas_minus)
    })
}

fn trial_embedding(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = random_path(rng, 2)?;
    let extra = rng.gen_range(1..=4);
    let f = random::form(rng, extra);
    let lam = random::lagrangian(rng, &f);
    let mu = random::lagrangian(rng, &f);
    let constant = LagrangianPairPath::from_samples(vec![
        (0.0, PairSample::new(f.clone(), lam.clone(), mu.clone())),
        (1.0, PairSample::new(f, lam, mu)),
    ])?;
    let big = embed(&path, &constant)?;
    let (a, b) = (maslov_winding(&path, opts)?, maslov_winding(&big, opts)?);
    let reduced = maslov_reduced(&big, opts)?;
    check(a.mas_plus == b.mas_plus && a.mas_plus == reduced.mas_plus, || {
        format!("small {}, embedded {}, reduced {}", a.mas_plus, b.mas_plus, reduced.mas_plus)
    })
}

fn embed(path: &LagrangianPairPath, constant: &LagrangianPairPath) -> Result<LagrangianPairPath> {
    let c0 = constant.samples()[0].1.clone();
    let src = path.source().ok_or_else(|| Error::Invalid("embedding needs an analytic path".into()))?;
    LagrangianPairPath::from_fn(
        move |s| {
            let p = src(s)?;
            Ok(PairSample::new(
                p.form.direct_sum(&c0.form),
                frame_direct_sum(&p.lam, &c0.lam),
                frame_direct_sum(&p.mu, &c0.mu),
            ))
        },
        path.samples().len() - 1,
    )
}

fn trial_diagonal(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let path = random_path(rng, 2)?;
    diagonal_lift(&path, opts)?;
    let p = path.sample_at(0.0)?;
    let n = p.form.dim();
    let doubled = crate::linalg::fredholm_pair_index(&frame_direct_sum(&p.lam, &p.mu), &crate::symplectic::diagonal(n), DEFAULT_RANK_TOL)?;
    let direct = crate::linalg::fredholm_pair_index(&p.lam, &p.mu, DEFAULT_RANK_TOL)?;
    check(doubled.index == direct.index && doubled.intersection_dim == direct.intersection_dim, || {
        format!("index {:?} vs {:?}", direct, doubled)
    })
}

fn trial_hormander(rng: &mut SeededRng, i: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let f = random::form(rng, 2);
    let l: Vec<Frame> = (0..4).map(|_| random::lagrangian(rng, &f)).collect();
    let value = hormander(&f, &l[0], &l[1], &l[2], &l[3], 1000 + i as u64, opts)?;
    let same_mu = hormander(&f, &l[0], &l[1], &l[2], &l[2], 2000 + i as u64, opts)?;
    let same_lam = hormander(&f, &l[0], &l[0], &l[2], &l[3], 3000 + i as u64, opts)?;
    check(same_mu == 0 && same_lam == 0 && value.abs() <= 2, || format!("s = {value}, degenerate cases ({same_mu}, {same_lam})"))
}

/// A0 + s A1 + s^2 A2, with A0 singular a quarter of the time.
pub fn random_hermitian_path(rng: &mut SeededRng, n: usize) -> (CMat, CMat, CMat) {
    let a0 = if rng.gen_range(0..4) == 0 {
        let k = 1 + rng.gen_range(0..n.min(2));
        hermitian_with_kernel(rng, n, k)
    } else {
        random::hermitian(rng, n)
    };
    (a0, scaled(random::hermitian(rng, n), 2.5), scaled(random::hermitian(rng, n), 0.5))
}

fn trial_sf_bridge(rng: &mut SeededRng, _: usize, opts: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=8);
    let (a0, a1, a2) = random_hermitian_path(rng, n);
    let at = move |s: f64| HermitianMatrix::new(&a0 + &a1 * c(s, 0.0) + &a2 * c(s * s, 0.0));
    let sf = sf_eigen(&HermitianPath::from_fn(&at, 24)?, None).sf;
    let form = crate::spectral_flow::canonical_standard(n);
    let base = LinearRelation::zero_target(n, n).subspace().clone();
    let path = LagrangianPairPath::from_fn(
        move |s| Ok(PairSample::new(form.clone(), LinearRelation::graph(at(s)?.matrix()).subspace().clone(), base.clone())),
        24,
    )?;
    let mas = maslov_winding(&path, opts)?;
    check(sf == mas.mas_minus, || format!("n = {n}: sf {sf}, Mas- {}", mas.mas_minus))
}

fn trial_sf_additivity(rng: &mut SeededRng, _: usize, _: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=5);
    let (a0, a1, a2) = random_hermitian_path(rng, n);
    let at = |s: f64| HermitianMatrix::new(&a0 + &a1 * c(s, 0.0) + &a2 * c(s * s, 0.0));
    let sf_on = |lo: f64, hi: f64| -> Result<i64> {
        Ok(sf_eigen(&HermitianPath::from_fn(|x| at(lo + (hi - lo) * x), 16)?, None).sf)
    };
    let whole = sf_on(0.0, 1.0)?;
    let a = rng.gen_range(0.1..0.9);
    let cat = sf_on(0.0, a)? + sf_on(a, 1.0)?;
    let (b0, b1, b2) = random_hermitian_path(rng, 2);
    let other = |s: f64| HermitianMatrix::new(&b0 + &b1 * c(s, 0.0) + &b2 * c(s * s, 0.0));
    let sum_path = HermitianPath::from_fn(|s| HermitianMatrix::new(crate::linalg::block_diag(at(s)?.matrix(), other(s)?.matrix())), 16)?;
    let other_sf = sf_eigen(&HermitianPath::from_fn(other, 16)?, None).sf;
    let sum = sf_eigen(&sum_path, None).sf;
    let h = random::hermitian(rng, n);
    let u0 = random::unitary(rng, n);
    let conj = sf_eigen(
        &HermitianPath::from_fn(
            |s| {
                let (vals, vecs) = hermitian_eig(&HermitianMatrix::new(&h * c(s, 0.0))?);
                let phases = CMat::from_diagonal(&nalgebra::DVector::from_iterator(n, vals.iter().map(|v| c(0.0, *v).exp())));
                let u = &u0 * &vecs * phases * vecs.adjoint();
                HermitianMatrix::new(u.adjoint() * at(s)?.matrix() * u)
            },
            16,
        )?,
        None,
    )
    .sf;
    check(whole == cat && sum == whole + other_sf && conj == whole, || {
        format!("whole {whole}, catenated {cat}, sum {sum} vs {}, conjugated {conj}", whole + other_sf)
    })
}

fn trial_relation_index(rng: &mut SeededRng, _: usize, _: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=6);
    let r = rng.gen_range(0..=n);
    let m = random::matrix(rng, n, r) * random::matrix(rng, r, n);
    let idx = LinearRelation::graph(&m).index(DEFAULT_RANK_TOL)?;
    check(idx == 0, || format!("index {idx} for rank {r} of {n}"))
}

fn trial_gap_estimate(rng: &mut SeededRng, _: usize, _: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=4);
    let ambient = n + rng.gen_range(1..=4);
    let nn = random::frame(rng, ambient, n);
    let spread = [0.05, 0.3, 1.0, 3.0][rng.gen_range(0..4)];
    let mm = orthonormalize(&(nn.matrix() + random::matrix(rng, ambient, n) * c(spread, 0.0)), DEFAULT_RANK_TOL);
    if mm.dim() != n {
        return Ok(None);
    }
    let d_mn = gap_delta(&mm, &nn)?;
    let d_nm = gap_delta(&nn, &mm)?;
    if d_nm >= 1.0 {
        return Ok(None);
    }
    let bound = 2f64.powi(n as i32 - 1) * n as f64 * d_nm / (1.0 - d_nm).powi(n as i32);
    check(d_mn <= bound + 1e-12, || format!("n = {n}: d(M,N) = {d_mn}, bound {bound}"))
}

fn trial_cayley(rng: &mut SeededRng, _: usize, _: &MaslovOptions) -> Result<Option<String>> {
    let n = rng.gen_range(1..=16);
    let a = HermitianMatrix::new(scaled(random::hermitian(rng, n), rng.gen_range(0.1..10.0)))?;
    let k = cayley(&a)?;
    let spec: Vec<C> = crate::linalg::eigenvalues(&k);
    let (vals, _) = hermitian_eig(&a);
    let mapped: Vec<C> = vals.iter().map(|&v| crate::spectral_flow::cayley_scalar(v)).collect();
    let cost: Vec<Vec<f64>> = spec.iter().map(|z| mapped.iter().map(|w| (z - w).norm()).collect()).collect();
    let assign = hungarian(&cost);
    let err = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max);
    let unitary = (k.adjoint() * &k - CMat::identity(n, n)).norm();
    let norm = crate::linalg::spectral_norm(a.matrix());
    let margin = spec.iter().map(|z| (z - c(1.0, 0.0)).norm()).fold(f64::INFINITY, f64::min);
    check(err < 1e-9 && unitary < 1e-10 && margin > 1.0 / (1.0 + norm * norm), || {
        format!("n = {n}: match {err:.2e}, unitarity {unitary:.2e}, distance to 1 {margin:.2e}")
    })
}

/// Intersection dimension along a path, for reporting.
pub fn intersection_profile(path: &LagrangianPairPath, points: usize) -> Result<Vec<(f64, usize)>> {
    (0..=points)
        .map(|i| {
            let s = i as f64 / points as f64;
            Ok((s, intersection_dim(&path.sample_at(s)?, 1e-6)))
        })
        .collect()
}

/// The benchmark path (Graph(s - 1/2), e1) in the standard form on C^2.
pub fn benchmark_path() -> LagrangianPairPath {
    let line = |x: f64, y: f64| Frame::span(&CMat::from_column_slice(2, 1, &[c(x, 0.0), c(y, 0.0)]));
    LagrangianPairPath::from_fn(move |s| Ok(PairSample::new(standard_form(1), line(1.0, s - 0.5), line(1.0, 0.0))), 20)
        .expect("benchmark samples are Lagrangian")
}

pub fn constant_pair(f: &SymplecticForm, lam: &Frame, mu: &Frame) -> Result<LagrangianPairPath> {
    let p = PairSample::new(f.clone(), lam.clone(), mu.clone());
    LagrangianPairPath::from_samples(vec![(0.0, p.clone()), (1.0, p)])
}
