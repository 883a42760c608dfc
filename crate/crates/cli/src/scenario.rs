use maslovlab::bvp::{desuspension_check, splitting_check, BoundaryCondition, BvpOptions, HamiltonianFamily};
use maslovlab::linalg::{c, CMat, HermitianMatrix};
use maslovlab::maslov::{
    maslov_crossings, maslov_reduced, maslov_winding, CrossingRecord, LagrangianPairPath, MaslovOptions, MaslovResult,
    PairSample, ThetaCurves,
};
use maslovlab::random;
use maslovlab::spectral_flow::{canonical_standard, sf_eigen, EigenCurves, HermitianPath, LinearRelation};
use maslovlab::verification::{
    benchmark_path, find_suite, random_hermitian_path, run_suite, suites, RandomPath,
};
use serde::Serialize;

use crate::config::{
    BcChoice, BvpParams, FamilyChoice, Kind, MaslovPathParams, MethodChoice, Params, PathChoice, ReductionParams,
    Scenario, SpectralFlowParams, SuiteParams,
};
use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub rank_tol: Option<f64>,
    pub zero_tol: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct TolerancesOut {
    rank: f64,
    zero: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Report<'a, R> {
    schema: u32,
    kind: Kind,
    name: &'a str,
    seed: u64,
    tolerances: TolerancesOut,
    result: R,
}

#[derive(Debug, Serialize)]
pub struct CrossingOut {
    pub t: f64,
    pub dim: usize,
    pub plus: usize,
    pub minus: usize,
    pub zero: usize,
}

impl From<&CrossingRecord> for CrossingOut {
    fn from(r: &CrossingRecord) -> CrossingOut {
        CrossingOut {
            t: r.t,
            dim: r.intersection.dim(),
            plus: r.signature.plus,
            minus: r.signature.minus,
            zero: r.signature.zero,
        }
    }
}

#[derive(Debug, Serialize)]
struct MethodValue {
    method: MethodChoice,
    mas_plus: i64,
    mas_minus: i64,
}

#[derive(Debug, Serialize)]
struct MaslovPathOut {
    path: PathChoice,
    ambient_dim: usize,
    mas_plus: i64,
    mas_minus: i64,
    dim_start: usize,
    dim_end: usize,
    methods: Vec<MethodValue>,
    crossings: Vec<CrossingOut>,
    theta_curves_ref: Option<String>,
}

#[derive(Debug, Serialize)]
struct SpectralFlowOut {
    n: usize,
    sf: i64,
    mas_minus: i64,
    agree: bool,
    eigen_curves_ref: String,
}

#[derive(Debug, Serialize)]
struct ReductionOut {
    ambient_dim: usize,
    mas_plus: i64,
    mas_minus: i64,
    reduced_plus: i64,
    reduced_minus: i64,
    agree: bool,
    theta_curves_ref: String,
}

#[derive(Debug, Serialize)]
struct BvpOut {
    family: FamilyChoice,
    k: usize,
    bc: BcChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    cut: Option<f64>,
    s_range: [f64; 2],
    grid: usize,
    sf: i64,
    neg_mas: i64,
    agree: bool,
    crossings: Vec<CrossingOut>,
    theta_curves_ref: String,
    eigen_curves_ref: String,
}

#[derive(Debug, Serialize)]
struct SuiteRow {
    suite: String,
    identity: String,
    trials: usize,
    failures: usize,
    first_failure: Option<String>,
}

#[derive(Debug, Serialize)]
struct SuitesOut {
    suites: Vec<SuiteRow>,
    failures: usize,
}

/// What a scenario produced: the JSON report, optional curves, and the
/// violated identity if the scenario found one.
pub struct Outcome {
    pub json: String,
    pub theta: Option<ThetaCurves>,
    pub eigen: Option<EigenCurves>,
    pub violation: Option<Failure>,
}

pub fn theta_file(name: &str) -> String {
    format!("{name}_theta.csv")
}

pub fn eigen_file(name: &str) -> String {
    format!("{name}_eigen.csv")
}

pub fn report_file(name: &str) -> String {
    format!("{name}.json")
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    opts: MaslovOptions,
    zero_tol: Option<f64>,
    seed: u64,
}

impl Ctx<'_> {
    fn render<R: Serialize>(&self, result: R) -> Result<String, Failure> {
        let report = Report {
            schema: crate::config::SCHEMA_VERSION,
            kind: self.scenario.kind,
            name: &self.scenario.name,
            seed: self.seed,
            tolerances: TolerancesOut { rank: self.opts.rank_tol, zero: self.zero_tol },
            result,
        };
        Ok(serde_json::to_string_pretty(&report)? + "\n")
    }
}

pub fn run(scenario: &Scenario, settings: &Settings) -> Result<Outcome, Failure> {
    let mut opts = MaslovOptions::default();
    if let Some(r) = settings.rank_tol.or(scenario.tolerances.rank) {
        opts.rank_tol = r;
    }
    let ctx = Ctx { scenario, opts, zero_tol: settings.zero_tol.or(scenario.tolerances.zero), seed: settings.seed };
    match &scenario.params {
        Params::MaslovPath(p) => maslov_path(&ctx, p),
        Params::SpectralFlow(p) => spectral_flow(&ctx, p),
        Params::ReductionDemo(p) => reduction_demo(&ctx, p),
        Params::BvpDesuspension(p) => bvp(&ctx, p, false),
        Params::BvpSplitting(p) => bvp(&ctx, p, true),
        Params::PropertySuite(p) => property_suite(&ctx, p),
    }
}

fn maslov_path(ctx: &Ctx, p: &MaslovPathParams) -> Result<Outcome, Failure> {
    let mut rng = random::rng(ctx.seed);
    let path = match p.path {
        PathChoice::Benchmark => benchmark_path(),
        PathChoice::Random => RandomPath::draw(&mut rng, p.n, false).path(p.samples)?,
        PathChoice::Constant => {
            let f = random::form(&mut rng, p.n);
            let lam = random::lagrangian(&mut rng, &f);
            let mu = random::lagrangian(&mut rng, &f);
            LagrangianPairPath::from_fn(move |_| Ok(PairSample::new(f.clone(), lam.clone(), mu.clone())), p.samples)?
        }
    };
    let mut results: Vec<(MethodChoice, MaslovResult)> = Vec::new();
    for &m in &p.methods {
        let r = match m {
            MethodChoice::Winding => maslov_winding(&path, &ctx.opts)?,
            MethodChoice::Crossing => maslov_crossings(&path, &ctx.opts)?,
            MethodChoice::Reduced => maslov_reduced(&path, &ctx.opts)?,
        };
        results.push((m, r));
    }
    let first = &results[0].1;
    let violation = results
        .iter()
        .find(|(_, r)| (r.mas_plus, r.mas_minus) != (first.mas_plus, first.mas_minus))
        .map(|(m, r)| {
            Failure::invariant(
                "independence of the Maslov index from the computation method",
                format!(
                    "{:?} gives ({}, {}), {:?} gives ({}, {})",
                    results[0].0, first.mas_plus, first.mas_minus, m, r.mas_plus, r.mas_minus
                ),
            )
        });
    let theta = results.iter().find(|(m, _)| *m == MethodChoice::Winding).map(|(_, r)| r.theta_curves.clone());
    let crossings = results.iter().find(|(_, r)| !r.crossings.is_empty()).map_or_else(Vec::new, |(_, r)| {
        r.crossings.iter().map(CrossingOut::from).collect()
    });
    let out = MaslovPathOut {
        path: p.path,
        ambient_dim: path.ambient_dim(),
        mas_plus: first.mas_plus,
        mas_minus: first.mas_minus,
        dim_start: first.dim_start,
        dim_end: first.dim_end,
        methods: results.iter().map(|(m, r)| MethodValue { method: *m, mas_plus: r.mas_plus, mas_minus: r.mas_minus }).collect(),
        crossings,
        theta_curves_ref: theta.as_ref().map(|_| theta_file(&ctx.scenario.name)),
    };
    Ok(Outcome { json: ctx.render(out)?, theta, eigen: None, violation })
}

fn spectral_flow(ctx: &Ctx, p: &SpectralFlowParams) -> Result<Outcome, Failure> {
    let mut rng = random::rng(ctx.seed);
    let n = p.n;
    let (a0, a1, a2) = random_hermitian_path(&mut rng, n);
    let at = move |s: f64| HermitianMatrix::new(&a0 + &a1 * c(s, 0.0) + &a2 * c(s * s, 0.0));
    let flow = sf_eigen(&HermitianPath::from_fn(&at, p.samples)?, ctx.zero_tol);
    let form = canonical_standard(n);
    let base = LinearRelation::zero_target(n, n).subspace().clone();
    let pairs = LagrangianPairPath::from_fn(
        move |s| Ok(PairSample::new(form.clone(), LinearRelation::graph(at(s)?.matrix()).subspace().clone(), base.clone())),
        p.samples,
    )?;
    let mas = maslov_winding(&pairs, &ctx.opts)?;
    let agree = flow.sf == mas.mas_minus;
    let violation = (!agree).then(|| {
        Failure::invariant(
            "spectral flow equals Mas- of the graph against X x {0}",
            format!("sf {}, Mas- {}", flow.sf, mas.mas_minus),
        )
    });
    let out = SpectralFlowOut { n, sf: flow.sf, mas_minus: mas.mas_minus, agree, eigen_curves_ref: eigen_file(&ctx.scenario.name) };
    Ok(Outcome { json: ctx.render(out)?, theta: None, eigen: Some(flow.curves), violation })
}

fn reduction_demo(ctx: &Ctx, p: &ReductionParams) -> Result<Outcome, Failure> {
    let mut rng = random::rng(ctx.seed);
    let path = RandomPath::draw(&mut rng, p.n, false).path(p.samples)?;
    let w = maslov_winding(&path, &ctx.opts)?;
    let r = maslov_reduced(&path, &ctx.opts)?;
    let agree = (w.mas_plus, w.mas_minus) == (r.mas_plus, r.mas_minus);
    let violation = (!agree).then(|| {
        Failure::invariant(
            "invariance of the Maslov index under symplectic reduction",
            format!("winding ({}, {}), reduced ({}, {})", w.mas_plus, w.mas_minus, r.mas_plus, r.mas_minus),
        )
    });
    let out = ReductionOut {
        ambient_dim: path.ambient_dim(),
        mas_plus: w.mas_plus,
        mas_minus: w.mas_minus,
        reduced_plus: r.mas_plus,
        reduced_minus: r.mas_minus,
        agree,
        theta_curves_ref: theta_file(&ctx.scenario.name),
    };
    Ok(Outcome { json: ctx.render(out)?, theta: Some(w.theta_curves), eigen: None, violation })
}

fn family(p: &BvpParams) -> Result<HamiltonianFamily, Failure> {
    Ok(match p.family {
        FamilyChoice::ScalarShift => HamiltonianFamily::scalar_shift(),
        FamilyChoice::DiagonalShift => HamiltonianFamily::diagonal_shift(p.k),
        FamilyChoice::PlanarShift => HamiltonianFamily::planar_shift(),
        FamilyChoice::PlanarModulated => HamiltonianFamily::planar_modulated(),
        FamilyChoice::Constant => {
            let j0 = CMat::from_element(1, 1, c(0.0, 1.0));
            HamiltonianFamily::constant(j0, CMat::from_element(1, 1, c(0.5, 0.0)), 1.0)?
        }
    })
}

fn bvp(ctx: &Ctx, p: &BvpParams, split: bool) -> Result<Outcome, Failure> {
    let fam = family(p)?;
    let opts = BvpOptions {
        grid: p.grid,
        samples: p.samples,
        ode_tol: p.ode_tol,
        s_range: (p.s_range[0], p.s_range[1]),
        zero_tol: ctx.zero_tol,
    };
    let (sf, neg_mas, agree, grid, flow, maslov) = if split {
        if !(p.cut > 0.0 && p.cut < fam.length()) {
            return Err(Failure::Schema(format!("params.cut: must lie in (0, {}), got {}", fam.length(), p.cut)));
        }
        let r = splitting_check(&fam, p.cut, &opts, &ctx.opts)?;
        (r.sf_whole, r.neg_mas_cut, r.agree, r.grid, r.flow, r.maslov)
    } else {
        let bc = match p.bc {
            BcChoice::Periodic => BoundaryCondition::periodic(&fam),
            BcChoice::DirichletFirst => BoundaryCondition::dirichlet_first(&fam)?,
        };
        let r = desuspension_check(&fam, move |_| bc.clone(), &opts, &ctx.opts)?;
        (r.sf, r.neg_mas, r.agree, r.grid, r.flow, r.maslov)
    };
    let violation = (!agree).then(|| {
        let identity = if split { "splitting formula SF = -Mas at the cut" } else { "desuspension formula SF = -Mas" };
        Failure::invariant(identity, format!("sf {sf}, -Mas {neg_mas}"))
    });
    let name = &ctx.scenario.name;
    let out = BvpOut {
        family: p.family,
        k: fam.k(),
        bc: p.bc,
        cut: split.then_some(p.cut),
        s_range: p.s_range,
        grid,
        sf,
        neg_mas,
        agree,
        crossings: maslov.crossings.iter().map(CrossingOut::from).collect(),
        theta_curves_ref: theta_file(name),
        eigen_curves_ref: eigen_file(name),
    };
    let [lo, hi] = p.s_range;
    let physical = |x: &f64| lo + x * (hi - lo);
    let mut theta = maslov.theta_curves;
    theta.s = theta.s.iter().map(physical).collect();
    let mut eigen = flow.curves;
    eigen.s = eigen.s.iter().map(physical).collect();
    Ok(Outcome { json: ctx.render(out)?, theta: Some(theta), eigen: Some(eigen), violation })
}

fn property_suite(ctx: &Ctx, p: &SuiteParams) -> Result<Outcome, Failure> {
    let chosen: Vec<_> = if p.suites.is_empty() {
        suites().iter().collect()
    } else {
        p.suites.iter().filter_map(|n| find_suite(n)).collect()
    };
    let mut rows = Vec::new();
    for suite in chosen {
        let r = run_suite(suite, p.trials.unwrap_or(suite.default_trials), ctx.seed, &ctx.opts);
        rows.push(SuiteRow {
            suite: r.suite,
            identity: r.identity,
            trials: r.trials,
            failures: r.failures,
            first_failure: r.first_failure,
        });
    }
    let failures = rows.iter().map(|r| r.failures).sum();
    let violation = rows.iter().find(|r| r.failures > 0).map(|r| {
        Failure::invariant(r.identity.clone(), format!("{} of {} trials failed in suite {}", r.failures, r.trials, r.suite))
    });
    Ok(Outcome { json: ctx.render(SuitesOut { suites: rows, failures })?, theta: None, eigen: None, violation })
}
