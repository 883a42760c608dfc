use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::failure::Failure;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    MaslovPath,
    SpectralFlow,
    ReductionDemo,
    BvpDesuspension,
    BvpSplitting,
    PropertySuite,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rank: Option<f64>,
    pub zero: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema: u32,
    kind: Kind,
    name: Option<String>,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default = "empty_params")]
    params: serde_json::Value,
}

fn default_seed() -> u64 {
    1
}

fn empty_params() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathChoice {
    Benchmark,
    Random,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Winding,
    Crossing,
    Reduced,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaslovPathParams {
    pub path: PathChoice,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "path_samples")]
    pub samples: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralFlowParams {
    #[serde(default = "three")]
    pub n: usize,
    #[serde(default = "path_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReductionParams {
    #[serde(default = "eight")]
    pub n: usize,
    #[serde(default = "path_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyChoice {
    ScalarShift,
    DiagonalShift,
    PlanarShift,
    PlanarModulated,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BcChoice {
    Periodic,
    DirichletFirst,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BvpParams {
    pub family: FamilyChoice,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "periodic")]
    pub bc: BcChoice,
    #[serde(default = "half")]
    pub cut: f64,
    #[serde(default = "grid")]
    pub grid: usize,
    #[serde(default = "bvp_samples")]
    pub samples: usize,
    #[serde(default = "ode_tol")]
    pub ode_tol: f64,
    #[serde(default = "s_range")]
    pub s_range: [f64; 2],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    #[serde(default)]
    pub suites: Vec<String>,
    pub trials: Option<usize>,
}

fn one() -> usize {
    1
}
fn two() -> usize {
    2
}
fn three() -> usize {
    3
}
fn eight() -> usize {
    8
}
fn path_samples() -> usize {
    24
}
fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::Winding, MethodChoice::Crossing]
}
fn periodic() -> BcChoice {
    BcChoice::Periodic
}
fn half() -> f64 {
    0.5
}
fn grid() -> usize {
    64
}
fn bvp_samples() -> usize {
    40
}
fn ode_tol() -> f64 {
    1e-10
}
fn s_range() -> [f64; 2] {
    [-1.0, 1.0]
}

#[derive(Debug, Clone)]
pub enum Params {
    MaslovPath(MaslovPathParams),
    SpectralFlow(SpectralFlowParams),
    ReductionDemo(ReductionParams),
    BvpDesuspension(BvpParams),
    BvpSplitting(BvpParams),
    PropertySuite(SuiteParams),
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub kind: Kind,
    pub name: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub params: Params,
}

fn field_error<E: std::fmt::Display>(prefix: &str, err: serde_path_to_error::Error<E>) -> Failure {
    let path = err.path().to_string();
    let at = match (prefix.is_empty(), path == ".") {
        (true, true) => "config".to_string(),
        (true, false) => path,
        (false, true) => prefix.to_string(),
        (false, false) => format!("{prefix}.{path}"),
    };
    Failure::Schema(format!("{at}: {}", err.inner()))
}

fn params<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, Failure> {
    serde_path_to_error::deserialize(value).map_err(|e| field_error("params", e))
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Schema(format!("{field}: {msg}"))
}

fn at_least(field: &str, value: usize, min: usize) -> Result<(), Failure> {
    if value < min {
        return Err(invalid(field, format!("must be at least {min}, got {value}")));
    }
    Ok(())
}

fn positive(field: &str, value: f64) -> Result<(), Failure> {
    if !(value.is_finite() && value > 0.0) {
        return Err(invalid(field, format!("must be a positive number, got {value}")));
    }
    Ok(())
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Schema(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        Scenario::parse(&text, stem)
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Scenario, Failure> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Failure::Schema(format!("config: not valid JSON: {e}")))?;
        match value.get("schema") {
            None => return Err(invalid("schema", "missing version field")),
            Some(v) if v.as_u64() != Some(SCHEMA_VERSION as u64) => {
                return Err(invalid("schema", format!("unsupported version {v}, expected {SCHEMA_VERSION}")))
            }
            Some(_) => {}
        }
        let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| field_error("", e))?;
        debug_assert_eq!(raw.schema, SCHEMA_VERSION);
        let params = match raw.kind {
            Kind::MaslovPath => Params::MaslovPath(params(raw.params)?),
            Kind::SpectralFlow => Params::SpectralFlow(params(raw.params)?),
            Kind::ReductionDemo => Params::ReductionDemo(params(raw.params)?),
            Kind::BvpDesuspension => Params::BvpDesuspension(params(raw.params)?),
            Kind::BvpSplitting => Params::BvpSplitting(params(raw.params)?),
            Kind::PropertySuite => Params::PropertySuite(params(raw.params)?),
        };
        let name = raw.name.unwrap_or_else(|| default_name.to_string());
        if name.is_empty() || name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a non-empty file-name stem"));
        }
        let scenario = Scenario { kind: raw.kind, name, seed: raw.seed, tolerances: raw.tolerances, params };
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), Failure> {
        if let Some(r) = self.tolerances.rank {
            if !(r > 0.0 && r < 1.0) {
                return Err(invalid("tolerances.rank", format!("must lie in (0, 1), got {r}")));
            }
        }
        if let Some(z) = self.tolerances.zero {
            positive("tolerances.zero", z)?;
        }
        match &self.params {
            Params::MaslovPath(p) => {
                at_least("params.n", p.n, 1)?;
                at_least("params.samples", p.samples, 2)?;
                if p.methods.is_empty() {
                    return Err(invalid("params.methods", "must name at least one method"));
                }
            }
            Params::SpectralFlow(p) => {
                at_least("params.n", p.n, 1)?;
                at_least("params.samples", p.samples, 2)?;
            }
            Params::ReductionDemo(p) => {
                at_least("params.n", p.n, 1)?;
                at_least("params.samples", p.samples, 2)?;
            }
            Params::BvpDesuspension(p) | Params::BvpSplitting(p) => {
                at_least("params.k", p.k, 1)?;
                at_least("params.grid", p.grid, 4)?;
                at_least("params.samples", p.samples, 2)?;
                positive("params.ode_tol", p.ode_tol)?;
                let [lo, hi] = p.s_range;
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(invalid("params.s_range", format!("must be an increasing pair, got [{lo}, {hi}]")));
                }
                if p.k != 1 && p.family != FamilyChoice::DiagonalShift {
                    return Err(invalid("params.k", "only the diagonal_shift family takes a dimension"));
                }
                if self.kind == Kind::BvpSplitting && p.bc != BcChoice::Periodic {
                    return Err(invalid("params.bc", "the splitting scenario uses the periodic condition"));
                }
                if p.bc == BcChoice::DirichletFirst && p.family == FamilyChoice::ScalarShift {
                    return Err(invalid("params.bc", "dirichlet_first needs a family with k >= 2"));
                }
            }
            Params::PropertySuite(p) => {
                for (i, name) in p.suites.iter().enumerate() {
                    if maslovlab::verification::find_suite(name).is_none() {
                        return Err(invalid(&format!("params.suites[{i}]"), format!("unknown suite `{name}`")));
                    }
                }
                if let Some(t) = p.trials {
                    at_least("params.trials", t, 1)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn message(text: &str) -> String {
        match Scenario::parse(text, "t") {
            Err(Failure::Schema(m)) => m,
            other => panic!("expected schema failure, got {other:?}"),
        }
    }

    #[test]
    fn field_paths_in_messages() {
        let m = message(r#"{"schema": 1, "kind": "maslov_path", "params": {"path": "random", "n": "x"}}"#);
        assert!(m.starts_with("params.n:"), "{m}");
        let m = message(r#"{"schema": 1, "kind": "maslov_path", "params": {"path": "random", "extra": 1}}"#);
        assert!(m.starts_with("params.extra:") && m.contains("unknown field"), "{m}");
        let m = message(r#"{"schema": 1, "kind": "bvp_splitting", "params": {"family": "scalar_shift", "s_range": [1, 0]}}"#);
        assert!(m.starts_with("params.s_range:"), "{m}");
        let m = message(r#"{"schema": 2, "kind": "maslov_path"}"#);
        assert!(m.starts_with("schema:"), "{m}");
        let m = message(r#"{"schema": 1, "kind": "nope"}"#);
        assert!(m.starts_with("kind:"), "{m}");
        let m = message(r#"{"schema": 1, "kind": "property_suite", "params": {"suites": ["flipping", "bogus"]}}"#);
        assert!(m.starts_with("params.suites[1]:"), "{m}");
    }

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::parse(r#"{"schema": 1, "kind": "bvp_desuspension", "params": {"family": "scalar_shift"}}"#, "x").unwrap();
        assert_eq!((s.name.as_str(), s.seed), ("x", 1));
        match s.params {
            Params::BvpDesuspension(p) => assert_eq!((p.grid, p.samples, p.s_range, p.bc), (64, 40, [-1.0, 1.0], BcChoice::Periodic)),
            other => panic!("{other:?}"),
        }
    }
}
