use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("degenerate symplectic form: {0}")]
    Degenerate(String),

    #[error("subspace is {found}, expected {expected}")]
    Classification { expected: &'static str, found: &'static str },

    #[error("no unitary generator: dim X+ = {plus}, dim X- = {minus}")]
    NoGenerator { plus: usize, minus: usize },

    #[error("subspace is not co-isotropic")]
    NotCoisotropic,

    #[error("complement does not satisfy X = V + (lam + mu)")]
    Complement,

    #[error("structural inconsistency: {0}")]
    Structural(String),

    #[error("composite coefficient formula not applicable: {0}")]
    NotApplicable(String),

    #[error("insufficient sampling resolution near s = {s}: {detail}")]
    Resolution { s: f64, detail: String },

    #[error("path invariant violated at s = {s}: {detail}")]
    PathInvariant { s: f64, detail: String },

    #[error("no crossing at t = {t}")]
    NoCrossing { t: f64 },

    #[error("degenerate crossing at t = {t}")]
    DegenerateCrossing { t: f64 },

    #[error("path is not semi-positive at t = {t}")]
    NotSemipositive { t: f64 },

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("invariant violated: {identity}: {detail}")]
    Invariant { identity: String, detail: String },
}

impl Error {
    /// Numerical gates: sampling, conditioning, integration. Distinguished from
    /// schema-like input errors and from broken identities.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_)
                | Error::Resolution { .. }
                | Error::DegenerateCrossing { .. }
                | Error::Integration(_)
                | Error::NotApplicable(_)
        )
    }

    pub fn is_invariant(&self) -> bool {
        matches!(
            self,
            Error::Invariant { .. } | Error::PathInvariant { .. } | Error::Structural(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
