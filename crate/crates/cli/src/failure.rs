use std::fmt;

use maslovlab::Error;

#[derive(Debug)]
pub enum Failure {
    /// configuration, usage, or I/O problem
    Schema(String),
    /// a sampling, conditioning or integration gate refused to produce an answer
    Numerical(String),
    Invariant { identity: String, detail: String },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Schema(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Invariant { .. } => 3,
        }
    }

    pub fn invariant(identity: impl Into<String>, detail: impl Into<String>) -> Failure {
        Failure::Invariant { identity: identity.into(), detail: detail.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Schema(m) => write!(f, "error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical gate: {m}"),
            Failure::Invariant { identity, detail } => write!(f, "invariant violated: {identity}: {detail}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Invariant { identity, detail } => Failure::Invariant { identity, detail },
            e if e.is_invariant() => Failure::invariant("path structure", e.to_string()),
            Error::Invalid(_) | Error::Dimension { .. } => Failure::Schema(e.to_string()),
            e => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Schema(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Failure {
        Failure::Schema(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Failure {
        Failure::Schema(format!("json: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        let inv = Error::Invariant { identity: "catenation".into(), detail: "1 != 2".into() };
        assert_eq!(Failure::from(inv).exit_code(), 3);
        assert_eq!(Failure::from(Error::PathInvariant { s: 0.5, detail: "x".into() }).exit_code(), 3);
        assert_eq!(Failure::from(Error::Resolution { s: 0.5, detail: "x".into() }).exit_code(), 2);
        assert_eq!(Failure::from(Error::Integration("x".into())).exit_code(), 2);
        assert_eq!(Failure::from(Error::DegenerateCrossing { t: 0.1 }).exit_code(), 2);
        assert_eq!(Failure::from(Error::Invalid("x".into())).exit_code(), 1);
    }

    #[test]
    fn invariant_message_names_the_identity() {
        let f = Failure::invariant("catenation", "1 != 2");
        assert_eq!(f.to_string(), "invariant violated: catenation: 1 != 2");
    }
}
