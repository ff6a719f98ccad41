use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A primitive was applied outside its domain, e.g. `sqrt` of a negative number.
    #[error("{op} domain violation at argument {arg:e}{}", fmt_tag(.tag))]
    Domain {
        op: &'static str,
        arg: f64,
        tag: Option<String>,
    },

    #[error("non-finite input in slot {slot}")]
    NonFinite { slot: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singular matrix (condition estimate {cond:e})")]
    Singular { cond: f64 },

    #[error("rank-deficient least-squares system (rank {rank} of {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("{what}: argument {arg} outside admissible range [{lo}, {hi}]")]
    OutOfRange {
        what: String,
        arg: f64,
        lo: f64,
        hi: f64,
    },

    #[error("domain misconfigured: {rejected} of {attempts} samples rejected")]
    DomainRejection { rejected: usize, attempts: usize },

    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("ODE integration hit a singularity; reachable extent [{lo}, {hi}]")]
    OdeSingular { lo: f64, hi: f64 },

    #[error("no case matches parameters: {0}")]
    NoMatchingCase(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn fmt_tag(tag: &Option<String>) -> String {
    match tag {
        Some(t) => format!(" in `{t}`"),
        None => String::new(),
    }
}

/// Attaches a sub-expression tag to domain errors.
pub trait Tag<T> {
    fn tag(self, tag: &str) -> Result<T>;
}

impl<T> Tag<T> for Result<T> {
    fn tag(self, t: &str) -> Result<T> {
        self.map_err(|e| match e {
            Error::Domain { op, arg, tag: None } => Error::Domain {
                op,
                arg,
                tag: Some(t.to_string()),
            },
            other => other,
        })
    }
}
