use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field `{field}` is out of range: {value}")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("conditioning event `{event}` has probability zero")]
    DegenerateConditioning { event: String },

    #[error("model satisfies neither the symmetric-above nor the symmetric-below premises")]
    ConstraintsNotMet,

    #[error("constraint set `{name}` is unsatisfiable: {reason}")]
    UnsatisfiableConstraints { name: String, reason: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("path model has |beta * delta| = 1, regression denominator vanishes")]
    SingularDenominator,

    #[error("unit-variance standardization is impossible: {0}")]
    InvalidVariance(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("input contains no records")]
    EmptyInput,

    #[error("no records in cell (a={a}, d={d})")]
    DegenerateCell { a: bool, d: bool },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
