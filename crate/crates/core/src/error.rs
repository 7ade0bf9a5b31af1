use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("denominator is identically zero")]
    DivisionByZero,

    #[error("zero denominator at evaluation point")]
    ZeroDenominatorAtPoint,

    #[error("no value bound for `{0}`")]
    Unbound(String),

    #[error("expression contains `{0}`, which is of the chart's top order; total derivative would leave the chart")]
    OrderOverflow(String),

    #[error("point action is not projectable: induced coefficient still depends on `{0}`")]
    NotProjectable(String),

    #[error("no valid sample point found after {0} attempts")]
    SamplingExhausted(usize),

    #[error("constraint cannot be solved for a chart coordinate by rational rearrangement")]
    NotSolvable,

    #[error("rank did not stabilize before truncation cap K = {0}")]
    CapExceeded(usize),

    #[error("candidate is identically zero")]
    ZeroCandidate,

    #[error("equation is degenerate (sigma*f_sigma - f vanishes identically)")]
    Degenerate,

    #[error("transformation is not invertible: {0}")]
    NonInvertible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block `{block}` is not a relative invariant of `{generator}`")]
    NotRelative { block: String, generator: String },
}
