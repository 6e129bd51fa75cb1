use thiserror::Error;

/// Errors raised by mesh construction, the spatial operator, the limiters and
/// the time integrators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutDgError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("subdomain {subdomain} has no element with a large intersection (delta = {delta})")]
    NoLargeElement { subdomain: usize, delta: f64 },

    #[error("stabilized mass block of macro-element {macro_id} is not positive definite")]
    SingularBlock { macro_id: usize },

    #[error("inadmissible Euler state at x = {x}: rho = {rho}, p = {pressure}")]
    InadmissibleState { x: f64, rho: f64, pressure: f64 },

    #[error("zero density in pressure evaluation")]
    ZeroDensity,

    #[error("macro mean {mean} lies outside the bounds [{lower}, {upper}]")]
    MeanOutOfBounds { mean: f64, lower: f64, upper: f64 },

    #[error("macro mean (rho = {rho}, p = {pressure}) is not admissible")]
    MeanNotAdmissible { rho: f64, pressure: f64 },

    #[error("multistep history holds {have} of {need} states")]
    ColdHistory { have: usize, need: usize },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("no reference solution for `{0}`")]
    NoReference(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated at t = {time}: {detail}")]
    InvariantViolation { time: f64, detail: String },

    #[error("step {step} (t = {time}): {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<CutDgError>,
    },
}

impl CutDgError {
    /// Errors that signal a broken bound or admissibility guarantee, as
    /// opposed to bad input or a numerical breakdown.
    pub fn is_invariant_violation(&self) -> bool {
        match self {
            Self::InvariantViolation { .. }
            | Self::MeanOutOfBounds { .. }
            | Self::MeanNotAdmissible { .. }
            | Self::InadmissibleState { .. } => true,
            Self::StepFailed { source, .. } => source.is_invariant_violation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, CutDgError>;
