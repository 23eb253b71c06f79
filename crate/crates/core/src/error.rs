use thiserror::Error;

/// Errors surfaced by the exact computation layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate set: measure is zero")]
    DegenerateSet,

    #[error("degenerate configuration: rows do not span R^m")]
    DegenerateConfiguration,

    #[error("unbounded polytope")]
    UnboundedPolytope,

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded in the objective direction")]
    UnboundedObjective,

    #[error("colinear functionals")]
    ColinearFunctionals,

    #[error("zero functional")]
    ZeroFunctional,

    #[error("non-generic configuration: skeleton adjacency undefined here")]
    NonGeneric,

    #[error("slot {0} out of range")]
    SlotOutOfRange(usize),

    #[error("slot indices must be distinct")]
    EqualSlots,

    #[error("|E_{slot}| = {got} but e_{slot} = {want}")]
    MeasureMismatch {
        slot: usize,
        got: String,
        want: String,
    },

    #[error("tuple has {got} slots, configuration has {want}")]
    SlotCountMismatch { got: usize, want: usize },

    #[error("breakpoint congestion near s (smallest window tried: {smallest_h})")]
    BreakpointCongestion { smallest_h: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("random preset failed nondegeneracy after {0} attempts")]
    RandomRetriesExhausted(usize),

    #[error("hypothesis check failed: {0}")]
    HypothesisFailed(String),

    #[error("family produced no sample with positive orbit distance")]
    DegenerateFamily,

    #[error(
        "sample {sample} has deficit 0 but orbit distance {dist} > 0 (would contradict uniqueness)"
    )]
    UniquenessCounterexample { sample: usize, dist: String },

    #[error("BLL inequality violated: phi = {phi} > phi_star = {phi_star} (internal error)")]
    BllViolation { phi: String, phi_star: String },

    #[error("invalid rational literal `{0}`")]
    BadRational(String),

    #[error("invalid parameter: {0}")]
    BadParameter(String),

    #[error("time {0} outside [0, 1]")]
    TimeOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
