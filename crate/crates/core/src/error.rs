use thiserror::Error;

use crate::graph::Colour;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("colour {colour} out of range 1..={r}")]
    ColourOutOfRange { colour: usize, r: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("edge ({u}, {v}) given conflicting colours {first} and {second}")]
    ConflictingColour {
        u: usize,
        v: usize,
        first: Colour,
        second: Colour,
    },

    #[error("at most {max} colours are supported, got r = {r}")]
    TooManyColours { r: usize, max: usize },

    #[error("vertex sets overlap at vertex {0}")]
    OverlappingSets(usize),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("parameters (r={r}, s={s}, alpha={alpha}) are outside the case {case} regime")]
    OutsideRegime {
        case: u8,
        r: usize,
        s: usize,
        alpha: usize,
    },

    #[error("n = {n} is too small: {reason}")]
    TooSmall { n: usize, reason: String },

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),

    #[error("the Kneser hypergraph has no hyperedges")]
    EdgelessHypergraph,

    #[error("batch precondition violated: {0}")]
    BatchPrecondition(String),

    #[error("every sampled pair was edgeless; the graph violates the independence-number promise")]
    IndependencePromise,

    #[error("independence number {found} exceeds the promised bound {alpha}")]
    IndependenceTooLarge { found: usize, alpha: usize },

    #[error("removing colours would leave vertex {0} uncovered")]
    FilterWouldUncover(usize),

    #[error("engine invariant violated: {0}")]
    Invariant(String),

    #[error("malformed input: {0}")]
    Malformed(String),
}

impl Error {
    /// A stable snake_case name for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::VertexOutOfRange { .. } => "vertex_out_of_range",
            Error::ColourOutOfRange { .. } => "colour_out_of_range",
            Error::SelfLoop(_) => "self_loop",
            Error::ConflictingColour { .. } => "conflicting_colour",
            Error::TooManyColours { .. } => "too_many_colours",
            Error::OverlappingSets(_) => "overlapping_sets",
            Error::InvalidParameters(_) => "invalid_parameters",
            Error::OutsideRegime { .. } => "outside_regime",
            Error::TooSmall { .. } => "too_small",
            Error::TooLarge(_) => "too_large",
            Error::BudgetExceeded(_) => "budget_exceeded",
            Error::EdgelessHypergraph => "edgeless_hypergraph",
            Error::BatchPrecondition(_) => "batch_precondition",
            Error::IndependencePromise => "independence_promise",
            Error::IndependenceTooLarge { .. } => "independence_too_large",
            Error::FilterWouldUncover(_) => "filter_would_uncover",
            Error::Invariant(_) => "invariant",
            Error::Malformed(_) => "malformed",
        }
    }
}
