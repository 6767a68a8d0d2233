//! Covering edge-coloured graphs by monochromatic paths that use few colours.
//!
//! The crate is organised around the objects of the problem:
//!
//! - [`graph`]: edge-coloured graphs, vertex sets, exact independence number
//!   and bipartite colour statistics.
//! - [`covering`]: monochromatic pieces, coverings and the covering validator.
//! - [`kneser`]: Kneser hypergraphs on colour sets, their chromatic number
//!   (closed form and exact search) and proper colourings.
//! - [`constructions`]: Johnson graphs and the three families of extremal
//!   colourings that force large coverings.
//! - [`engine`]: the covering algorithm driven by the `Σ log |V_{S,X}|`
//!   potential, ending with a filter that keeps at most `s` colours.
//! - [`oracle`]: exact minimum coverings for small graphs.
//! - [`experiment`]: scaling runs and log–log slope fitting.
//!
//! ```
//! use monocover_core::{ColouredGraph, EngineConfig, cover_few_colours, validate_covering};
//!
//! let g = ColouredGraph::from_edges(3, 2, &[(0, 1, 1), (1, 2, 2), (0, 2, 1)]).unwrap();
//! let (cover, _trace) = cover_few_colours(&g, 1, 1, &EngineConfig::default()).unwrap();
//! assert!(validate_covering(&g, &cover, 1).valid);
//! ```

pub mod constructions;
pub mod covering;
pub mod engine;
mod error;
pub mod experiment;
pub mod graph;
pub mod kneser;
pub mod oracle;

pub use constructions::{
    construct_case1, construct_case2, construct_case3, construct_lower_bound, johnson,
    ConstructionOutput, SimpleGraph,
};
pub use covering::{validate_covering, CoverReport, Covering, MonoPiece, PieceFault};
pub use engine::{
    balanced_hyperedge, baseline_cover, cover_few_colours, exclusive_cover_set, filter_colours,
    potential, removable_batch, EngineConfig, EngineTrace,
};
pub use error::{Error, Result};
pub use experiment::{Family, ScalingRow};
pub use graph::{Colour, ColouredGraph, VertexSet};
pub use kneser::{
    build_kneser, chi_exact, chi_formula, proper_colouring, ColourSet, KneserHypergraph,
};
pub use oracle::{enumerate_mono_paths, min_cover_exact, PathCatalogue};
