//! Monochromatic pieces, coverings, and the covering validator.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{Colour, ColouredGraph, VertexSet};

/// One monochromatic path, or a colourless single vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoPiece {
    pub vertices: Vec<usize>,
    pub colour: Option<Colour>,
}

impl MonoPiece {
    pub fn singleton(v: usize) -> Self {
        Self {
            vertices: vec![v],
            colour: None,
        }
    }

    /// A path piece. A single vertex is always colourless, whatever `colour` says.
    pub fn path(vertices: Vec<usize>, colour: Colour) -> Self {
        let colour = (vertices.len() >= 2).then_some(colour);
        Self { vertices, colour }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }
}

/// A collection of pieces that (when valid) jointly cover every vertex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Covering {
    pub pieces: Vec<MonoPiece>,
}

impl Covering {
    pub fn new(pieces: Vec<MonoPiece>) -> Self {
        Self { pieces }
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Distinct colours of the pieces; colourless pieces contribute nothing.
    pub fn colours(&self) -> BTreeSet<Colour> {
        self.pieces.iter().filter_map(|p| p.colour).collect()
    }

    /// `col(S)`.
    pub fn col(&self) -> usize {
        self.colours().len()
    }

    pub fn singleton_count(&self) -> usize {
        self.pieces.iter().filter(|p| p.colour.is_none()).count()
    }

    pub fn push(&mut self, piece: MonoPiece) {
        self.pieces.push(piece);
    }

    pub fn extend<I: IntoIterator<Item = MonoPiece>>(&mut self, pieces: I) {
        self.pieces.extend(pieces);
    }

    /// The set of vertices touched by at least one piece. Out-of-range
    /// vertices are ignored.
    pub fn covered(&self, n: usize) -> VertexSet {
        let mut set = VertexSet::new(n);
        for v in self.pieces.iter().flat_map(|p| p.vertices.iter().copied()) {
            if v < n {
                set.insert(v);
            }
        }
        set
    }
}

/// Why a piece failed validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceFault {
    Empty,
    VertexOutOfRange {
        vertex: usize,
    },
    RepeatedVertex {
        vertex: usize,
    },
    MissingColour,
    ColourOutOfRange {
        colour: Colour,
    },
    ColouredSingleton {
        colour: Colour,
    },
    NotAdjacent {
        u: usize,
        v: usize,
    },
    Miscoloured {
        u: usize,
        v: usize,
        expected: Colour,
        found: Colour,
    },
}

impl fmt::Display for PieceFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PieceFault::Empty => write!(f, "piece has no vertices"),
            PieceFault::VertexOutOfRange { vertex } => write!(f, "vertex {vertex} out of range"),
            PieceFault::RepeatedVertex { vertex } => write!(f, "vertex {vertex} repeated"),
            PieceFault::MissingColour => write!(f, "path with edges has no colour"),
            PieceFault::ColourOutOfRange { colour } => write!(f, "colour {colour} out of range"),
            PieceFault::ColouredSingleton { colour } => {
                write!(f, "single vertex declared with colour {colour}")
            }
            PieceFault::NotAdjacent { u, v } => write!(f, "({u}, {v}) is not an edge"),
            PieceFault::Miscoloured {
                u,
                v,
                expected,
                found,
            } => write!(
                f,
                "edge ({u}, {v}) has colour {found}, piece declares {expected}"
            ),
        }
    }
}

/// Outcome of [`validate_covering`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub valid: bool,
    pub failures: Vec<(usize, PieceFault)>,
    pub colours_used: BTreeSet<Colour>,
    pub uncovered: VertexSet,
    pub colour_budget: usize,
}

impl CoverReport {
    pub fn within_budget(&self) -> bool {
        self.colours_used.len() <= self.colour_budget
    }
}

/// Checks that every piece is a path of `g` in its declared colour, that
/// the pieces cover every vertex, and that at most `s` colours are used.
pub fn validate_covering(g: &ColouredGraph, cover: &Covering, s: usize) -> CoverReport {
    let n = g.n();
    let mut failures = Vec::new();
    let mut colours_used = BTreeSet::new();
    let mut covered = VertexSet::new(n);

    for (idx, piece) in cover.pieces.iter().enumerate() {
        if let Some(fault) = check_piece(g, piece) {
            failures.push((idx, fault));
        }
        for &v in piece.vertices.iter().filter(|&&v| v < n) {
            covered.insert(v);
        }
        if piece.len() >= 2 {
            if let Some(c) = piece.colour {
                colours_used.insert(c);
            }
        }
    }

    let mut uncovered = VertexSet::full(n);
    uncovered.difference_with(&covered);
    let valid = failures.is_empty() && uncovered.is_empty() && colours_used.len() <= s;
    CoverReport {
        valid,
        failures,
        colours_used,
        uncovered,
        colour_budget: s,
    }
}

fn check_piece(g: &ColouredGraph, piece: &MonoPiece) -> Option<PieceFault> {
    let n = g.n();
    if piece.vertices.is_empty() {
        return Some(PieceFault::Empty);
    }
    let mut seen = VertexSet::new(n);
    for &v in &piece.vertices {
        if v >= n {
            return Some(PieceFault::VertexOutOfRange { vertex: v });
        }
        if seen.contains(v) {
            return Some(PieceFault::RepeatedVertex { vertex: v });
        }
        seen.insert(v);
    }
    if piece.len() == 1 {
        return piece
            .colour
            .map(|colour| PieceFault::ColouredSingleton { colour });
    }
    let expected = match piece.colour {
        None => return Some(PieceFault::MissingColour),
        Some(c) if c == 0 || usize::from(c) > g.r() => {
            return Some(PieceFault::ColourOutOfRange { colour: c })
        }
        Some(c) => c,
    };
    for w in piece.vertices.windows(2) {
        let (u, v) = (w[0], w[1]);
        match g.colour(u, v) {
            None => return Some(PieceFault::NotAdjacent { u, v }),
            Some(found) if found != expected => {
                return Some(PieceFault::Miscoloured {
                    u,
                    v,
                    expected,
                    found,
                })
            }
            Some(_) => {}
        }
    }
    None
}
