//! Edge-coloured graphs and the small amount of graph machinery the rest of
//! the crate needs.
//!
//! Vertices are the dense integers `0..n` and colours are `1..=r`. A graph is
//! immutable once built; algorithms take vertex subsets as views.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An edge colour in `1..=r`.
pub type Colour = u8;

/// Largest supported number of colours. Colour sets are stored as `u64` masks.
pub const MAX_COLOURS: usize = 64;

/// A simple graph on `0..n` with a total edge-colouring in `1..=r`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct ColouredGraph {
    n: usize,
    r: usize,
    // Row-major n×n matrix, 0 marks a non-edge.
    colours: Vec<Colour>,
    edge_count: usize,
}

/// The JSON interchange form: `{"n": .., "r": .., "edges": [[u, v, colour], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub r: usize,
    pub edges: Vec<(usize, usize, usize)>,
}

impl ColouredGraph {
    /// Builds a graph from `(u, v, colour)` triples.
    ///
    /// Duplicate entries are accepted when they agree on the colour.
    pub fn from_edges(n: usize, r: usize, edges: &[(usize, usize, usize)]) -> Result<Self> {
        let mut b = GraphBuilder::new(n, r)?;
        for &(u, v, c) in edges {
            b.add_edge(u, v, c)?;
        }
        Ok(b.build())
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of colours.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// The colour of edge `uv`, or `None` if `u` and `v` are not adjacent.
    #[inline]
    pub fn colour(&self, u: usize, v: usize) -> Option<Colour> {
        match self.colours[u * self.n + v] {
            0 => None,
            c => Some(c),
        }
    }

    #[inline]
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.colours[u * self.n + v] != 0
    }

    /// Neighbours of `u` with their edge colours, in increasing vertex order.
    pub fn neighbours(&self, u: usize) -> impl Iterator<Item = (usize, Colour)> + '_ {
        self.colours[u * self.n..(u + 1) * self.n]
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(v, &c)| (v, c))
    }

    /// All edges `(u, v, colour)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Colour)> + '_ {
        (0..self.n).flat_map(move |u| {
            ((u + 1)..self.n).filter_map(move |v| self.colour(u, v).map(|c| (u, v, c)))
        })
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile::from(self.clone())
    }

    /// A uniformly random `r`-colouring of the complete graph `K_n`.
    pub fn random_complete<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<Self> {
        Self::random(n, r, 1.0, rng)
    }

    /// A random graph where each pair is an edge with probability `p` and
    /// edges receive independent uniform colours.
    pub fn random<R: Rng + ?Sized>(n: usize, r: usize, p: f64, rng: &mut R) -> Result<Self> {
        let mut b = GraphBuilder::new(n, r)?;
        for u in 0..n {
            for v in (u + 1)..n {
                if p >= 1.0 || rng.gen_bool(p) {
                    let c = rng.gen_range(1..=r);
                    b.add_edge(u, v, c)?;
                }
            }
        }
        Ok(b.build())
    }
}

impl fmt::Debug for ColouredGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ColouredGraph")
            .field("n", &self.n)
            .field("r", &self.r)
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl TryFrom<GraphFile> for ColouredGraph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Self::from_edges(file.n, file.r, &file.edges)
    }
}

impl From<ColouredGraph> for GraphFile {
    fn from(g: ColouredGraph) -> Self {
        GraphFile {
            n: g.n,
            r: g.r,
            edges: g.edges().map(|(u, v, c)| (u, v, usize::from(c))).collect(),
        }
    }
}

/// Incremental construction of a [`ColouredGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    n: usize,
    r: usize,
    colours: Vec<Colour>,
    edge_count: usize,
}

impl GraphBuilder {
    pub fn new(n: usize, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParameters("r must be at least 1".into()));
        }
        if r > MAX_COLOURS {
            return Err(Error::TooManyColours {
                r,
                max: MAX_COLOURS,
            });
        }
        let cells = n
            .checked_mul(n)
            .ok_or_else(|| Error::TooLarge(format!("n = {n}")))?;
        Ok(Self {
            n,
            r,
            colours: vec![0; cells],
            edge_count: 0,
        })
    }

    pub fn add_edge(&mut self, u: usize, v: usize, colour: usize) -> Result<()> {
        let n = self.n;
        for w in [u, v] {
            if w >= n {
                return Err(Error::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let existing = self.colours[u * n + v];
        if existing != 0 && usize::from(existing) != colour {
            return Err(Error::ConflictingColour {
                u,
                v,
                first: existing,
                second: Colour::try_from(colour).unwrap_or(Colour::MAX),
            });
        }
        if colour == 0 || colour > self.r {
            return Err(Error::ColourOutOfRange { colour, r: self.r });
        }
        if existing == 0 {
            let c = colour as Colour;
            self.colours[u * n + v] = c;
            self.colours[v * n + u] = c;
            self.edge_count += 1;
        }
        Ok(())
    }

    pub fn build(self) -> ColouredGraph {
        ColouredGraph {
            n: self.n,
            r: self.r,
            colours: self.colours,
            edge_count: self.edge_count,
        }
    }
}

/// A subset of `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(n),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n);
        bits.insert_range(..);
        Self { bits }
    }

    /// Builds a set from members; panics if a member is `>= n`.
    pub fn from_vertices<I: IntoIterator<Item = usize>>(n: usize, vertices: I) -> Self {
        let mut s = Self::new(n);
        for v in vertices {
            s.insert(v);
        }
        s
    }

    /// Size of the ground set.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.bits.len(), "vertex {v} out of range");
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        if v < self.bits.len() {
            self.bits.set(v, false);
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn first_common(&self, other: &VertexSet) -> Option<usize> {
        self.bits.intersection(&other.bits).next()
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        self.bits.union_with(&other.bits);
    }
}

impl Serialize for VertexSet {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Number of edges of each colour between disjoint sets `a` and `b`.
///
/// Colours with no edges are absent from the map.
pub fn colour_profile(
    g: &ColouredGraph,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<BTreeMap<Colour, usize>> {
    if let Some(v) = a.first_common(b) {
        return Err(Error::OverlappingSets(v));
    }
    let mut counts = BTreeMap::new();
    for u in a.iter() {
        for v in b.iter() {
            if let Some(c) = g.colour(u, v) {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}

/// Exact independence number by branch and bound on the complement.
///
/// `budget` caps the number of search nodes; hitting it returns
/// [`Error::BudgetExceeded`].
pub fn independence_number(g: &ColouredGraph, budget: u64) -> Result<usize> {
    let n = g.n();
    if n == 0 {
        return Ok(0);
    }
    // Cliques of the complement are independent sets of g.
    let words = n.div_ceil(64);
    let mut comp = vec![Bits::empty(words); n];
    for (u, row) in comp.iter_mut().enumerate() {
        for v in 0..n {
            if u != v && !g.adjacent(u, v) {
                row.set(v);
            }
        }
    }
    let mut search = CliqueSearch {
        adj: comp,
        best: 0,
        nodes: 0,
        budget,
    };
    let mut all = Bits::empty(words);
    for v in 0..n {
        all.set(v);
    }
    search.expand(0, all)?;
    Ok(search.best)
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(words: usize) -> Self {
        Bits(vec![0; words])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }
}

struct CliqueSearch {
    adj: Vec<Bits>,
    best: usize,
    nodes: u64,
    budget: u64,
}

impl CliqueSearch {
    fn expand(&mut self, size: usize, mut cand: Bits) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let (order, bounds) = self.colour_sort(&cand);
        for idx in (0..order.len()).rev() {
            if size + bounds[idx] <= self.best {
                return Ok(());
            }
            let v = order[idx];
            let next = cand.and(&self.adj[v]);
            if next.is_empty() {
                self.best = self.best.max(size + 1);
            } else {
                self.expand(size + 1, next)?;
            }
            cand.clear(v);
        }
        Ok(())
    }

    /// Greedy colouring of the candidate set; `bounds[i]` is the number of
    /// colour classes used up to and including `order[i]`.
    fn colour_sort(&self, cand: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut pool = cand.clone();
        let mut order = Vec::new();
        let mut bounds = Vec::new();
        let mut class = 0;
        while !pool.is_empty() {
            class += 1;
            let mut q = pool.clone();
            while let Some(v) = q.first() {
                q.clear(v);
                q.and_not_assign(&self.adj[v]);
                pool.clear(v);
                order.push(v);
                bounds.push(class);
            }
        }
        (order, bounds)
    }
}
