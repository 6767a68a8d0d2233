//! Kneser hypergraphs `KG^(α+1)(r, r−s)` on colour sets.
//!
//! Vertices are the `(r−s)`-subsets of `[r]`; `α+1` of them form a
//! hyperedge when they are pairwise disjoint. Vertices are kept in colex
//! order, which is the numeric order of their bitmasks, so every list and
//! witness produced here is reproducible.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Colour, MAX_COLOURS};

/// Largest vertex count we are willing to enumerate.
const MAX_KNESER_VERTICES: u64 = 1 << 20;

/// A set of colours, stored as a bitmask with bit `c − 1` for colour `c`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColourSet(u64);

impl ColourSet {
    pub const EMPTY: ColourSet = ColourSet(0);

    pub fn from_mask(mask: u64) -> Self {
        ColourSet(mask)
    }

    pub fn from_colours<I: IntoIterator<Item = Colour>>(colours: I) -> Self {
        let mut mask = 0;
        for c in colours {
            assert!(
                c >= 1 && usize::from(c) <= MAX_COLOURS,
                "colour {c} out of range"
            );
            mask |= 1 << (c - 1);
        }
        ColourSet(mask)
    }

    /// All colours `1..=r`.
    pub fn all(r: usize) -> Self {
        ColourSet(low_bits(r))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, c: Colour) -> bool {
        c >= 1 && usize::from(c) <= MAX_COLOURS && self.0 >> (c - 1) & 1 == 1
    }

    pub fn is_disjoint(self, other: ColourSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn intersection(self, other: ColourSet) -> ColourSet {
        ColourSet(self.0 & other.0)
    }

    pub fn union(self, other: ColourSet) -> ColourSet {
        ColourSet(self.0 | other.0)
    }

    /// Smallest colour in the set.
    pub fn smallest(self) -> Option<Colour> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as Colour + 1)
    }

    pub fn iter(self) -> impl Iterator<Item = Colour> {
        (0..64u8)
            .filter(move |b| self.0 >> b & 1 == 1)
            .map(|b| b + 1)
    }

    /// All `size`-subsets of `[universe]` in colex order.
    pub fn subsets(universe: usize, size: usize) -> Vec<ColourSet> {
        assert!(universe <= MAX_COLOURS);
        if size > universe {
            return Vec::new();
        }
        if size == 0 {
            return vec![ColourSet::EMPTY];
        }
        let limit = if universe == 64 {
            u128::from(u64::MAX) + 1
        } else {
            1u128 << universe
        };
        let mut out = Vec::new();
        let mut mask = low_bits(size);
        while u128::from(mask) < limit {
            out.push(ColourSet(mask));
            // Gosper's hack: next integer with the same popcount.
            let c = mask & mask.wrapping_neg();
            let (r, overflow) = mask.overflowing_add(c);
            if overflow || r == 0 {
                break;
            }
            mask = (((r ^ mask) >> 2) / c) | r;
        }
        out
    }
}

fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl fmt::Debug for ColourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ColourSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for ColourSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// `C(n, k)` with saturation.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    acc as u64
}

fn check_params(r: usize, s: usize, alpha: usize) -> Result<()> {
    if s == 0 || s >= r {
        return Err(Error::InvalidParameters(format!(
            "need 1 <= s < r, got r={r}, s={s}"
        )));
    }
    if alpha == 0 {
        return Err(Error::InvalidParameters("alpha must be at least 1".into()));
    }
    if r > MAX_COLOURS {
        return Err(Error::TooManyColours {
            r,
            max: MAX_COLOURS,
        });
    }
    Ok(())
}

/// True when `s < αr/(α+1)`, the regime where the hypergraph has no edges.
pub fn is_edgeless_regime(r: usize, s: usize, alpha: usize) -> bool {
    s * (alpha + 1) < alpha * r
}

/// Closed form for the chromatic number of `KG^(α+1)(r, r−s)`.
pub fn chi_formula(r: usize, s: usize, alpha: usize) -> Result<usize> {
    check_params(r, s, alpha)?;
    if is_edgeless_regime(r, s, alpha) {
        return Ok(1);
    }
    Ok(1 + s + (s + 1).div_ceil(alpha) - r)
}

/// The Kneser hypergraph with its full vertex and hyperedge lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KneserHypergraph {
    r: usize,
    s: usize,
    alpha: usize,
    vertices: Vec<ColourSet>,
    hyperedges: Vec<Vec<usize>>,
}

impl KneserHypergraph {
    pub fn new(r: usize, s: usize, alpha: usize) -> Result<Self> {
        check_params(r, s, alpha)?;
        let size = r - s;
        if binomial(r as u64, size as u64) > MAX_KNESER_VERTICES {
            return Err(Error::TooLarge(format!("C({r}, {size}) Kneser vertices")));
        }
        let vertices = ColourSet::subsets(r, size);
        let mut hyperedges = Vec::new();
        let mut stack = Vec::with_capacity(alpha + 1);
        collect_disjoint(&vertices, alpha + 1, 0, 0, &mut stack, &mut hyperedges);
        Ok(Self {
            r,
            s,
            alpha,
            vertices,
            hyperedges,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn vertices(&self) -> &[ColourSet] {
        &self.vertices
    }

    /// Hyperedges as increasing lists of vertex indices, in lexicographic order.
    pub fn hyperedges(&self) -> &[Vec<usize>] {
        &self.hyperedges
    }

    pub fn hyperedge_sets(&self, edge: usize) -> Vec<ColourSet> {
        self.hyperedges[edge]
            .iter()
            .map(|&i| self.vertices[i])
            .collect()
    }

    pub fn index_of(&self, x: ColourSet) -> Option<usize> {
        self.vertices.binary_search(&x).ok()
    }

    /// Pairs each vertex with its colour from an index-aligned colouring.
    pub fn label(&self, colouring: &[usize]) -> BTreeMap<ColourSet, usize> {
        self.vertices
            .iter()
            .copied()
            .zip(colouring.iter().copied())
            .collect()
    }

    /// True if no hyperedge is monochromatic under `colouring`.
    pub fn is_proper(&self, colouring: &[usize]) -> bool {
        colouring.len() == self.vertices.len()
            && self.hyperedges.iter().all(|e| {
                let first = colouring[e[0]];
                e.iter().any(|&v| colouring[v] != first)
            })
    }
}

pub fn build_kneser(r: usize, s: usize, alpha: usize) -> Result<KneserHypergraph> {
    KneserHypergraph::new(r, s, alpha)
}

fn collect_disjoint(
    vertices: &[ColourSet],
    k: usize,
    start: usize,
    used: u64,
    stack: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if stack.len() == k {
        out.push(stack.clone());
        return;
    }
    for i in start..vertices.len() {
        if vertices[i].0 & used == 0 {
            stack.push(i);
            collect_disjoint(vertices, k, i + 1, used | vertices[i].0, stack, out);
            stack.pop();
        }
    }
}

/// Exact chromatic number with a witness colouring (colours `1..=χ`,
/// aligned with [`KneserHypergraph::vertices`]).
pub fn chi_exact(kh: &KneserHypergraph, budget: u64) -> Result<(usize, Vec<usize>)> {
    let nv = kh.vertices.len();
    if kh.hyperedges.is_empty() {
        return Ok((1, vec![1; nv]));
    }
    let mut search = ColouringSearch::new(kh, budget);
    for c in 2..=nv {
        if let Some(colouring) = search.run(c)? {
            return Ok((c, colouring));
        }
    }
    unreachable!("distinct colours on every vertex are always proper")
}

/// A proper `c`-colouring if one exists. Deterministic for given `(kh, c)`.
pub fn proper_colouring(kh: &KneserHypergraph, c: usize) -> Option<BTreeMap<ColourSet, usize>> {
    let mut search = ColouringSearch::new(kh, u64::MAX);
    search
        .run(c)
        .expect("unbounded search cannot exceed its budget")
        .map(|colouring| kh.label(&colouring))
}

/// Backtracking in canonical vertex order. A vertex may only open the next
/// unused colour, which removes colour-class permutations and fixes the
/// first vertex to colour 1.
struct ColouringSearch {
    // closing[v]: the other members of every hyperedge whose largest index is v
    closing: Vec<Vec<Vec<usize>>>,
    nodes: u64,
    budget: u64,
}

impl ColouringSearch {
    fn new(kh: &KneserHypergraph, budget: u64) -> Self {
        let mut closing = vec![Vec::new(); kh.vertices.len()];
        for e in &kh.hyperedges {
            let (&last, rest) = e.split_last().expect("hyperedges are nonempty");
            closing[last].push(rest.to_vec());
        }
        Self {
            closing,
            nodes: 0,
            budget,
        }
    }

    fn run(&mut self, c: usize) -> Result<Option<Vec<usize>>> {
        let nv = self.closing.len();
        if nv == 0 {
            return Ok(Some(Vec::new()));
        }
        if c == 0 {
            return Ok(None);
        }
        let mut colouring = vec![0; nv];
        Ok(self.assign(0, 0, c, &mut colouring)?.then_some(colouring))
    }

    fn assign(&mut self, v: usize, used: usize, c: usize, colouring: &mut [usize]) -> Result<bool> {
        if v == colouring.len() {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        for colour in 1..=(used + 1).min(c) {
            let clash = self.closing[v]
                .iter()
                .any(|rest| rest.iter().all(|&u| colouring[u] == colour));
            if clash {
                continue;
            }
            colouring[v] = colour;
            if self.assign(v + 1, used.max(colour), c, colouring)? {
                return Ok(true);
            }
        }
        colouring[v] = 0;
        Ok(false)
    }
}
