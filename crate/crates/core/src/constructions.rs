//! Coloured graphs with independence number at most `α` on which every
//! monochromatic path covering with at most `s` colours is large.
//!
//! Three families, chosen by where `(r, s, α)` falls relative to the
//! chromatic number `χ` of the Kneser hypergraph:
//!
//! - case 1 (`χ = 1`): a blow-up of the Johnson graph `J(r, r−s)`;
//! - case 2 (`s < χα`): `χ` layers of sizes about `n^{i/χ}`, each split into
//!   `k_i ≤ α` cliques, complete between layers;
//! - case 3 (`s ≥ χα`): as case 2, except the first layer is a Johnson
//!   blow-up on the colours `[t]`, `t = r − α(χ−1)`.
//!
//! Vertices of each part are contiguous. Where the colouring has a free
//! choice of colour, the smallest one is taken.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{independence_number, Colour, ColouredGraph, GraphBuilder, VertexSet};
use crate::kneser::{binomial, chi_formula, is_edgeless_regime, ColourSet};

/// An uncoloured simple graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    adj: Vec<VertexSet>,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            adj: vec![VertexSet::new(n); n],
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert_ne!(u, v, "self-loop");
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// The same graph with every edge in colour 1.
    pub fn to_coloured(&self) -> ColouredGraph {
        let mut b = GraphBuilder::new(self.n, 1).expect("one colour is always valid");
        for u in 0..self.n {
            for v in self.adj[u].iter().filter(|&v| v > u) {
                b.add_edge(u, v, 1).expect("edges are in range");
            }
        }
        b.build()
    }

    pub fn independence_number(&self, budget: u64) -> Result<usize> {
        independence_number(&self.to_coloured(), budget)
    }
}

/// The Johnson graph `J(a, b)`: `b`-subsets of `[a]` in colex order,
/// adjacent when they intersect.
#[derive(Debug, Clone)]
pub struct Johnson {
    pub sets: Vec<ColourSet>,
    pub graph: SimpleGraph,
}

pub fn johnson(a: usize, b: usize) -> Result<Johnson> {
    if b == 0 || b > a {
        return Err(Error::InvalidParameters(format!(
            "Johnson graph needs 1 <= b <= a, got a={a}, b={b}"
        )));
    }
    if a > crate::graph::MAX_COLOURS {
        return Err(Error::TooLarge(format!("Johnson graph on [{a}]")));
    }
    let sets = ColourSet::subsets(a, b);
    let mut graph = SimpleGraph::new(sets.len());
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            if !sets[i].is_disjoint(sets[j]) {
                graph.add_edge(i, j);
            }
        }
    }
    Ok(Johnson { sets, graph })
}

/// What a part of a construction stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PartLabel {
    /// Case 1: the clique `V_X` blown up from Johnson vertex `X`.
    Clique(ColourSet),
    /// Case 3: the clique `V_{1,X}` inside the first layer.
    Johnson(ColourSet),
    /// Cases 2 and 3: clique `j` of layer `i` (both 1-based).
    Layer { i: usize, j: usize },
}

impl PartLabel {
    /// Layer index; case-1 cliques have no layers and report 1.
    pub fn layer(&self) -> usize {
        match *self {
            PartLabel::Clique(_) | PartLabel::Johnson(_) => 1,
            PartLabel::Layer { i, .. } => i,
        }
    }
}

impl fmt::Display for PartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartLabel::Clique(x) => write!(f, "V_{{X={x}}}"),
            PartLabel::Johnson(x) => write!(f, "V_{{1,X={x}}}"),
            PartLabel::Layer { i, j } => write!(f, "V_{{{i},{j}}}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Part {
    pub label: PartLabel,
    pub vertices: Range<usize>,
}

impl Part {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn to_set(&self, n: usize) -> VertexSet {
        VertexSet::from_vertices(n, self.vertices.clone())
    }
}

/// A constructed instance with everything needed to re-check it.
#[derive(Debug, Clone)]
pub struct ConstructionOutput {
    pub graph: ColouredGraph,
    pub case_id: u8,
    pub r: usize,
    pub s: usize,
    pub alpha: usize,
    pub chi: usize,
    /// Case 3 only: the colours `[t]` of the Johnson layer.
    pub t: Option<usize>,
    /// Case 2 only: clique counts `k_1..k_χ` per layer.
    pub k: Option<Vec<usize>>,
    /// `φ(i, j)`; empty in case 1.
    pub phi: BTreeMap<(usize, usize), Colour>,
    /// Parts in vertex order; they partition `0..n`.
    pub parts: Vec<Part>,
}

/// Sidecar JSON written next to a constructed graph.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructionMeta {
    pub case: u8,
    pub chi: usize,
    pub t: Option<usize>,
    pub k: Option<Vec<usize>>,
    pub phi: BTreeMap<String, Colour>,
    pub parts: BTreeMap<String, Vec<usize>>,
}

/// Result of re-deriving every pair's colour from the part labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColouringCheck {
    pub pairs_checked: usize,
    pub edges_checked: usize,
    pub mismatches: Vec<(usize, usize)>,
}

impl ColouringCheck {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

impl ConstructionOutput {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn part_of(&self, v: usize) -> &Part {
        let idx = self.parts.partition_point(|p| p.vertices.end <= v);
        &self.parts[idx]
    }

    pub fn part(&self, label: PartLabel) -> Option<&Part> {
        self.parts.iter().find(|p| p.label == label)
    }

    pub fn meta(&self) -> ConstructionMeta {
        ConstructionMeta {
            case: self.case_id,
            chi: self.chi,
            t: self.t,
            k: self.k.clone(),
            phi: self
                .phi
                .iter()
                .map(|(&(i, j), &c)| (format!("({i},{j})"), c))
                .collect(),
            parts: self
                .parts
                .iter()
                .map(|p| (p.label.to_string(), p.vertices.clone().collect()))
                .collect(),
        }
    }

    /// The colour the case rule assigns to an edge between parts `a` and
    /// `b` (possibly equal), `None` where the rule puts no edge.
    pub fn rule_colour(&self, a: PartLabel, b: PartLabel) -> Option<Colour> {
        use PartLabel::*;
        let (lo, hi) = if a.layer() <= b.layer() {
            (a, b)
        } else {
            (b, a)
        };
        match (lo, hi) {
            (Clique(x), Clique(y)) | (Johnson(x), Johnson(y)) => x.intersection(y).smallest(),
            (Johnson(x), Layer { .. }) => x.smallest(),
            (Layer { i, j }, Layer { i: i2, j: j2 }) if i < i2 || j == j2 => {
                self.phi.get(&(i, j)).copied()
            }
            _ => None,
        }
    }

    /// Recomputes the colour of every vertex pair from the part labels and
    /// compares it with the graph.
    pub fn check_colouring(&self) -> ColouringCheck {
        let n = self.n();
        let labels: Vec<PartLabel> = (0..n).map(|v| self.part_of(v).label).collect();
        let mut check = ColouringCheck {
            pairs_checked: 0,
            edges_checked: 0,
            mismatches: Vec::new(),
        };
        for u in 0..n {
            for v in (u + 1)..n {
                let expected = self.rule_colour(labels[u], labels[v]);
                let found = self.graph.colour(u, v);
                check.pairs_checked += 1;
                if found.is_some() {
                    check.edges_checked += 1;
                }
                if expected != found {
                    check.mismatches.push((u, v));
                }
            }
        }
        check
    }

    /// Parts partition `0..n` and `φ` is a bijection onto its codomain.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let mut next = 0;
        for p in &self.parts {
            if p.vertices.start != next || p.is_empty() {
                return Err(format!("part {} is empty or not contiguous", p.label));
            }
            next = p.vertices.end;
        }
        if next != self.n() {
            return Err(format!("parts cover {next} of {} vertices", self.n()));
        }
        let codomain: Vec<Colour> = match (self.case_id, self.t, &self.k) {
            (1, _, _) => Vec::new(),
            (2, _, Some(k)) => (1..=k.iter().sum::<usize>() as Colour).collect(),
            (3, Some(t), _) => ((t + 1) as Colour..=self.r as Colour).collect(),
            _ => return Err("metadata does not match the case".into()),
        };
        let mut image: Vec<Colour> = self.phi.values().copied().collect();
        image.sort_unstable();
        if image != codomain {
            return Err(format!("phi image {image:?} is not {codomain:?}"));
        }
        Ok(())
    }

    /// Checks the starvation structure directly on the edges of the graph.
    ///
    /// Per-part checks: every edge touching a Johnson clique `V_X` (cases 1
    /// and 3) has a colour in `X`; every edge touching a layered clique
    /// `V_{i,j}` has colour `φ(i,j)` or meets an earlier layer. Per-colour-set
    /// checks: for every `T ⊆ [r]` with `|T| ≤ s` some part is starved by
    /// `T` (see [`Self::starved_part`]).
    pub fn check_starvation(&self) -> std::result::Result<(), String> {
        for part in &self.parts {
            for u in part.vertices.clone() {
                for (v, c) in self.graph.neighbours(u) {
                    let ok = match part.label {
                        PartLabel::Clique(x) | PartLabel::Johnson(x) => x.contains(c),
                        PartLabel::Layer { i, j } => {
                            c == self.phi[&(i, j)] || self.part_of(v).label.layer() < i
                        }
                    };
                    if !ok {
                        return Err(format!(
                            "edge ({u}, {v}) of colour {c} breaks starvation of {}",
                            part.label
                        ));
                    }
                }
            }
        }
        for size in 0..=self.s.min(self.r) {
            for t in ColourSet::subsets(self.r, size) {
                if self.starved_part(t).is_none() {
                    return Err(format!("no part is starved by colour set {t}"));
                }
            }
        }
        Ok(())
    }

    /// A part that a covering using only the colours in `used` must cover
    /// mostly by single vertices.
    ///
    /// For Johnson cliques this is `V_X` with `X ∩ used = ∅`; for layered
    /// cliques it is `V_{i,j}` with `φ(i,j) ∉ used`.
    pub fn starved_part(&self, used: ColourSet) -> Option<&Part> {
        self.parts.iter().find(|p| match p.label {
            PartLabel::Clique(x) | PartLabel::Johnson(x) => x.is_disjoint(used),
            PartLabel::Layer { i, j } => !used.contains(self.phi[&(i, j)]),
        })
    }

    /// Exact independence number of the constructed graph.
    pub fn independence_number(&self, budget: u64) -> Result<usize> {
        independence_number(&self.graph, budget)
    }
}

/// `⌊n^{i/χ}⌋` computed exactly.
pub fn floor_power_root(n: usize, i: usize, chi: usize) -> usize {
    assert!(chi >= 1);
    let target = pow_sat(n as u128, i as u32);
    let mut m = ((n as f64).powf(i as f64 / chi as f64)).floor() as u128;
    while m > 0 && pow_sat(m, chi as u32) > target {
        m -= 1;
    }
    while pow_sat(m + 1, chi as u32) <= target {
        m += 1;
    }
    m as usize
}

/// `x^e`, saturating at `u128::MAX`.
pub(crate) fn pow_sat(x: u128, e: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(x);
    }
    acc
}

/// Layer sizes `⌊n^{i/χ}⌋` for `i < χ`, the last layer taking the remainder.
pub fn layer_sizes(n: usize, chi: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = (1..chi).map(|i| floor_power_root(n, i, chi)).collect();
    let used: usize = sizes.iter().sum();
    sizes.push(n.saturating_sub(used));
    sizes
}

/// Splits `total` into `parts` sizes differing by at most one, larger first.
fn equitable(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|p| base + usize::from(p < extra)).collect()
}

/// Clique counts for case 2: `k_i = min(α, remaining − (χ − i))`, summing to `s + 1`.
pub fn case2_clique_counts(s: usize, alpha: usize, chi: usize) -> Vec<usize> {
    let mut remaining = s + 1;
    let mut k = Vec::with_capacity(chi);
    for i in 1..=chi {
        let ki = alpha.min(remaining - (chi - i));
        k.push(ki);
        remaining -= ki;
    }
    debug_assert_eq!(remaining, 0);
    k
}

fn params_ok(r: usize, s: usize, alpha: usize) -> Result<usize> {
    chi_formula(r, s, alpha)
}

struct Layout {
    parts: Vec<Part>,
}

impl Layout {
    fn new() -> Self {
        Self { parts: Vec::new() }
    }

    fn push(&mut self, label: PartLabel, size: usize) {
        let start = self.parts.last().map_or(0, |p| p.vertices.end);
        self.parts.push(Part {
            label,
            vertices: start..start + size,
        });
    }
}

fn fill_block(b: &mut GraphBuilder, p: &Part, q: &Part, colour: Colour) {
    for u in p.vertices.clone() {
        for v in q.vertices.clone() {
            if u != v {
                b.add_edge(u, v, usize::from(colour))
                    .expect("construction edges are valid");
            }
        }
    }
}

fn johnson_blowup_edges(b: &mut GraphBuilder, parts: &[Part], sets: &[ColourSet]) {
    for (a, (pa, xa)) in parts.iter().zip(sets).enumerate() {
        for (pb, xb) in parts[a..].iter().zip(&sets[a..]) {
            if let Some(c) = xa.intersection(*xb).smallest() {
                fill_block(b, pa, pb, c);
            }
        }
    }
}

/// Case 1: the blow-up of `J(r, r−s)` with near-equal cliques summing to `n`.
pub fn construct_case1(r: usize, s: usize, alpha: usize, n: usize) -> Result<ConstructionOutput> {
    let chi = params_ok(r, s, alpha)?;
    if !is_edgeless_regime(r, s, alpha) {
        return Err(Error::OutsideRegime {
            case: 1,
            r,
            s,
            alpha,
        });
    }
    let sets = ColourSet::subsets(r, r - s);
    if n < sets.len() {
        return Err(Error::TooSmall {
            n,
            reason: format!("case 1 needs n >= C({r}, {}) = {}", r - s, sets.len()),
        });
    }
    let mut layout = Layout::new();
    for (x, size) in sets.iter().zip(equitable(n, sets.len())) {
        layout.push(PartLabel::Clique(*x), size);
    }
    let mut b = GraphBuilder::new(n, r)?;
    johnson_blowup_edges(&mut b, &layout.parts, &sets);
    Ok(ConstructionOutput {
        graph: b.build(),
        case_id: 1,
        r,
        s,
        alpha,
        chi,
        t: None,
        k: None,
        phi: BTreeMap::new(),
        parts: layout.parts,
    })
}

/// Joins layered cliques: inside `V_{i,j}` and from `V_{i,j}` to every later
/// layer the colour is `φ(i,j)`.
fn layered_edges(b: &mut GraphBuilder, parts: &[Part], phi: &BTreeMap<(usize, usize), Colour>) {
    for (a, p) in parts.iter().enumerate() {
        let PartLabel::Layer { i, j } = p.label else {
            continue;
        };
        let c = phi[&(i, j)];
        fill_block(b, p, p, c);
        for q in &parts[a + 1..] {
            if q.label.layer() > i {
                fill_block(b, p, q, c);
            }
        }
    }
}

/// Case 2: `χ` layers, layer `i` split into `k_i` cliques.
pub fn construct_case2(r: usize, s: usize, alpha: usize, n: usize) -> Result<ConstructionOutput> {
    let chi = params_ok(r, s, alpha)?;
    if is_edgeless_regime(r, s, alpha) || s >= chi * alpha {
        return Err(Error::OutsideRegime {
            case: 2,
            r,
            s,
            alpha,
        });
    }
    if floor_power_root(n, 1, chi) < r {
        return Err(Error::TooSmall {
            n,
            reason: format!("case 2 needs floor(n^(1/{chi})) >= r = {r}"),
        });
    }
    let k = case2_clique_counts(s, alpha, chi);
    let sizes = layer_sizes(n, chi);
    if let Some(i) = (0..chi).find(|&i| sizes[i] < k[i]) {
        return Err(Error::TooSmall {
            n,
            reason: format!(
                "layer {} has {} vertices for {} cliques",
                i + 1,
                sizes[i],
                k[i]
            ),
        });
    }
    let mut layout = Layout::new();
    let mut phi = BTreeMap::new();
    for (i, (&size, &ki)) in sizes.iter().zip(&k).enumerate() {
        for (j, clique) in equitable(size, ki).into_iter().enumerate() {
            let label = (i + 1, j + 1);
            phi.insert(label, (phi.len() + 1) as Colour);
            layout.push(
                PartLabel::Layer {
                    i: label.0,
                    j: label.1,
                },
                clique,
            );
        }
    }
    let mut b = GraphBuilder::new(n, r)?;
    layered_edges(&mut b, &layout.parts, &phi);
    Ok(ConstructionOutput {
        graph: b.build(),
        case_id: 2,
        r,
        s,
        alpha,
        chi,
        t: None,
        k: Some(k),
        phi,
        parts: layout.parts,
    })
}

/// Case 3: like case 2, but the first layer is a blow-up of `J(t, r−s)` and
/// every later layer holds `α` cliques coloured from `[r] ∖ [t]`.
pub fn construct_case3(r: usize, s: usize, alpha: usize, n: usize) -> Result<ConstructionOutput> {
    let chi = params_ok(r, s, alpha)?;
    if is_edgeless_regime(r, s, alpha) || s < chi * alpha {
        return Err(Error::OutsideRegime {
            case: 3,
            r,
            s,
            alpha,
        });
    }
    let t = r - alpha * (chi - 1);
    let sets = ColourSet::subsets(t, r - s);
    let sizes = layer_sizes(n, chi);
    if sizes[0] < sets.len() {
        return Err(Error::TooSmall {
            n,
            reason: format!(
                "case 3 needs floor(n^(1/{chi})) >= C({t}, {}) = {}",
                r - s,
                sets.len()
            ),
        });
    }
    if let Some(i) = (1..chi).find(|&i| sizes[i] < alpha) {
        return Err(Error::TooSmall {
            n,
            reason: format!(
                "layer {} has {} vertices for {alpha} cliques",
                i + 1,
                sizes[i]
            ),
        });
    }
    let mut layout = Layout::new();
    for (x, size) in sets.iter().zip(equitable(sizes[0], sets.len())) {
        layout.push(PartLabel::Johnson(*x), size);
    }
    let mut phi = BTreeMap::new();
    for (i, &size) in sizes.iter().enumerate().skip(1) {
        for (j, clique) in equitable(size, alpha).into_iter().enumerate() {
            phi.insert((i + 1, j + 1), (t + phi.len() + 1) as Colour);
            layout.push(PartLabel::Layer { i: i + 1, j: j + 1 }, clique);
        }
    }
    let mut b = GraphBuilder::new(n, r)?;
    let johnson_parts = &layout.parts[..sets.len()];
    johnson_blowup_edges(&mut b, johnson_parts, &sets);
    for (p, x) in johnson_parts.iter().zip(&sets) {
        let c = x.smallest().expect("r - s >= 1");
        for q in &layout.parts[sets.len()..] {
            fill_block(&mut b, p, q, c);
        }
    }
    layered_edges(&mut b, &layout.parts, &phi);
    Ok(ConstructionOutput {
        graph: b.build(),
        case_id: 3,
        r,
        s,
        alpha,
        chi,
        t: Some(t),
        k: None,
        phi,
        parts: layout.parts,
    })
}

/// Which construction applies to `(r, s, α)`.
pub fn case_for(r: usize, s: usize, alpha: usize) -> Result<u8> {
    let chi = params_ok(r, s, alpha)?;
    Ok(if is_edgeless_regime(r, s, alpha) {
        1
    } else if s < chi * alpha {
        2
    } else {
        3
    })
}

/// Smallest `n` accepted by the construction for `(r, s, α)`.
pub fn min_n(r: usize, s: usize, alpha: usize) -> Result<usize> {
    let chi = params_ok(r, s, alpha)?;
    let (n0, case) = match case_for(r, s, alpha)? {
        1 => return Ok(binomial(r as u64, (r - s) as u64) as usize),
        2 => (pow_sat(r as u128, chi as u32) as usize, 2),
        _ => {
            let t = r - alpha * (chi - 1);
            let need = binomial(t as u64, (r - s) as u64).max(1) as usize;
            (pow_sat(need as u128, chi as u32) as usize, 3)
        }
    };
    let build = |n| match case {
        2 => construct_case2(r, s, alpha, n),
        _ => construct_case3(r, s, alpha, n),
    };
    (n0..n0.saturating_mul(4).max(n0 + 64))
        .find(|&n| build(n).is_ok())
        .ok_or_else(|| Error::TooSmall {
            n: n0,
            reason: "no valid n found near the layer bound".into(),
        })
}

/// Dispatches to the construction for the regime of `(r, s, α)`.
pub fn construct_lower_bound(
    r: usize,
    s: usize,
    alpha: usize,
    n: usize,
) -> Result<ConstructionOutput> {
    match case_for(r, s, alpha)? {
        1 => construct_case1(r, s, alpha, n),
        2 => construct_case2(r, s, alpha, n),
        _ => construct_case3(r, s, alpha, n),
    }
}
