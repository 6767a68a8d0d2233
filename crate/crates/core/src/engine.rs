//! The covering engine.
//!
//! Starting from a greedy covering `S` that may use every colour, the engine
//! tracks for each `(r−s)`-set of colours `X` the set `V_{S,X}` of vertices
//! covered only by pieces with a colour in `X`, and the potential
//! `δ(S) = Σ_X ln |V_{S,X}|`. While every `V_{S,X}` is larger than `n^{1/χ}`
//! it picks a hyperedge of the Kneser hypergraph whose sets have similar
//! sizes and adds a batch of monochromatic paths, each of which removes
//! vertices from one of those sets. Once some `V_{S,X}` is small, its
//! vertices are covered by single vertices and every piece coloured in `X`
//! is dropped, which leaves at most `s` colours.
//!
//! Long paths inside the dense bipartite colour class are found by greedy
//! two-ended extension with Pósa rotations and restarts.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructions::pow_sat;
use crate::covering::{Covering, MonoPiece};
use crate::error::{Error, Result};
use crate::graph::{independence_number, Colour, ColouredGraph, VertexSet};
use crate::kneser::{binomial, chi_formula, ColourSet, KneserHypergraph};

/// Graphs up to this size get their independence number checked exactly.
const EXACT_ALPHA_CHECK_MAX_N: usize = 40;
const EXACT_ALPHA_CHECK_BUDGET: u64 = 2_000_000;
const PATH_RESTARTS: usize = 3;
const ROTATIONS_PER_END: usize = 24;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineConfig {
    /// Fraction of `η` a removable set has to reach to count as progress.
    pub target_fraction: f64,
    /// Shortest path (in vertices) worth adding.
    pub min_piece: usize,
    pub rng_seed: u64,
    /// Consecutive paths below target tolerated before a batch gives up.
    pub max_stall: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            target_fraction: 0.05,
            min_piece: 2,
            rng_seed: 0,
            max_stall: 8,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_fraction > 0.0 && self.target_fraction <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "target_fraction must lie in (0, 1], got {}",
                self.target_fraction
            )));
        }
        if self.min_piece < 2 {
            return Err(Error::InvalidParameters(format!(
                "min_piece must be at least 2, got {}",
                self.min_piece
            )));
        }
        if self.max_stall == 0 {
            return Err(Error::InvalidParameters(
                "max_stall must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One iteration of the main loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRecord {
    /// The chosen hyperedge, largest set first.
    pub hyperedge: Vec<ColourSet>,
    /// `|V_{S,X}|` for every Kneser vertex, in canonical order, before the batch.
    pub sizes: Vec<usize>,
    pub delta_before: f64,
    pub delta_after: f64,
    /// Number of pieces added.
    pub batch_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EngineTrace {
    pub chi: usize,
    /// `n^{1/χ}`.
    pub threshold: f64,
    pub baseline_size: usize,
    pub iteration_cap: usize,
    pub records: Vec<BatchRecord>,
    /// The loop hit the iteration cap.
    pub cap_hit: bool,
    /// A batch came back empty and the loop fell back to the final filter early.
    pub stalled: bool,
    /// The colour set removed by the final filter.
    pub filtered: Option<ColourSet>,
    pub singletons_added: usize,
    pub pieces_dropped: usize,
}

impl EngineTrace {
    /// True if `δ` never increased between consecutive records.
    pub fn delta_monotone(&self) -> bool {
        self.records.iter().all(|r| r.delta_after <= r.delta_before)
            && self
                .records
                .windows(2)
                .all(|w| w[1].delta_before <= w[0].delta_after)
    }
}

/// A hard engine error together with the trace gathered up to that point.
#[derive(Debug, Clone)]
pub struct EngineFailure {
    pub error: Error,
    pub trace: Box<EngineTrace>,
}

impl fmt::Display for EngineFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (after {} batches)",
            self.error,
            self.trace.records.len()
        )
    }
}

impl std::error::Error for EngineFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for EngineFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            trace: Box::default(),
        }
    }
}

/// Per-vertex summary of a covering: which colours cover it, and whether a
/// colourless single vertex does.
#[derive(Debug, Clone)]
pub struct CoverState {
    colours: Vec<u64>,
    colourless: Vec<bool>,
    covered: Vec<bool>,
}

impl CoverState {
    pub fn new(n: usize) -> Self {
        Self {
            colours: vec![0; n],
            colourless: vec![false; n],
            covered: vec![false; n],
        }
    }

    pub fn from_covering(n: usize, cover: &Covering) -> Self {
        let mut state = Self::new(n);
        for p in &cover.pieces {
            state.add(p);
        }
        state
    }

    pub fn add(&mut self, piece: &MonoPiece) {
        let colour = piece.colour.filter(|_| piece.len() >= 2);
        for &v in &piece.vertices {
            self.covered[v] = true;
            match colour {
                Some(c) => self.colours[v] |= 1 << (c - 1),
                None => self.colourless[v] = true,
            }
        }
    }

    #[inline]
    pub fn is_exclusive(&self, v: usize, x: ColourSet) -> bool {
        self.covered[v] && !self.colourless[v] && self.colours[v] & !x.mask() == 0
    }

    pub fn exclusive(&self, x: ColourSet) -> VertexSet {
        let n = self.covered.len();
        VertexSet::from_vertices(n, (0..n).filter(|&v| self.is_exclusive(v, x)))
    }

    pub fn exclusive_size(&self, x: ColourSet) -> usize {
        (0..self.covered.len())
            .filter(|&v| self.is_exclusive(v, x))
            .count()
    }

    pub fn is_covered(&self, v: usize) -> bool {
        self.covered[v]
    }
}

/// `V_{S,X}`: vertices covered by at least one piece, all of whose covering
/// pieces have a colour in `X`.
pub fn exclusive_cover_set(g: &ColouredGraph, cover: &Covering, x: ColourSet) -> VertexSet {
    CoverState::from_covering(g.n(), cover).exclusive(x)
}

/// `δ(S) = Σ_X ln |V_{S,X}|` over the vertices of `kh`; `−∞` if any set is empty.
pub fn potential(g: &ColouredGraph, cover: &Covering, kh: &KneserHypergraph) -> f64 {
    let state = CoverState::from_covering(g.n(), cover);
    potential_of_sizes(&sizes_of(&state, kh))
}

fn sizes_of(state: &CoverState, kh: &KneserHypergraph) -> Vec<usize> {
    kh.vertices()
        .iter()
        .map(|&x| state.exclusive_size(x))
        .collect()
}

fn potential_of_sizes(sizes: &[usize]) -> f64 {
    if sizes.contains(&0) {
        return f64::NEG_INFINITY;
    }
    sizes.iter().map(|&s| (s as f64).ln()).sum()
}

/// `size > n^{1/χ}`, decided exactly.
fn exceeds_root(size: usize, n: usize, chi: usize) -> bool {
    pow_sat(size as u128, chi as u32) > n as u128
}

/// A hyperedge chosen for its small size ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedEdge {
    /// Members sorted by decreasing `|V_{S,X}|`, ties in canonical order.
    pub sets: Vec<ColourSet>,
    pub sizes: Vec<usize>,
    /// `max |V_{S,X_i}| / min |V_{S,X_j}|` over the hyperedge.
    pub spread: f64,
}

/// Scans every hyperedge and returns the one with the smallest ratio
/// between its largest and smallest `|V_{S,X}|`. `sizes` is aligned with
/// `kh.vertices()`. Ties go to the earliest hyperedge.
pub fn balanced_hyperedge(sizes: &[usize], kh: &KneserHypergraph) -> Result<BalancedEdge> {
    if sizes.len() != kh.vertices().len() {
        return Err(Error::InvalidParameters(format!(
            "{} sizes for {} Kneser vertices",
            sizes.len(),
            kh.vertices().len()
        )));
    }
    // compare max/min ratios exactly as max_a * min_b < max_b * min_a
    let mut best: Option<(usize, u128, u128)> = None;
    for (idx, edge) in kh.hyperedges().iter().enumerate() {
        let hi = edge.iter().map(|&v| sizes[v]).max().expect("nonempty") as u128;
        let lo = edge.iter().map(|&v| sizes[v]).min().expect("nonempty") as u128;
        let better = match best {
            None => true,
            Some((_, bhi, blo)) => hi * blo < bhi * lo,
        };
        if better {
            best = Some((idx, hi, lo));
        }
    }
    let (idx, hi, lo) = best.ok_or(Error::EdgelessHypergraph)?;
    let mut members: Vec<usize> = kh.hyperedges()[idx].clone();
    members.sort_by_key(|&v| std::cmp::Reverse(sizes[v]));
    Ok(BalancedEdge {
        sets: members.iter().map(|&v| kh.vertices()[v]).collect(),
        sizes: members.iter().map(|&v| sizes[v]).collect(),
        spread: if lo == 0 {
            f64::INFINITY
        } else {
            hi as f64 / lo as f64
        },
    })
}

/// Vertices a piece takes out of `V_{S,X}` for a side `X` avoiding its colour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub side: ColourSet,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovablePiece {
    pub piece: MonoPiece,
    pub removals: Vec<Removal>,
}

/// One batch of removable paths for the hyperedge `edge` (sorted by
/// decreasing `|V_{S,X}|`).
///
/// With `η = ⌈|V_{S,X_{α+1}}| / 2⌉`, the batch keeps residuals
/// `R_i ⊆ V_{S,X_i}` and repeatedly samples `η` vertices from each, takes
/// the pair of samples with the most edges between them, and grows a long
/// path in the majority colour `k` of that bipartite graph. The sets are
/// pairwise disjoint, so `k` lies outside at least one side's `X`; that
/// side's path vertices are removable and leave its residual. The batch
/// ends once some residual has at most `η` vertices, or after
/// `cfg.max_stall` consecutive paths that remove fewer than
/// `cfg.target_fraction · η` vertices.
pub fn removable_batch<R: Rng + ?Sized>(
    g: &ColouredGraph,
    cover: &Covering,
    edge: &[ColourSet],
    chi: usize,
    cfg: &EngineConfig,
    rng: &mut R,
) -> Result<Vec<RemovablePiece>> {
    cfg.validate()?;
    let state = CoverState::from_covering(g.n(), cover);
    batch_from_state(g, &state, edge, chi, cfg, rng)
}

fn batch_from_state<R: Rng + ?Sized>(
    g: &ColouredGraph,
    state: &CoverState,
    edge: &[ColourSet],
    chi: usize,
    cfg: &EngineConfig,
    rng: &mut R,
) -> Result<Vec<RemovablePiece>> {
    let n = g.n();
    if edge.len() < 2 {
        return Err(Error::BatchPrecondition(format!(
            "a hyperedge needs at least two sets, got {}",
            edge.len()
        )));
    }
    if let Some((a, b)) = pairs(edge.len()).find(|&(a, b)| !edge[a].is_disjoint(edge[b])) {
        return Err(Error::BatchPrecondition(format!(
            "{} and {} are not disjoint",
            edge[a], edge[b]
        )));
    }
    let mut residual: Vec<Vec<usize>> = edge.iter().map(|&x| state.exclusive(x).to_vec()).collect();
    for (x, r) in edge.iter().zip(&residual) {
        if !exceeds_root(r.len(), n, chi) {
            return Err(Error::BatchPrecondition(format!(
                "|V_(S,{x})| = {} is not above n^(1/{chi})",
                r.len()
            )));
        }
    }
    if residual.windows(2).any(|w| w[0].len() < w[1].len()) {
        return Err(Error::BatchPrecondition(
            "hyperedge is not sorted by decreasing size".into(),
        ));
    }
    let eta = residual.last().expect("len >= 2").len().div_ceil(2);
    let target = cfg.target_fraction * eta as f64;

    let mut pieces = Vec::new();
    let mut stall = 0;
    let mut saw_edge = false;
    while residual.iter().all(|r| r.len() > eta) && stall < cfg.max_stall {
        let samples: Vec<Vec<usize>> = residual
            .iter()
            .map(|r| {
                let mut s: Vec<usize> = sample(rng, r.len(), eta)
                    .into_iter()
                    .map(|i| r[i])
                    .collect();
                s.sort_unstable();
                s
            })
            .collect();

        let Some((i, j, colour)) = densest_pair(g, &samples) else {
            stall += 1;
            continue;
        };
        saw_edge = true;
        let path = bipartite_path(g, &samples[i], &samples[j], colour, rng);
        if path.len() < cfg.min_piece {
            stall += 1;
            continue;
        }

        let mut removals = Vec::new();
        for side in [i, j] {
            if edge[side].contains(colour) {
                continue;
            }
            let on_side: Vec<usize> = path
                .iter()
                .copied()
                .filter(|v| samples[side].binary_search(v).is_ok())
                .collect();
            residual[side].retain(|v| !on_side.contains(v));
            removals.push(Removal {
                side: edge[side],
                vertices: on_side,
            });
        }
        let best = removals.iter().map(|r| r.vertices.len()).max().unwrap_or(0);
        if best as f64 >= target {
            stall = 0;
        } else {
            stall += 1;
        }
        pieces.push(RemovablePiece {
            piece: MonoPiece::path(path, colour),
            removals,
        });
    }
    if pieces.is_empty() && !saw_edge {
        return Err(Error::IndependencePromise);
    }
    Ok(pieces)
}

fn pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..k).flat_map(move |a| ((a + 1)..k).map(move |b| (a, b)))
}

/// The pair of samples with the most edges between them and the majority
/// colour of those edges (ties: lowest pair, then lowest colour).
fn densest_pair(g: &ColouredGraph, samples: &[Vec<usize>]) -> Option<(usize, usize, Colour)> {
    let mut best: Option<(usize, usize, usize, Colour)> = None;
    let mut counts = vec![0usize; g.r() + 1];
    for (a, b) in pairs(samples.len()) {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut total = 0;
        for &u in &samples[a] {
            for &v in &samples[b] {
                if let Some(c) = g.colour(u, v) {
                    counts[usize::from(c)] += 1;
                    total += 1;
                }
            }
        }
        if total > 0 && best.is_none_or(|(_, _, t, _)| total > t) {
            let (colour, _) = counts
                .iter()
                .enumerate()
                .skip(1)
                .fold((1, 0), |acc, (c, &k)| if k > acc.1 { (c, k) } else { acc });
            best = Some((a, b, total, colour as Colour));
        }
    }
    best.map(|(a, b, _, c)| (a, b, c))
}

/// A long path of `colour` in the bipartite graph between `left` and
/// `right`, returned as graph vertices.
fn bipartite_path<R: Rng + ?Sized>(
    g: &ColouredGraph,
    left: &[usize],
    right: &[usize],
    colour: Colour,
    rng: &mut R,
) -> Vec<usize> {
    let nodes: Vec<usize> = left.iter().chain(right).copied().collect();
    let split = left.len();
    let mut adj = vec![Vec::new(); nodes.len()];
    for (a, &u) in left.iter().enumerate() {
        for (b, &v) in right.iter().enumerate() {
            if g.colour(u, v) == Some(colour) {
                adj[a].push(split + b);
                adj[split + b].push(a);
            }
        }
    }
    longest_path_heuristic(&adj, PATH_RESTARTS, rng)
        .into_iter()
        .map(|i| nodes[i])
        .collect()
}

/// Greedy two-ended path growth with Pósa rotations.
///
/// Extension picks the free neighbour with the fewest free neighbours of
/// its own. When both ends are stuck, up to `ROTATIONS_PER_END` rotations
/// per end look for a new endpoint that can still be extended. The first
/// attempt starts at a vertex of maximum degree, later ones at random
/// non-isolated vertices; the longest path found wins.
pub(crate) fn longest_path_heuristic<R: Rng + ?Sized>(
    adj: &[Vec<usize>],
    restarts: usize,
    rng: &mut R,
) -> Vec<usize> {
    let candidates: Vec<usize> = (0..adj.len()).filter(|&v| !adj[v].is_empty()).collect();
    let Some(&hub) = candidates
        .iter()
        .max_by_key(|&&v| (adj[v].len(), std::cmp::Reverse(v)))
    else {
        return adj.first().map(|_| vec![0]).unwrap_or_default();
    };
    let mut best: Vec<usize> = Vec::new();
    for attempt in 0..restarts.max(1) {
        let start = if attempt == 0 {
            hub
        } else {
            candidates[rng.gen_range(0..candidates.len())]
        };
        let path = grow_from(adj, start);
        if path.len() > best.len() {
            best = path;
        }
        if best.len() == adj.len() {
            break;
        }
    }
    best
}

fn grow_from(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut on_path = vec![false; adj.len()];
    let mut free_degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut path = Vec::with_capacity(adj.len());

    let take = |v: usize, path: &mut Vec<usize>, on_path: &mut [bool], free: &mut [usize]| {
        on_path[v] = true;
        path.push(v);
        for &w in &adj[v] {
            free[w] -= 1;
        }
    };
    take(start, &mut path, &mut on_path, &mut free_degree);

    let next_free = |v: usize, on_path: &[bool], free: &[usize]| {
        adj[v]
            .iter()
            .copied()
            .filter(|&w| !on_path[w])
            .min_by_key(|&w| (free[w], w))
    };

    let mut stuck_ends = 0;
    while stuck_ends < 2 {
        let end = *path.last().expect("nonempty");
        if let Some(w) = next_free(end, &on_path, &free_degree) {
            take(w, &mut path, &mut on_path, &mut free_degree);
            stuck_ends = 0;
            continue;
        }
        if rotate_to_extendable(adj, &mut path, &on_path) {
            stuck_ends = 0;
            continue;
        }
        path.reverse();
        stuck_ends += 1;
    }
    path
}

/// Pósa rotation: if the last vertex `v_L` is adjacent to `v_i`, the path
/// `v_0..v_i v_L v_{L-1}..v_{i+1}` has end `v_{i+1}`. Applies the first
/// rotation whose new end has a free neighbour.
fn rotate_to_extendable(adj: &[Vec<usize>], path: &mut [usize], on_path: &[bool]) -> bool {
    let len = path.len();
    if len < 3 {
        return false;
    }
    let end = path[len - 1];
    let mut tried = 0;
    for i in (0..len - 2).rev() {
        if tried >= ROTATIONS_PER_END {
            break;
        }
        if !adj[end].contains(&path[i]) {
            continue;
        }
        tried += 1;
        let new_end = path[i + 1];
        if adj[new_end].iter().any(|&w| !on_path[w]) {
            path[i + 1..].reverse();
            return true;
        }
    }
    false
}

/// Greedy monochromatic path covering using any colours.
///
/// Repeatedly takes the lowest uncovered vertex, grows a path from it in
/// each colour through uncovered vertices only (first free neighbour, both
/// ends), and keeps the colour that covers the most new vertices. A vertex
/// with no uncovered neighbour in any colour becomes a colourless singleton.
pub fn baseline_cover(g: &ColouredGraph) -> Covering {
    let n = g.n();
    let mut covered = vec![false; n];
    let mut cover = Covering::default();
    let mut next = 0;
    while next < n {
        if covered[next] {
            next += 1;
            continue;
        }
        let mut best: (Vec<usize>, Colour) = (vec![next], 0);
        for c in 1..=g.r() as Colour {
            let path = greedy_uncovered_path(g, next, c, &covered);
            if path.len() > best.0.len() {
                best = (path, c);
            }
        }
        for &v in &best.0 {
            covered[v] = true;
        }
        cover.push(match best {
            (p, 0) => MonoPiece::singleton(p[0]),
            (p, c) => MonoPiece::path(p, c),
        });
    }
    cover
}

fn greedy_uncovered_path(
    g: &ColouredGraph,
    start: usize,
    colour: Colour,
    covered: &[bool],
) -> Vec<usize> {
    let n = g.n();
    let mut on_path = vec![false; n];
    on_path[start] = true;
    let mut path = vec![start];
    let free = |v: usize, on_path: &[bool]| {
        (0..n).find(|&w| !covered[w] && !on_path[w] && g.colour(v, w) == Some(colour))
    };
    for _ in 0..2 {
        while let Some(w) = free(*path.last().expect("nonempty"), &on_path) {
            on_path[w] = true;
            path.push(w);
        }
        path.reverse();
    }
    path
}

/// Drops every piece whose colour is in `x`. Fails if that would uncover a
/// vertex, i.e. unless `V_{S,X}` is empty.
pub fn filter_colours(g: &ColouredGraph, cover: &Covering, x: ColourSet) -> Result<Covering> {
    let state = CoverState::from_covering(g.n(), cover);
    if let Some(v) = state.exclusive(x).iter().next() {
        return Err(Error::FilterWouldUncover(v));
    }
    let kept = Covering::new(
        cover
            .pieces
            .iter()
            .filter(|p| p.colour.is_none_or(|c| !x.contains(c)))
            .cloned()
            .collect(),
    );
    let after = CoverState::from_covering(g.n(), &kept);
    if let Some(v) = (0..g.n()).find(|&v| state.is_covered(v) && !after.is_covered(v)) {
        return Err(Error::FilterWouldUncover(v));
    }
    Ok(kept)
}

/// Covers `g` by monochromatic paths and single vertices using at most `s`
/// colours, assuming `α(g) ≤ alpha`.
///
/// When `χ = 1` every vertex becomes its own piece. Otherwise the main loop
/// above runs from [`baseline_cover`], capped at `⌈4·C(r, r−s)·n^{1/χ}⌉`
/// batches; if the cap is hit or a batch comes back empty the final filter
/// runs on the smallest `V_{S,X}` anyway.
pub fn cover_few_colours(
    g: &ColouredGraph,
    s: usize,
    alpha: usize,
    cfg: &EngineConfig,
) -> std::result::Result<(Covering, EngineTrace), EngineFailure> {
    cfg.validate()?;
    let n = g.n();
    let r = g.r();
    if s >= r {
        return Err(Error::InvalidParameters(format!("need s < r, got r={r}, s={s}")).into());
    }
    if n <= EXACT_ALPHA_CHECK_MAX_N {
        match independence_number(g, EXACT_ALPHA_CHECK_BUDGET) {
            Ok(found) if found > alpha => {
                return Err(Error::IndependenceTooLarge { found, alpha }.into())
            }
            Ok(_) | Err(Error::BudgetExceeded(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let chi = chi_formula(r, s, alpha)?;
    let mut trace = EngineTrace {
        chi,
        threshold: (n as f64).powf(1.0 / chi as f64),
        ..EngineTrace::default()
    };
    if chi == 1 {
        trace.singletons_added = n;
        return Ok((
            Covering::new((0..n).map(MonoPiece::singleton).collect()),
            trace,
        ));
    }

    let fail = |error: Error, trace: &EngineTrace| EngineFailure {
        error,
        trace: Box::new(trace.clone()),
    };
    let kh = KneserHypergraph::new(r, s, alpha).map_err(|e| fail(e, &trace))?;
    let mut cover = baseline_cover(g);
    let mut state = CoverState::from_covering(n, &cover);
    trace.baseline_size = cover.len();
    let kneser_size = binomial(r as u64, (r - s) as u64) as f64;
    trace.iteration_cap = (4.0 * kneser_size * trace.threshold).ceil() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut sizes = sizes_of(&state, &kh);
    while sizes.iter().all(|&size| exceeds_root(size, n, chi)) {
        if trace.records.len() >= trace.iteration_cap {
            trace.cap_hit = true;
            break;
        }
        let edge = balanced_hyperedge(&sizes, &kh).map_err(|e| fail(e, &trace))?;
        let batch = batch_from_state(g, &state, &edge.sets, chi, cfg, &mut rng)
            .map_err(|e| fail(e, &trace))?;
        if batch.is_empty() {
            trace.stalled = true;
            break;
        }
        let delta_before = potential_of_sizes(&sizes);
        for p in &batch {
            state.add(&p.piece);
        }
        cover.extend(batch.iter().map(|p| p.piece.clone()));
        let next_sizes = sizes_of(&state, &kh);
        let delta_after = potential_of_sizes(&next_sizes);
        trace.records.push(BatchRecord {
            hyperedge: edge.sets,
            sizes,
            delta_before,
            delta_after,
            batch_size: batch.len(),
        });
        if delta_after.partial_cmp(&delta_before) != Some(std::cmp::Ordering::Less) {
            return Err(fail(
                Error::Invariant(format!(
                    "potential did not decrease: {delta_before} -> {delta_after}"
                )),
                &trace,
            ));
        }
        sizes = next_sizes;
    }

    // smallest V_{S,X}, ties in canonical order
    let (idx, _) = sizes
        .iter()
        .enumerate()
        .min_by_key(|&(i, &size)| (size, i))
        .expect("Kneser hypergraph has vertices");
    let x = kh.vertices()[idx];
    let starved = state.exclusive(x);
    trace.singletons_added = starved.len();
    cover.extend(starved.iter().map(MonoPiece::singleton));
    let before = cover.len();
    let filtered = filter_colours(g, &cover, x).map_err(|e| fail(e, &trace))?;
    trace.pieces_dropped = before - filtered.len();
    trace.filtered = Some(x);
    if filtered.col() > s {
        return Err(fail(
            Error::Invariant(format!("{} colours remain after filtering", filtered.col())),
            &trace,
        ));
    }
    Ok((filtered, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::construct_case2;
    use crate::covering::validate_covering;
    use crate::kneser::build_kneser;

    fn set(cs: &[Colour]) -> ColourSet {
        ColourSet::from_colours(cs.iter().copied())
    }

    fn complete(n: usize, r: usize, colour: usize) -> ColouredGraph {
        let edges: Vec<_> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v, colour)))
            .collect();
        ColouredGraph::from_edges(n, r, &edges).unwrap()
    }

    #[test]
    fn exclusive_set_examples() {
        let g = complete(4, 2, 1);
        let s = Covering::new(vec![MonoPiece::path(vec![0, 1, 2, 3], 1)]);
        assert_eq!(exclusive_cover_set(&g, &s, set(&[1])).len(), 4);
        assert!(exclusive_cover_set(&g, &s, set(&[2])).is_empty());

        let path = ColouredGraph::from_edges(3, 2, &[(0, 1, 1), (1, 2, 2)]).unwrap();
        let s = Covering::new(vec![
            MonoPiece::path(vec![0, 1], 1),
            MonoPiece::path(vec![1, 2], 2),
        ]);
        assert_eq!(exclusive_cover_set(&path, &s, set(&[1])).to_vec(), vec![0]);
        assert_eq!(exclusive_cover_set(&path, &s, set(&[2])).to_vec(), vec![2]);
    }

    #[test]
    fn singletons_and_uncovered_are_never_exclusive() {
        let g = complete(3, 2, 1);
        let s = Covering::new(vec![
            MonoPiece::path(vec![0, 1], 1),
            MonoPiece::singleton(1),
        ]);
        // 1 is also covered by a colourless piece, 2 is uncovered
        assert_eq!(exclusive_cover_set(&g, &s, set(&[1])).to_vec(), vec![0]);
    }

    #[test]
    fn potential_examples() {
        let kh = build_kneser(2, 1, 1).unwrap();
        let g = complete(6, 2, 1);
        let s = Covering::new(vec![MonoPiece::path(vec![0, 1, 2, 3, 4, 5], 1)]);
        assert_eq!(potential(&g, &s, &kh), f64::NEG_INFINITY);

        // colour 1 covers {0,1,2,3}, colour 2 covers {4,5}
        let mut edges = Vec::new();
        for u in 0..6 {
            for v in (u + 1)..6 {
                edges.push((u, v, if u >= 4 && v >= 4 { 2 } else { 1 }));
            }
        }
        let g = ColouredGraph::from_edges(6, 2, &edges).unwrap();
        let s = Covering::new(vec![
            MonoPiece::path(vec![0, 1, 2, 3], 1),
            MonoPiece::path(vec![4, 5], 2),
        ]);
        let expected = 4f64.ln() + 2f64.ln();
        assert!((potential(&g, &s, &kh) - expected).abs() < 1e-12);

        assert_eq!(potential_of_sizes(&[1, 1, 1]), 0.0);
    }

    #[test]
    fn potential_is_bounded_by_log_n() {
        let kh = build_kneser(3, 2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = ColouredGraph::random_complete(30, 3, &mut rng).unwrap();
        let s = baseline_cover(&g);
        let bound = kh.vertices().len() as f64 * 30f64.ln();
        assert!(potential(&g, &s, &kh) <= bound);
    }

    #[test]
    fn balanced_single_edge() {
        let kh = build_kneser(2, 1, 1).unwrap();
        let edge = balanced_hyperedge(&[50, 10], &kh).unwrap();
        assert_eq!(edge.sets, vec![set(&[1]), set(&[2])]);
        assert_eq!(edge.spread, 5.0);
        assert!(edge.spread <= 10.0);
    }

    #[test]
    fn balanced_equal_sizes_and_ties() {
        let kh = build_kneser(3, 2, 1).unwrap();
        let edge = balanced_hyperedge(&[7, 7, 7], &kh).unwrap();
        assert_eq!(edge.spread, 1.0);
        // first hyperedge in canonical order: {1},{2}
        assert_eq!(edge.sets, vec![set(&[1]), set(&[2])]);
    }

    #[test]
    fn balanced_picks_unique_good_pair() {
        // r=4, s=2: vertices are 2-subsets; the disjoint pairs are
        // {12|34}, {13|24}, {23|14}. Only {13|24} has spread <= 10.
        let kh = build_kneser(4, 2, 1).unwrap();
        let mut sizes = vec![0; 6];
        let idx = |x: ColourSet| kh.index_of(x).unwrap();
        sizes[idx(set(&[1, 2]))] = 1000;
        sizes[idx(set(&[3, 4]))] = 20;
        sizes[idx(set(&[1, 3]))] = 300;
        sizes[idx(set(&[2, 4]))] = 40;
        sizes[idx(set(&[2, 3]))] = 15;
        sizes[idx(set(&[1, 4]))] = 900;
        let edge = balanced_hyperedge(&sizes, &kh).unwrap();
        assert_eq!(edge.sets, vec![set(&[1, 3]), set(&[2, 4])]);
        assert!(edge.spread <= 10.0);
    }

    #[test]
    fn balanced_needs_edges() {
        let kh = build_kneser(3, 1, 1).unwrap();
        assert_eq!(
            balanced_hyperedge(&[5, 5, 5], &kh),
            Err(Error::EdgelessHypergraph)
        );
    }

    #[test]
    fn batch_on_planted_fixture() {
        // K_12; colour 1 inside {0..7}, colour 2 inside {8..11}, colour 1 across.
        let mut edges = Vec::new();
        for u in 0..12 {
            for v in (u + 1)..12 {
                edges.push((u, v, if u >= 8 { 2 } else { 1 }));
            }
        }
        let g = ColouredGraph::from_edges(12, 2, &edges).unwrap();
        let s = Covering::new(vec![
            MonoPiece::path((0..8).collect(), 1),
            MonoPiece::path(vec![8, 9, 10, 11], 2),
        ]);
        // V_{S,{1}} = 0..8, V_{S,{2}} = 8..12, n^(1/2) ≈ 3.46
        let edge = [set(&[1]), set(&[2])];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let batch = removable_batch(&g, &s, &edge, 2, &EngineConfig::default(), &mut rng).unwrap();
        assert!(!batch.is_empty());
        let eta = 2;
        let mut residual_two = exclusive_cover_set(&g, &s, set(&[2])).len();
        for p in &batch {
            let c = p.piece.colour.unwrap();
            assert!(p.piece.len() >= 2);
            for r in &p.removals {
                assert!(!r.side.contains(c));
                if r.side == set(&[2]) {
                    residual_two -= r.vertices.len();
                }
            }
        }
        assert!(residual_two <= eta);
        let mut after = s.clone();
        after.extend(batch.into_iter().map(|p| p.piece));
        assert!(validate_covering(&g, &after, 2).failures.is_empty());
    }

    #[test]
    fn batch_guard_rejects_empty_sets() {
        let g = complete(6, 2, 1);
        let s = Covering::new((0..6).map(MonoPiece::singleton).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = removable_batch(
            &g,
            &s,
            &[set(&[1]), set(&[2])],
            2,
            &EngineConfig::default(),
            &mut rng,
        );
        assert!(matches!(err, Err(Error::BatchPrecondition(_))));
    }

    #[test]
    fn batch_on_case2_decreases_potential() {
        let out = construct_case2(2, 1, 1, 256).unwrap();
        let g = &out.graph;
        let kh = build_kneser(2, 1, 1).unwrap();
        let s = baseline_cover(g);
        let state = CoverState::from_covering(g.n(), &s);
        let sizes = sizes_of(&state, &kh);
        assert!(sizes.iter().all(|&x| exceeds_root(x, 256, 2)), "{sizes:?}");
        let edge = balanced_hyperedge(&sizes, &kh).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let batch =
            removable_batch(g, &s, &edge.sets, 2, &EngineConfig::default(), &mut rng).unwrap();
        assert!(!batch.is_empty());
        let mut after = s.clone();
        after.extend(batch.into_iter().map(|p| p.piece));
        assert!(potential(g, &after, &kh) < potential(g, &s, &kh));
    }

    #[test]
    fn baseline_examples() {
        let k3 = complete(3, 1, 1);
        let cover = baseline_cover(&k3);
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.pieces[0].len(), 3);

        let empty = ColouredGraph::from_edges(3, 1, &[]).unwrap();
        let cover = baseline_cover(&empty);
        assert_eq!(cover.len(), 3);
        assert_eq!(cover.singleton_count(), 3);
    }

    #[test]
    fn baseline_random_complete_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let g = ColouredGraph::random_complete(100, 2, &mut rng).unwrap();
        let cover = baseline_cover(&g);
        assert!(validate_covering(&g, &cover, 2).valid);
        assert!(cover.len() <= 100);
    }

    #[test]
    fn filter_examples() {
        let g = complete(4, 2, 1);
        let s = Covering::new(vec![MonoPiece::path(vec![0, 1, 2, 3], 1)]);
        assert_eq!(filter_colours(&g, &s, set(&[2])).unwrap(), s);

        let mut edges = vec![];
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((u, v, if (u, v) == (2, 3) { 2 } else { 1 }));
            }
        }
        let g = ColouredGraph::from_edges(4, 2, &edges).unwrap();
        let s = Covering::new(vec![
            MonoPiece::path(vec![0, 1, 2], 1),
            MonoPiece::path(vec![3, 0], 1),
            MonoPiece::path(vec![2, 3], 2),
        ]);
        let out = filter_colours(&g, &s, set(&[2])).unwrap();
        assert_eq!(out.len(), 2);
        assert!(validate_covering(&g, &out, 1).valid);

        let only_two = Covering::new(vec![
            MonoPiece::path(vec![0, 1, 2], 1),
            MonoPiece::path(vec![2, 3], 2),
        ]);
        assert_eq!(
            filter_colours(&g, &only_two, set(&[2])),
            Err(Error::FilterWouldUncover(3))
        );
    }

    #[test]
    fn chi_one_shortcut() {
        let out = crate::constructions::construct_case1(3, 1, 1, 9).unwrap();
        let (cover, trace) = cover_few_colours(&out.graph, 1, 1, &EngineConfig::default()).unwrap();
        assert_eq!(trace.chi, 1);
        assert_eq!(cover.len(), 9);
        assert_eq!(cover.col(), 0);
        assert!(validate_covering(&out.graph, &cover, 1).valid);
    }

    #[test]
    fn monochromatic_complete_graph() {
        let g = complete(20, 2, 1);
        let (cover, trace) = cover_few_colours(&g, 1, 1, &EngineConfig::default()).unwrap();
        assert_eq!(cover.len(), 1);
        assert_eq!(cover.pieces[0].len(), 20);
        assert!(trace.records.is_empty());
        assert!(validate_covering(&g, &cover, 1).valid);
    }

    #[test]
    fn engine_rejects_bad_inputs() {
        let g = complete(5, 2, 1);
        assert!(cover_few_colours(&g, 2, 1, &EngineConfig::default()).is_err());
        let empty = ColouredGraph::from_edges(5, 2, &[]).unwrap();
        let err = cover_few_colours(&empty, 1, 1, &EngineConfig::default()).unwrap_err();
        assert_eq!(
            err.error,
            Error::IndependenceTooLarge { found: 5, alpha: 1 }
        );
        let bad = EngineConfig {
            min_piece: 1,
            ..EngineConfig::default()
        };
        assert!(cover_few_colours(&g, 1, 1, &bad).is_err());
    }

    #[test]
    fn engine_on_case2_instance() {
        let out = construct_case2(2, 1, 1, 400).unwrap();
        let (cover, trace) = cover_few_colours(&out.graph, 1, 1, &EngineConfig::default()).unwrap();
        assert!(validate_covering(&out.graph, &cover, 1).valid);
        assert!(!trace.records.is_empty());
        assert!(trace.delta_monotone());
        assert!(!trace.cap_hit);
    }

    #[test]
    fn path_heuristic_finds_hamilton_path_in_complete_bipartite() {
        let (a, b) = (6, 6);
        let mut adj = vec![Vec::new(); a + b];
        for u in 0..a {
            for v in a..a + b {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let path = longest_path_heuristic(&adj, 3, &mut rng);
        assert_eq!(path.len(), 12);
        for w in path.windows(2) {
            assert!(adj[w[0]].contains(&w[1]));
        }
    }
}
