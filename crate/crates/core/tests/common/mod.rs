//! Invariant checks shared by the property suite and the acceptance runner.
//! Each check builds its instance from a seed and a few small parameters.

#![allow(dead_code)]

use monocover_core::constructions::min_n;
use monocover_core::engine::CoverState;
use monocover_core::{
    balanced_hyperedge, baseline_cover, build_kneser, chi_formula, construct_lower_bound,
    exclusive_cover_set, filter_colours, potential, removable_batch, validate_covering, ColourSet,
    ColouredGraph, Covering, EngineConfig, KneserHypergraph, MonoPiece,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CASES: u32 = 1000;

/// Parameter triples whose Kneser hypergraph has edges.
pub const ENGINE_PARAMS: [(usize, usize, usize); 4] = [(2, 1, 1), (3, 2, 1), (4, 2, 1), (4, 3, 2)];

pub fn random_graph(seed: u64, n: usize, r: usize, complete: bool) -> ColouredGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if complete {
        ColouredGraph::random_complete(n, r, &mut rng).unwrap()
    } else {
        ColouredGraph::random(n, r, 0.5, &mut rng).unwrap()
    }
}

/// A random walk in one colour, stopped at a random length.
pub fn random_piece<R: Rng>(g: &ColouredGraph, rng: &mut R) -> MonoPiece {
    let n = g.n();
    let colour = rng.gen_range(1..=g.r()) as u8;
    let mut path = vec![rng.gen_range(0..n)];
    let limit = rng.gen_range(1..=n);
    while path.len() < limit {
        let end = *path.last().unwrap();
        let options: Vec<usize> = g
            .neighbours(end)
            .filter(|&(w, c)| c == colour && !path.contains(&w))
            .map(|(w, _)| w)
            .collect();
        if options.is_empty() {
            break;
        }
        path.push(options[rng.gen_range(0..options.len())]);
    }
    if path.len() == 1 {
        MonoPiece::singleton(path[0])
    } else {
        MonoPiece::path(path, colour)
    }
}

/// The greedy covering plus `extra` random pieces.
pub fn random_cover<R: Rng>(g: &ColouredGraph, extra: usize, rng: &mut R) -> Covering {
    let mut cover = baseline_cover(g);
    for _ in 0..extra {
        cover.push(random_piece(g, rng));
    }
    cover
}

/// Adding pieces to a full covering never enlarges any `V_{S,X}`.
pub fn check_monotonicity(
    seed: u64,
    n: usize,
    r: usize,
    extra: usize,
    more: usize,
) -> Result<(), TestCaseError> {
    let g = random_graph(seed, n, r, seed.is_multiple_of(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let s = random_cover(&g, extra, &mut rng);
    let mut bigger = s.clone();
    for _ in 0..more {
        bigger.push(random_piece(&g, &mut rng));
    }
    for size in 0..=r {
        for x in ColourSet::subsets(r, size) {
            let before = exclusive_cover_set(&g, &s, x);
            let after = exclusive_cover_set(&g, &bigger, x);
            prop_assert!(after.is_subset(&before), "X = {x}");
        }
    }
    Ok(())
}

/// A covering in the middle of an engine run: the starting covering
/// followed by `warmup` batches. Even seeds start from the greedy covering
/// of an extremal instance; odd seeds from a random perfect matching of a
/// random colouring of `K_n`, where every `V_{S,X}` is large.
pub struct EngineState {
    pub graph: ColouredGraph,
    pub cover: Covering,
    pub kh: KneserHypergraph,
    pub chi: usize,
}

pub fn engine_state(seed: u64, which: usize, n: usize, warmup: usize) -> Option<EngineState> {
    let (r, s, alpha) = ENGINE_PARAMS[which % ENGINE_PARAMS.len()];
    let kh = build_kneser(r, s, alpha).unwrap();
    let chi = chi_formula(r, s, alpha).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = if seed.is_multiple_of(2) {
        let n = n.max(min_n(r, s, alpha).ok()?);
        let out = construct_lower_bound(r, s, alpha, n).ok()?;
        EngineState {
            cover: baseline_cover(&out.graph),
            graph: out.graph,
            chi,
            kh,
        }
    } else {
        let graph = ColouredGraph::random_complete(n, r, &mut rng).unwrap();
        EngineState {
            cover: matching_cover(&graph, &mut rng),
            graph,
            chi,
            kh,
        }
    };
    for _ in 0..warmup {
        let edge = balanced_edge(&state)?;
        let cfg = EngineConfig::default();
        let batch =
            removable_batch(&state.graph, &state.cover, &edge, state.chi, &cfg, &mut rng).ok()?;
        state.cover.extend(batch.into_iter().map(|p| p.piece));
    }
    Some(state)
}

/// Single-edge pieces along a random perfect matching of a complete graph;
/// with `n` odd the last vertex shares an edge with the first.
pub fn matching_cover<R: Rng>(g: &ColouredGraph, rng: &mut R) -> Covering {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(rng);
    let mut cover = Covering::default();
    for pair in order.chunks(2) {
        let (u, v) = if pair.len() == 2 {
            (pair[0], pair[1])
        } else {
            (pair[0], order[0])
        };
        cover.push(MonoPiece::path(vec![u, v], g.colour(u, v).unwrap()));
    }
    cover
}

fn sizes(state: &EngineState) -> Vec<usize> {
    let cs = CoverState::from_covering(state.graph.n(), &state.cover);
    state
        .kh
        .vertices()
        .iter()
        .map(|&x| cs.exclusive_size(x))
        .collect()
}

/// The balanced hyperedge, if the loop guard `|V_{S,X}| > n^{1/χ}` holds.
fn balanced_edge(state: &EngineState) -> Option<Vec<ColourSet>> {
    let sizes = sizes(state);
    let n = state.graph.n() as u128;
    if sizes
        .iter()
        .any(|&k| (k as u128).pow(state.chi as u32) <= n)
    {
        return None;
    }
    Some(balanced_hyperedge(&sizes, &state.kh).ok()?.sets)
}

/// Removability contract and strict decrease of `δ` for one batch.
/// Instances that miss the batch precondition are rejected, not passed.
pub fn check_batch(seed: u64, which: usize, n: usize, warmup: usize) -> Result<(), TestCaseError> {
    let Some(state) = engine_state(seed, which, n, warmup) else {
        return Err(TestCaseError::reject("no engine state"));
    };
    let Some(edge) = balanced_edge(&state) else {
        return Err(TestCaseError::reject("loop guard fails"));
    };
    let g = &state.graph;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let batch = removable_batch(
        g,
        &state.cover,
        &edge,
        state.chi,
        &EngineConfig::default(),
        &mut rng,
    )
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(!batch.is_empty());

    let mut after = state.cover.clone();
    after.extend(batch.iter().map(|p| p.piece.clone()));
    for x in &edge {
        let mut expected = exclusive_cover_set(g, &state.cover, *x);
        for p in &batch {
            let colour = p.piece.colour.expect("batch pieces are paths");
            prop_assert!(p.piece.len() >= 2);
            for rm in p.removals.iter().filter(|rm| rm.side == *x) {
                prop_assert!(!x.contains(colour));
                for &v in &rm.vertices {
                    prop_assert!(p.piece.vertices.contains(&v));
                    expected.remove(v);
                }
            }
        }
        prop_assert!(
            exclusive_cover_set(g, &after, *x).is_subset(&expected),
            "X = {x}"
        );
    }
    prop_assert!(validate_covering(g, &after, g.r()).failures.is_empty());

    let before = potential(g, &state.cover, &state.kh);
    let now = potential(g, &after, &state.kh);
    prop_assert!(now < before, "delta {before} -> {now}");
    Ok(())
}

/// After covering `V_{S,X}` by single vertices, dropping the colours of `X`
/// keeps a valid covering with no colour of `X`.
pub fn check_filter(
    seed: u64,
    n: usize,
    r: usize,
    extra: usize,
    xmask: u64,
) -> Result<(), TestCaseError> {
    let g = random_graph(seed, n, r, !seed.is_multiple_of(3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51f1);
    let mut cover = random_cover(&g, extra, &mut rng);
    let x = ColourSet::from_mask(xmask & ColourSet::all(r).mask());
    let starved = exclusive_cover_set(&g, &cover, x);
    cover.extend(starved.iter().map(MonoPiece::singleton));
    let out = filter_colours(&g, &cover, x).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(out.colours().iter().all(|&c| !x.contains(c)));
    prop_assert!(out.col() <= r - x.len());
    prop_assert!(validate_covering(&g, &out, r - x.len()).valid);
    Ok(())
}

pub fn monotonicity_strategy() -> impl Strategy<Value = (u64, usize, usize, usize, usize)> {
    (any::<u64>(), 2usize..24, 2usize..=4, 0usize..6, 1usize..6)
}

pub fn batch_strategy() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (
        any::<u64>(),
        0usize..ENGINE_PARAMS.len(),
        40usize..260,
        0usize..3,
    )
}

pub fn filter_strategy() -> impl Strategy<Value = (u64, usize, usize, usize, u64)> {
    (
        any::<u64>(),
        1usize..24,
        2usize..=4,
        0usize..6,
        any::<u64>(),
    )
}

pub fn config() -> Config {
    Config {
        cases: CASES,
        max_global_rejects: 8 * CASES,
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn runner() -> TestRunner {
    TestRunner::new(config())
}
