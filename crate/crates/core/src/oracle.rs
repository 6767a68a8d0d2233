//! Exact minimum monochromatic path coverings for small graphs.
//!
//! Vertex sets are bitmasks. For a colour set `T`, every vertex set spanned
//! by a monochromatic path in a colour of `T` is enumerated by depth-first
//! search over `(mask, end)` states; only the inclusion-maximal sets are
//! kept, and an exact set cover over them is solved by memoised search on
//! the set of still-uncovered vertices.

use std::collections::BTreeMap;

use crate::covering::{Covering, MonoPiece};
use crate::error::{Error, Result};
use crate::graph::{Colour, ColouredGraph};
use crate::kneser::ColourSet;

/// Largest graph [`enumerate_mono_paths`] accepts.
pub const MAX_PATH_VERTICES: usize = 16;
/// Largest graph [`min_cover_exact`] accepts.
pub const MAX_COVER_VERTICES: usize = 14;
/// Default number of set-cover search steps before giving up.
pub const DEFAULT_COVER_BUDGET: u64 = 200_000_000;

/// All vertex sets coverable by one piece whose colour lies in `colours`,
/// each with a witness piece. Single vertices are always present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCatalogue {
    n: usize,
    colours: ColourSet,
    pieces: BTreeMap<u32, MonoPiece>,
}

impl PathCatalogue {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colours(&self) -> ColourSet {
        self.colours
    }

    /// Every realisable vertex mask, in increasing numeric order.
    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        self.pieces.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, mask: u32) -> bool {
        self.pieces.contains_key(&mask)
    }

    pub fn witness(&self, mask: u32) -> Option<&MonoPiece> {
        self.pieces.get(&mask)
    }

    /// The masks not strictly contained in another mask of the catalogue.
    pub fn maximal(&self) -> Vec<u32> {
        let full = 1usize << self.n;
        // sup[m]: some catalogue mask contains m
        let mut sup = vec![false; full];
        for &m in self.pieces.keys() {
            sup[m as usize] = true;
        }
        for bit in 0..self.n {
            for m in (0..full).rev() {
                if m & (1 << bit) == 0 && sup[m | (1 << bit)] {
                    sup[m] = true;
                }
            }
        }
        self.pieces
            .keys()
            .copied()
            .filter(|&m| (0..self.n).all(|b| m >> b & 1 == 1 || !sup[m as usize | (1 << b)]))
            .collect()
    }
}

/// Enumerates every vertex set spanned by a path whose edges all share one
/// colour of `colours`, plus every single vertex.
pub fn enumerate_mono_paths(g: &ColouredGraph, colours: ColourSet) -> Result<PathCatalogue> {
    let n = g.n();
    if n > MAX_PATH_VERTICES {
        return Err(Error::TooLarge(format!(
            "path enumeration supports at most {MAX_PATH_VERTICES} vertices, got {n}"
        )));
    }
    let mut pieces: BTreeMap<u32, MonoPiece> = (0..n)
        .map(|v| (1u32 << v, MonoPiece::singleton(v)))
        .collect();
    let mut seen = vec![false; n << n];
    for c in colours.iter().filter(|&c| usize::from(c) <= g.r()) {
        let adj: Vec<u32> = (0..n)
            .map(|u| {
                g.neighbours(u)
                    .filter(|&(_, k)| k == c)
                    .fold(0, |m, (v, _)| m | 1 << v)
            })
            .collect();
        seen.iter_mut().for_each(|x| *x = false);
        let mut search = PathSearch {
            n,
            colour: c,
            adj: &adj,
            seen: &mut seen,
            pieces: &mut pieces,
            path: Vec::with_capacity(n),
        };
        for v in 0..n {
            search.extend(v, 1 << v);
        }
    }
    Ok(PathCatalogue { n, colours, pieces })
}

struct PathSearch<'a> {
    n: usize,
    colour: Colour,
    adj: &'a [u32],
    seen: &'a mut [bool],
    pieces: &'a mut BTreeMap<u32, MonoPiece>,
    path: Vec<usize>,
}

impl PathSearch<'_> {
    fn extend(&mut self, end: usize, mask: u32) {
        let key = ((mask as usize) * self.n) + end;
        if self.seen[key] {
            return;
        }
        self.seen[key] = true;
        self.path.push(end);
        if self.path.len() >= 2 {
            self.pieces
                .entry(mask)
                .or_insert_with(|| MonoPiece::path(self.path.clone(), self.colour));
        }
        let mut next = self.adj[end] & !mask;
        while next != 0 {
            let w = next.trailing_zeros() as usize;
            next &= next - 1;
            self.extend(w, mask | 1 << w);
        }
        self.path.pop();
    }
}

/// The smallest covering of `g` by monochromatic paths and single vertices
/// using at most `s` colours, with a witness.
pub fn min_cover_exact(g: &ColouredGraph, s: usize) -> Result<(usize, Covering)> {
    min_cover_exact_with_budget(g, s, DEFAULT_COVER_BUDGET)
}

/// [`min_cover_exact`] with an explicit limit on set-cover search steps.
pub fn min_cover_exact_with_budget(
    g: &ColouredGraph,
    s: usize,
    budget: u64,
) -> Result<(usize, Covering)> {
    let n = g.n();
    if n > MAX_COVER_VERTICES {
        return Err(Error::TooLarge(format!(
            "exact covering supports at most {MAX_COVER_VERTICES} vertices, got {n}"
        )));
    }
    if n == 0 {
        return Ok((0, Covering::default()));
    }
    // Only colours that occur matter, and adding colours never hurts, so
    // it is enough to scan colour sets of size exactly min(s, #present).
    let present: Vec<Colour> = {
        let mut used = ColourSet::EMPTY;
        for (_, _, c) in g.edges() {
            used = used.union(ColourSet::from_colours([c]));
        }
        used.iter().collect()
    };
    let size = s.min(present.len());
    let mut steps = 0u64;
    let mut best: Option<(usize, Covering)> = None;
    for choice in ColourSet::subsets(present.len(), size) {
        let colours = ColourSet::from_colours(choice.iter().map(|i| present[usize::from(i) - 1]));
        let catalogue = enumerate_mono_paths(g, colours)?;
        let bound = best.as_ref().map_or(n, |(k, _)| *k);
        let mut solver = SetCover::new(n, &catalogue.maximal(), budget, steps);
        let found = solver.solve(bound)?;
        steps = solver.steps;
        if let Some(masks) = found {
            if best.as_ref().is_none_or(|(k, _)| masks.len() < *k) {
                let cover = Covering::new(
                    masks
                        .iter()
                        .map(|m| catalogue.witness(*m).expect("catalogue mask").clone())
                        .collect(),
                );
                best = Some((masks.len(), cover));
            }
        }
    }
    best.ok_or_else(|| Error::Invariant("no covering found; singletons always cover".into()))
}

/// Exact minimum set cover of `0..n` by `masks`, branching on the lowest
/// uncovered vertex.
struct SetCover {
    full: u32,
    by_vertex: Vec<Vec<u32>>,
    /// Least number of masks covering the vertex set used as index, when known.
    memo: Vec<u8>,
    budget: u64,
    steps: u64,
}

const UNKNOWN: u8 = u8::MAX;

impl SetCover {
    fn new(n: usize, masks: &[u32], budget: u64, steps: u64) -> Self {
        let mut by_vertex = vec![Vec::new(); n];
        for &m in masks {
            for (v, list) in by_vertex.iter_mut().enumerate() {
                if m >> v & 1 == 1 {
                    list.push(m);
                }
            }
        }
        for list in &mut by_vertex {
            list.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        }
        Self {
            full: ((1u64 << n) - 1) as u32,
            by_vertex,
            memo: vec![UNKNOWN; 1 << n],
            budget,
            steps,
        }
    }

    /// A cover with at most `bound` masks, if one exists.
    fn solve(&mut self, bound: usize) -> Result<Option<Vec<u32>>> {
        let k = usize::from(self.cost(self.full)?);
        if k > bound {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(k);
        let mut left = self.full;
        while left != 0 {
            let v = left.trailing_zeros() as usize;
            let want = self.memo[left as usize] - 1;
            let m = *self.by_vertex[v]
                .iter()
                .find(|&&m| self.memo_of(left & !m) == Some(want))
                .expect("memo is consistent");
            out.push(m);
            left &= !m;
        }
        Ok(Some(out))
    }

    fn memo_of(&self, left: u32) -> Option<u8> {
        if left == 0 {
            return Some(0);
        }
        let k = self.memo[left as usize];
        (k != UNKNOWN).then_some(k)
    }

    fn cost(&mut self, left: u32) -> Result<u8> {
        if let Some(k) = self.memo_of(left) {
            return Ok(k);
        }
        let v = left.trailing_zeros() as usize;
        let mut best = u8::MAX - 1;
        for i in 0..self.by_vertex[v].len() {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::BudgetExceeded(self.budget));
            }
            let m = self.by_vertex[v][i];
            let k = 1 + self.cost(left & !m)?;
            best = best.min(k);
            if best == 1 {
                break;
            }
        }
        self.memo[left as usize] = best;
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::construct_case1;
    use crate::covering::validate_covering;

    fn set(cs: &[Colour]) -> ColourSet {
        ColourSet::from_colours(cs.iter().copied())
    }

    fn mono_k3() -> ColouredGraph {
        ColouredGraph::from_edges(3, 1, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap()
    }

    #[test]
    fn triangle_masks() {
        let cat = enumerate_mono_paths(&mono_k3(), set(&[1])).unwrap();
        assert_eq!(
            cat.masks().collect::<Vec<_>>(),
            (1..8).collect::<Vec<u32>>()
        );
        assert_eq!(cat.maximal(), vec![0b111]);
        let w = cat.witness(0b111).unwrap();
        assert_eq!(w.len(), 3);
        assert_eq!(w.colour, Some(1));
    }

    #[test]
    fn empty_colour_set_gives_singletons() {
        let cat = enumerate_mono_paths(&mono_k3(), ColourSet::EMPTY).unwrap();
        assert_eq!(cat.masks().collect::<Vec<_>>(), vec![1, 2, 4]);
        assert!(cat
            .masks()
            .all(|m| cat.witness(m).unwrap().colour.is_none()));
    }

    #[test]
    fn two_coloured_triangle_masks() {
        let g = ColouredGraph::from_edges(3, 2, &[(0, 1, 1), (1, 2, 2), (0, 2, 1)]).unwrap();
        let cat = enumerate_mono_paths(&g, set(&[1])).unwrap();
        // colour 1 is the path 1-0-2
        assert_eq!(cat.masks().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 7]);
        assert!(!cat.contains(0b110));
        let w = cat.witness(0b111).unwrap();
        assert_eq!(w.vertices[1], 0);
    }

    #[test]
    fn enumeration_rejects_large_graphs() {
        let g = ColouredGraph::from_edges(17, 1, &[]).unwrap();
        assert!(matches!(
            enumerate_mono_paths(&g, set(&[1])),
            Err(Error::TooLarge(_))
        ));
        let g = ColouredGraph::from_edges(15, 1, &[]).unwrap();
        assert!(matches!(min_cover_exact(&g, 1), Err(Error::TooLarge(_))));
    }

    #[test]
    fn monochromatic_triangle_needs_one_piece() {
        let (k, cover) = min_cover_exact(&mono_k3(), 1).unwrap();
        assert_eq!(k, 1);
        assert!(validate_covering(&mono_k3(), &cover, 1).valid);
    }

    #[test]
    fn four_cycle_with_diagonals() {
        let g = ColouredGraph::from_edges(
            4,
            2,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 3, 1),
                (3, 0, 1),
                (0, 2, 2),
                (1, 3, 2),
            ],
        )
        .unwrap();
        let (k, cover) = min_cover_exact(&g, 1).unwrap();
        assert_eq!(k, 1);
        assert_eq!(cover.pieces[0].colour, Some(1));
        assert!(validate_covering(&g, &cover, 1).valid);
    }

    #[test]
    fn case1_instance_is_starved() {
        let out = construct_case1(3, 1, 1, 6).unwrap();
        let (k, cover) = min_cover_exact(&out.graph, 1).unwrap();
        assert!(k >= 3, "got {k}");
        assert!(validate_covering(&out.graph, &cover, 1).valid);
    }

    #[test]
    fn edgeless_graph_needs_singletons() {
        let g = ColouredGraph::from_edges(5, 2, &[]).unwrap();
        let (k, cover) = min_cover_exact(&g, 1).unwrap();
        assert_eq!(k, 5);
        assert_eq!(cover.singleton_count(), 5);
        assert_eq!(
            min_cover_exact(&ColouredGraph::from_edges(0, 1, &[]).unwrap(), 1)
                .unwrap()
                .0,
            0
        );
    }

    #[test]
    fn monotone_in_s() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = ColouredGraph::random_complete(9, 3, &mut rng).unwrap();
            let sizes: Vec<usize> = (0..=3).map(|s| min_cover_exact(&g, s).unwrap().0).collect();
            assert_eq!(sizes[0], 9);
            assert!(sizes.windows(2).all(|w| w[0] >= w[1]), "{sizes:?}");
        }
    }

    #[test]
    fn budget_is_reported() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let g = ColouredGraph::random(12, 2, 0.3, &mut rng).unwrap();
        assert_eq!(
            min_cover_exact_with_budget(&g, 1, 3),
            Err(Error::BudgetExceeded(3))
        );
    }
}
