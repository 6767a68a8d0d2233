//! Benchmark fixtures.

use monocover_core::{construct_case1, construct_lower_bound, ColouredGraph};

/// The extremal colouring for `(r, s, 1)` on `n` vertices.
pub fn extremal(r: usize, s: usize, n: usize) -> ColouredGraph {
    construct_lower_bound(r, s, 1, n)
        .expect("parameters have a construction")
        .graph
}

/// The smallest instance family the oracle certifies.
pub fn starved_clique(n: usize) -> ColouredGraph {
    construct_case1(3, 1, 1, n)
        .expect("n is a multiple of 3")
        .graph
}
