//! Scaling experiments: run the engine over a grid of sizes and seeds and
//! fit the exponent of the median covering size.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::construct_lower_bound;
use crate::covering::validate_covering;
use crate::engine::{cover_few_colours, EngineConfig};
use crate::error::{Error, Result};
use crate::graph::ColouredGraph;

/// Where the instances of a scaling run come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// The extremal colouring for `(r, s, α)`; the seed only drives the engine.
    Construction,
    /// A uniformly random `r`-colouring of `K_n`; the seed drives both.
    Random,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Construction => "construction",
            Family::Random => "random",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "construction" => Ok(Family::Construction),
            "random" => Ok(Family::Random),
            other => Err(Error::InvalidParameters(format!(
                "unknown family {other:?}, expected construction or random"
            ))),
        }
    }
}

/// One engine run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub r: usize,
    pub s: usize,
    pub alpha: usize,
    pub n: usize,
    pub seed: u64,
    pub engine_size: usize,
    pub singleton_count: usize,
    pub colours_used: usize,
    pub runtime_ms: u64,
}

pub const CSV_HEADER: &str = "r,s,alpha,n,seed,engine_size,singleton_count,colours_used,runtime_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingParams {
    pub family: Family,
    pub r: usize,
    pub s: usize,
    pub alpha: usize,
}

pub fn instance(params: ScalingParams, n: usize, seed: u64) -> Result<ColouredGraph> {
    match params.family {
        Family::Construction => {
            Ok(construct_lower_bound(params.r, params.s, params.alpha, n)?.graph)
        }
        Family::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ColouredGraph::random_complete(n, params.r, &mut rng)
        }
    }
}

/// Builds one instance, covers it and checks the result. With `timing`
/// off the runtime column is 0, so rows depend only on the inputs.
pub fn run_one(
    params: ScalingParams,
    n: usize,
    seed: u64,
    cfg: &EngineConfig,
    timing: bool,
) -> Result<ScalingRow> {
    let g = instance(params, n, seed)?;
    let cfg = EngineConfig {
        rng_seed: seed,
        ..cfg.clone()
    };
    let start = Instant::now();
    let (cover, _) = cover_few_colours(&g, params.s, params.alpha, &cfg).map_err(|f| f.error)?;
    let elapsed = start.elapsed().as_millis() as u64;
    let report = validate_covering(&g, &cover, params.s);
    if !report.valid {
        return Err(Error::Invariant(format!(
            "engine produced an invalid covering for n={n}, seed={seed}"
        )));
    }
    Ok(ScalingRow {
        r: params.r,
        s: params.s,
        alpha: params.alpha,
        n,
        seed,
        engine_size: cover.len(),
        singleton_count: cover.singleton_count(),
        colours_used: cover.col(),
        runtime_ms: if timing { elapsed } else { 0 },
    })
}

/// Runs every `(n, seed)` pair in parallel. Rows come back sorted by
/// `(n, seed)`.
pub fn run_grid(
    params: ScalingParams,
    ns: &[usize],
    seeds: &[u64],
    cfg: &EngineConfig,
    timing: bool,
) -> Result<Vec<ScalingRow>> {
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&seed| (n, seed)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(n, seed)| run_one(params, n, seed, cfg, timing))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|row| (row.n, row.seed));
    Ok(rows)
}

pub fn median(values: &[usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid] as f64
    } else {
        (v[mid - 1] + v[mid]) as f64 / 2.0
    })
}

/// `(n, median engine size)` for each distinct `n`, in increasing order.
pub fn median_sizes(rows: &[ScalingRow]) -> Vec<(usize, f64)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let sizes: Vec<usize> = rows
                .iter()
                .filter(|r| r.n == n)
                .map(|r| r.engine_size)
                .collect();
            (n, median(&sizes).expect("at least one row per n"))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.iter().any(|&(x, y)| x == 0 || y <= 0.0) {
        return Err(Error::InvalidParameters(
            "log-log fit needs positive coordinates".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| ((x as f64).ln(), y.ln()))
        .collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if logs.len() < 2 || sxx == 0.0 {
        return Err(Error::InvalidParameters(
            "log-log fit needs at least two distinct sizes".into(),
        ));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(sxy / sxx)
}
