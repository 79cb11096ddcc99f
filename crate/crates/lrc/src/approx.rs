//! The factor-2 consensus heuristic: return the input tree closest to all
//! the others.
//!
//! The total distance from the best input tree is at most twice the optimum,
//! because the triangle inequality routes every pair of inputs through an
//! optimal consensus. The full pairwise distance matrix lands in the report's
//! stats for diagnostics.

use std::collections::BTreeMap;

use serde_json::json;

use crate::distance::{common_labels, d_lr};
use crate::error::Error;
use crate::tree::Tree;

/// The outcome of a consensus computation: the chosen tree, its distance to
/// every input, the total, and solver-specific counters. Counters hold only
/// values that are identical across reruns, so reports compare bit-for-bit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveReport {
    pub consensus: Tree,
    pub per_tree_distance: Vec<u32>,
    pub total: u32,
    pub stats: BTreeMap<String, u64>,
}

impl SolveReport {
    /// Assembles a report around a proposed consensus by measuring it
    /// against every input.
    pub fn from_consensus(
        consensus: Tree,
        trees: &[Tree],
        stats: BTreeMap<String, u64>,
    ) -> Result<SolveReport, Error> {
        let per_tree_distance = trees
            .iter()
            .map(|t| d_lr(&consensus, t))
            .collect::<Result<Vec<_>, _>>()?;
        let total = per_tree_distance.iter().sum();
        Ok(SolveReport {
            consensus,
            per_tree_distance,
            total,
            stats,
        })
    }

    /// The report as a JSON document, with the consensus serialized inline.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "consensus": self.consensus.to_newick(),
            "per_tree_distance": self.per_tree_distance,
            "total": self.total,
            "stats": self.stats,
        })
    }
}

/// Picks the input tree with the smallest total distance to all inputs.
/// Equivalent to `approx_consensus_with_threads(trees, 1)`.
pub fn approx_consensus(trees: &[Tree]) -> Result<SolveReport, Error> {
    approx_consensus_with_threads(trees, 1)
}

/// The 2-approximation with an explicit worker count for filling the
/// pairwise distance matrix. Ties between equally good inputs go to the
/// lowest index, so the result is independent of the thread count.
pub fn approx_consensus_with_threads(
    trees: &[Tree],
    threads: usize,
) -> Result<SolveReport, Error> {
    common_labels(trees)?;
    let t = trees.len();
    let pairs: Vec<(usize, usize)> = (0..t)
        .flat_map(|i| ((i + 1)..t).map(move |j| (i, j)))
        .collect();
    let measured: Vec<u32> = if threads > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidOperation(format!("thread pool setup: {e}")))?;
        pool.install(|| {
            pairs
                .par_iter()
                .map(|&(i, j)| d_lr(&trees[i], &trees[j]))
                .collect::<Result<Vec<_>, _>>()
        })?
    } else {
        pairs
            .iter()
            .map(|&(i, j)| d_lr(&trees[i], &trees[j]))
            .collect::<Result<Vec<_>, _>>()?
    };

    let mut matrix = vec![vec![0u32; t]; t];
    let mut stats = BTreeMap::new();
    for (&(i, j), &d) in pairs.iter().zip(&measured) {
        matrix[i][j] = d;
        matrix[j][i] = d;
        stats.insert(format!("d_{i}_{j}"), u64::from(d));
    }
    stats.insert("distance_evaluations".into(), pairs.len() as u64);

    let selected = (0..t)
        .min_by_key(|&i| matrix[i].iter().map(|&d| u64::from(d)).sum::<u64>())
        .expect("nonempty input survived validation");
    stats.insert("selected_index".into(), selected as u64);

    Ok(SolveReport {
        consensus: trees[selected].clone(),
        per_tree_distance: matrix[selected].clone(),
        total: matrix[selected].iter().sum(),
        stats,
    })
}
