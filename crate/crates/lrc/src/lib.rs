//! Leaf-removal consensus for rooted binary phylogenies.
//!
//! When gene trees disagree, one way to reconcile them is to delete as few
//! leaves as possible until the survivors fit a single supertree. This crate
//! implements that toolkit: the leaf-removal distance between two trees, the
//! consensus problem of minimizing total distance to a set of trees, exact
//! bounded-budget solvers, a 2-approximation, brute-force oracles, random
//! instance generators, and a small command-line front end.
//!
//! The fastest way in is the examples directory; each file exercises one
//! capability end to end:
//!
//! - `cargo run --example pairwise_distance` - distance between two trees
//! - `cargo run --example agreement_set` - maximum agreement leaf set
//! - `cargo run --example approx_consensus` - 2-approximate consensus
//! - `cargo run --example exact_consensus` - exact minimum total removals
//! - `cargo run --example bounded_solve` - per-tree distance budget search
//! - `cargo run --example kernel_labels` - kernelized candidate labels
//! - `cargo run --example supertree_check` - triplet compatibility / BUILD
//! - `cargo run --example random_trees` - seeded uniform random trees
//! - `cargo run --example expected_distance` - mean distance experiment
//! - `cargo run --example hardness_gadget` - triplet-inconsistency reduction
//!
//! The same operations are available as subcommands of the thin `lrc` binary
//! (`cargo run --bin lrc -- --help`).

pub mod approx;
pub mod cli;
pub mod distance;
pub mod error;
pub mod exact_d;
pub mod exact_q;
pub mod generate;
pub mod newick;
pub mod oracle;
pub mod tree;
pub mod triplets;

pub use approx::{approx_consensus, approx_consensus_with_threads, SolveReport};
pub use distance::{
    d_lr, disagreement_to_supertree, mast, min_label_disagreement, supertree_to_disagreement,
    LeafDisagreement,
};
pub use error::Error;
pub use exact_d::{
    candidate_trees, disagreement_kernel, join_trees, location_restriction, solve_d,
    solve_d_with_stats, DStats, LocationRestriction,
};
pub use exact_q::{min_q, solve_q, solve_q_with_stats, LockedTriplets, QStats};
pub use generate::{
    expected_distance_experiment, minrti_reduction, numbered_labels, random_tree,
    random_tree_with, ExperimentStats, SplitMix64,
};
pub use newick::{parse_newick, to_newick};
pub use tree::{GraftPosition, Label, LabelSet, LprMove, NodeId, NodeKind, Tree};
pub use triplets::{
    build_supertree, conflicts, is_compatible, is_hitting_set, triplets, ConflictSet,
    DenseConflict, DensePattern, Triplet, TripletMap,
};
