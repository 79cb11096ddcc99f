//! Per-tree budget search: find a tree within distance d of every input.
//! The search walks the first input toward a solution one leaf regraft at
//! a time, steered by disagreement kernels and location restrictions.

use lrc::{d_lr, parse_newick, solve_d_with_stats, Error};

fn main() -> Result<(), Error> {
    let trees = vec![
        parse_newick("((a,b),(c,d));")?,
        parse_newick("((a,c),(b,d));")?,
        parse_newick("((a,c),(b,d));")?,
    ];

    // No single tree matches all three exactly.
    let (none, _) = solve_d_with_stats(&trees, 0)?;
    assert!(none.is_none());
    println!("d = 0: no solution");

    // One regraft away, a common neighbor exists.
    let (found, stats) = solve_d_with_stats(&trees, 1)?;
    let solution = found.expect("distance 1 suffices here");
    println!("d = 1: {}", solution.to_newick());
    for (i, tree) in trees.iter().enumerate() {
        println!("  distance to tree {i}: {}", d_lr(&solution, tree)?);
    }
    println!(
        "search: {} nodes, {} kernels, {} candidate sets",
        stats.nodes_expanded, stats.kernels_computed, stats.candidate_sets
    );
    Ok(())
}
