//! Fast consensus by picking the best input tree. The chosen tree's total
//! distance is at most twice the optimum, because each of its distances is
//! bounded by a detour through the optimal consensus.

use lrc::{approx_consensus, oracle::brute_consensus, parse_newick, Error};

fn main() -> Result<(), Error> {
    let trees = vec![
        parse_newick("((((a,b),c),d),e);")?,
        parse_newick("((((a,c),b),e),d);")?,
        parse_newick("((((b,c),a),d),e);")?,
    ];

    let report = approx_consensus(&trees)?;
    println!("picked: {}", report.consensus.to_newick());
    println!("per-tree distances: {:?}", report.per_tree_distance);
    println!("total: {}", report.total);

    // The exhaustive oracle confirms the factor-2 guarantee on this
    // instance. Enumerating all trees on 5 labels is still cheap.
    let (_, optimal) = brute_consensus(&trees, false)?;
    println!("optimal total: {optimal}");
    assert!(report.total <= 2 * optimal);
    Ok(())
}
