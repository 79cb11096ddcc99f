//! Exact minimum total leaf removals, by iterative deepening on the budget.
//! The solver prunes leaves until the remnants fit one supertree, then
//! extends that supertree back to the full label set.

use lrc::{d_lr, min_q, parse_newick, Error};

fn main() -> Result<(), Error> {
    // Three trees in a cyclic disagreement: no tree satisfies all of them,
    // and any two of the three pairwise conflicts share no repair leaf.
    let trees = vec![
        parse_newick("(((a,b),c),(d,e));")?,
        parse_newick("(((a,c),b),(d,e));")?,
        parse_newick("(((b,c),a),(d,e));")?,
    ];

    let (q, removals, consensus) =
        min_q(&trees, 12)?.expect("a large enough budget always succeeds");
    println!("minimum total removals: {q}");
    for (i, set) in removals.removals.iter().enumerate() {
        let labels: Vec<&str> = set.iter().map(|l| l.as_str()).collect();
        println!("tree {i} gives up: {{{}}}", labels.join(", "));
    }
    println!("consensus: {}", consensus.to_newick());

    // The consensus realizes the same total as the removal sets.
    let total: u32 = trees
        .iter()
        .map(|t| d_lr(&consensus, t))
        .collect::<Result<Vec<_>, _>>()?
        .iter()
        .sum();
    assert_eq!(total, q);
    Ok(())
}
