//! Why exact consensus is hard: any triplet inconsistency instance turns
//! into a consensus instance. Discarding a triplet corresponds to paying
//! one extra leaf removal beyond the mandatory filler deletions.

use lrc::{minrti_reduction, oracle::brute_min_disagreement, Error, Label, Triplet};

fn main() -> Result<(), Error> {
    let lab = |s: &str| Label::new(s).expect("short ascii labels");
    // ab|c and ac|b cannot both hold, so one must be discarded.
    let instance = vec![
        Triplet::new(lab("a"), lab("b"), lab("c"))?,
        Triplet::new(lab("a"), lab("c"), lab("b"))?,
    ];

    let trees = minrti_reduction(&instance, 1)?;
    println!("encoded consensus instance:");
    for tree in &trees {
        println!("  {}", tree.to_newick());
    }

    // Both triplets mention all of {a, b, c}, so no filler leaves exist
    // and the whole cost is the one unavoidable discard.
    let cost = brute_min_disagreement(&trees, false)?;
    println!("minimum total removals: {cost}");
    assert_eq!(cost, 1);
    Ok(())
}
