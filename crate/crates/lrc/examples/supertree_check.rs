//! Supertree assembly: do several trees, possibly on different label sets,
//! fit together into one tree displaying them all?

use lrc::{build_supertree, is_compatible, parse_newick, Error};

fn main() -> Result<(), Error> {
    // Overlapping but compatible: each tree constrains a different corner.
    let compatible = vec![
        parse_newick("((a,b),c);")?,
        parse_newick("((a,b),d);")?,
        parse_newick("((c,d),e);")?,
    ];
    let supertree = build_supertree(&compatible).expect("these trees fit together");
    println!("compatible inputs merge into: {}", supertree.to_newick());

    // The three possible triplets on one label set can never coexist.
    let conflicting = vec![
        parse_newick("((a,b),c);")?,
        parse_newick("((a,c),b);")?,
        parse_newick("((b,c),a);")?,
    ];
    assert!(!is_compatible(&conflicting));
    println!("the three triplets on {{a, b, c}} are incompatible");
    Ok(())
}
