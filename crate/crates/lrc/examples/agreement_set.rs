//! Maximum agreement subtree of two trees: the largest leaf set on which
//! they induce the same topology.

use lrc::{mast, parse_newick, Error};

fn main() -> Result<(), Error> {
    let one = parse_newick("((((a,b),c),d),(e,(f,g)));")?;
    let two = parse_newick("((((a,c),b),g),((d,e),f));")?;

    let agreement = mast(&one, &two)?;
    println!("tree 1: {}", one.to_newick());
    println!("tree 2: {}", two.to_newick());
    println!(
        "largest agreeing leaf set ({} of {}): {{{}}}",
        agreement.len(),
        one.leaf_count(),
        agreement
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    // Both restrictions collapse to the same tree on the agreement set.
    let restricted = one.restrict(&agreement);
    assert_eq!(restricted, two.restrict(&agreement));
    println!("common restriction: {}", restricted.to_newick());
    Ok(())
}
