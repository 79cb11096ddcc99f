//! Leaf-removal distance between two trees: how many leaves must go before
//! the survivors agree.

use lrc::{d_lr, min_label_disagreement, parse_newick, Error};

fn main() -> Result<(), Error> {
    let one = parse_newick("(((a,b),(c,d)),(e,f));")?;
    let two = parse_newick("(((a,c),(b,d)),(e,f));")?;

    let distance = d_lr(&one, &two)?;
    let removed = min_label_disagreement(&one, &two)?;
    println!("tree 1: {}", one.to_newick());
    println!("tree 2: {}", two.to_newick());
    println!("distance: {distance}");
    println!(
        "one smallest repair: remove {{{}}}",
        removed
            .iter()
            .map(|l| l.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );

    // Dropping the repair set from both trees leaves the same topology.
    let kept_one = one.remove_leaves(&removed);
    let kept_two = two.remove_leaves(&removed);
    assert_eq!(kept_one, kept_two);
    println!("after removal both trees become: {}", kept_one.to_newick());
    Ok(())
}
