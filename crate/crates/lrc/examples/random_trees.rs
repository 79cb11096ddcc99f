//! Seeded uniform random trees. Each label is inserted onto a uniformly
//! random edge of the tree built so far, which makes every topology on the
//! label set equally likely, and the same seed always gives the same tree.

use lrc::{numbered_labels, random_tree};

fn main() {
    let labels = numbered_labels("t", 8);

    for seed in 0..4 {
        let tree = random_tree(&labels, seed);
        println!("seed {seed}: {}", tree.to_newick());
    }

    // Reproducibility is exact, not statistical.
    assert_eq!(random_tree(&labels, 3), random_tree(&labels, 3));
    println!("seed 3 drawn twice gives the identical tree");
}
