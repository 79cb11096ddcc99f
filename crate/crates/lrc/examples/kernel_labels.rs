//! Disagreement kernel: a small label set guaranteed to contain every
//! minimal repair of size at most k between two trees. Branching over
//! kernel labels instead of all labels is what makes bounded search fast.

use lrc::{d_lr, disagreement_kernel, parse_newick, Error};

fn main() -> Result<(), Error> {
    let one = parse_newick("((((a,b),c),d),(e,f));")?;
    let two = parse_newick("((((a,b),d),c),(e,f));")?;
    let k = 2;

    println!("tree 1: {}", one.to_newick());
    println!("tree 2: {}", two.to_newick());
    println!("distance: {}", d_lr(&one, &two)?);

    let kernel = disagreement_kernel(k, &one, &two)?;
    let labels: Vec<&str> = kernel.iter().map(|l| l.as_str()).collect();
    println!("kernel for k = {k}: {{{}}}", labels.join(", "));
    println!(
        "{} of {} labels, within the 8k^2 = {} bound",
        kernel.len(),
        one.leaf_count(),
        8 * k * k
    );

    // Labels outside the kernel, here e and f, never appear in a minimal
    // repair of size at most k, so a solver can ignore them.
    assert!(kernel.len() <= (8 * k * k) as usize);
    Ok(())
}
