//! Exhaustive reference solvers for small label sets.
//!
//! Everything here enumerates the full space of rooted binary trees and is
//! meant for cross-checking the real algorithms on inputs small enough to
//! brute-force. The enumeration refuses label sets above a guard size unless
//! the caller opts in, since the count grows as the double factorial
//! 1*3*5*...*(2n-3).

use crate::distance::{common_labels, d_lr};
use crate::error::Error;
use crate::tree::{GraftPosition, Label, LabelSet, NodeId, Tree};
use crate::triplets::is_compatible;

/// Largest label set `enumerate_trees` accepts without `allow_large`.
pub const ENUMERATION_LIMIT: usize = 8;

/// How many rooted binary trees exist on `n` distinct labels.
pub fn num_trees(n: usize) -> u64 {
    match n {
        0 | 1 => 1,
        _ => (2..=n).map(|i| (2 * i - 3) as u64).product(),
    }
}

fn extend(current: Tree, rest: &[Label], out: &mut Vec<Tree>) {
    let Some((next, tail)) = rest.split_first() else {
        out.push(current.unplant());
        return;
    };
    let leaf = Tree::leaf(next.clone());
    let edges: Vec<NodeId> = current.edges().collect();
    for e in edges {
        let grown = current
            .graft(&leaf, GraftPosition::Edge(e))
            .expect("grafting a fresh leaf onto an existing edge");
        extend(grown, tail, out);
    }
}

/// Every rooted binary tree on the given labels, sorted by serialized form.
/// Attaching each successive leaf to every edge of a planted working tree
/// visits each shape exactly once.
pub fn enumerate_trees(labels: &LabelSet, allow_large: bool) -> Result<Vec<Tree>, Error> {
    let n = labels.len();
    if n > ENUMERATION_LIMIT && !allow_large {
        return Err(Error::EnumerationGuard {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let ordered: Vec<Label> = labels.iter().cloned().collect();
    let mut out = Vec::new();
    match ordered.split_first() {
        None => out.push(Tree::empty()),
        Some((first, tail)) => {
            extend(Tree::leaf(first.clone()).plant(), tail, &mut out);
        }
    }
    out.sort_by_key(|t| t.to_newick());
    debug_assert_eq!(out.len() as u64, num_trees(n));
    debug_assert!(out.windows(2).all(|w| w[0] != w[1]));
    Ok(out)
}

/// The tree minimizing the total leaf-removal distance to the inputs, found
/// by scanning every tree on the shared label set. Ties go to the first tree
/// in enumeration order. Returns the winner and its total distance.
pub fn brute_consensus(trees: &[Tree], allow_large: bool) -> Result<(Tree, u32), Error> {
    let labels = common_labels(trees)?;
    let candidates = enumerate_trees(&labels, allow_large)?;
    let mut best: Option<(Tree, u32)> = None;
    for cand in candidates {
        let total: u32 = trees
            .iter()
            .map(|t| d_lr(&cand, t))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .sum();
        if best.as_ref().is_none_or(|(_, b)| total < *b) {
            best = Some((cand, total));
        }
    }
    best.ok_or(Error::EmptyInput)
}

/// Budget for the direct removal-set cross-check inside
/// `brute_min_disagreement`; kept tiny so the subset enumeration stays cheap.
const REMOVAL_CHECK_CAP: u32 = 3;

/// The smallest total removal-set size over all ways to make the inputs
/// compatible. Scanning output trees and scanning removal sets describe the
/// same optimum from opposite directions, so every call re-verifies the
/// equality up to the removal-scan cap.
pub fn brute_min_disagreement(trees: &[Tree], allow_large: bool) -> Result<u32, Error> {
    let total = brute_consensus(trees, allow_large)?.1;
    let direct = brute_min_disagreement_by_removal(trees, REMOVAL_CHECK_CAP)?;
    let expected = (total <= REMOVAL_CHECK_CAP).then_some(total);
    assert_eq!(
        direct, expected,
        "removal-set scan must agree with the consensus scan"
    );
    Ok(total)
}

fn removal_scan(
    trees: &[Tree],
    pruned: &mut Vec<Tree>,
    spent: u32,
    cap: u32,
    best: &mut Option<u32>,
) {
    if best.is_some_and(|b| spent >= b) {
        return;
    }
    let i = pruned.len();
    if i == trees.len() {
        if is_compatible(pruned) {
            *best = Some(spent);
        }
        return;
    }
    let labels: Vec<Label> = trees[i].labels().into_iter().collect();
    let n = labels.len() as u32;
    for mask in 0u32..(1 << n) {
        let cost = mask.count_ones();
        if spent + cost > cap || best.is_some_and(|b| spent + cost >= b) {
            continue;
        }
        let drop: LabelSet = labels
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        pruned.push(trees[i].remove_leaves(&drop));
        removal_scan(trees, pruned, spent + cost, cap, best);
        pruned.pop();
    }
}

/// The same minimum found by enumerating per-tree removal subsets directly
/// instead of scanning output trees, limited to collections of total size at
/// most `cap`. None when nothing within the cap makes the inputs compatible.
pub fn brute_min_disagreement_by_removal(
    trees: &[Tree],
    cap: u32,
) -> Result<Option<u32>, Error> {
    let labels = common_labels(trees)?;
    if labels.len() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationGuard {
            n: labels.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best = None;
    removal_scan(trees, &mut Vec::new(), 0, cap, &mut best);
    Ok(best)
}

/// The first enumerated tree whose distance to every input is at most `d`,
/// or None when no tree on the shared label set qualifies.
pub fn brute_ast_lr_d(
    trees: &[Tree],
    d: u32,
    allow_large: bool,
) -> Result<Option<Tree>, Error> {
    let labels = common_labels(trees)?;
    for cand in enumerate_trees(&labels, allow_large)? {
        let mut ok = true;
        for t in trees {
            if d_lr(&cand, t)? > d {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(cand));
        }
    }
    Ok(None)
}
