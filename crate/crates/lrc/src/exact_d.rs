//! Exact bounded-distance consensus: search for a tree within a given
//! leaf-removal distance of every input.
//!
//! The search walks a working tree toward a solution one leaf
//! prune-and-regraft move at a time, and two structures keep the branching
//! in check. The disagreement kernel names a quadratic-size label set that
//! must contain the next leaf to move; it reads those labels off the join
//! tree, which embeds both placements of every disputed leaf in one tree.
//! The location restriction then confines where the chosen leaf may
//! reattach, so each move tries only linearly many regraft edges. Depth is
//! bounded by the move budget, which starts equal to the distance bound.

use std::collections::{BTreeMap, BTreeSet};

use crate::distance::{common_labels, d_lr, min_label_disagreement};
use crate::error::Error;
use crate::tree::{GraftPosition, Label, LabelSet, NodeId, NodeKind, Tree};
use crate::triplets::label_mismatch;

/// Where a moved leaf can reattach inside the pruned tree: below `y`, but
/// not inside any of the clades rooted at the nodes in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocationRestriction {
    /// The node the moved leaf must stay below.
    pub y: NodeId,
    /// At most four proper descendants of `y` whose clades the leaf
    /// provably avoids.
    pub z: Vec<NodeId>,
}

/// Counters describing one bounded-distance solve.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DStats {
    /// Search nodes entered.
    pub nodes_expanded: u64,
    /// Disagreement kernels computed.
    pub kernels_computed: u64,
    /// Candidate sets generated.
    pub candidate_sets: u64,
    /// Largest kernel seen, for the 8(d+d')^2 audit.
    pub max_kernel_size: u64,
    /// Largest candidate set seen, for the 18(d+d')+8 audit.
    pub max_candidate_set: u64,
}

/// Builds a tree displaying two trees that agree on their shared labels.
///
/// `shared` is the common label set; `only1` and `only2` are the private
/// labels of `t1` and `t2`. The join carries all three groups and restricts
/// back to each input: dropping `only2` recovers `t1`, dropping `only1`
/// recovers `t2`. Both restrictions are asserted before returning. Errors
/// mean the inputs were not a valid joinable pair, which signals a caller
/// bug rather than an unsatisfiable instance.
pub fn join_trees(
    t1: &Tree,
    t2: &Tree,
    shared: &LabelSet,
    only1: &LabelSet,
    only2: &LabelSet,
) -> Result<Tree, Error> {
    if let Some(dup) = only1.intersection(only2).next() {
        return Err(Error::InvalidOperation(format!(
            "label '{dup}' is private to both sides of a join"
        )));
    }
    if let Some(dup) = only1.union(only2).find(|l| shared.contains(*l)) {
        return Err(Error::InvalidOperation(format!(
            "label '{dup}' is both shared and private"
        )));
    }
    let base1 = t1.unplant();
    let base2 = t2.unplant();
    let want1: LabelSet = shared.union(only1).cloned().collect();
    let want2: LabelSet = shared.union(only2).cloned().collect();
    let have1 = base1.labels();
    let have2 = base2.labels();
    if have1 != want1 {
        return Err(label_mismatch(&have1, &want1));
    }
    if have2 != want2 {
        return Err(label_mismatch(&have2, &want2));
    }
    if base1.restrict(shared) != base2.restrict(shared) {
        return Err(Error::InvalidOperation(
            "the trees disagree on their shared labels".to_string(),
        ));
    }
    let joined = join(
        base1.clone(),
        base2.clone(),
        shared.clone(),
        only1.clone(),
        only2.clone(),
    )?;
    assert!(
        joined.restrict(&want1) == base1 && joined.restrict(&want2) == base2,
        "a join tree must restrict back to both inputs"
    );
    Ok(joined)
}

/// Pairs two nonempty, label-disjoint trees under a fresh root.
fn attach(left: Tree, right: Tree) -> Tree {
    left.graft(&right, GraftPosition::AboveRoot)
        .expect("join pieces are nonempty and label-disjoint")
}

fn join(
    t1: Tree,
    t2: Tree,
    shared: LabelSet,
    only1: LabelSet,
    only2: LabelSet,
) -> Result<Tree, Error> {
    // Degenerate inputs first, so the split below always sees two children
    // per root. A side with no private labels is already displayed by the
    // other tree; sides with nothing in common simply become siblings.
    if shared.is_empty() && only1.is_empty() {
        return Ok(t2);
    }
    if shared.is_empty() && only2.is_empty() {
        return Ok(t1);
    }
    if only1.is_empty() {
        return Ok(t2);
    }
    if only2.is_empty() {
        return Ok(t1);
    }
    if shared.is_empty() {
        return Ok(attach(t1, t2));
    }
    let r1 = t1.root().expect("two label groups make the tree nonempty");
    let r2 = t2.root().expect("two label groups make the tree nonempty");
    let (u, v) = t1.children(r1).expect("two label groups force a branching root");
    let (w, z) = t2.children(r2).expect("two label groups force a branching root");
    let cut = |clade: LabelSet, from: &LabelSet| -> LabelSet {
        clade.intersection(from).cloned().collect()
    };
    let (cu, cv) = (t1.subtree_labels(u), t1.subtree_labels(v));
    let (cw, cz) = (t2.subtree_labels(w), t2.subtree_labels(z));
    let (l1u, x1u) = (cut(cu.clone(), &shared), cut(cu, &only1));
    let (l1v, x1v) = (cut(cv.clone(), &shared), cut(cv, &only1));
    let (l2w, x2w) = (cut(cw.clone(), &shared), cut(cw, &only2));
    let (l2z, x2z) = (cut(cz.clone(), &shared), cut(cz, &only2));
    if l1u == l2w && l1v == l2z {
        let left = join(t1.subtree(u), t2.subtree(w), l1u, x1u, x2w)?;
        let right = join(t1.subtree(v), t2.subtree(z), l1v, x1v, x2z)?;
        return Ok(attach(left, right));
    }
    if l1u == l2z && l1v == l2w {
        let left = join(t1.subtree(u), t2.subtree(z), l1u, x1u, x2z)?;
        let right = join(t1.subtree(v), t2.subtree(w), l1v, x1v, x2w)?;
        return Ok(attach(left, right));
    }
    if l1u.is_empty() {
        let private = t1.subtree(u);
        let rest = join(t1.subtree(v), t2, shared, x1v, only2)?;
        return Ok(attach(private, rest));
    }
    if l1v.is_empty() {
        let private = t1.subtree(v);
        let rest = join(t1.subtree(u), t2, shared, x1u, only2)?;
        return Ok(attach(rest, private));
    }
    if l2w.is_empty() {
        let private = t2.subtree(w);
        let rest = join(t1, t2.subtree(z), shared, only1, x2z)?;
        return Ok(attach(private, rest));
    }
    if l2z.is_empty() {
        let private = t2.subtree(z);
        let rest = join(t1, t2.subtree(w), shared, only1, x2w)?;
        return Ok(attach(rest, private));
    }
    Err(Error::InvalidOperation(
        "the trees disagree on their shared labels".to_string(),
    ))
}

/// A label unused so far, formed from `label`, one or more dots, and the
/// side digit.
fn fresh_copy(label: &Label, side: u8, taken: &mut LabelSet) -> Label {
    let mut dots = String::from(".");
    loop {
        let candidate = Label::new(format!("{label}{dots}{side}"))
            .expect("dots and a digit extend a valid label");
        if taken.insert(candidate.clone()) {
            return candidate;
        }
        dots.push('.');
    }
}

/// The labels that any small enough repair between two trees must draw
/// from: every minimal set of at most `k` leaf removals reconciling `t1`
/// and `t2` is contained in the result, which holds at most `8k²` labels.
///
/// The construction joins the two trees after splitting each disputed leaf
/// into a per-tree copy, then walks the join's skeleton spanned by the
/// copies. Each skeleton edge contributes the labels strung along it,
/// withholding one dangling clade at a time; a strip survives only when
/// the budget could cover it.
pub fn disagreement_kernel(k: u32, t1: &Tree, t2: &Tree) -> Result<LabelSet, Error> {
    let have1 = t1.labels();
    let have2 = t2.labels();
    if have1 != have2 {
        return Err(label_mismatch(&have1, &have2));
    }
    let moved = min_label_disagreement(t1, t2)?;
    if moved.len() > k as usize {
        return Err(Error::KernelBudget {
            distance: moved.len() as u32,
            budget: k,
        });
    }
    if moved.is_empty() {
        return Ok(LabelSet::new());
    }
    let mut taken = have1.clone();
    let mut map1 = BTreeMap::new();
    let mut map2 = BTreeMap::new();
    let mut copies1 = LabelSet::new();
    let mut copies2 = LabelSet::new();
    for label in &moved {
        let c1 = fresh_copy(label, 1, &mut taken);
        let c2 = fresh_copy(label, 2, &mut taken);
        copies1.insert(c1.clone());
        copies2.insert(c2.clone());
        map1.insert(label.clone(), c1);
        map2.insert(label.clone(), c2);
    }
    let shared: LabelSet = have1.difference(&moved).cloned().collect();
    let joined = join_trees(
        &t1.relabel(&map1),
        &t2.relabel(&map2),
        &shared,
        &copies1,
        &copies2,
    )?;
    let all_copies: LabelSet = copies1.union(&copies2).cloned().collect();
    let skeleton = joined.restrict(&all_copies);
    let mut kernel = moved.clone();
    for lower in skeleton.edges() {
        let upper = skeleton.parent(lower).expect("edges exclude the root");
        let top = joined.corresponding_node(&skeleton, upper)?;
        let bottom = joined.corresponding_node(&skeleton, lower)?;
        // The strip of this edge: labels hanging off the interior of the
        // join path between the two endpoints, grouped by the interior
        // node carrying them. The empty clade stands for keeping none of
        // them, which covers repairs that swallow the whole strip.
        let mut strip = LabelSet::new();
        let mut clades = vec![LabelSet::new()];
        let mut cur = bottom;
        loop {
            let up = joined.parent(cur).expect("top is an ancestor of bottom");
            if up == top {
                break;
            }
            let (a, b) = joined.children(up).expect("a path node branches");
            let off = if a == cur { b } else { a };
            let clade = joined.subtree_labels(off);
            strip.extend(clade.iter().cloned());
            clades.push(clade);
            cur = up;
        }
        debug_assert!(
            strip.iter().all(|l| shared.contains(l)),
            "strips hold shared labels only"
        );
        for clade in &clades {
            if strip.len() - clade.len() <= k as usize {
                kernel.extend(strip.difference(clade).cloned());
            }
        }
    }
    assert!(
        kernel.len() <= 8 * (k as usize).pow(2),
        "kernel within its quadratic bound"
    );
    Ok(kernel)
}

/// Leaf counts per node, not counting the leaf labeled `skip`.
fn leaf_counts_without(t: &Tree, skip: &Label) -> Vec<usize> {
    let n = t.node_count();
    let mut count = vec![0usize; n];
    for id in (0..n).rev() {
        count[id] = match t.kind(id) {
            NodeKind::Leaf(l) => usize::from(l != skip),
            NodeKind::Inner(a, b) => count[*a] + count[*b],
            NodeKind::Planted(c) => count[*c],
        };
    }
    count
}

fn is_proper_descendant(t: &Tree, node: NodeId, ancestor: NodeId) -> bool {
    let mut cur = t.parent(node);
    while let Some(p) = cur {
        if p == ancestor {
            return true;
        }
        cur = t.parent(p);
    }
    false
}

/// The highest descendants of `top` whose clades hold at least `k` leaves
/// while leaving at least `k` of `top`'s leaves outside. Clades of at most
/// `3k` leaves are left alone: their remainder already fits the location
/// bound, and skipping them keeps the exclusion list at two per side.
fn collect_blocks(t: &Tree, top: NodeId, k: usize, counts: &[usize], out: &mut Vec<NodeId>) {
    fn walk(t: &Tree, node: NodeId, top: NodeId, k: usize, counts: &[usize], out: &mut Vec<NodeId>) {
        if node != top && counts[node] >= k && counts[top] - counts[node] >= k {
            out.push(node);
            return;
        }
        if let Some((a, b)) = t.children(node) {
            walk(t, a, top, k, counts, out);
            walk(t, b, top, k, counts, out);
        }
    }
    if counts[top] <= 3 * k {
        return;
    }
    walk(t, top, top, k, counts, out);
}

/// Narrows where the leaf `x` can reattach inside the planted pruned tree
/// `tm`, using where `t2` keeps it.
///
/// `tm` is `t2` minus the removed labels `xm` (which include `x`), planted
/// so that the edge above its root is a legal regraft position. The walk
/// happens in `t2` minus all of `xm` except `x`: the lowest ancestor of
/// `x` with at least `d + dp` other leaves, and above it the lowest
/// ancestor adding `d + dp` more, bracket the region `x` may move within;
/// heavy clades inside the region that provably keep `x` out are excluded.
/// The returned node ids refer to `tm`.
pub fn location_restriction(
    tm: &Tree,
    t2: &Tree,
    xm: &LabelSet,
    x: &Label,
    d: u32,
    dp: u32,
) -> Result<LocationRestriction, Error> {
    if !xm.contains(x) {
        return Err(Error::UnknownLabel(x.to_string()));
    }
    if !tm.is_planted() {
        return Err(Error::InvalidOperation(
            "location restriction expects a planted pruned tree".to_string(),
        ));
    }
    let k = (d + dp) as usize;
    if xm.len() > k {
        return Err(Error::InvalidOperation(format!(
            "{} removed labels exceed the combined budget {k}",
            xm.len()
        )));
    }
    if tm.unplant() != t2.remove_leaves(xm) {
        return Err(Error::InvalidOperation(
            "the pruned tree is not the second tree minus the removed labels".to_string(),
        ));
    }
    let root = tm.root().expect("a planted tree is nonempty");
    let mut keep_x = xm.clone();
    keep_x.remove(x);
    let probe = t2.remove_leaves(&keep_x).plant();
    let counts = leaf_counts_without(&probe, x);
    let leaf = probe
        .leaf_id(x)
        .ok_or_else(|| Error::UnknownLabel(x.to_string()))?;

    // The lowest ancestor of x with at least k other leaves below it, and
    // the child arm it was reached through.
    let mut low = None;
    let mut arm = leaf;
    let mut cur = probe.parent(leaf);
    while let Some(node) = cur {
        if counts[node] >= k {
            low = Some((node, arm));
            break;
        }
        arm = node;
        cur = probe.parent(node);
    }
    let restriction = match low {
        None => LocationRestriction {
            y: root,
            z: Vec::new(),
        },
        Some((znode, zarm)) => {
            // The lowest ancestor of z holding k leaves beyond z's clade.
            // Falling off the top means y is the planted root.
            let mut high = None;
            let mut yarm = znode;
            let mut cur = probe.parent(znode);
            while let Some(node) = cur {
                if counts[node] - counts[znode] >= k {
                    high = Some((node, yarm));
                    break;
                }
                yarm = node;
                cur = probe.parent(node);
            }
            let mut exclusions = Vec::new();
            let (zc1, zc2) = probe.children(znode).expect("z branches");
            collect_blocks(&probe, if zc1 == zarm { zc2 } else { zc1 }, k, &counts, &mut exclusions);
            if let Some((ynode, yarm)) = high {
                let (yc1, yc2) = probe.children(ynode).expect("y branches");
                collect_blocks(&probe, if yc1 == yarm { yc2 } else { yc1 }, k, &counts, &mut exclusions);
            }
            let y = match high {
                None => root,
                Some((ynode, _)) => {
                    let mut labels = probe.subtree_labels(ynode);
                    labels.remove(x);
                    tm.lca(&labels)?
                }
            };
            let mut z = Vec::new();
            for node in exclusions {
                let labels = probe.subtree_labels(node);
                debug_assert!(!labels.contains(x), "exclusions never cover x");
                z.push(tm.lca(&labels)?);
            }
            z.sort_unstable();
            z.dedup();
            LocationRestriction { y, z }
        }
    };
    assert!(restriction.z.len() <= 4, "at most two exclusions per side");
    debug_assert!(restriction
        .z
        .iter()
        .all(|&node| is_proper_descendant(tm, node, restriction.y)));
    let covered: LabelSet = restriction
        .z
        .iter()
        .flat_map(|&node| tm.subtree_labels(node))
        .collect();
    let stray = tm
        .subtree_labels(restriction.y)
        .difference(&covered)
        .count();
    assert!(stray <= 8 * k, "open region within the location bound");
    Ok(restriction)
}

fn collect_leaves(t: &Tree, node: NodeId, out: &mut Vec<NodeId>) {
    match t.children(node) {
        None => out.push(node),
        Some((a, b)) => {
            collect_leaves(t, a, out);
            collect_leaves(t, b, out);
        }
    }
}

/// Every tree worth trying when the leaf `x` must move in `t1` to approach
/// a common neighbor of `t1` and `t2`: at most `18(d+dp)+8` regrafts of
/// `x`, all satisfying `T' − {x} = t1 − {x}`.
///
/// If a solution within distance `d` of `t2` and within `dp` further moves
/// of `t1` exists with `x` moved first, the move reaching it is among the
/// results. The infeasible-branch error says no small disagreement between
/// the trees minus `x` exists, so the caller should try another leaf
/// rather than fail.
pub fn candidate_trees(
    t1: &Tree,
    t2: &Tree,
    x: &Label,
    d: u32,
    dp: u32,
) -> Result<Vec<Tree>, Error> {
    let have1 = t1.labels();
    let have2 = t2.labels();
    if have1 != have2 {
        return Err(label_mismatch(&have1, &have2));
    }
    if !t1.contains_label(x) {
        return Err(Error::UnknownLabel(x.to_string()));
    }
    let budget = d + dp;
    let mut single = LabelSet::new();
    single.insert(x.clone());
    let base = t1.remove_leaves(&single);
    if base.is_empty() {
        return Err(Error::InvalidOperation(
            "the moved label is the only leaf".to_string(),
        ));
    }
    let rest = min_label_disagreement(&base, &t2.remove_leaves(&single))?;
    if budget == 0 || rest.len() > (budget - 1) as usize {
        return Err(Error::InfeasibleBranch(budget.saturating_sub(1)));
    }
    let mut removed = rest;
    removed.insert(x.clone());
    let pruned = t1.remove_leaves(&removed).plant();
    let spot = location_restriction(&pruned, t2, &removed, x, d, dp)?;

    // Regraft edges in the pruned tree: every edge on a path from y down to
    // an exclusion node or to a leaf outside all exclusions.
    let mut targets = spot.z.clone();
    for (leaf, _) in pruned.leaves() {
        if !is_proper_descendant(&pruned, leaf, spot.y) {
            continue;
        }
        if spot
            .z
            .iter()
            .any(|&node| node == leaf || is_proper_descendant(&pruned, leaf, node))
        {
            continue;
        }
        targets.push(leaf);
    }
    let mut fence = BTreeSet::new();
    for &target in &targets {
        let mut cur = target;
        while cur != spot.y {
            fence.insert(cur);
            cur = pruned.parent(cur).expect("targets sit below y");
        }
    }
    debug_assert!(fence.len() <= 16 * budget as usize + 8);

    let shed = base.plant();
    let graft_leaf = Tree::leaf(x.clone());
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &edge in &fence {
        let above = pruned.parent(edge).expect("an edge has a parent end");
        let top = shed.corresponding_node(&pruned, above)?;
        let bottom = shed.corresponding_node(&pruned, edge)?;
        // Grafting anywhere on the path between the corresponding nodes, or
        // inside a removed-label clade hanging off its interior, lands x on
        // this pruned edge once the other removed labels vanish.
        let mut places = vec![bottom];
        let mut cur = bottom;
        loop {
            let up = shed.parent(cur).expect("top is an ancestor of bottom");
            if up == top {
                break;
            }
            let (a, b) = shed.children(up).expect("a path node branches");
            let off = if a == cur { b } else { a };
            debug_assert!(
                shed.subtree_labels(off)
                    .iter()
                    .all(|l| removed.contains(l)),
                "only removed labels hang between corresponding nodes"
            );
            collect_leaves(&shed, off, &mut places);
            cur = up;
        }
        let mut slots = BTreeSet::new();
        for &place in &places {
            let mut cur = place;
            while cur != top {
                slots.insert(cur);
                cur = shed.parent(cur).expect("places sit below top");
            }
        }
        for &slot in &slots {
            let tree = shed.graft(&graft_leaf, GraftPosition::Edge(slot))?.unplant();
            debug_assert!(tree.remove_leaves(&single) == base);
            if seen.insert(tree.clone()) {
                out.push(tree);
            }
        }
    }
    assert!(
        out.len() <= 18 * budget as usize + 8,
        "candidate count within the branch bound"
    );
    Ok(out)
}

/// A tree within leaf-removal distance `d` of every input, if one exists.
///
/// The first input seeds the search and moves toward a solution one leaf
/// regraft at a time, with at most `d` moves total.
pub fn solve_d(trees: &[Tree], d: u32) -> Result<Option<Tree>, Error> {
    solve_d_with_stats(trees, d).map(|(solution, _)| solution)
}

/// Like [`solve_d`], also reporting search counters.
pub fn solve_d_with_stats(trees: &[Tree], d: u32) -> Result<(Option<Tree>, DStats), Error> {
    common_labels(trees)?;
    let mut stats = DStats::default();
    let solution = descend(&trees[0], trees, d, d, &mut stats)?;
    if let Some(tree) = &solution {
        debug_assert!(trees
            .iter()
            .all(|t| d_lr(tree, t).expect("validated above") <= d));
    }
    Ok((solution, stats))
}

fn descend(
    current: &Tree,
    trees: &[Tree],
    d: u32,
    moves_left: u32,
    stats: &mut DStats,
) -> Result<Option<Tree>, Error> {
    stats.nodes_expanded += 1;
    let mut over = None;
    for (i, t) in trees.iter().enumerate() {
        let dist = d_lr(current, t)?;
        if dist > d + moves_left {
            // Unreachable within the remaining moves, each worth at most
            // one unit of distance.
            return Ok(None);
        }
        if dist > d && over.is_none() {
            over = Some(i);
        }
    }
    let Some(i) = over else {
        return Ok(Some(current.clone()));
    };
    let kernel = disagreement_kernel(d + moves_left, current, &trees[i])?;
    stats.kernels_computed += 1;
    stats.max_kernel_size = stats.max_kernel_size.max(kernel.len() as u64);
    for label in &kernel {
        let candidates = match candidate_trees(current, &trees[i], label, d, moves_left) {
            Ok(set) => set,
            Err(Error::InfeasibleBranch(_)) => continue,
            Err(e) => return Err(e),
        };
        stats.candidate_sets += 1;
        stats.max_candidate_set = stats.max_candidate_set.max(candidates.len() as u64);
        for next in &candidates {
            if let Some(solution) = descend(next, trees, d, moves_left - 1, stats)? {
                return Ok(Some(solution));
            }
        }
    }
    Ok(None)
}
