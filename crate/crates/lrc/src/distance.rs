//! The leaf-removal distance between trees and its two-way bridge to
//! supertrees.
//!
//! For trees on the same label set the distance counts how many leaves must
//! be discarded before the remaining restrictions agree, which equals the
//! label count minus the size of a maximum agreement subset. A collection of
//! per-tree removal sets and a single tree displaying all pruned inputs carry
//! the same information; the conversions live here too.

use crate::error::Error;
use crate::tree::{GraftPosition, LabelSet, NodeKind, Tree};
use crate::triplets::{build_supertree, label_mismatch};

/// The label set shared by every tree in a nonempty collection, or the error
/// naming the first offending symmetric difference.
pub(crate) fn common_labels(trees: &[Tree]) -> Result<LabelSet, Error> {
    let Some(first) = trees.first() else {
        return Err(Error::EmptyInput);
    };
    let labels = first.labels();
    for t in &trees[1..] {
        let other = t.labels();
        if other != labels {
            return Err(label_mismatch(&labels, &other));
        }
    }
    Ok(labels)
}

/// Subtree sizes indexed by node id; preorder ids make every subtree a
/// contiguous id range starting at its root.
fn subtree_sizes(t: &Tree) -> Vec<usize> {
    let n = t.node_count();
    let mut size = vec![1usize; n];
    for id in (0..n).rev() {
        if let Some((c1, c2)) = t.children(id) {
            size[id] = 1 + size[c1] + size[c2];
        }
    }
    size
}

const PICK_STRAIGHT: u8 = 0;
const PICK_CROSSED: u8 = 1;
const PICK_DOWN_U1: u8 = 2;
const PICK_DOWN_U2: u8 = 3;
const PICK_DOWN_V1: u8 = 4;
const PICK_DOWN_V2: u8 = 5;
const PICK_LEAF: u8 = 6;

struct MastTable<'a> {
    t1: &'a Tree,
    t2: &'a Tree,
    size1: Vec<usize>,
    size2: Vec<usize>,
    score: Vec<u32>,
    pick: Vec<u8>,
    width: usize,
}

impl<'a> MastTable<'a> {
    fn at(&self, u: usize, v: usize) -> u32 {
        self.score[u * self.width + v]
    }

    /// Fills the table bottom-up; preorder ids guarantee children come after
    /// their parent, so a reverse sweep sees every child pair first.
    fn fill(t1: &'a Tree, t2: &'a Tree) -> MastTable<'a> {
        let (n1, n2) = (t1.node_count(), t2.node_count());
        let mut table = MastTable {
            t1,
            t2,
            size1: subtree_sizes(t1),
            size2: subtree_sizes(t2),
            score: vec![0; n1 * n2],
            pick: vec![PICK_LEAF; n1 * n2],
            width: n2,
        };
        for u in (0..n1).rev() {
            for v in (0..n2).rev() {
                let cell = u * n2 + v;
                match (t1.kind(u), t2.kind(v)) {
                    (NodeKind::Leaf(x), _) => {
                        let hit = t2
                            .leaf_id(x)
                            .is_some_and(|id| id >= v && id < v + table.size2[v]);
                        table.score[cell] = hit as u32;
                    }
                    (_, NodeKind::Leaf(y)) => {
                        let hit = t1
                            .leaf_id(y)
                            .is_some_and(|id| id >= u && id < u + table.size1[u]);
                        table.score[cell] = hit as u32;
                    }
                    (NodeKind::Inner(u1, u2), NodeKind::Inner(v1, v2)) => {
                        let (u1, u2, v1, v2) = (*u1, *u2, *v1, *v2);
                        let options = [
                            (table.at(u1, v1) + table.at(u2, v2), PICK_STRAIGHT),
                            (table.at(u1, v2) + table.at(u2, v1), PICK_CROSSED),
                            (table.at(u1, v), PICK_DOWN_U1),
                            (table.at(u2, v), PICK_DOWN_U2),
                            (table.at(u, v1), PICK_DOWN_V1),
                            (table.at(u, v2), PICK_DOWN_V2),
                        ];
                        let best = options.iter().map(|(s, _)| *s).max().unwrap();
                        let pick = options.iter().find(|(s, _)| *s == best).unwrap().1;
                        table.score[cell] = best;
                        table.pick[cell] = pick;
                    }
                    _ => unreachable!("planted nodes are stripped before the sweep"),
                }
            }
        }
        table
    }

    fn collect(&self, u: usize, v: usize, out: &mut LabelSet) {
        if self.at(u, v) == 0 {
            return;
        }
        match (self.t1.kind(u), self.t2.kind(v)) {
            (NodeKind::Leaf(x), _) => {
                out.insert(x.clone());
            }
            (_, NodeKind::Leaf(y)) => {
                out.insert(y.clone());
            }
            (NodeKind::Inner(u1, u2), NodeKind::Inner(v1, v2)) => {
                match self.pick[u * self.width + v] {
                    PICK_STRAIGHT => {
                        self.collect(*u1, *v1, out);
                        self.collect(*u2, *v2, out);
                    }
                    PICK_CROSSED => {
                        self.collect(*u1, *v2, out);
                        self.collect(*u2, *v1, out);
                    }
                    PICK_DOWN_U1 => self.collect(*u1, v, out),
                    PICK_DOWN_U2 => self.collect(*u2, v, out),
                    PICK_DOWN_V1 => self.collect(u, *v1, out),
                    PICK_DOWN_V2 => self.collect(u, *v2, out),
                    _ => unreachable!(),
                }
            }
            _ => unreachable!(),
        }
    }
}

/// A maximum label subset on which the two trees agree, meaning their
/// restrictions to it are equal. Ties are broken deterministically, so equal
/// inputs always yield the same subset. The trees must share a label set.
pub fn mast(t1: &Tree, t2: &Tree) -> Result<LabelSet, Error> {
    let (l1, l2) = (t1.labels(), t2.labels());
    if l1 != l2 {
        return Err(label_mismatch(&l1, &l2));
    }
    if l1.is_empty() {
        return Ok(LabelSet::new());
    }
    let (a, b) = (t1.unplant(), t2.unplant());
    let table = MastTable::fill(&a, &b);
    let mut out = LabelSet::new();
    table.collect(0, 0, &mut out);
    debug_assert_eq!(out.len() as u32, table.at(0, 0));
    debug_assert_eq!(a.restrict(&out), b.restrict(&out));
    Ok(out)
}

/// The leaf-removal distance: how many labels must be dropped from both
/// trees before they become equal.
pub fn d_lr(t1: &Tree, t2: &Tree) -> Result<u32, Error> {
    let agree = mast(t1, t2)?;
    Ok((t1.leaf_count() - agree.len()) as u32)
}

/// A minimum label set whose removal makes the two trees equal, i.e. the
/// complement of a maximum agreement subset.
pub fn min_label_disagreement(t1: &Tree, t2: &Tree) -> Result<LabelSet, Error> {
    let agree = mast(t1, t2)?;
    Ok(t1.labels().difference(&agree).cloned().collect())
}

/// Per-tree removal sets for a collection of input trees: removing
/// `removals[i]` from tree `i` leaves restrictions that all fit on one tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LeafDisagreement {
    pub removals: Vec<LabelSet>,
}

impl LeafDisagreement {
    /// Total number of removed labels, counted per tree.
    pub fn size(&self) -> usize {
        self.removals.iter().map(|x| x.len()).sum()
    }

    /// The largest single removal set.
    pub fn max_size(&self) -> usize {
        self.removals.iter().map(|x| x.len()).max().unwrap_or(0)
    }
}

/// Reads minimum removal sets off a proposed output tree: tree `i` loses
/// exactly the labels outside its maximum agreement with `supertree`. Every
/// input must share the supertree's label set.
pub fn supertree_to_disagreement(
    supertree: &Tree,
    trees: &[Tree],
) -> Result<LeafDisagreement, Error> {
    let removals = trees
        .iter()
        .map(|t| min_label_disagreement(supertree, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LeafDisagreement { removals })
}

/// Builds one tree displaying every pruned input. Labels removed from every
/// input still belong on the output, so they are grafted back above the root
/// in sorted order; any position satisfies the displayed-restriction
/// guarantee equally. Errors if a removal set mentions a label its tree
/// lacks, or if the pruned trees remain incompatible.
pub fn disagreement_to_supertree(
    c: &LeafDisagreement,
    trees: &[Tree],
) -> Result<Tree, Error> {
    if c.removals.len() != trees.len() {
        return Err(Error::InvalidOperation(format!(
            "{} removal sets for {} trees",
            c.removals.len(),
            trees.len()
        )));
    }
    let mut union = LabelSet::new();
    for (t, x) in trees.iter().zip(&c.removals) {
        let have = t.labels();
        if let Some(stray) = x.iter().find(|l| !have.contains(*l)) {
            return Err(Error::UnknownLabel(stray.to_string()));
        }
        union.extend(have);
    }
    let pruned: Vec<Tree> = trees
        .iter()
        .zip(&c.removals)
        .map(|(t, x)| t.remove_leaves(x))
        .collect();
    let mut result = build_supertree(&pruned).ok_or(Error::Incompatible)?;
    let present = result.labels();
    for missing in union.difference(&present) {
        result = result.graft(&Tree::leaf(missing.clone()), GraftPosition::AboveRoot)?;
    }
    #[cfg(debug_assertions)]
    if trees.iter().all(|t| t.labels() == union) {
        let total: u32 = trees.iter().map(|t| d_lr(&result, t).unwrap()).sum();
        debug_assert!(
            total as usize <= c.size(),
            "rebuilt tree must cost no more than the removal sets"
        );
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;
    use crate::tree::Label;

    fn t(s: &str) -> Tree {
        parse_newick(s).unwrap()
    }

    fn labels(names: &[&str]) -> LabelSet {
        names.iter().map(|s| Label::new(*s).unwrap()).collect()
    }

    #[test]
    fn identical_trees_are_at_distance_zero() {
        let x = t("((a,b),(c,d));");
        assert_eq!(d_lr(&x, &x).unwrap(), 0);
        assert_eq!(mast(&x, &x).unwrap(), x.labels());
    }

    #[test]
    fn single_swap_costs_one() {
        let t1 = t("((a,b),c);");
        let t2 = t("((a,c),b);");
        assert_eq!(d_lr(&t1, &t2).unwrap(), 1);
        let x = min_label_disagreement(&t1, &t2).unwrap();
        assert_eq!(x.len(), 1);
        let lab = x.iter().next().unwrap().clone();
        assert_eq!(
            t1.remove_leaves(&[lab.clone()].into_iter().collect()),
            t2.remove_leaves(&[lab].into_iter().collect())
        );
    }

    #[test]
    fn fully_crossed_cherries_cost_two() {
        let t1 = t("((a,b),(c,d));");
        let t2 = t("((a,c),(b,d));");
        assert_eq!(d_lr(&t1, &t2).unwrap(), 2);
        assert_eq!(d_lr(&t2, &t1).unwrap(), 2);
    }

    #[test]
    fn agreement_subset_restrictions_match() {
        let t1 = t("(((a,b),(c,d)),(e,f));");
        let t2 = t("(((a,c),(b,d)),(f,e));");
        let agree = mast(&t1, &t2).unwrap();
        assert_eq!(t1.restrict(&agree), t2.restrict(&agree));
        assert_eq!(agree.len() as u32, 6 - d_lr(&t1, &t2).unwrap());
    }

    #[test]
    fn distance_requires_equal_label_sets() {
        let t1 = t("((a,b),c);");
        let t2 = t("((a,b),d);");
        match d_lr(&t1, &t2) {
            Err(Error::LabelSetMismatch(msg)) => {
                assert!(msg.contains('c') && msg.contains('d'));
            }
            other => panic!("expected label mismatch, got {other:?}"),
        }
    }

    #[test]
    fn planted_inputs_measure_like_unplanted() {
        let t1 = t("((a,b),c);").plant();
        let t2 = t("((a,c),b);");
        assert_eq!(d_lr(&t1, &t2).unwrap(), 1);
    }

    #[test]
    fn removal_sets_round_trip_through_a_supertree() {
        let trees = vec![t("((a,b),c);"), t("((a,c),b);")];
        let c = LeafDisagreement {
            removals: vec![labels(&["a"]), labels(&["a"])],
        };
        let st = disagreement_to_supertree(&c, &trees).unwrap();
        assert_eq!(st.labels(), labels(&["a", "b", "c"]));
        assert_eq!(st, t("(a,(b,c));"));

        let back = supertree_to_disagreement(&st, &trees).unwrap();
        assert_eq!(back.size(), 2);
    }

    #[test]
    fn empty_removals_on_conflicting_trees_fail() {
        let trees = vec![t("((a,b),c);"), t("((a,c),b);")];
        let c = LeafDisagreement {
            removals: vec![LabelSet::new(), LabelSet::new()],
        };
        assert_eq!(disagreement_to_supertree(&c, &trees), Err(Error::Incompatible));
    }

    #[test]
    fn removal_sets_must_name_present_labels() {
        let trees = vec![t("((a,b),c);")];
        let c = LeafDisagreement {
            removals: vec![labels(&["z"])],
        };
        assert!(matches!(
            disagreement_to_supertree(&c, &trees),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn disagreement_sizes_add_up() {
        let c = LeafDisagreement {
            removals: vec![labels(&["a", "b"]), LabelSet::new(), labels(&["c"])],
        };
        assert_eq!(c.size(), 3);
        assert_eq!(c.max_size(), 2);
    }
}
