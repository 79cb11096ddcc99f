//! Exact minimum-total-removal consensus by branch and bound on the number
//! of removed leaves.
//!
//! The search runs in two phases over a growing set of locked triplets F.
//! Whenever a working tree disagrees with a locked triplet, one of the three
//! involved leaves must go, a 3-way branch that shrinks the budget. Phase 1
//! locks one topology per 3-subset that the working trees disagree on
//! directly. Phase 2 repairs the surviving union of triplets, which is
//! conflict-free per 3-subset but may still be unsatisfiable on some 4-subset;
//! each such 4-subset admits exactly four single-triplet repairs. A node with
//! no visible conflict certifies itself by actually assembling the supertree:
//! sparse triplet unions (where removed leaves left some 3-subsets untagged)
//! can defeat the 4-subset test, and in that case the failing label set is
//! guaranteed to contain an untagged 3-subset, which the node locks 3 ways
//! and retries. Every node spawns at most 12 children either way, so the
//! search tree has degree 12 and depth bounded by the budget plus the number
//! of lockable 3-subsets.

use crate::distance::{common_labels, d_lr, disagreement_to_supertree, LeafDisagreement};
use crate::error::Error;
use crate::tree::{Label, LabelSet, Tree};
use crate::triplets::{build_supertree_detail, find_conflict_quad, LabelTriple, Triplet, TripletMap};

/// The triplets fixed so far during a search: at most one topology per
/// 3-subset, enforced on every insertion.
pub type LockedTriplets = TripletMap;

/// Counters describing one solve, for budget audits and tests.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QStats {
    /// Search nodes entered.
    pub nodes_expanded: u64,
    /// Largest number of children any single node spawned.
    pub max_children: u64,
    /// Locks added because supertree assembly exposed an untagged 3-subset.
    pub backstop_locks: u64,
    /// Conflict-free leaves whose assembly nevertheless failed.
    pub verify_failures: u64,
}

struct Witness {
    removals: LeafDisagreement,
    supertree: Tree,
}

struct Search<'a> {
    originals: &'a [Tree],
    budget: i64,
    stats: QStats,
}

fn triplet_on(key: &LabelTriple, out: &Label) -> Triplet {
    let pair: Vec<&Label> = key.iter().filter(|l| *l != out).collect();
    Triplet::new(pair[0].clone(), pair[1].clone(), out.clone())
        .expect("3-subset keys hold distinct labels")
}

impl<'a> Search<'a> {
    fn note_children(&mut self, spawned: u64) {
        self.stats.max_children = self.stats.max_children.max(spawned);
    }

    fn removals_so_far(&self, working: &[Tree]) -> LeafDisagreement {
        let removals = self
            .originals
            .iter()
            .zip(working)
            .map(|(orig, cur)| {
                let kept = cur.labels();
                orig.labels().difference(&kept).cloned().collect()
            })
            .collect();
        LeafDisagreement { removals }
    }

    fn run(&mut self, working: &[Tree], q: i64, phase: u8, f: &LockedTriplets) -> Option<Witness> {
        self.stats.nodes_expanded += 1;
        if q < 0 {
            return None;
        }
        debug_assert_eq!(
            self.removals_so_far(working).size() as i64 + q,
            self.budget,
            "every removed leaf must be paid for exactly once"
        );
        let maps: Vec<TripletMap> = working.iter().map(TripletMap::from_tree).collect();

        // A working tree contradicting a locked triplet must lose one of the
        // three leaves involved; try the in-pair first, then the outgroup.
        for (key, want) in f.iter() {
            for (i, map) in maps.iter().enumerate() {
                let Some(got) = map.get(key) else { continue };
                if got == want {
                    continue;
                }
                let pair: Vec<Label> = key.iter().filter(|l| *l != want).cloned().collect();
                let victims = [pair[0].clone(), pair[1].clone(), want.clone()];
                self.note_children(3);
                for victim in victims {
                    let mut next = working.to_vec();
                    next[i] = next[i].remove_leaves(&[victim].into_iter().collect());
                    if let Some(hit) = self.run(&next, q - 1, phase, f) {
                        return Some(hit);
                    }
                }
                return None;
            }
        }

        if phase == 1 {
            // Direct conflicts: two working trees showing different
            // topologies on the same 3-subset. Lock each candidate topology.
            let mut seen: std::collections::BTreeMap<&LabelTriple, LabelSet> = Default::default();
            for map in &maps {
                for (key, out) in map.iter() {
                    seen.entry(key).or_default().insert(out.clone());
                }
            }
            if let Some((&key, _)) = seen.iter().find(|(_, tops)| tops.len() >= 2) {
                self.note_children(3);
                for out_idx in [2, 1, 0] {
                    let mut locked = f.clone();
                    let fresh = locked.insert(&triplet_on(key, &key[out_idx]));
                    debug_assert!(fresh, "a directly conflicting 3-subset cannot be locked yet");
                    if !fresh {
                        continue;
                    }
                    if let Some(hit) = self.run(working, q, phase, &locked) {
                        return Some(hit);
                    }
                }
                return None;
            }
            // No direct conflicts left: this node continues as phase 2, and
            // every child below inherits phase 2 explicitly.
        }

        // Phase 2 constraint set: every surviving triplet plus the locks.
        // Enforcement and phase 1 cleared all per-3-subset disagreements, so
        // the merge cannot clash.
        let mut union = f.clone();
        for map in &maps {
            let clean = union.merge_from(map);
            debug_assert!(clean, "surviving triplets agree per 3-subset after phase 1");
        }

        if let Some(quad) = find_conflict_quad(&union) {
            let (a, b, c, d) = (&quad.a, &quad.b, &quad.c, &quad.d);
            let repairs = [
                Triplet::new(a.clone(), c.clone(), b.clone()),
                Triplet::new(b.clone(), c.clone(), a.clone()),
                Triplet::new(b.clone(), d.clone(), c.clone()),
                Triplet::new(a.clone(), b.clone(), d.clone()),
            ]
            .map(|t| t.expect("conflict labels are distinct"));
            self.note_children(4);
            for repair in repairs {
                let mut locked = f.clone();
                if !locked.insert(&repair) {
                    // The triplet this repair would replace is already
                    // locked; the branch is stillborn.
                    continue;
                }
                if let Some(hit) = self.run(working, q, 2, &locked) {
                    return Some(hit);
                }
            }
            return None;
        }

        // No conflict in sight; certify by building the supertree for real.
        match build_supertree_detail(working) {
            Ok(_) => {
                let removals = self.removals_so_far(working);
                let supertree = disagreement_to_supertree(&removals, self.originals)
                    .expect("assembly just succeeded on these pruned trees");
                Some(Witness { removals, supertree })
            }
            Err(tangled) => {
                // Assembly got stuck on a label set whose triplet graph never
                // came apart. Had every 3-subset of it been tagged, the union
                // would be full and conflict-free there, hence satisfiable,
                // and the realization's root split would disconnect that
                // graph. So an untagged 3-subset exists; lock it 3 ways.
                self.stats.verify_failures += 1;
                let labels: Vec<Label> = tangled.into_iter().collect();
                let mut gap = None;
                'scan: for i in 0..labels.len() {
                    for j in (i + 1)..labels.len() {
                        for k in (j + 1)..labels.len() {
                            let key = [labels[i].clone(), labels[j].clone(), labels[k].clone()];
                            if union.get(&key).is_none() {
                                gap = Some(key);
                                break 'scan;
                            }
                        }
                    }
                }
                let key = gap.expect("a stuck assembly implies an untagged 3-subset");
                self.note_children(3);
                self.stats.backstop_locks += 3;
                for out_idx in [2, 1, 0] {
                    let mut locked = f.clone();
                    let fresh = locked.insert(&triplet_on(&key, &key[out_idx]));
                    debug_assert!(fresh, "the 3-subset was untagged and lockable");
                    if !fresh {
                        continue;
                    }
                    if let Some(hit) = self.run(working, q, 2, &locked) {
                        return Some(hit);
                    }
                }
                None
            }
        }
    }
}

/// Decides whether at most `q` leaf removals (counted over all trees) make
/// the inputs compatible; on success returns the removal sets and a tree on
/// the full label set displaying every pruned input.
pub fn solve_q(trees: &[Tree], q: u32) -> Result<Option<(LeafDisagreement, Tree)>, Error> {
    solve_q_with_stats(trees, q).map(|(hit, _)| hit)
}

/// `solve_q` plus the search counters.
pub fn solve_q_with_stats(
    trees: &[Tree],
    q: u32,
) -> Result<(Option<(LeafDisagreement, Tree)>, QStats), Error> {
    common_labels(trees)?;
    let mut search = Search {
        originals: trees,
        budget: i64::from(q),
        stats: QStats::default(),
    };
    let working = trees.to_vec();
    let hit = search.run(&working, i64::from(q), 1, &LockedTriplets::new());
    let result = hit.map(|w| {
        debug_assert!(w.removals.size() <= q as usize);
        (w.removals, w.supertree)
    });
    Ok((result, search.stats))
}

/// The smallest removal total that works, found by iterative deepening of
/// `solve_q` up to `q_max`. The witness size always equals the returned
/// optimum: a smaller witness would have satisfied an earlier budget.
pub fn min_q(
    trees: &[Tree],
    q_max: u32,
) -> Result<Option<(u32, LeafDisagreement, Tree)>, Error> {
    for q in 0..=q_max {
        if let Some((removals, supertree)) = solve_q(trees, q)? {
            assert_eq!(
                removals.size(),
                q as usize,
                "first deepening success must be exactly optimal"
            );
            let spent: u32 = trees
                .iter()
                .map(|t| d_lr(&supertree, t))
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .sum();
            assert_eq!(spent, q, "supertree distances must add up to the optimum");
            return Ok(Some((q, removals, supertree)));
        }
    }
    Ok(None)
}
