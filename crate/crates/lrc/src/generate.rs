//! Instance generation: uniform random trees, the expected-distance
//! experiment on random pairs, and the gadget that turns triplet
//! inconsistency instances into consensus instances.

use serde_json::json;

use crate::distance::d_lr;
use crate::error::Error;
use crate::tree::{GraftPosition, Label, LabelSet, Tree};
use crate::triplets::Triplet;

/// A SplitMix64 pseudorandom generator.
///
/// The algorithm is fixed and documented so that experiments reproduce
/// bit-exactly anywhere: the state advances by the 64-bit golden ratio
/// constant and each output mixes the state through two rounds of
/// xor-shift-multiply (Steele, Lea, and Flood's finalizer).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// The next 64 pseudorandom bits.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut mixed = self.state;
        mixed = (mixed ^ (mixed >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        mixed = (mixed ^ (mixed >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        mixed ^ (mixed >> 31)
    }

    /// A uniform draw from `0..bound`, rejecting the overhang so no
    /// modulo bias creeps in.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "a uniform draw needs a nonempty range");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let raw = self.next_u64();
            if raw >= threshold {
                return raw % bound;
            }
        }
    }
}

/// A uniformly random rooted binary tree on the given labels.
///
/// Labels are inserted in order, each onto an edge of the planted tree
/// built so far chosen uniformly at random. Every insertion sequence
/// yields a distinct topology, so all (2n-3)!! trees are equally likely.
/// The same seed always produces the same tree. Panics if the labels are
/// not distinct.
pub fn random_tree(labels: &[Label], seed: u64) -> Tree {
    let mut rng = SplitMix64::new(seed);
    random_tree_with(labels, &mut rng)
}

/// Like [`random_tree`], drawing from a caller-owned generator so that
/// several trees can share one stream.
pub fn random_tree_with(labels: &[Label], rng: &mut SplitMix64) -> Tree {
    let mut seen = LabelSet::new();
    assert!(
        labels.iter().all(|l| seen.insert(l.clone())),
        "random trees need distinct labels"
    );
    let mut tree = Tree::empty();
    for (done, label) in labels.iter().enumerate() {
        let leaf = Tree::leaf(label.clone());
        tree = if done == 0 {
            leaf.plant()
        } else {
            // A planted tree on m leaves has 2m-1 edges, ids 1..=2m-1;
            // edge 1 sits above the binary root.
            let edge = 1 + rng.next_below(2 * done as u64 - 1) as usize;
            tree.graft(&leaf, GraftPosition::Edge(edge))
                .expect("a fresh label grafts onto any edge")
        };
    }
    tree.unplant()
}

/// Labels `prefix1 .. prefixN`, zero-padded so byte order matches numeric
/// order.
pub fn numbered_labels(prefix: &str, count: u32) -> Vec<Label> {
    let width = count.to_string().len();
    (1..=count)
        .map(|i| {
            Label::new(format!("{prefix}{i:0width$}")).expect("digits extend a valid prefix")
        })
        .collect()
}

/// Summary of repeated distance measurements between random tree pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentStats {
    /// Leaves per generated tree.
    pub n: u32,
    /// Number of independent pairs drawn.
    pub trials: u32,
    /// Mean observed leaf-removal distance.
    pub mean_distance: f64,
    /// Smallest observed distance.
    pub min: u32,
    /// Largest observed distance.
    pub max: u32,
    /// The seed the experiment started from.
    pub seed: u64,
}

impl ExperimentStats {
    /// The stats as a JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "n": self.n,
            "trials": self.trials,
            "mean_distance": self.mean_distance,
            "min": self.min,
            "max": self.max,
            "seed": self.seed,
        })
    }
}

/// Measures the leaf-removal distance between `trials` independent pairs
/// of uniformly random trees on `n` leaves.
///
/// Trial `i` draws both trees from a generator seeded with `seed + i`, so
/// the outcome does not depend on evaluation order. Random pairs are far
/// apart in expectation, close to the whole leaf count, and this
/// experiment makes that visible.
pub fn expected_distance_experiment(n: u32, trials: u32, seed: u64) -> ExperimentStats {
    assert!(n >= 4, "the experiment needs at least four leaves");
    assert!(trials >= 1, "the experiment needs at least one trial");
    let labels = numbered_labels("t", n);
    let mut sum = 0u64;
    let mut min = u32::MAX;
    let mut max = 0u32;
    for trial in 0..trials {
        let mut rng = SplitMix64::new(seed.wrapping_add(trial as u64));
        let first = random_tree_with(&labels, &mut rng);
        let second = random_tree_with(&labels, &mut rng);
        let dist = d_lr(&first, &second).expect("both trees carry the same labels");
        sum += dist as u64;
        min = min.min(dist);
        max = max.max(dist);
    }
    let stats = ExperimentStats {
        n,
        trials,
        mean_distance: sum as f64 / trials as f64,
        min,
        max,
        seed,
    };
    assert!(stats.min <= stats.max && stats.max < n);
    assert!(stats.min as f64 <= stats.mean_distance && stats.mean_distance <= stats.max as f64);
    stats
}

/// The canonical caterpillar on the given labels, pairing the two
/// smallest and hanging each later label above.
fn caterpillar(labels: &LabelSet) -> Tree {
    let mut iter = labels.iter();
    let first = match iter.next() {
        None => return Tree::empty(),
        Some(l) => l,
    };
    let mut tree = Tree::leaf(first.clone());
    for label in iter {
        tree = tree
            .graft(&Tree::leaf(label.clone()), GraftPosition::AboveRoot)
            .expect("distinct labels always pair up");
    }
    tree
}

/// Gadget labels for the reduction: `t * size` fresh names disjoint from
/// `avoid`, grouped per input tree, zero-padded for stable ordering.
fn gadget_labels(t: usize, size: u32, avoid: &LabelSet) -> Vec<LabelSet> {
    let group_width = t.to_string().len();
    let member_width = size.to_string().len();
    let mut prefix = String::from("g");
    loop {
        let groups: Vec<LabelSet> = (1..=t)
            .map(|i| {
                (1..=size)
                    .map(|j| {
                        Label::new(format!("{prefix}{i:0group_width$}_{j:0member_width$}"))
                            .expect("digits and underscores extend a valid prefix")
                    })
                    .collect()
            })
            .collect();
        if groups.iter().all(|g| g.is_disjoint(avoid)) {
            return groups;
        }
        prefix.push('g');
    }
}

/// Builds the consensus instance encoding a triplet inconsistency
/// instance: one tree per input triplet, all on the triplet labels plus
/// `gadget_size` fresh labels per tree.
///
/// Tree `i` grafts triplet `i` above a shared scaffold of the fresh label
/// groups, with the labels missing from triplet `i` tucked next to its
/// own group. Solving the output by leaf deletion is then forced to solve
/// the triplet instance: with `t` triplets on `|L|` labels in total, the
/// minimum total deletion count is `t(|L| - 3)` plus the number of
/// triplets that must be discarded to make the rest compatible, provided
/// the gadget groups are large enough to pin the scaffold in place.
pub fn minrti_reduction(triplets: &[Triplet], gadget_size: u32) -> Result<Vec<Tree>, Error> {
    if triplets.is_empty() {
        return Err(Error::EmptyInput);
    }
    assert!(gadget_size >= 1, "gadget groups cannot be empty");
    let mut base = LabelSet::new();
    for triplet in triplets {
        let (a, b) = triplet.in_pair();
        base.insert(a.clone());
        base.insert(b.clone());
        base.insert(triplet.outgroup().clone());
    }
    let groups = gadget_labels(triplets.len(), gadget_size, &base);
    let scaffold = groups
        .iter()
        .map(caterpillar)
        .reduce(|acc, next| {
            acc.graft(&next, GraftPosition::AboveRoot)
                .expect("gadget groups are disjoint")
        })
        .expect("at least one triplet means at least one group");
    let mut out = Vec::with_capacity(triplets.len());
    for (triplet, group) in triplets.iter().zip(&groups) {
        let (a, b) = triplet.in_pair();
        let apex = Tree::leaf(a.clone())
            .graft(&Tree::leaf(b.clone()), GraftPosition::AboveRoot)
            .expect("triplet labels are distinct")
            .graft(&Tree::leaf(triplet.outgroup().clone()), GraftPosition::AboveRoot)
            .expect("triplet labels are distinct");
        let mut filler = base.clone();
        for label in &apex.labels() {
            filler.remove(label);
        }
        let mut host = scaffold.plant();
        if !filler.is_empty() {
            let anchor = host.lca(group).expect("the scaffold holds every group");
            host = host
                .graft(&caterpillar(&filler), GraftPosition::Edge(anchor))
                .expect("filler labels are fresh to the scaffold");
        }
        let tree = host
            .unplant()
            .graft(&apex, GraftPosition::AboveRoot)
            .expect("triplet labels are fresh to the scaffold");
        out.push(tree);
    }
    let expected: usize = base.len() + triplets.len() * gadget_size as usize;
    assert!(
        out.iter()
            .all(|t| t.labels().len() == expected && t.labels() == out[0].labels()),
        "reduction trees share one label set"
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::newick::to_newick;
    use crate::oracle::{brute_min_disagreement, enumerate_trees, num_trees};

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn trip(a: &str, b: &str, c: &str) -> Triplet {
        Triplet::new(lab(a), lab(b), lab(c)).unwrap()
    }

    #[test]
    fn single_label_gives_the_single_leaf() {
        let tree = random_tree(&[lab("a")], 7);
        assert_eq!(to_newick(&tree), "a;");
    }

    #[test]
    fn same_seed_reproduces_the_tree() {
        let labels = numbered_labels("t", 16);
        assert_eq!(random_tree(&labels, 42), random_tree(&labels, 42));
        let differs = (0..64).any(|s| random_tree(&labels, s) != random_tree(&labels, 1000 + s));
        assert!(differs);
    }

    #[test]
    fn three_leaf_topologies_come_out_uniform() {
        let labels = numbered_labels("t", 3);
        let mut counts: BTreeMap<Tree, u64> = BTreeMap::new();
        let trials = 30_000u64;
        for seed in 0..trials {
            *counts.entry(random_tree(&labels, seed)).or_default() += 1;
        }
        assert_eq!(counts.len() as u64, num_trees(3));
        // Chi-square against the uniform law, 2 degrees of freedom; the
        // p = 0.001 cutoff is 13.816.
        let expected = trials as f64 / 3.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 13.816, "chi-square {chi2} rejects uniformity");
    }

    #[test]
    fn four_leaves_reach_all_fifteen_topologies() {
        let labels = numbered_labels("t", 4);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..2000 {
            seen.insert(random_tree(&labels, seed));
        }
        assert_eq!(seen.len() as u64, num_trees(4));
    }

    #[test]
    fn numbered_labels_sort_numerically() {
        let labels = numbered_labels("t", 12);
        assert_eq!(labels[0].as_str(), "t01");
        assert_eq!(labels[11].as_str(), "t12");
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, labels);
    }

    #[test]
    fn experiment_is_reproducible_and_bounded() {
        let first = expected_distance_experiment(6, 50, 99);
        let second = expected_distance_experiment(6, 50, 99);
        assert_eq!(first, second);
        assert!(first.min <= first.max && first.max <= 5);
        assert!(first.mean_distance > 0.0);
        let doc = first.to_json();
        assert_eq!(doc["n"], 6);
        assert_eq!(doc["trials"], 50);
        assert_eq!(doc["seed"], 99);
    }

    #[test]
    fn small_experiment_tracks_the_enumerated_expectation() {
        let labels: LabelSet = numbered_labels("t", 4).into_iter().collect();
        let all = enumerate_trees(&labels, false).unwrap();
        let mut total = 0.0;
        let mut total_sq = 0.0;
        for t1 in &all {
            for t2 in &all {
                let d = d_lr(t1, t2).unwrap() as f64;
                total += d;
                total_sq += d * d;
            }
        }
        let pairs = (all.len() * all.len()) as f64;
        let mean = total / pairs;
        let variance = total_sq / pairs - mean * mean;
        let trials = 400u32;
        let stats = expected_distance_experiment(4, trials, 2024);
        let tolerance = 3.0 * (variance / trials as f64).sqrt();
        assert!(
            (stats.mean_distance - mean).abs() <= tolerance,
            "empirical mean {} strays from exact {mean} beyond {tolerance}",
            stats.mean_distance
        );
    }

    #[test]
    fn reduction_of_one_triplet_has_an_empty_filler() {
        let trees = minrti_reduction(&[trip("a", "b", "c")], 1).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(to_newick(&trees[0]), "(((a,b),c),g1_1);");
    }

    #[test]
    fn reduction_of_compatible_triplets_needs_only_the_fillers() {
        let trees = minrti_reduction(&[trip("a", "b", "c"), trip("a", "b", "d")], 1).unwrap();
        // Both triplets survive, so only the 2 * (4 - 3) filler leaves go.
        assert_eq!(brute_min_disagreement(&trees, false).unwrap(), 2);
    }

    #[test]
    fn reduction_of_conflicting_triplets_charges_one_extra() {
        let trees = minrti_reduction(&[trip("a", "b", "c"), trip("a", "c", "b")], 1).unwrap();
        // No filler (the label sets coincide), but one triplet must go.
        assert_eq!(brute_min_disagreement(&trees, false).unwrap(), 1);
    }

    #[test]
    fn reduction_labels_dodge_collisions_with_the_input() {
        let trees = minrti_reduction(&[trip("g1_1", "b", "c")], 1).unwrap();
        let labels = trees[0].labels();
        assert_eq!(labels.len(), 4);
        assert!(labels.contains(&lab("gg1_1")));
    }

    #[test]
    fn reduction_rejects_an_empty_instance() {
        assert_eq!(minrti_reduction(&[], 1).unwrap_err(), Error::EmptyInput);
    }
}
