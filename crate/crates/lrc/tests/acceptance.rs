//! End-to-end guarantees of the toolkit, checked against exhaustive
//! oracles, subset enumeration, and one statistical bound. Each test
//! covers one advertised guarantee and prints a single summary line.

use lrc::oracle::{brute_ast_lr_d, brute_consensus, brute_min_disagreement, enumerate_trees};
use lrc::{
    approx_consensus, candidate_trees, conflicts, d_lr, disagreement_kernel, is_hitting_set,
    expected_distance_experiment, min_label_disagreement, min_q, numbered_labels, random_tree,
    random_tree_with, solve_d_with_stats, solve_q_with_stats, GraftPosition, Label, LabelSet,
    SplitMix64, Tree,
};

fn shapes(n: u32) -> Vec<Tree> {
    let labels: LabelSet = numbered_labels("t", n).into_iter().collect();
    enumerate_trees(&labels, false).unwrap()
}

/// Every multiset of three trees on four labels, deduplicated by taking
/// index-sorted triples of the canonical enumeration.
fn four_label_triples() -> Vec<Vec<Tree>> {
    let all = shapes(4);
    let mut out = Vec::new();
    for i in 0..all.len() {
        for j in i..all.len() {
            for k in j..all.len() {
                out.push(vec![all[i].clone(), all[j].clone(), all[k].clone()]);
            }
        }
    }
    out
}

/// Two hundred seeded random triples on five labels.
fn random_five_label_triples() -> Vec<Vec<Tree>> {
    let labels = numbered_labels("t", 5);
    (0..200u64)
        .map(|i| (0..3).map(|j| random_tree(&labels, 3 * i + j)).collect())
        .collect()
}

fn consensus_instances() -> Vec<Vec<Tree>> {
    let mut instances = four_label_triples();
    instances.extend(random_five_label_triples());
    instances
}

fn mask_set(labels: &[Label], mask: u32) -> LabelSet {
    labels
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, l)| l.clone())
        .collect()
}

#[test]
fn exact_consensus_total_matches_the_exhaustive_oracle() {
    let instances = consensus_instances();
    for trees in &instances {
        let (_, consensus_total) = brute_consensus(trees, false).unwrap();
        let removal_total = brute_min_disagreement(trees, false).unwrap();
        assert_eq!(consensus_total, removal_total);
        let (q, removals, supertree) = min_q(trees, consensus_total)
            .unwrap()
            .expect("the oracle optimum must be reachable");
        assert_eq!(q, consensus_total);
        assert_eq!(removals.size() as u32, q);
        let realized: u32 = trees.iter().map(|t| d_lr(&supertree, t).unwrap()).sum();
        assert_eq!(realized, q);
    }
    println!(
        "pass: exact consensus totals match the oracle on {} instances",
        instances.len()
    );
}

#[test]
fn bounded_search_decides_exactly_like_the_oracle() {
    let instances = consensus_instances();
    let mut solvable = 0u32;
    for trees in &instances {
        for d in 0..=2u32 {
            let oracle_finds = brute_ast_lr_d(trees, d, false).unwrap().is_some();
            let (found, stats) = solve_d_with_stats(trees, d).unwrap();
            assert_eq!(found.is_some(), oracle_finds);
            // Kernels inside the search run at budgets up to 2d.
            assert!(stats.max_kernel_size <= u64::from(8 * (2 * d) * (2 * d)));
            if let Some(tree) = found {
                solvable += 1;
                for t in trees {
                    assert!(d_lr(&tree, t).unwrap() <= d);
                }
            }
        }
    }
    println!(
        "pass: bounded search agrees with the oracle on {} instance-budget pairs ({solvable} solvable)",
        instances.len() * 3
    );
}

#[test]
fn picking_the_best_input_stays_within_twice_optimal() {
    let instances = consensus_instances();
    let mut strictly_worse = 0u32;
    for trees in &instances {
        let report = approx_consensus(trees).unwrap();
        let (_, optimal) = brute_consensus(trees, false).unwrap();
        assert!(report.total <= 2 * optimal);
        if report.total > optimal {
            strictly_worse += 1;
        }
    }
    assert!(
        strictly_worse > 0,
        "the corpus should exhibit at least one instance where no input tree is optimal"
    );
    println!(
        "pass: best-input approximation within twice optimal on {} instances, beaten on {strictly_worse}",
        instances.len()
    );
}

fn subset_min_distance(t1: &Tree, t2: &Tree, labels: &[Label]) -> u32 {
    let mut best = u32::MAX;
    for mask in 0u32..1 << labels.len() {
        let cost = mask.count_ones();
        if cost >= best {
            continue;
        }
        let drop = mask_set(labels, mask);
        if t1.remove_leaves(&drop) == t2.remove_leaves(&drop) {
            best = cost;
        }
    }
    best
}

#[test]
fn pairwise_distance_is_a_metric_matching_subset_minimization() {
    for n in 3..=5u32 {
        let labels = numbered_labels("t", n);
        let all = shapes(n);
        for t1 in &all {
            for t2 in &all {
                assert_eq!(d_lr(t1, t2).unwrap(), subset_min_distance(t1, t2, &labels));
            }
        }
    }
    let labels = numbered_labels("t", 32);
    for i in 0..1000u64 {
        let a = random_tree(&labels, 3 * i);
        let b = random_tree(&labels, 3 * i + 1);
        let c = random_tree(&labels, 3 * i + 2);
        let ab = d_lr(&a, &b).unwrap();
        assert_eq!(ab, d_lr(&b, &a).unwrap());
        assert_eq!(ab == 0, a == b);
        assert_eq!(d_lr(&a, &a).unwrap(), 0);
        assert!(d_lr(&a, &c).unwrap() <= ab + d_lr(&b, &c).unwrap());
    }
    println!("pass: distance matches subset minimization exhaustively and behaves as a metric on 1000 random triples");
}

#[test]
fn repairs_are_exactly_the_conflict_hitting_sets() {
    let labels = numbered_labels("t", 4);
    let all = shapes(4);
    let mut checked = 0u64;
    for t1 in &all {
        for t2 in &all {
            let tangles = conflicts(t1, t2).unwrap();
            for mask in 0u32..16 {
                let x = mask_set(&labels, mask);
                let hits = is_hitting_set(&x, &tangles);
                let repairs = t1.remove_leaves(&x) == t2.remove_leaves(&x);
                assert_eq!(hits, repairs);
                checked += 1;
            }
        }
    }
    println!("pass: hitting the conflicts equals repairing the trees on {checked} pair-subset combinations");
}

#[test]
fn kernels_contain_every_small_minimal_repair() {
    let labels = numbered_labels("t", 5);
    let all = shapes(5);
    let mut kernels = 0u64;
    for k in 1..=2u32 {
        for t1 in &all {
            for t2 in &all {
                if d_lr(t1, t2).unwrap() > k {
                    continue;
                }
                let kernel = disagreement_kernel(k, t1, t2).unwrap();
                assert!(kernel.len() <= (8 * k * k) as usize);
                kernels += 1;
                for mask in 1u32..32 {
                    if mask.count_ones() > k {
                        continue;
                    }
                    let x = mask_set(&labels, mask);
                    if t1.remove_leaves(&x) != t2.remove_leaves(&x) {
                        continue;
                    }
                    // Minimal means no proper subset also repairs.
                    let mut sub = (mask - 1) & mask;
                    let mut minimal = true;
                    loop {
                        let y = mask_set(&labels, sub);
                        if t1.remove_leaves(&y) == t2.remove_leaves(&y) {
                            minimal = false;
                            break;
                        }
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & mask;
                    }
                    if minimal {
                        assert!(
                            x.is_subset(&kernel),
                            "minimal repair {x:?} escapes the kernel of ({t1:?}, {t2:?})"
                        );
                    }
                }
            }
        }
    }
    println!("pass: {kernels} kernels within 8k^2 labels, each containing every minimal repair of size at most k");
}

/// One leaf prune-and-regraft step at random positions.
fn random_lpr(tree: &Tree, rng: &mut SplitMix64) -> Tree {
    let labels: Vec<Label> = tree.labels().into_iter().collect();
    let pick = labels[rng.next_below(labels.len() as u64) as usize].clone();
    let single: LabelSet = [pick.clone()].into_iter().collect();
    let pruned = tree.remove_leaves(&single).plant();
    let edge = 1 + rng.next_below(pruned.node_count() as u64 - 1) as usize;
    pruned
        .graft(&Tree::leaf(pick), GraftPosition::Edge(edge))
        .expect("regrafting a pruned leaf always fits")
        .unplant()
}

#[test]
fn candidate_sets_stay_small_and_move_only_the_chosen_leaf() {
    let mut rng = SplitMix64::new(77);
    let mut budget_counts = [0u32; 4];
    let mut done = 0u32;
    while done < 500 {
        let n = 4 + rng.next_below(27) as u32;
        let labels = numbered_labels("t", n);
        let t1 = random_tree_with(&labels, &mut rng);
        let mut t2 = t1.clone();
        for _ in 0..=rng.next_below(6) {
            t2 = random_lpr(&t2, &mut rng);
        }
        let dist = d_lr(&t1, &t2).unwrap();
        if !(2..=6).contains(&dist) {
            continue;
        }
        let d = dist.div_ceil(2);
        assert!(d <= 3 && d < dist && dist <= 2 * d);
        let moved = min_label_disagreement(&t1, &t2).unwrap();
        let lead = moved.iter().next().expect("a positive distance moves something");
        let candidates = candidate_trees(&t1, &t2, lead, d, d).unwrap();
        assert!(candidates.len() <= (18 * 2 * d + 8) as usize);
        let single: LabelSet = [lead.clone()].into_iter().collect();
        let base = t1.remove_leaves(&single);
        for tree in &candidates {
            assert_eq!(tree.labels(), t1.labels());
            assert_eq!(tree.remove_leaves(&single), base);
        }
        budget_counts[d as usize] += 1;
        done += 1;
    }
    assert!(
        budget_counts[1] > 0 && budget_counts[2] > 0 && budget_counts[3] > 0,
        "all three budgets should occur, got {budget_counts:?}"
    );
    println!(
        "pass: 500 candidate sets within 18(d+d')+8 trees, budgets d=1/2/3 hit {}/{}/{} times",
        budget_counts[1], budget_counts[2], budget_counts[3]
    );
}

/// Every tree one leaf prune-and-regraft away, the moved label included.
fn lpr_neighbors(tree: &Tree) -> Vec<(Label, Tree)> {
    let mut out = Vec::new();
    for label in &tree.labels() {
        let single: LabelSet = [label.clone()].into_iter().collect();
        let pruned = tree.remove_leaves(&single).plant();
        for edge in pruned.edges() {
            let next = pruned
                .graft(&Tree::leaf(label.clone()), GraftPosition::Edge(edge))
                .expect("regrafting a pruned leaf always fits")
                .unplant();
            out.push((label.clone(), next));
        }
    }
    out
}

fn reaches(from: &Tree, target: &Tree, order: &[Label]) -> bool {
    let Some(lead) = order.first() else {
        return from == target;
    };
    lpr_neighbors(from)
        .iter()
        .filter(|(l, _)| l == lead)
        .any(|(_, next)| reaches(next, target, &order[1..]))
}

#[test]
fn prune_regraft_sequences_realize_the_distance_with_any_lead() {
    let labels = numbered_labels("t", 4);
    let all = shapes(4);
    for t1 in &all {
        for t2 in &all {
            let dist = d_lr(t1, t2).unwrap();
            assert!(dist <= 2, "four leaves always agree on two");

            // No shorter move sequence reaches the target, and some
            // sequence of exactly dist moves does. Staying put is a legal
            // move, so each frontier also covers everything nearer.
            let mut frontier: std::collections::BTreeSet<Tree> =
                [t1.clone()].into_iter().collect();
            for step in 0..dist {
                assert!(
                    !frontier.contains(t2),
                    "reached in {step} moves despite distance {dist}"
                );
                frontier = frontier
                    .iter()
                    .flat_map(|t| lpr_neighbors(t).into_iter().map(|(_, n)| n))
                    .collect();
            }
            assert!(frontier.contains(t2));

            // Each smallest repair set can be walked in any leading order.
            for mask in 0u32..16 {
                if mask.count_ones() != dist {
                    continue;
                }
                let x = mask_set(&labels, mask);
                if t1.remove_leaves(&x) != t2.remove_leaves(&x) {
                    continue;
                }
                for lead in &x {
                    let mut order = vec![lead.clone()];
                    order.extend(x.iter().filter(|l| *l != lead).cloned());
                    assert!(
                        reaches(t1, t2, &order),
                        "no sequence over {x:?} led by {lead} links the pair"
                    );
                }
            }
        }
    }
    println!("pass: move sequences realize the distance exactly, with any repair label leading");
}

#[test]
fn random_pairs_are_nearly_maximally_apart() {
    let n = 128u32;
    let bound = f64::from(n) - 3.0 * f64::from(n).sqrt();
    let mut means = Vec::new();
    for seed in 0..3u64 {
        let stats = expected_distance_experiment(n, 200, seed);
        means.push(stats.mean_distance);
        if stats.mean_distance >= bound {
            println!(
                "pass: mean distance {:.2} over 200 random pairs stays above {bound:.2} (seed {seed})",
                stats.mean_distance
            );
            return;
        }
    }
    panic!("mean distances {means:?} fell below {bound:.2} at three consecutive seeds");
}

#[test]
fn search_branching_stays_within_its_audited_bounds() {
    let instances = four_label_triples();
    let mut widest_split = 0u64;
    let mut widest_kernel = 0u64;
    for trees in &instances {
        let (_, optimal) = brute_consensus(trees, false).unwrap();
        let (hit, split_stats) = solve_q_with_stats(trees, optimal).unwrap();
        assert!(hit.is_some());
        assert!(split_stats.max_children <= 12);
        widest_split = widest_split.max(split_stats.max_children);
        for d in 1..=2u32 {
            let (_, kernel_stats) = solve_d_with_stats(trees, d).unwrap();
            assert!(kernel_stats.max_kernel_size <= u64::from(8 * (2 * d) * (2 * d)));
            widest_kernel = widest_kernel.max(kernel_stats.max_kernel_size);
        }
    }
    println!(
        "pass: budget-search nodes spawn at most 12 children (saw {widest_split}) and kernels stay quadratic (saw {widest_kernel} labels)"
    );
}
