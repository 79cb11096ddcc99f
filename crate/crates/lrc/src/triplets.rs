//! Rooted triplets: extraction, conflicts, hitting sets, and supertrees.
//!
//! A rooted triplet `a,b|c` says that the path between `a` and `b` avoids the
//! lca of all three, i.e. `c` is the outgroup. A binary tree is determined by
//! its full triplet set, so triplets are the working currency for comparing
//! trees, detecting conflicts between them, and assembling supertrees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::tree::{Label, LabelSet, Tree};

/// A sorted 3-subset of labels, used as a lookup key.
pub type LabelTriple = [Label; 3];

/// 3-subsets on which two trees disagree.
pub type ConflictSet = BTreeSet<LabelTriple>;

/// Builds the sorted key for three distinct labels.
pub fn sorted_triple(a: &Label, b: &Label, c: &Label) -> LabelTriple {
    let mut key = [a.clone(), b.clone(), c.clone()];
    key.sort();
    key
}

/// The rooted triplet `a,b|c`: `a` and `b` are siblings relative to outgroup `c`.
/// The in-pair is stored sorted, so equal triplets compare equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triplet {
    first: Label,
    second: Label,
    out: Label,
}

impl Triplet {
    pub fn new(a: Label, b: Label, c: Label) -> Result<Self, Error> {
        if a == b || a == c || b == c {
            return Err(Error::InvalidOperation(format!(
                "triplet labels must be distinct, got {a},{b}|{c}"
            )));
        }
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        Ok(Triplet { first, second, out: c })
    }

    /// The two labels grouped together, in sorted order.
    pub fn in_pair(&self) -> (&Label, &Label) {
        (&self.first, &self.second)
    }

    pub fn outgroup(&self) -> &Label {
        &self.out
    }

    /// The sorted 3-subset this triplet is about.
    pub fn key(&self) -> LabelTriple {
        sorted_triple(&self.first, &self.second, &self.out)
    }
}

impl fmt::Display for Triplet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}|{}", self.first, self.second, self.out)
    }
}

impl FromStr for Triplet {
    type Err = Error;

    /// Parses the `a,b|c` form used by triplet files.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidOperation(format!("expected 'a,b|c', got '{s}'"));
        let (pair, out) = s.split_once('|').ok_or_else(bad)?;
        let (a, b) = pair.split_once(',').ok_or_else(bad)?;
        Triplet::new(
            Label::new(a.trim())?,
            Label::new(b.trim())?,
            Label::new(out.trim())?,
        )
    }
}

/// A partial function from 3-subsets to their outgroup label: at most one
/// topology per 3-subset, which is what makes it usable as a set of locks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripletMap {
    map: BTreeMap<LabelTriple, Label>,
}

impl TripletMap {
    pub fn new() -> Self {
        TripletMap::default()
    }

    /// The triplets displayed by a tree; trees with fewer than 3 leaves
    /// contribute nothing.
    pub fn from_tree(tree: &Tree) -> Self {
        let mut leaves: Vec<(usize, Label)> = tree
            .leaves()
            .map(|(id, l)| (id, l.clone()))
            .collect();
        leaves.sort_by(|x, y| x.1.cmp(&y.1));
        let n = leaves.len();
        let mut out = TripletMap::new();
        if n < 3 {
            return out;
        }
        let depths = tree.depths();
        let mut lca_depth = vec![vec![0usize; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = tree.lca_nodes(leaves[i].0, leaves[j].0, &depths);
                lca_depth[i][j] = depths[v];
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let (dij, dik, djk) = (lca_depth[i][j], lca_depth[i][k], lca_depth[j][k]);
                    // The strictly deepest pairwise lca marks the in-pair.
                    let out_idx = if dij > dik && dij > djk {
                        k
                    } else if dik > dij && dik > djk {
                        j
                    } else {
                        i
                    };
                    let key = [
                        leaves[i].1.clone(),
                        leaves[j].1.clone(),
                        leaves[k].1.clone(),
                    ];
                    out.map.insert(key, leaves[out_idx].1.clone());
                }
            }
        }
        out
    }

    /// Adds a triplet. Returns false (and leaves the map unchanged) when the
    /// 3-subset is already present with a different outgroup.
    pub fn insert(&mut self, t: &Triplet) -> bool {
        let key = t.key();
        match self.map.get(&key) {
            Some(existing) => existing == t.outgroup(),
            None => {
                self.map.insert(key, t.outgroup().clone());
                true
            }
        }
    }

    /// Adds every entry of `other`; false if any entry conflicts.
    pub fn merge_from(&mut self, other: &TripletMap) -> bool {
        let mut ok = true;
        for (key, out) in &other.map {
            match self.map.get(key) {
                Some(existing) if existing != out => ok = false,
                Some(_) => {}
                None => {
                    self.map.insert(key.clone(), out.clone());
                }
            }
        }
        ok
    }

    pub fn get(&self, key: &LabelTriple) -> Option<&Label> {
        self.map.get(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelTriple, &Label)> {
        self.map.iter()
    }

    /// Every label mentioned by some entry.
    pub fn labels(&self) -> LabelSet {
        self.map.keys().flat_map(|k| k.iter().cloned()).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        self.map.iter().map(|(key, out)| {
            let pair: Vec<&Label> = key.iter().filter(|l| *l != out).collect();
            Triplet::new(pair[0].clone(), pair[1].clone(), out.clone())
                .expect("map keys hold distinct labels")
        })
    }
}

/// All rooted triplets displayed by a tree with at least 3 leaves.
pub fn triplets(tree: &Tree) -> Result<BTreeSet<Triplet>, Error> {
    if tree.leaf_count() < 3 {
        return Err(Error::TooFewLeaves);
    }
    Ok(TripletMap::from_tree(tree).triplets().collect())
}

pub(crate) fn label_mismatch(a: &LabelSet, b: &LabelSet) -> Error {
    let diff: Vec<String> = a
        .symmetric_difference(b)
        .map(|l| l.to_string())
        .collect();
    Error::LabelSetMismatch(diff.join(","))
}

/// The 3-subsets on which two trees over the same labels disagree.
pub fn conflicts(t1: &Tree, t2: &Tree) -> Result<ConflictSet, Error> {
    let (l1, l2) = (t1.labels(), t2.labels());
    if l1 != l2 {
        return Err(label_mismatch(&l1, &l2));
    }
    let (m1, m2) = (TripletMap::from_tree(t1), TripletMap::from_tree(t2));
    Ok(m1
        .iter()
        .filter(|(key, out)| m2.get(key).is_some_and(|o| o != *out))
        .map(|(key, _)| key.clone())
        .collect())
}

/// True when every conflict triple contains at least one label from `x`.
pub fn is_hitting_set(x: &LabelSet, conflicts: &ConflictSet) -> bool {
    conflicts
        .iter()
        .all(|triple| triple.iter().any(|l| x.contains(l)))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

type FlatTriplet = (Label, Label, Label);

/// Aho-style recursive assembly. On failure returns the label set whose
/// triplet graph would not come apart.
fn assemble(labels: &[Label], trips: &[FlatTriplet]) -> Result<crate::tree::Subtree, LabelSet> {
    use crate::tree::Subtree;
    if labels.len() == 1 {
        return Ok(Subtree::Leaf(labels[0].clone()));
    }
    if labels.len() == 2 {
        return Ok(Subtree::inner(
            Subtree::Leaf(labels[0].clone()),
            Subtree::Leaf(labels[1].clone()),
        ));
    }
    let index: BTreeMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut uf = UnionFind::new(labels.len());
    for (a, b, c) in trips {
        if let (Some(&ia), Some(&ib), Some(_)) = (index.get(a), index.get(b), index.get(c)) {
            uf.union(ia, ib);
        }
    }
    let mut groups: BTreeMap<usize, Vec<Label>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(l.clone());
    }
    if groups.len() == 1 {
        return Err(labels.iter().cloned().collect());
    }
    // Components come out ordered by their smallest member because labels are
    // sorted and find() roots at the smallest index; refine left to right.
    let mut parts = Vec::new();
    for group in groups.values() {
        let members: BTreeSet<&Label> = group.iter().collect();
        let inside: Vec<FlatTriplet> = trips
            .iter()
            .filter(|(a, b, c)| members.contains(a) && members.contains(b) && members.contains(c))
            .cloned()
            .collect();
        parts.push(assemble(group, &inside)?);
    }
    let mut iter = parts.into_iter();
    let first = iter.next().expect("at least two components");
    Ok(iter.fold(first, crate::tree::Subtree::inner))
}

/// BUILD with the failing label set on the error side.
pub(crate) fn build_supertree_detail(trees: &[Tree]) -> Result<Tree, LabelSet> {
    let mut labels: LabelSet = LabelSet::new();
    for t in trees {
        labels.extend(t.labels());
    }
    if labels.is_empty() {
        return Ok(Tree::empty());
    }
    let mut trips: BTreeSet<FlatTriplet> = BTreeSet::new();
    for t in trees {
        for triplet in TripletMap::from_tree(t).triplets() {
            let (a, b) = triplet.in_pair();
            trips.insert((a.clone(), b.clone(), triplet.outgroup().clone()));
        }
    }
    let sorted: Vec<Label> = labels.iter().cloned().collect();
    let flat: Vec<FlatTriplet> = trips.into_iter().collect();
    let shape = assemble(&sorted, &flat)?;
    let result = Tree::from_parts(Some(shape), false);
    for t in trees {
        assert_eq!(
            result.restrict(&t.labels()),
            *t,
            "assembled supertree must display every input"
        );
    }
    Ok(result)
}

/// A tree displaying every input tree, if one exists. Multifurcations left by
/// the assembly are refined left to right in order of smallest descendant
/// label, and the result is checked structurally against every input.
pub fn build_supertree(trees: &[Tree]) -> Option<Tree> {
    build_supertree_detail(trees).ok()
}

/// True when some tree displays every input tree.
pub fn is_compatible(trees: &[Tree]) -> bool {
    build_supertree(trees).is_some()
}

/// Which third triplet completes a conflicting 4-subset: the two minimal
/// obstructions are `{a,b|c, c,d|b, b,d|a}` and `{a,b|c, c,d|b, a,d|b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensePattern {
    BdA,
    AdB,
}

/// A 4-subset witnessing that a triplet set is unsatisfiable, with labels
/// named so that `a,b|c` and `c,d|b` are present.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseConflict {
    pub a: Label,
    pub b: Label,
    pub c: Label,
    pub d: Label,
    pub pattern: DensePattern,
}

impl DenseConflict {
    /// The three triplets forming the obstruction.
    pub fn members(&self) -> [Triplet; 3] {
        let t1 = Triplet::new(self.a.clone(), self.b.clone(), self.c.clone());
        let t2 = Triplet::new(self.c.clone(), self.d.clone(), self.b.clone());
        let t3 = match self.pattern {
            DensePattern::BdA => Triplet::new(self.b.clone(), self.d.clone(), self.a.clone()),
            DensePattern::AdB => Triplet::new(self.a.clone(), self.d.clone(), self.b.clone()),
        };
        [t1, t2, t3].map(|t| t.expect("conflict labels are distinct"))
    }
}

fn permutations4() -> [[usize; 4]; 24] {
    let mut out = [[0usize; 4]; 24];
    let mut idx = 0;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out[idx] = [a, b, c, d];
                        idx += 1;
                    }
                }
            }
        }
    }
    out
}

/// Scans 4-subsets in lexicographic order for an obstruction pattern; works
/// on partial maps and returns the first witness found.
pub(crate) fn find_conflict_quad(map: &TripletMap) -> Option<DenseConflict> {
    let labels: Vec<Label> = map.labels().into_iter().collect();
    let n = labels.len();
    let perms = permutations4();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                for l in (k + 1)..n {
                    let quad = [&labels[i], &labels[j], &labels[k], &labels[l]];
                    for perm in &perms {
                        let (a, b, c, d) = (quad[perm[0]], quad[perm[1]], quad[perm[2]], quad[perm[3]]);
                        if map.get(&sorted_triple(a, b, c)) != Some(c)
                            || map.get(&sorted_triple(b, c, d)) != Some(b)
                        {
                            continue;
                        }
                        let third = map.get(&sorted_triple(a, b, d));
                        let pattern = if third == Some(a) {
                            DensePattern::BdA
                        } else if third == Some(b) {
                            DensePattern::AdB
                        } else {
                            continue;
                        };
                        return Some(DenseConflict {
                            a: a.clone(),
                            b: b.clone(),
                            c: c.clone(),
                            d: d.clone(),
                            pattern,
                        });
                    }
                }
            }
        }
    }
    None
}

/// Looks for a conflicting 4-subset in a triplet set that is full over its
/// label set (exactly one entry per 3-subset). For full sets the absence of
/// such a witness is equivalent to satisfiability.
pub fn find_dense_conflict(map: &TripletMap) -> Result<Option<DenseConflict>, Error> {
    let n = map.labels().len();
    let expected = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
    if map.len() != expected {
        return Err(Error::InvalidOperation(format!(
            "triplet set is not full over its {n} labels: {} of {expected} entries",
            map.len()
        )));
    }
    Ok(find_conflict_quad(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn trip(s: &str) -> Triplet {
        s.parse().unwrap()
    }

    #[test]
    fn triplet_normalizes_in_pair() {
        let t = Triplet::new(lab("b"), lab("a"), lab("c")).unwrap();
        assert_eq!(t, trip("a,b|c"));
        assert_eq!(t.to_string(), "a,b|c");
        assert!(Triplet::new(lab("a"), lab("a"), lab("c")).is_err());
    }

    #[test]
    fn triplets_of_small_trees() {
        let t = parse_newick("((a,b),c);").unwrap();
        let ts = triplets(&t).unwrap();
        assert_eq!(ts.len(), 1);
        assert!(ts.contains(&trip("a,b|c")));

        let cat = parse_newick("(((a,b),c),d);").unwrap();
        let ts = triplets(&cat).unwrap();
        let expect: BTreeSet<Triplet> = ["a,b|c", "a,b|d", "a,c|d", "b,c|d"]
            .iter()
            .map(|s| trip(s))
            .collect();
        assert_eq!(ts, expect);

        assert!(triplets(&parse_newick("(a,b);").unwrap()).is_err());
    }

    #[test]
    fn triplet_count_is_n_choose_3() {
        let t = parse_newick("(((a,b),(c,d)),(e,f));").unwrap();
        assert_eq!(triplets(&t).unwrap().len(), 20);
    }

    #[test]
    fn conflicts_between_two_trees() {
        let t1 = parse_newick("((a,b),c);").unwrap();
        let t2 = parse_newick("((a,c),b);").unwrap();
        let c = conflicts(&t1, &t2).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contains(&sorted_triple(&lab("a"), &lab("b"), &lab("c"))));
        assert!(conflicts(&t1, &t1).unwrap().is_empty());
        let t3 = parse_newick("((a,b),d);").unwrap();
        assert!(matches!(
            conflicts(&t1, &t3),
            Err(Error::LabelSetMismatch(_))
        ));
    }

    #[test]
    fn hitting_sets_cover_every_conflict() {
        let t1 = parse_newick("(((a,b),c),d);").unwrap();
        let t2 = parse_newick("(((a,c),b),d);").unwrap();
        let conf = conflicts(&t1, &t2).unwrap();
        let hit: LabelSet = [lab("a")].into_iter().collect();
        assert!(is_hitting_set(&hit, &conf));
        let miss: LabelSet = [lab("d")].into_iter().collect();
        assert!(!is_hitting_set(&miss, &conf));
        assert!(is_hitting_set(&LabelSet::new(), &ConflictSet::new()));
    }

    #[test]
    fn build_supertree_merges_compatible_inputs() {
        let t1 = parse_newick("((a,b),c);").unwrap();
        let t2 = parse_newick("((c,d),e);").unwrap();
        let st = build_supertree(&[t1.clone(), t2.clone()]).unwrap();
        assert_eq!(st.restrict(&t1.labels()), t1);
        assert_eq!(st.restrict(&t2.labels()), t2);

        let cherry = parse_newick("(a,b);").unwrap();
        assert_eq!(
            build_supertree(&[cherry.clone(), cherry.clone()]).unwrap(),
            cherry
        );
        assert_eq!(build_supertree(&[]).unwrap(), Tree::empty());
    }

    #[test]
    fn build_supertree_rejects_conflicting_triplets() {
        let t1 = parse_newick("((a,b),c);").unwrap();
        let t2 = parse_newick("((a,c),b);").unwrap();
        assert!(build_supertree(&[t1.clone(), t2]).is_none());
        assert!(is_compatible(&[t1]));
    }

    #[test]
    fn build_failure_reports_tangled_label_set() {
        let t1 = parse_newick("((a,b),c);").unwrap();
        let t2 = parse_newick("((a,c),b);").unwrap();
        let failing = build_supertree_detail(&[t1, t2]).unwrap_err();
        assert_eq!(failing, [lab("a"), lab("b"), lab("c")].into_iter().collect());
    }

    #[test]
    fn dense_conflict_found_in_unsatisfiable_full_set() {
        let mut map = TripletMap::new();
        for s in ["a,b|c", "c,d|b", "b,d|a", "a,c|d"] {
            assert!(map.insert(&trip(s)));
        }
        let dc = find_dense_conflict(&map).unwrap().unwrap();
        assert_eq!(dc.pattern, DensePattern::BdA);
        let members = dc.members();
        for m in &members {
            assert_eq!(map.get(&m.key()), Some(m.outgroup()));
        }
    }

    #[test]
    fn dense_conflict_absent_for_tree_triplets() {
        let t = parse_newick("(((a,b),(c,d)),e);").unwrap();
        let map = TripletMap::from_tree(&t);
        assert!(find_dense_conflict(&map).unwrap().is_none());
    }

    #[test]
    fn dense_conflict_requires_a_full_set() {
        let mut map = TripletMap::new();
        map.insert(&trip("a,b|c"));
        map.insert(&trip("a,b|d"));
        assert!(find_dense_conflict(&map).is_err());
    }

    #[test]
    fn triplet_map_insert_refuses_contradictions() {
        let mut map = TripletMap::new();
        assert!(map.insert(&trip("a,b|c")));
        assert!(map.insert(&trip("a,b|c")));
        assert!(!map.insert(&trip("a,c|b")));
        assert_eq!(map.len(), 1);
    }
}
