//! Rooted binary leaf-labeled trees with a canonical arena layout.
//!
//! Trees are immutable: every operation returns a new [`Tree`]. Nodes live in
//! a vector in canonical preorder, where the two children of every internal
//! node are ordered by their smallest descendant label. Because the layout is
//! canonical, two trees are structurally equal exactly when their arenas are
//! equal, and the id of a node doubles as the name of the edge above it.
//!
//! A tree may be *planted*: an extra degree-1 root sits above the topmost
//! binary node. Planting matters to the bounded-distance solver, where moves
//! may reattach a leaf above the old root; everywhere else trees are plain.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Index of a node in a tree's arena. Node 0 is always the root.
pub type NodeId = usize;

/// A set of leaf labels, ordered bytewise.
pub type LabelSet = BTreeSet<Label>;

/// A leaf name: a nonempty string over `[A-Za-z0-9_.-]`, compared bytewise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

impl Label {
    /// Validates and wraps a label string.
    pub fn new(text: impl Into<String>) -> Result<Self, Error> {
        let text = text.into();
        if text.is_empty() || !text.bytes().all(is_label_byte) {
            return Err(Error::InvalidLabel { text });
        }
        Ok(Label(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Label::new(s)
    }
}

pub(crate) fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-'
}

/// Where a subtree gets attached by [`Tree::graft`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraftPosition {
    /// Subdivide the edge above this node and hang the subtree off the new vertex.
    Edge(NodeId),
    /// Create a new root whose children are the old root and the subtree.
    AboveRoot,
}

/// A leaf prune-and-regraft move: delete `label`, then reinsert it at
/// `position`, which names an edge of the pruned tree (or [`GraftPosition::AboveRoot`]).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LprMove {
    pub label: Label,
    pub position: GraftPosition,
}

/// What a node is. Child ids always point further right in the arena.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Leaf(Label),
    Inner(NodeId, NodeId),
    /// The degree-1 root of a planted tree; its single child is the binary root.
    Planted(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Node {
    parent: Option<NodeId>,
    kind: NodeKind,
}

/// An immutable rooted binary tree over distinct leaf labels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tree {
    nodes: Vec<Node>,
}

/// Recursive build intermediate; [`Tree::from_parts`] canonicalizes it.
#[derive(Clone, Debug)]
pub(crate) enum Subtree {
    Leaf(Label),
    Inner(Box<Subtree>, Box<Subtree>),
}

impl Subtree {
    pub(crate) fn inner(a: Subtree, b: Subtree) -> Subtree {
        Subtree::Inner(Box::new(a), Box::new(b))
    }

    /// Reorders children so the smaller minimum label comes first; returns the minimum.
    fn ordered(self) -> (Subtree, Label) {
        match self {
            Subtree::Leaf(l) => {
                let min = l.clone();
                (Subtree::Leaf(l), min)
            }
            Subtree::Inner(a, b) => {
                let (a, min_a) = a.ordered();
                let (b, min_b) = b.ordered();
                if min_a <= min_b {
                    (Subtree::inner(a, b), min_a)
                } else {
                    (Subtree::inner(b, a), min_b)
                }
            }
        }
    }
}

fn flatten(shape: Subtree, parent: Option<NodeId>, nodes: &mut Vec<Node>) -> NodeId {
    let id = nodes.len();
    match shape {
        Subtree::Leaf(l) => nodes.push(Node {
            parent,
            kind: NodeKind::Leaf(l),
        }),
        Subtree::Inner(a, b) => {
            nodes.push(Node {
                parent,
                kind: NodeKind::Inner(0, 0),
            });
            let ia = flatten(*a, Some(id), nodes);
            let ib = flatten(*b, Some(id), nodes);
            nodes[id].kind = NodeKind::Inner(ia, ib);
        }
    }
    id
}

impl Tree {
    /// The tree with no leaves.
    pub fn empty() -> Tree {
        Tree { nodes: Vec::new() }
    }

    /// A single-leaf tree.
    pub fn leaf(label: Label) -> Tree {
        Tree::from_parts(Some(Subtree::Leaf(label)), false)
    }

    /// Canonicalizes a recursive shape into the arena layout.
    pub(crate) fn from_parts(shape: Option<Subtree>, planted: bool) -> Tree {
        let Some(shape) = shape else {
            return Tree::empty();
        };
        let (shape, _) = shape.ordered();
        let mut nodes = Vec::new();
        if planted {
            nodes.push(Node {
                parent: None,
                kind: NodeKind::Planted(1),
            });
            flatten(shape, Some(0), &mut nodes);
        } else {
            flatten(shape, None, &mut nodes);
        }
        Tree { nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf(_)))
            .count()
    }

    /// The root id (always 0) of a nonempty tree.
    pub fn root(&self) -> Option<NodeId> {
        (!self.nodes.is_empty()).then_some(0)
    }

    /// True when a degree-1 root sits above the topmost binary node.
    pub fn is_planted(&self) -> bool {
        matches!(self.nodes.first().map(|n| &n.kind), Some(NodeKind::Planted(_)))
    }

    /// The topmost binary (or leaf) node, skipping a planted root.
    pub fn binary_root(&self) -> Option<NodeId> {
        match self.nodes.first().map(|n| &n.kind) {
            None => None,
            Some(NodeKind::Planted(c)) => Some(*c),
            Some(_) => Some(0),
        }
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id].kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    /// Children of an internal binary node.
    pub fn children(&self, id: NodeId) -> Option<(NodeId, NodeId)> {
        match self.nodes[id].kind {
            NodeKind::Inner(a, b) => Some((a, b)),
            _ => None,
        }
    }

    pub fn leaf_label(&self, id: NodeId) -> Option<&Label> {
        match &self.nodes[id].kind {
            NodeKind::Leaf(l) => Some(l),
            _ => None,
        }
    }

    /// Every edge of the tree, named by the child node id.
    pub fn edges(&self) -> impl Iterator<Item = NodeId> {
        1..self.nodes.len()
    }

    /// Leaves in canonical preorder.
    pub fn leaves(&self) -> impl Iterator<Item = (NodeId, &Label)> {
        self.nodes.iter().enumerate().filter_map(|(id, n)| match &n.kind {
            NodeKind::Leaf(l) => Some((id, l)),
            _ => None,
        })
    }

    /// The set of labels on the tree's leaves.
    pub fn labels(&self) -> LabelSet {
        self.leaves().map(|(_, l)| l.clone()).collect()
    }

    pub fn contains_label(&self, label: &Label) -> bool {
        self.leaves().any(|(_, l)| l == label)
    }

    /// Labels on leaves at or below `id`.
    pub fn subtree_labels(&self, id: NodeId) -> LabelSet {
        let mut out = LabelSet::new();
        let mut stack = vec![id];
        while let Some(v) = stack.pop() {
            match &self.nodes[v].kind {
                NodeKind::Leaf(l) => {
                    out.insert(l.clone());
                }
                NodeKind::Inner(a, b) => {
                    stack.push(*a);
                    stack.push(*b);
                }
                NodeKind::Planted(c) => stack.push(*c),
            }
        }
        out
    }

    /// Depth of every node (root has depth 0).
    pub(crate) fn depths(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate().skip(1) {
            d[id] = d[n.parent.expect("non-root node has a parent")] + 1;
        }
        d
    }

    pub(crate) fn leaf_id(&self, label: &Label) -> Option<NodeId> {
        self.leaves().find(|(_, l)| *l == label).map(|(id, _)| id)
    }

    /// Lowest common ancestor of two nodes.
    pub(crate) fn lca_nodes(&self, a: NodeId, b: NodeId, depths: &[usize]) -> NodeId {
        let (mut a, mut b) = (a, b);
        while depths[a] > depths[b] {
            a = self.nodes[a].parent.expect("deeper node has a parent");
        }
        while depths[b] > depths[a] {
            b = self.nodes[b].parent.expect("deeper node has a parent");
        }
        while a != b {
            a = self.nodes[a].parent.expect("distinct nodes below the root");
            b = self.nodes[b].parent.expect("distinct nodes below the root");
        }
        a
    }

    /// Lowest common ancestor of a nonempty set of leaf labels.
    pub fn lca(&self, labels: &LabelSet) -> Result<NodeId, Error> {
        if labels.is_empty() {
            return Err(Error::InvalidOperation(
                "lca of an empty label set".to_string(),
            ));
        }
        let depths = self.depths();
        let mut acc: Option<NodeId> = None;
        for l in labels {
            let leaf = self
                .leaf_id(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            acc = Some(match acc {
                None => leaf,
                Some(v) => self.lca_nodes(v, leaf, &depths),
            });
        }
        Ok(acc.expect("labels is nonempty"))
    }

    /// Recursive copy of the subtree at `id` (planted root copies whole tree).
    pub(crate) fn to_shape(&self, id: NodeId) -> Subtree {
        match &self.nodes[id].kind {
            NodeKind::Leaf(l) => Subtree::Leaf(l.clone()),
            NodeKind::Inner(a, b) => Subtree::inner(self.to_shape(*a), self.to_shape(*b)),
            NodeKind::Planted(c) => self.to_shape(*c),
        }
    }

    /// The subtree at `id` as a standalone unplanted tree.
    pub(crate) fn subtree(&self, id: NodeId) -> Tree {
        Tree::from_parts(Some(self.to_shape(id)), false)
    }

    /// Adds a degree-1 root above the binary root. No-op on empty or planted trees.
    pub fn plant(&self) -> Tree {
        if self.is_empty() || self.is_planted() {
            return self.clone();
        }
        Tree::from_parts(Some(self.to_shape(0)), true)
    }

    /// Removes the degree-1 root if present.
    pub fn unplant(&self) -> Tree {
        if !self.is_planted() {
            return self.clone();
        }
        let br = self.binary_root().expect("planted tree is nonempty");
        Tree::from_parts(Some(self.to_shape(br)), false)
    }

    fn prune(&self, id: NodeId, keep: &LabelSet) -> Option<Subtree> {
        match &self.nodes[id].kind {
            NodeKind::Leaf(l) => keep.contains(l).then(|| Subtree::Leaf(l.clone())),
            NodeKind::Inner(a, b) => match (self.prune(*a, keep), self.prune(*b, keep)) {
                (Some(sa), Some(sb)) => Some(Subtree::inner(sa, sb)),
                (Some(s), None) | (None, Some(s)) => Some(s),
                (None, None) => None,
            },
            NodeKind::Planted(c) => self.prune(*c, keep),
        }
    }

    /// Deletes the leaves labeled by `drop` (absent labels are ignored),
    /// contracting degree-2 vertices and degree-1 roots. Never planted.
    pub fn remove_leaves(&self, drop: &LabelSet) -> Tree {
        let keep: LabelSet = self.labels().difference(drop).cloned().collect();
        self.restrict(&keep)
    }

    /// The restriction of the tree to the labels in `keep`.
    pub fn restrict(&self, keep: &LabelSet) -> Tree {
        match self.root() {
            None => Tree::empty(),
            Some(r) => Tree::from_parts(self.prune(r, keep), false),
        }
    }

    fn rebuild_with_graft(&self, id: NodeId, at: NodeId, guest: &Subtree) -> Subtree {
        let here = match &self.nodes[id].kind {
            NodeKind::Leaf(l) => Subtree::Leaf(l.clone()),
            NodeKind::Inner(a, b) => Subtree::inner(
                self.rebuild_with_graft(*a, at, guest),
                self.rebuild_with_graft(*b, at, guest),
            ),
            NodeKind::Planted(c) => return self.rebuild_with_graft(*c, at, guest),
        };
        if id == at {
            Subtree::inner(here, guest.clone())
        } else {
            here
        }
    }

    /// Attaches `other` (taken unplanted) at `position`. Label sets must be disjoint.
    pub fn graft(&self, other: &Tree, position: GraftPosition) -> Result<Tree, Error> {
        let guest = other.unplant();
        let Some(guest_root) = guest.root() else {
            return Err(Error::EmptyInput);
        };
        if let Some(shared) = self.labels().intersection(&guest.labels()).next() {
            return Err(Error::InvalidOperation(format!(
                "label '{shared}' occurs in both trees"
            )));
        }
        let guest_shape = guest.to_shape(guest_root);
        match position {
            GraftPosition::AboveRoot => {
                let Some(br) = self.binary_root() else {
                    return Ok(guest);
                };
                let shape = Subtree::inner(self.to_shape(br), guest_shape);
                Ok(Tree::from_parts(Some(shape), self.is_planted()))
            }
            GraftPosition::Edge(v) => {
                if v == 0 || v >= self.nodes.len() {
                    return Err(Error::InvalidEdge(v));
                }
                let br = self.binary_root().expect("nonempty tree has a binary root");
                let shape = self.rebuild_with_graft(br, v, &guest_shape);
                Ok(Tree::from_parts(Some(shape), self.is_planted()))
            }
        }
    }

    /// Applies a leaf prune-and-regraft move. The move's position names an
    /// edge of `self` minus the moved leaf, in that tree's canonical form.
    /// The result is unplanted.
    pub fn apply_lpr(&self, mv: &LprMove) -> Result<Tree, Error> {
        if self.leaf_count() < 2 {
            return Err(Error::InvalidOperation(
                "a leaf prune-and-regraft move needs at least 2 leaves".to_string(),
            ));
        }
        if !self.contains_label(&mv.label) {
            return Err(Error::UnknownLabel(mv.label.to_string()));
        }
        let mut single = LabelSet::new();
        single.insert(mv.label.clone());
        let pruned = self.remove_leaves(&single);
        pruned.graft(&Tree::leaf(mv.label.clone()), mv.position)
    }

    /// The node of `self` playing the role of node `u` of the displayed tree
    /// `sub`: the lca of `u`'s leaf labels, with planted roots mapping to the
    /// root of `self`.
    pub fn corresponding_node(&self, sub: &Tree, u: NodeId) -> Result<NodeId, Error> {
        if u >= sub.node_count() {
            return Err(Error::InvalidNode(u));
        }
        if matches!(sub.kind(u), NodeKind::Planted(_)) {
            return self.root().ok_or(Error::EmptyInput);
        }
        self.lca(&sub.subtree_labels(u))
    }

    /// Replaces labels according to `map`; labels absent from `map` are kept.
    pub(crate) fn relabel(&self, map: &std::collections::BTreeMap<Label, Label>) -> Tree {
        fn go(t: &Tree, id: NodeId, map: &std::collections::BTreeMap<Label, Label>) -> Subtree {
            match t.kind(id) {
                NodeKind::Leaf(l) => Subtree::Leaf(map.get(l).unwrap_or(l).clone()),
                NodeKind::Inner(a, b) => Subtree::inner(go(t, *a, map), go(t, *b, map)),
                NodeKind::Planted(c) => go(t, *c, map),
            }
        }
        match self.binary_root() {
            None => Tree::empty(),
            Some(br) => Tree::from_parts(Some(go(self, br, map)), self.is_planted()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_newick;

    fn lab(s: &str) -> Label {
        Label::new(s).unwrap()
    }

    fn set(labels: &[&str]) -> LabelSet {
        labels.iter().map(|s| lab(s)).collect()
    }

    #[test]
    fn label_charset_is_enforced() {
        assert!(Label::new("A1_x.-").is_ok());
        assert!(Label::new("").is_err());
        assert!(Label::new("a b").is_err());
        assert!(Label::new("a|b").is_err());
    }

    #[test]
    fn canonical_child_order_ignores_input_order() {
        let t1 = parse_newick("((b,a),c);").unwrap();
        let t2 = parse_newick("(c,(a,b));").unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.to_newick(), "((a,b),c);");
    }

    #[test]
    fn node_ids_are_preorder() {
        let t = parse_newick("((a,b),(c,d));").unwrap();
        assert_eq!(t.root(), Some(0));
        let (l, r) = t.children(0).unwrap();
        assert_eq!((l, r), (1, 4));
        assert_eq!(t.leaf_label(2), Some(&lab("a")));
        assert_eq!(t.leaf_label(3), Some(&lab("b")));
        assert_eq!(t.parent(4), Some(0));
    }

    #[test]
    fn remove_leaves_contracts_and_unplants() {
        let t = parse_newick("((a,b),(c,d));").unwrap();
        let r = t.remove_leaves(&set(&["a"]));
        assert_eq!(r.to_newick(), "(b,(c,d));");
        let planted = t.plant();
        assert!(planted.is_planted());
        let r2 = planted.remove_leaves(&set(&["a"]));
        assert!(!r2.is_planted());
        assert_eq!(r2, r);
        assert_eq!(t.remove_leaves(&t.labels()), Tree::empty());
    }

    #[test]
    fn restrict_matches_remove_complement() {
        let t = parse_newick("((a,(b,e)),(c,d));").unwrap();
        let keep = set(&["a", "c", "e"]);
        assert_eq!(t.restrict(&keep), t.remove_leaves(&set(&["b", "d"])));
        assert_eq!(t.restrict(&keep).labels(), keep);
    }

    #[test]
    fn lca_and_subtree_labels_agree() {
        let t = parse_newick("((a,(b,e)),(c,d));").unwrap();
        let v = t.lca(&set(&["b", "e"])).unwrap();
        assert_eq!(t.subtree_labels(v), set(&["b", "e"]));
        let w = t.lca(&set(&["a", "e"])).unwrap();
        assert_eq!(t.subtree_labels(w), set(&["a", "b", "e"]));
        assert_eq!(t.lca(&t.labels()).unwrap(), 0);
        assert!(t.lca(&set(&["zz"])).is_err());
    }

    #[test]
    fn graft_above_root_and_on_edges() {
        let t = parse_newick("(a,b);").unwrap();
        let c = Tree::leaf(lab("c"));
        let above = t.graft(&c, GraftPosition::AboveRoot).unwrap();
        assert_eq!(above.to_newick(), "((a,b),c);");
        let on_leaf = t.graft(&c, GraftPosition::Edge(1)).unwrap();
        assert_eq!(on_leaf.to_newick(), "((a,c),b);");
        assert!(t.graft(&c, GraftPosition::Edge(0)).is_err());
        assert!(t.graft(&Tree::leaf(lab("a")), GraftPosition::AboveRoot).is_err());
        assert!(t.graft(&Tree::empty(), GraftPosition::AboveRoot).is_err());
    }

    #[test]
    fn graft_onto_empty_returns_guest() {
        let guest = parse_newick("(a,b);").unwrap();
        let out = Tree::empty().graft(&guest, GraftPosition::AboveRoot).unwrap();
        assert_eq!(out, guest);
    }

    #[test]
    fn planted_roots_and_edges() {
        let t = parse_newick("((a,b),c);").unwrap();
        let p = t.plant();
        assert!(p.is_planted());
        assert_eq!(p.binary_root(), Some(1));
        assert_eq!(p.node_count(), t.node_count() + 1);
        assert_eq!(p.unplant(), t);
        // Grafting on the edge above the binary root lands below the planted root.
        let d = Tree::leaf(lab("d"));
        let g = p.graft(&d, GraftPosition::Edge(1)).unwrap();
        assert!(g.is_planted());
        assert_eq!(g.unplant().to_newick(), "(((a,b),c),d);");
    }

    #[test]
    fn apply_lpr_moves_one_leaf() {
        let t = parse_newick("((a,b),(c,d));").unwrap();
        // Pruning d leaves ((a,b),c); edge 1 is the (a,b) node.
        let mv = LprMove {
            label: lab("d"),
            position: GraftPosition::Edge(1),
        };
        let moved = t.apply_lpr(&mv).unwrap();
        assert_eq!(moved.to_newick(), "(((a,b),d),c);");
        let back = moved
            .apply_lpr(&LprMove {
                label: lab("d"),
                position: GraftPosition::Edge(4),
            })
            .unwrap();
        assert_eq!(back, t);
        assert!(Tree::leaf(lab("a"))
            .apply_lpr(&LprMove {
                label: lab("a"),
                position: GraftPosition::AboveRoot
            })
            .is_err());
    }

    #[test]
    fn corresponding_node_is_label_lca() {
        let t = parse_newick("((a,(b,e)),(c,d));").unwrap();
        let sub = t.restrict(&set(&["a", "b", "c"]));
        let u = sub.lca(&set(&["a", "b"])).unwrap();
        let v = t.corresponding_node(&sub, u).unwrap();
        assert_eq!(t.subtree_labels(v), set(&["a", "b", "e"]));
        // Planted roots map to planted roots.
        let tp = t.plant();
        let sp = sub.plant();
        assert_eq!(tp.corresponding_node(&sp, 0).unwrap(), 0);
        assert!(matches!(tp.kind(0), NodeKind::Planted(_)));
    }

    #[test]
    fn structural_equality_is_arena_equality() {
        let a = parse_newick("((a,b),(c,d));").unwrap();
        let b = parse_newick("((d,c),(b,a));").unwrap();
        let c = parse_newick("(((a,b),c),d);").unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
