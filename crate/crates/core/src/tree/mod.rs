//! The dual tree of a nested track system.
//!
//! Vertices are consistent orientations of the parallel classes, closed
//! under medians, with each class edge subdivided through band vertices.
//! Every vertex carries its flip set `F` relative to the base vertex `o = A`,
//! so the vertex itself is the set `A + F`.

mod action;

use std::collections::{BTreeMap, HashSet, VecDeque};

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::pattern::{nestedness_check, CrossingWitness, TrackSystem};

pub use action::{
    act, stabilizer_analysis, BaseStabilizer, ClassUnionCheck, EdgeStabilizer, StabilizerReport, TreeAction,
    VertexStabilizer,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("tracks {} and {} cross", .0.cosets.0, .0.cosets.1)]
    NotNested(CrossingWitness),
    #[error("median closure exceeded {0} orientations")]
    ClosureBudgetExceeded(usize),
    #[error("inconsistent orientation: {0}")]
    InconsistentOrientation(String),
    #[error("not a tree: {0}")]
    NotATree(String),
    #[error("no path between tree vertices {0} and {1}")]
    DisconnectedTree(usize, usize),
    #[error("'{0}' is outside the certified action domain: {1}")]
    OutsideCertifiedDomain(String, String),
    #[error("family has no window keys; the action needs a window-backed family")]
    NoWindowKeys,
}

/// Side choice per parallel class, stored as the set of classes on which it
/// disagrees with the base vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation {
    pub flips: FixedBitSet,
}

impl Orientation {
    pub fn flipped(&self, class: usize) -> bool {
        self.flips.contains(class)
    }

    /// Family vertices on the chosen side of `class`.
    pub fn half_space(&self, system: &TrackSystem, class: usize) -> u32 {
        let side = system.class_side(class);
        if self.flipped(class) {
            side
        } else {
            !side & system.all_vertices()
        }
    }

    /// First pair of classes whose chosen half-spaces miss each other.
    pub fn inconsistency(&self, system: &TrackSystem) -> Option<(usize, usize)> {
        let k = system.classes().len();
        let halves: Vec<u32> = (0..k).map(|c| self.half_space(system, c)).collect();
        for i in 0..k {
            for j in i..k {
                if halves[i] & halves[j] == 0 {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Flip set over tracks: every member of every flipped class.
    pub fn track_flips(&self, system: &TrackSystem) -> FixedBitSet {
        let mut f = FixedBitSet::with_capacity(system.num_tracks());
        for c in self.flips.ones() {
            for &t in &system.classes()[c] {
                f.insert(t);
            }
        }
        f
    }
}

/// The orientation of family vertex `v`: each class points at `v`'s side.
pub fn base_orientation(system: &TrackSystem, v: usize) -> Orientation {
    let k = system.classes().len();
    let mut flips = FixedBitSet::with_capacity(k);
    for c in 0..k {
        flips.set(c, system.class_side(c) >> v & 1 == 1);
    }
    Orientation { flips }
}

/// Per-class majority vote.
pub fn median(a: &Orientation, b: &Orientation, c: &Orientation) -> Orientation {
    let mut ab = a.flips.clone();
    ab.intersect_with(&b.flips);
    let mut bc = b.flips.clone();
    bc.intersect_with(&c.flips);
    let mut ca = c.flips.clone();
    ca.intersect_with(&a.flips);
    ab.union_with(&bc);
    ab.union_with(&ca);
    Orientation { flips: ab }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum VertexKind {
    /// The vertex of a family member.
    Family(usize),
    /// A median point that is not a family vertex.
    Branch,
    /// Interior vertex of a subdivided class edge.
    Band(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeVertex {
    /// `F` with `B = A + F`, over track indices.
    pub flips: FixedBitSet,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub track: usize,
}

#[derive(Debug, Clone)]
pub struct DualTree {
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<TreeEdge>,
    /// Index of `o = A`.
    pub base: usize,
    /// Number of vertices before band expansion.
    pub reduced_vertices: usize,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl DualTree {
    fn new(vertices: Vec<TreeVertex>, edges: Vec<TreeEdge>, reduced_vertices: usize) -> Self {
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, i));
            adjacency[e.b].push((e.a, i));
        }
        let base = vertices.iter().position(|v| v.flips.is_clear()).expect("base vertex present");
        DualTree { vertices, edges, base, reduced_vertices, adjacency }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn neighbours(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&TreeEdge> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, e)| &self.edges[e])
    }

    /// Vertex index of each family member.
    pub fn family_vertex(&self, member: usize) -> Option<usize> {
        self.vertices.iter().position(|v| v.kind == VertexKind::Family(member))
    }

    /// Vertex whose flip set is `flips`, if any.
    pub fn find(&self, flips: &FixedBitSet) -> Option<usize> {
        self.vertices.iter().position(|v| &v.flips == flips)
    }
}

fn sort_key(f: &FixedBitSet) -> (usize, Vec<usize>) {
    (f.count_ones(..), f.ones().collect())
}

/// Median closure of the family orientations, each checked for consistency.
pub fn median_closure(system: &TrackSystem) -> Result<Vec<Orientation>, TreeError> {
    let k = system.classes().len();
    let budget = if k >= usize::BITS as usize - 1 { usize::MAX } else { 1usize << k };
    let mut all: Vec<Orientation> = Vec::new();
    let mut seen: HashSet<Orientation> = HashSet::new();
    for v in 0..system.num_vertices() {
        let o = base_orientation(system, v);
        if seen.insert(o.clone()) {
            all.push(o);
        }
    }
    let mut fresh_from = 0;
    loop {
        let n = all.len();
        let mut added = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for l in j + 1..n {
                    // Triples made only of old orientations were handled in an earlier round.
                    if l < fresh_from {
                        continue;
                    }
                    let m = median(&all[i], &all[j], &all[l]);
                    if seen.contains(&m) {
                        continue;
                    }
                    if let Some((a, b)) = m.inconsistency(system) {
                        return Err(TreeError::InconsistentOrientation(format!(
                            "median misses between classes {} and {}",
                            system.class_text(a),
                            system.class_text(b)
                        )));
                    }
                    seen.insert(m.clone());
                    added.push(m);
                    if seen.len() > budget {
                        return Err(TreeError::ClosureBudgetExceeded(budget));
                    }
                }
            }
        }
        if added.is_empty() {
            return Ok(all);
        }
        fresh_from = n;
        all.extend(added);
    }
}

/// Builds the dual tree and checks that it is one.
pub fn build_tree(system: &TrackSystem) -> Result<DualTree, TreeError> {
    nestedness_check(system).map_err(TreeError::NotNested)?;
    let orientations = median_closure(system)?;
    let family: BTreeMap<Vec<usize>, usize> =
        (0..system.num_vertices()).map(|v| (base_orientation(system, v).flips.ones().collect(), v)).collect();

    let mut reduced: Vec<(Orientation, VertexKind)> = orientations
        .into_iter()
        .map(|o| {
            let kind = match family.get(&o.flips.ones().collect::<Vec<_>>()) {
                Some(&v) => VertexKind::Family(v),
                None => VertexKind::Branch,
            };
            (o, kind)
        })
        .collect();
    reduced.sort_by_key(|(o, _)| sort_key(&o.track_flips(system)));

    let mut vertices: Vec<TreeVertex> =
        reduced.iter().map(|(o, kind)| TreeVertex { flips: o.track_flips(system), kind: *kind }).collect();
    let reduced_vertices = vertices.len();
    let mut edges = Vec::new();
    for i in 0..reduced.len() {
        for j in i + 1..reduced.len() {
            let mut d = reduced[i].0.flips.clone();
            d.symmetric_difference_with(&reduced[j].0.flips);
            if d.count_ones(..) != 1 {
                continue;
            }
            let class = d.ones().next().expect("one class");
            // Walk from the unflipped end, flipping class members in ShortLex order.
            let (from, to) = if reduced[i].0.flipped(class) { (j, i) } else { (i, j) };
            let members = &system.classes()[class];
            let mut prev = from;
            let mut current = vertices[from].flips.clone();
            for (step, &t) in members.iter().enumerate() {
                current.insert(t);
                let next = if step + 1 == members.len() {
                    to
                } else {
                    vertices.push(TreeVertex { flips: current.clone(), kind: VertexKind::Band(class) });
                    vertices.len() - 1
                };
                edges.push(TreeEdge { a: prev, b: next, track: t });
                prev = next;
            }
        }
    }

    // Canonical numbering: by |F|, then by the sorted flip set.
    let mut order: Vec<usize> = (0..vertices.len()).collect();
    order.sort_by_key(|&v| sort_key(&vertices[v].flips));
    let mut rank = vec![0; vertices.len()];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    let vertices: Vec<TreeVertex> = order.iter().map(|&v| vertices[v].clone()).collect();
    let mut edges: Vec<TreeEdge> = edges
        .into_iter()
        .map(|e| {
            let (a, b) = (rank[e.a].min(rank[e.b]), rank[e.a].max(rank[e.b]));
            TreeEdge { a, b, track: e.track }
        })
        .collect();
    edges.sort_by_key(|e| (e.a, e.b));

    let tree = DualTree::new(vertices, edges, reduced_vertices);
    assert_tree(&tree)?;
    Ok(tree)
}

/// Connected, `|E| = |V| - 1`, each edge flips one coset, and edges join
/// vertices of different colour `|F| mod 2`.
pub fn assert_tree(tree: &DualTree) -> Result<(), TreeError> {
    let n = tree.len();
    if tree.edges.len() + 1 != n {
        return Err(TreeError::NotATree(format!("{} vertices but {} edges", n, tree.edges.len())));
    }
    for e in &tree.edges {
        let mut d = tree.vertices[e.a].flips.clone();
        d.symmetric_difference_with(&tree.vertices[e.b].flips);
        if d.count_ones(..) != 1 || !d.contains(e.track) {
            return Err(TreeError::NotATree(format!("edge ({}, {}) does not flip exactly its own track", e.a, e.b)));
        }
        if tree.vertices[e.a].flips.count_ones(..) % 2 == tree.vertices[e.b].flips.count_ones(..) % 2 {
            return Err(TreeError::NotATree(format!("edge ({}, {}) joins vertices of one colour", e.a, e.b)));
        }
    }
    let reached = bfs_parents(tree, tree.base).iter().filter(|p| p.is_some()).count();
    if reached != n {
        return Err(TreeError::NotATree(format!("only {reached} of {n} vertices reachable from o")));
    }
    Ok(())
}

fn bfs_parents(tree: &DualTree, from: usize) -> Vec<Option<(usize, usize)>> {
    let mut parent = vec![None; tree.len()];
    parent[from] = Some((from, usize::MAX));
    let mut queue = VecDeque::from([from]);
    while let Some(x) = queue.pop_front() {
        for &(y, e) in tree.neighbours(x) {
            if parent[y].is_none() {
                parent[y] = Some((x, e));
                queue.push_back(y);
            }
        }
    }
    parent
}

/// The unique path between two tree vertices and its track labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreePath {
    pub vertices: Vec<usize>,
    /// Tracks on the path edges, from `u` to `v`.
    pub labels: Vec<usize>,
    pub length: usize,
    /// The labels are exactly `F_u + F_v`, each once.
    pub separates_exactly: bool,
}

pub fn tree_metric_and_separation(tree: &DualTree, u: usize, v: usize) -> Result<TreePath, TreeError> {
    let parent = bfs_parents(tree, u);
    if parent[v].is_none() {
        return Err(TreeError::DisconnectedTree(u, v));
    }
    let mut vertices = vec![v];
    let mut labels = Vec::new();
    let mut x = v;
    while x != u {
        let (p, e) = parent[x].expect("reached");
        labels.push(tree.edges[e].track);
        vertices.push(p);
        x = p;
    }
    vertices.reverse();
    labels.reverse();
    let mut expected = tree.vertices[u].flips.clone();
    expected.symmetric_difference_with(&tree.vertices[v].flips);
    let mut sorted = labels.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let separates_exactly = sorted.len() == labels.len() && sorted == expected.ones().collect::<Vec<_>>();
    Ok(TreePath { length: labels.len(), vertices, labels, separates_exactly })
}

/// Coset labels of `F` as `{c1,c2}`, or `o` for the base vertex.
pub fn vertex_name(system: &TrackSystem, flips: &FixedBitSet) -> String {
    if flips.is_clear() {
        "o".to_string()
    } else {
        crate::pattern::format_set(flips.ones().map(|t| system.text(t)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SetFamily;

    fn system(universe: &[&str], sets: &[&[&str]]) -> TrackSystem {
        let sets: Vec<Vec<&str>> = sets.iter().map(|s| s.to_vec()).collect();
        TrackSystem::new(SetFamily::explicit(universe, &sets).unwrap()).unwrap()
    }

    fn names(s: &TrackSystem, t: &DualTree) -> Vec<String> {
        t.vertices.iter().map(|v| vertex_name(s, &v.flips)).collect()
    }

    #[test]
    fn orientation_basics() {
        let s = system(&["a", "b", "c"], &[&[], &["a"], &["b"], &["c"]]);
        let o = base_orientation(&s, 0);
        assert!(o.flips.is_clear());
        let leaves: Vec<_> = (1..4).map(|v| base_orientation(&s, v)).collect();
        assert_eq!(median(&leaves[0], &leaves[0], &leaves[1]), leaves[0]);
        assert_eq!(median(&leaves[0], &leaves[1], &leaves[2]), o);
        assert!(leaves.iter().all(|l| l.inconsistency(&s).is_none()));
    }

    #[test]
    fn star_has_a_branch_centre() {
        // Base {a}; the centre is ∅, which is not a family member.
        let s = system(&["a", "b", "c"], &[&["a"], &["b"], &["c"]]);
        let t = build_tree(&s).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.edges.len(), 3);
        let centre = t.vertices.iter().position(|v| v.kind == VertexKind::Branch).unwrap();
        assert_eq!(t.neighbours(centre).len(), 3);
        assert_eq!(vertex_name(&s, &t.vertices[centre].flips), "{a}");
    }

    #[test]
    fn single_track_and_band() {
        let s = system(&["a"], &[&[], &["a"]]);
        let t = build_tree(&s).unwrap();
        assert_eq!((t.len(), t.edges.len()), (2, 1));

        let s = system(&["a", "b"], &[&[], &["a", "b"]]);
        let t = build_tree(&s).unwrap();
        assert_eq!(names(&s, &t), vec!["o", "{a}", "{a,b}"]);
        assert_eq!(t.vertices[1].kind, VertexKind::Band(0));
        assert_eq!(t.reduced_vertices, 2);
        let p = tree_metric_and_separation(&t, 0, 2).unwrap();
        assert_eq!(p.labels, vec![0, 1]);
        assert_eq!(p.length, 2);
        assert!(p.separates_exactly);
        assert_eq!(tree_metric_and_separation(&t, 1, 1).unwrap().length, 0);
    }

    #[test]
    fn empty_track_set() {
        let s = system(&["a"], &[&["a"]]);
        let t = build_tree(&s).unwrap();
        assert_eq!((t.len(), t.edges.len(), t.base), (1, 0, 0));
    }

    #[test]
    fn crossing_family_is_refused() {
        let s = system(&["a", "b"], &[&[], &["a"], &["b"], &["a", "b"]]);
        assert!(matches!(build_tree(&s), Err(TreeError::NotNested(_))));
    }

    #[test]
    fn separation_on_all_pairs() {
        let s = system(&["a", "b", "c", "d", "e"], &[&[], &["a", "b"], &["a", "b", "c"], &["a", "b", "d"], &["e"]]);
        let t = build_tree(&s).unwrap();
        for u in 0..t.len() {
            for v in 0..t.len() {
                let p = tree_metric_and_separation(&t, u, v).unwrap();
                assert!(p.separates_exactly, "{u} {v}");
            }
        }
        let table = crate::pattern::metric(&s);
        for u in 0..s.num_vertices() {
            for v in 0..s.num_vertices() {
                let (x, y) = (t.family_vertex(u).unwrap(), t.family_vertex(v).unwrap());
                assert_eq!(tree_metric_and_separation(&t, x, y).unwrap().length, table.d(u, v));
            }
        }
    }
}
