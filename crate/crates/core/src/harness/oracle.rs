//! Brute-force routes to the dual tree and to the labellings of a pattern.
//!
//! Both oracles read only the family's flip sets and the track labels, never
//! the tree builder or the canonical class orders they are checked against.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::HarnessError;
use crate::pattern::{Labelling, TrackSystem};

pub const ORIENTATION_CLASS_LIMIT: usize = 12;
pub const LABELLING_TRACK_LIMIT: usize = 8;
pub const LABELLING_VERTEX_LIMIT: usize = 8;

/// Tree vertices as sorted track sets `F`, with edges between sets that
/// differ in exactly one track.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrientationOracle {
    pub vertices: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
    pub side_choices: usize,
    pub consistent: usize,
}

/// Side masks per track, recomputed from the flip sets.
fn track_sides(system: &TrackSystem) -> Vec<u32> {
    let fam = system.family();
    (0..system.num_tracks())
        .map(|t| {
            let c = system.universe_index(t);
            (0..fam.len()).filter(|&v| fam.flips(v).contains(c)).map(|v| 1u32 << v).sum()
        })
        .collect()
}

/// Groups tracks by the vertex pairs they separate.
fn classes_by_separation(system: &TrackSystem, sides: &[u32]) -> Vec<Vec<usize>> {
    let n = system.num_vertices();
    let pairs = |t: usize| -> Vec<bool> {
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                out.push((sides[t] >> u & 1) != (sides[t] >> v & 1));
            }
        }
        out
    };
    let mut groups: BTreeMap<Vec<bool>, Vec<usize>> = BTreeMap::new();
    for t in 0..sides.len() {
        groups.entry(pairs(t)).or_default().push(t);
    }
    let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
    classes.sort();
    classes
}

pub fn oracle_orientations(system: &TrackSystem) -> Result<OrientationOracle, HarnessError> {
    let n = system.num_vertices();
    let all: u32 = (0..n).map(|v| 1u32 << v).sum();
    let sides = track_sides(system);
    let classes = classes_by_separation(system, &sides);
    let k = classes.len();
    if k > ORIENTATION_CLASS_LIMIT {
        return Err(HarnessError::TooLarge(format!("{k} classes exceed {ORIENTATION_CLASS_LIMIT}")));
    }
    let half = |class: usize, flipped: bool| {
        let s = sides[classes[class][0]];
        if flipped {
            s
        } else {
            all & !s
        }
    };
    let consistent = |choice: u32| {
        (0..k).all(|i| (i..k).all(|j| half(i, choice >> i & 1 == 1) & half(j, choice >> j & 1 == 1) != 0))
    };
    let chosen: Vec<u32> = (0..1u32 << k).filter(|&c| consistent(c)).collect();
    let flips_of = |choice: u32| -> BTreeSet<usize> {
        (0..k).filter(|&i| choice >> i & 1 == 1).flat_map(|i| classes[i].iter().copied()).collect()
    };
    let mut sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for &c in &chosen {
        sets.insert(flips_of(c).into_iter().collect());
        // Band cuts: prefixes of the class between this choice and its flip.
        for (i, class) in classes.iter().enumerate() {
            if c >> i & 1 == 0 && chosen.contains(&(c | 1 << i)) {
                let base = flips_of(c);
                for len in 1..class.len() {
                    let mut f = base.clone();
                    f.extend(class[..len].iter().copied());
                    sets.insert(f.into_iter().collect());
                }
            }
        }
    }
    let mut vertices: Vec<Vec<usize>> = sets.into_iter().collect();
    vertices.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let a: BTreeSet<usize> = vertices[i].iter().copied().collect();
            let b: BTreeSet<usize> = vertices[j].iter().copied().collect();
            if a.symmetric_difference(&b).count() == 1 {
                edges.push((i, j));
            }
        }
    }
    Ok(OrientationOracle { vertices, edges, side_choices: 1 << k, consistent: chosen.len() })
}

/// A point of the geometric pattern: the `index`-th crossing on edge
/// `[u,v]`, `u < v`, counted from `u`.
type Point = (usize, usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabellingOracle {
    /// Geometric tracks found by gluing corner arcs.
    pub tracks: usize,
    pub count: usize,
    /// Product of the factorials of the class sizes.
    pub expected: usize,
    pub canonical_valid: bool,
    /// Every valid labelling permutes labels within parallel classes only.
    pub within_class_only: bool,
    /// Tracks meeting some edge twice, which no labelling can accept.
    pub malformed_tracks: usize,
}

impl LabellingOracle {
    pub fn passed(&self) -> bool {
        self.count == self.expected && self.canonical_valid && self.within_class_only && self.malformed_tracks == 0
    }
}

/// Union-find over the crossing points, joined by corner arcs.
fn geometric_tracks(n: usize, d: &dyn Fn(usize, usize) -> usize) -> Vec<Vec<Point>> {
    let mut points: Vec<Point> = Vec::new();
    let mut id: BTreeMap<Point, usize> = BTreeMap::new();
    for u in 0..n {
        for v in u + 1..n {
            for i in 0..d(u, v) {
                id.insert((u, v, i), points.len());
                points.push((u, v, i));
            }
        }
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    // The i-th point from `x` on an edge at `x`.
    let from = |x: usize, y: usize, i: usize| -> Point {
        if x < y {
            (x, y, i)
        } else {
            (y, x, d(y, x) - 1 - i)
        }
    };
    for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                for (x, y, z) in [(u, v, w), (v, u, w), (w, u, v)] {
                    let twice = d(x, y) + d(x, z);
                    if twice < d(y, z) || !(twice - d(y, z)).is_multiple_of(2) {
                        continue;
                    }
                    for i in 0..(twice - d(y, z)) / 2 {
                        let (a, b) = (id[&from(x, y, i)], id[&from(x, z, i)]);
                        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                        parent[ra] = rb;
                    }
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
    for (i, &p) in points.iter().enumerate() {
        let r = find(&mut parent, i);
        comps.entry(r).or_default().push(p);
    }
    comps.into_values().collect()
}

/// Enumerates every assignment of distinct labels to geometric tracks that
/// puts exactly the labels of `u + v` on each edge `[u,v]`.
pub fn oracle_labelings(system: &TrackSystem, canonical: &Labelling) -> Result<LabellingOracle, HarnessError> {
    let n = system.num_vertices();
    let m = system.num_tracks();
    if m > LABELLING_TRACK_LIMIT || n > LABELLING_VERTEX_LIMIT {
        return Err(HarnessError::TooLarge(format!(
            "{m} tracks on {n} vertices exceed {LABELLING_TRACK_LIMIT} and {LABELLING_VERTEX_LIMIT}"
        )));
    }
    let sides = track_sides(system);
    let separates = |t: usize, u: usize, v: usize| (sides[t] >> u & 1) != (sides[t] >> v & 1);
    let d = |u: usize, v: usize| (0..m).filter(|&t| separates(t, u, v)).count();
    let tracks = geometric_tracks(n, &d);
    let edge_sets: Vec<BTreeSet<(usize, usize)>> =
        tracks.iter().map(|tr| tr.iter().map(|&(u, v, _)| (u, v)).collect()).collect();
    let malformed_tracks = tracks.iter().zip(&edge_sets).filter(|(t, e)| t.len() != e.len()).count();

    let mut count = 0;
    let mut valid: Vec<Vec<usize>> = Vec::new();
    let mut assignment = vec![usize::MAX; tracks.len()];
    let mut used = vec![false; m];
    if tracks.len() == m && malformed_tracks == 0 {
        enumerate(0, &edge_sets, &separates, n, &mut assignment, &mut used, &mut |a| {
            count += 1;
            valid.push(a.to_vec());
        });
    }

    // Canonical labelling read on the geometric points.
    let mut canonical_map = vec![None; tracks.len()];
    let mut canonical_consistent = true;
    for (i, tr) in tracks.iter().enumerate() {
        for &(u, v, idx) in tr {
            let label = canonical.edge(u, v).and_then(|e| e.labels.get(idx)).copied();
            match (canonical_map[i], label) {
                (_, None) => canonical_consistent = false,
                (None, Some(l)) => canonical_map[i] = Some(l),
                (Some(prev), Some(l)) if prev != l => canonical_consistent = false,
                _ => {}
            }
        }
    }
    let canonical_assignment: Option<Vec<usize>> =
        if canonical_consistent { canonical_map.into_iter().collect() } else { None };
    let canonical_valid = canonical_assignment.as_ref().is_some_and(|c| valid.contains(c));
    let within_class_only = match &canonical_assignment {
        Some(c) => valid.iter().all(|a| a.iter().zip(c).all(|(&x, &y)| system.class_of(x) == system.class_of(y))),
        None => false,
    };
    let expected = system.class_sizes().iter().map(|&s| (1..=s).product::<usize>()).product();
    Ok(LabellingOracle { tracks: tracks.len(), count, expected, canonical_valid, within_class_only, malformed_tracks })
}

fn enumerate(
    i: usize,
    edge_sets: &[BTreeSet<(usize, usize)>],
    separates: &dyn Fn(usize, usize, usize) -> bool,
    n: usize,
    assignment: &mut Vec<usize>,
    used: &mut Vec<bool>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if i == edge_sets.len() {
        // Every label sits on exactly the edges it separates.
        let ok = (0..n).all(|u| {
            (u + 1..n).all(|v| {
                assignment.iter().enumerate().all(|(t, &c)| edge_sets[t].contains(&(u, v)) == separates(c, u, v))
            })
        });
        if ok {
            visit(assignment);
        }
        return;
    }
    for c in 0..used.len() {
        if used[c] || !edge_sets[i].iter().all(|&(u, v)| separates(c, u, v)) {
            continue;
        }
        used[c] = true;
        assignment[i] = c;
        enumerate(i + 1, edge_sets, separates, n, assignment, used, visit);
        used[c] = false;
    }
    assignment[i] = usize::MAX;
}
