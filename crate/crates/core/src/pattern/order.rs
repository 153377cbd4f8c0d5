use serde::Serialize;

use super::{PatternError, TrackSystem};

/// Parallel classes crossing the directed edge `[u,v]`, listed from `u` to `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassOrder {
    pub u: usize,
    pub v: usize,
    pub classes: Vec<usize>,
}

/// Vertices other than `u, v` that `class` separates from `u`, as a mask.
fn separated_from(system: &TrackSystem, class: usize, u: usize, v: usize) -> u32 {
    let side = system.class_side(class);
    let own = if side >> u & 1 == 1 { side } else { !side & system.all_vertices() };
    !own & system.all_vertices() & !(1 << u) & !(1 << v)
}

/// Orders the classes crossing `[u,v]`: `x` precedes `y` when every vertex
/// that `y` separates from `u` is also separated from `u` by `x`.
pub fn class_order(system: &TrackSystem, u: usize, v: usize) -> Result<ClassOrder, PatternError> {
    if u == v {
        return Ok(ClassOrder { u, v, classes: Vec::new() });
    }
    let crossing: Vec<usize> =
        (0..system.classes().len()).filter(|&k| system.separates(system.classes()[k][0], u, v)).collect();
    let sets: Vec<(usize, u32)> = crossing.iter().map(|&k| (k, separated_from(system, k, u, v))).collect();
    for (i, &(x, sx)) in sets.iter().enumerate() {
        for &(y, sy) in &sets[i + 1..] {
            if sx & sy != sx && sx & sy != sy {
                return Err(PatternError::NotTotal(system.class_text(x), system.class_text(y)));
            }
        }
    }
    let mut sorted = sets;
    // Larger separated sets come first; the chain makes popcount a total key.
    sorted.sort_by_key(|&(k, s)| (std::cmp::Reverse(s.count_ones()), k));
    Ok(ClassOrder { u, v, classes: sorted.into_iter().map(|(k, _)| k).collect() })
}

/// Track labels of the points on edge `[u,v]`, listed from `u` to `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeLabels {
    pub u: usize,
    pub v: usize,
    pub labels: Vec<usize>,
}

/// Canonical labelling of every edge `[u,v]` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labelling {
    pub edges: Vec<EdgeLabels>,
}

impl Labelling {
    pub fn edge(&self, u: usize, v: usize) -> Option<&EdgeLabels> {
        self.edges.iter().find(|e| e.u == u && e.v == v)
    }

    pub fn texts(&self, system: &TrackSystem, u: usize, v: usize) -> Vec<String> {
        self.edge(u, v).map(|e| e.labels.iter().map(|&t| system.text(t).to_string()).collect()).unwrap_or_default()
    }
}

/// Labels each edge class by class along its order.
///
/// Within a class, cosets run in ascending ShortLex order from the side of
/// the base vertex, so the order read from `u` is descending when `u` lies
/// across the class from the base.
pub fn assign_labels(system: &TrackSystem) -> Result<Labelling, PatternError> {
    let n = system.num_vertices();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let order = class_order(system, u, v)?;
            let mut labels = Vec::new();
            for &k in &order.classes {
                let members = &system.classes()[k];
                if system.class_side(k) >> u & 1 == 0 {
                    labels.extend(members.iter().copied());
                } else {
                    labels.extend(members.iter().rev().copied());
                }
            }
            debug_assert_eq!(labels.len(), system.diff(u, v).count_ones(..));
            edges.push(EdgeLabels { u, v, labels });
        }
    }
    Ok(Labelling { edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SetFamily;

    fn system(universe: &[&str], sets: &[&[&str]]) -> TrackSystem {
        let sets: Vec<Vec<&str>> = sets.iter().map(|s| s.to_vec()).collect();
        TrackSystem::new(SetFamily::explicit(universe, &sets).unwrap()).unwrap()
    }

    #[test]
    fn path_order_and_reversal() {
        let s = system(&["a", "b", "c"], &[&[], &["a"], &["a", "b"], &["a", "b", "c"]]);
        let fwd = class_order(&s, 0, 3).unwrap();
        assert_eq!(fwd.classes, vec![0, 1, 2]);
        let mut back = class_order(&s, 3, 0).unwrap().classes;
        back.reverse();
        assert_eq!(back, fwd.classes);
        assert!(class_order(&s, 1, 1).unwrap().classes.is_empty());
    }

    #[test]
    fn crossing_classes_are_not_totally_ordered() {
        let s = system(&["a", "b"], &[&[], &["a"], &["b"], &["a", "b"]]);
        assert!(matches!(class_order(&s, 0, 3), Err(PatternError::NotTotal(..))));
    }

    #[test]
    fn within_class_direction() {
        // Class {a,b} then class {c}; read from the far end the class reverses.
        let s = system(&["a", "b", "c"], &[&[], &["a", "b"], &["a", "b", "c"]]);
        let l = assign_labels(&s).unwrap();
        assert_eq!(l.texts(&s, 0, 2), vec!["a", "b", "c"]);
        assert_eq!(l.texts(&s, 1, 2), vec!["c"]);
        for e in &l.edges {
            assert_eq!(e.labels.len(), s.diff(e.u, e.v).count_ones(..));
        }
        // Read from across the class, the order on [1,2] descends.
        let s = system(&["a", "b", "c"], &[&[], &["a", "b", "c"], &["c"]]);
        let l = assign_labels(&s).unwrap();
        assert_eq!(l.texts(&s, 0, 1), vec!["c", "a", "b"]);
        assert_eq!(l.texts(&s, 1, 2), vec!["b", "a"]);
    }
}
