//! Stallings folding automata for finitely generated subgroups of free groups.

use std::collections::HashMap;

use super::{GroupElement, Letter};

/// The folded core graph of a subgroup of a free group.
///
/// State 0 is the base state. Edges are labelled by generators; reading an
/// inverse letter traverses an edge backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldedGraph {
    rank: usize,
    forward: Vec<Vec<Option<u32>>>,
    backward: Vec<Vec<Option<u32>>>,
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

impl FoldedGraph {
    /// Builds the bouquet of petals spelled by `generators` and folds it.
    pub fn from_generators(rank: usize, generators: &[GroupElement]) -> Self {
        let mut states: u32 = 1;
        let mut edges: Vec<(u32, usize, u32)> = Vec::new();
        for w in generators.iter().filter(|w| !w.is_identity()) {
            let mut current = 0u32;
            let n = w.len();
            for (i, &l) in w.letters().iter().enumerate() {
                let next = if i + 1 == n {
                    0
                } else {
                    states += 1;
                    states - 1
                };
                if l.is_inverse() {
                    edges.push((next, l.generator(), current));
                } else {
                    edges.push((current, l.generator(), next));
                }
                current = next;
            }
        }

        let mut parent: Vec<u32> = (0..states).collect();
        loop {
            let mut merged = false;
            let mut out: HashMap<(u32, usize), u32> = HashMap::new();
            let mut inc: HashMap<(u32, usize), u32> = HashMap::new();
            for &(s, g, t) in &edges {
                let (s, t) = (find(&mut parent, s), find(&mut parent, t));
                if let Some(&t2) = out.get(&(s, g)) {
                    let t2 = find(&mut parent, t2);
                    if t2 != t {
                        union(&mut parent, t, t2);
                        merged = true;
                        break;
                    }
                } else {
                    out.insert((s, g), t);
                }
                if let Some(&s2) = inc.get(&(t, g)) {
                    let s2 = find(&mut parent, s2);
                    if s2 != s {
                        union(&mut parent, s, s2);
                        merged = true;
                        break;
                    }
                } else {
                    inc.insert((t, g), s);
                }
            }
            if !merged {
                break;
            }
        }

        let mut folded: Vec<(u32, usize, u32)> =
            edges.iter().map(|&(s, g, t)| (find(&mut parent, s), g, find(&mut parent, t))).collect();
        folded.sort_unstable();
        folded.dedup();

        // Prune hanging vertices so that every state lies on a base loop.
        loop {
            let mut degree: HashMap<u32, usize> = HashMap::new();
            for &(s, _, t) in &folded {
                *degree.entry(s).or_default() += 1;
                *degree.entry(t).or_default() += 1;
            }
            let base = find(&mut parent, 0);
            let before = folded.len();
            folded.retain(|&(s, _, t)| {
                let leaf = |v: u32| v != base && degree[&v] == 1;
                !(leaf(s) || leaf(t))
            });
            if folded.len() == before {
                break;
            }
        }

        let base = find(&mut parent, 0);
        let mut renumber: HashMap<u32, u32> = HashMap::new();
        renumber.insert(base, 0);
        for &(s, _, t) in &folded {
            for v in [s, t] {
                let next = renumber.len() as u32;
                renumber.entry(v).or_insert(next);
            }
        }
        let n = renumber.len();
        let mut forward = vec![vec![None; rank]; n];
        let mut backward = vec![vec![None; rank]; n];
        for &(s, g, t) in &folded {
            let (s, t) = (renumber[&s], renumber[&t]);
            forward[s as usize][g] = Some(t);
            backward[t as usize][g] = Some(s);
        }
        FoldedGraph { rank, forward, backward }
    }

    pub fn num_states(&self) -> usize {
        self.forward.len()
    }

    pub fn num_edges(&self) -> usize {
        self.forward.iter().flatten().filter(|t| t.is_some()).count()
    }

    pub fn step(&self, state: u32, letter: Letter) -> Option<u32> {
        let table = if letter.is_inverse() { &self.backward } else { &self.forward };
        table[state as usize][letter.generator()]
    }

    /// Reads the longest readable prefix of `e` from the base state.
    /// Returns the state reached and the number of letters consumed.
    pub fn read(&self, e: &GroupElement) -> (u32, usize) {
        let mut state = 0;
        for (i, &l) in e.letters().iter().enumerate() {
            match self.step(state, l) {
                Some(next) => state = next,
                None => return (state, i),
            }
        }
        (state, e.len())
    }

    pub fn accepts(&self, e: &GroupElement) -> bool {
        self.read(e) == (0, e.len())
    }

    /// No state has two outgoing (or two incoming) edges with the same label.
    /// Holds by construction of the tables; checked against the edge list.
    pub fn is_folded(&self) -> bool {
        let mut seen_in = vec![vec![false; self.rank]; self.num_states()];
        for (s, row) in self.forward.iter().enumerate() {
            for (g, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    if seen_in[*t as usize][g] || self.backward[*t as usize][g] != Some(s as u32) {
                        return false;
                    }
                    seen_in[*t as usize][g] = true;
                }
            }
        }
        true
    }

    /// Connected, and every non-base state has degree at least two.
    pub fn is_core(&self) -> bool {
        let n = self.num_states();
        let mut seen = vec![false; n];
        let mut stack = vec![0u32];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for g in 0..self.rank {
                for t in [self.forward[s as usize][g], self.backward[s as usize][g]].into_iter().flatten() {
                    if !seen[t as usize] {
                        seen[t as usize] = true;
                        stack.push(t);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return false;
        }
        (1..n).all(|s| {
            let deg: usize = (0..self.rank)
                .map(|g| {
                    let f = self.forward[s][g];
                    let b = self.backward[s][g];
                    // A loop contributes to both tables and counts twice.
                    f.is_some() as usize + b.is_some() as usize
                })
                .sum();
            deg >= 2
        })
    }
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (a, b) = (find(parent, a), find(parent, b));
    if a != b {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        parent[hi as usize] = lo;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupModel;

    fn graph(m: &GroupModel, gens: &[&str]) -> FoldedGraph {
        let g: Vec<_> = gens.iter().map(|w| m.normalize(w).unwrap()).collect();
        FoldedGraph::from_generators(m.rank(), &g)
    }

    #[test]
    fn single_loop() {
        let f2 = GroupModel::free("ab").unwrap();
        let g = graph(&f2, &["a"]);
        assert_eq!(g.num_states(), 1);
        assert!(g.accepts(&f2.normalize("aaa").unwrap()));
        assert!(!g.accepts(&f2.normalize("baB").unwrap()));
    }

    #[test]
    fn folds_shared_prefixes() {
        let f2 = GroupModel::free("ab").unwrap();
        // <ab, aB>: both petals start with a and fold together.
        let g = graph(&f2, &["ab", "aB"]);
        assert_eq!(g.num_states(), 2);
        assert!(g.is_folded());
        assert!(g.is_core());
        assert!(g.accepts(&f2.normalize("abbA").unwrap()));
        assert!(!g.accepts(&f2.normalize("a").unwrap()));
    }

    #[test]
    fn conjugate_generator_keeps_base_stem() {
        let f2 = GroupModel::free("ab").unwrap();
        let g = graph(&f2, &["baB"]);
        assert_eq!(g.num_states(), 2);
        assert!(g.is_core());
        assert!(g.accepts(&f2.normalize("baaaB").unwrap()));
        assert!(!g.accepts(&f2.normalize("a").unwrap()));
    }

    #[test]
    fn redundant_generators_fold_away() {
        let f2 = GroupModel::free("ab").unwrap();
        let g = graph(&f2, &["a", "aa", "A", ""]);
        assert_eq!(g.num_states(), 1);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn trivial_subgroup() {
        let f2 = GroupModel::free("ab").unwrap();
        let g = graph(&f2, &[]);
        assert_eq!(g.num_states(), 1);
        assert!(g.accepts(&f2.identity()));
        assert!(!g.accepts(&f2.normalize("a").unwrap()));
    }
}
