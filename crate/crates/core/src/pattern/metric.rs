use fixedbitset::FixedBitSet;

use super::{PatternError, TrackSystem};

/// `d(u,v) = |u + v|` with the difference sets themselves.
///
/// Two patterns are equivalent exactly when their tables are equal, since
/// the number of crossings of each edge is `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTable {
    n: usize,
    d: Vec<usize>,
    diffs: Vec<FixedBitSet>,
}

impl MetricTable {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn d(&self, u: usize, v: usize) -> usize {
        self.d[u * self.n + v]
    }

    pub fn diff(&self, u: usize, v: usize) -> &FixedBitSet {
        &self.diffs[u * self.n + v]
    }

    /// First triple violating `d(u,v) <= d(u,w) + d(w,v)`, if any.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    if self.d(u, v) > self.d(u, w) + self.d(w, v) {
                        return Some((u, v, w));
                    }
                }
            }
        }
        None
    }
}

pub fn metric(system: &TrackSystem) -> MetricTable {
    let n = system.num_vertices();
    let mut d = vec![0; n * n];
    let mut diffs = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            let s = system.diff(u, v);
            d[u * n + v] = s.count_ones(..);
            diffs.push(s);
        }
    }
    MetricTable { n, d, diffs }
}

/// Checks every triple for even perimeter and returns the two-colouring
/// `colour(v) = d(base, v) mod 2`.
pub fn parity_and_coloring(table: &MetricTable, base: usize) -> Result<Vec<u8>, PatternError> {
    let n = table.len();
    for u in 0..n {
        for v in u + 1..n {
            for w in v + 1..n {
                if !(table.d(u, v) + table.d(v, w) + table.d(w, u)).is_multiple_of(2) {
                    return Err(PatternError::ParityViolation(u, v, w));
                }
            }
        }
    }
    let colour: Vec<u8> = (0..n).map(|v| (table.d(base, v) % 2) as u8).collect();
    for u in 0..n {
        for v in u + 1..n {
            let same = colour[u] == colour[v];
            if same != table.d(u, v).is_multiple_of(2) {
                return Err(PatternError::ParityViolation(base, u, v));
            }
        }
    }
    Ok(colour)
}

/// Lines across the corners of a triangle with the given edge weights.
/// Returns counts at the corners opposite `d_vw`, `d_uw`, `d_uv` respectively.
pub fn corner_counts(d_uv: usize, d_uw: usize, d_vw: usize) -> Option<[usize; 3]> {
    let (a, b, c) = (d_uv as i64, d_uw as i64, d_vw as i64);
    let twice = [a + b - c, a + c - b, b + c - a];
    if twice.iter().any(|&x| x < 0 || x % 2 != 0) {
        return None;
    }
    Some(twice.map(|x| (x / 2) as usize))
}

/// Inverse of [`corner_counts`]: `(d_uv, d_uw, d_vw)` from corner counts.
pub fn edge_weights_from_corners(at_u: usize, at_v: usize, at_w: usize) -> (usize, usize, usize) {
    (at_u + at_v, at_u + at_w, at_v + at_w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corners {
    pub vertices: [usize; 3],
    pub counts: [usize; 3],
    pub sets: [FixedBitSet; 3],
}

/// Corner lines of the triangle `(u, v, w)`.
///
/// The count at `u` is `(d(u,v) + d(u,w) - d(v,w)) / 2` and must equal the
/// size of `(u+v) ∩ (u+w)`. Each edge's label set must split into the two
/// corner sets at its ends.
pub fn corner_analysis(table: &MetricTable, u: usize, v: usize, w: usize) -> Result<Corners, PatternError> {
    if u == v || v == w || u == w {
        return Err(PatternError::RepeatedVertex);
    }
    let twice = |x: usize, y: usize, z: usize| table.d(x, y) as i64 + table.d(x, z) as i64 - table.d(y, z) as i64;
    let mut counts = [0usize; 3];
    for (i, (x, y, z)) in [(u, v, w), (v, u, w), (w, u, v)].into_iter().enumerate() {
        let t = twice(x, y, z);
        if t < 0 {
            return Err(PatternError::NegativeCorner(x, y, z));
        }
        if t % 2 != 0 {
            return Err(PatternError::ParityViolation(u, v, w));
        }
        counts[i] = (t / 2) as usize;
    }
    let meet = |x: usize, y: usize, z: usize| {
        let mut s = table.diff(x, y).clone();
        s.intersect_with(table.diff(x, z));
        s
    };
    let sets = [meet(u, v, w), meet(v, u, w), meet(w, u, v)];
    if (0..3).any(|i| sets[i].count_ones(..) != counts[i]) {
        return Err(PatternError::CornerMismatch(u, v, w));
    }
    // u+v = corner(u) ⊔ corner(v), and likewise for the other two edges.
    for (edge, (a, b)) in [((u, v), (0, 1)), ((u, w), (0, 2)), ((v, w), (1, 2))] {
        if !sets[a].is_disjoint(&sets[b]) {
            return Err(PatternError::CornerMismatch(u, v, w));
        }
        let mut union = sets[a].clone();
        union.union_with(&sets[b]);
        if &union != table.diff(edge.0, edge.1) {
            return Err(PatternError::CornerMismatch(u, v, w));
        }
    }
    Ok(Corners { vertices: [u, v, w], counts, sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::SetFamily;

    fn table(universe: &[&str], sets: &[&[&str]]) -> MetricTable {
        let sets: Vec<Vec<&str>> = sets.iter().map(|s| s.to_vec()).collect();
        metric(&TrackSystem::new(SetFamily::explicit(universe, &sets).unwrap()).unwrap())
    }

    #[test]
    fn metric_examples() {
        let t = table(&["1", "2", "3"], &[&["1", "2"], &["2", "3"]]);
        assert_eq!(t.d(0, 0), 0);
        assert_eq!(t.d(0, 1), 2);
        assert_eq!(t.diff(0, 1).count_ones(..), 2);
        assert!(t.triangle_violation().is_none());
    }

    #[test]
    fn corners_three_two_two() {
        // Seven corner lines: three at u, two at v, two at w.
        let (uv, uw, vw) = edge_weights_from_corners(3, 2, 2);
        assert_eq!((uv, uw, vw), (5, 5, 4));
        assert_eq!((uv + uw + vw) % 2, 0);
        assert_eq!(corner_counts(5, 5, 4), Some([3, 2, 2]));
        assert_eq!(corner_counts(1, 1, 2), Some([0, 1, 1]));
        assert_eq!(corner_counts(1, 1, 1), None);
        assert_eq!(corner_counts(1, 5, 1), None);
    }

    #[test]
    fn realized_three_two_two() {
        // A family realizing the corner counts (3,2,2).
        let u: &[&str] = &[];
        let v: &[&str] = &["p", "q", "r", "x", "y"];
        let w: &[&str] = &["p", "q", "r", "z1", "z2"];
        let t = table(&["p", "q", "r", "x", "y", "z1", "z2"], &[u, v, w]);
        let c = corner_analysis(&t, 0, 1, 2).unwrap();
        assert_eq!(c.counts, [3, 2, 2]);
        assert_eq!((t.d(0, 1), t.d(0, 2), t.d(1, 2)), (5, 5, 4));
    }

    #[test]
    fn degenerate_corner() {
        let t = table(&["a", "b"], &[&["a"], &[], &["b"]]);
        // At the empty set the weights are (1,1,2), so its corner is empty.
        let c = corner_analysis(&t, 1, 0, 2).unwrap();
        assert_eq!(c.counts, [0, 1, 1]);
        let c = corner_analysis(&t, 0, 1, 2).unwrap();
        assert_eq!(c.counts, [1, 0, 1]);
    }

    #[test]
    fn colouring() {
        let t = table(&["a", "b", "c"], &[&[], &["a"], &["a", "b"], &["a", "b", "c"]]);
        assert_eq!(parity_and_coloring(&t, 0).unwrap(), vec![0, 1, 0, 1]);
        assert_eq!(parity_and_coloring(&t, 1).unwrap(), vec![1, 0, 1, 0]);
        let single = table(&["a"], &[&["a"]]);
        assert_eq!(parity_and_coloring(&single, 0).unwrap(), vec![0]);
    }

    #[test]
    fn repeated_vertices_rejected() {
        let t = table(&["a"], &[&[], &["a"]]);
        assert_eq!(corner_analysis(&t, 0, 0, 1), Err(PatternError::RepeatedVertex));
    }
}
