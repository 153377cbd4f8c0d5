use std::collections::BTreeMap;

use serde::Serialize;

use super::{MetricTable, PatternError, TrackSystem};

/// Result of analysing the square with corners `u, v, z, w` (in cyclic
/// order), long sides `uv`, `wz` and short sides `uw`, `vz` after
/// orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareAnalysis {
    /// `(u, v, w, z)` after the optional transposition of `v` and `w`.
    pub oriented: [usize; 4],
    pub transposed: bool,
    /// `d(u,v) + d(w,z) > d(u,w) + d(v,z)` after orientation.
    pub strict: bool,
    /// Lines crossing from side `uv` to side `wz`: `|V − U|`.
    pub crossing_lines: usize,
    /// Both triangulations give the same side-to-side line counts.
    pub diagonal_independent: bool,
}

/// A side of a square, as a sorted vertex pair.
pub type Side = (usize, usize);

/// Side-to-side line counts of the square `(u, v, w, z)` triangulated along
/// `diagonal`: either `(v, w)` or `(u, z)`. Sides are the four unordered
/// vertex pairs `uv, vz, zw, wu`; keys are sorted pairs of sides.
pub fn side_pairs(system: &TrackSystem, square: [usize; 4], diagonal: (usize, usize)) -> BTreeMap<(Side, Side), usize> {
    let [u, v, w, z] = square;
    let triangles = if diagonal == (v, w) { [[u, v, w], [v, z, w]] } else { [[u, v, z], [u, z, w]] };
    let norm = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    let diag = norm(diagonal.0, diagonal.1);
    let mut counts = BTreeMap::new();
    for t in 0..system.num_tracks() {
        // One arc per triangle the track meets, joining the two edges it crosses.
        let mut arcs: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for tri in triangles {
            let edges: Vec<(usize, usize)> = [(tri[0], tri[1]), (tri[1], tri[2]), (tri[0], tri[2])]
                .into_iter()
                .filter(|&(a, b)| system.separates(t, a, b))
                .map(|(a, b)| norm(a, b))
                .collect();
            match edges.len() {
                0 => {}
                2 => arcs.push((edges[0], edges[1])),
                _ => unreachable!("a cut meets a triangle in zero or two edges"),
            }
        }
        let other = |arc: ((usize, usize), (usize, usize))| if arc.0 == diag { arc.1 } else { arc.0 };
        let touches = |arc: &((usize, usize), (usize, usize))| arc.0 == diag || arc.1 == diag;
        let mut pieces = Vec::new();
        if arcs.len() == 2 && touches(&arcs[0]) && touches(&arcs[1]) {
            pieces.push((other(arcs[0]), other(arcs[1])));
        } else {
            pieces.extend(arcs);
        }
        for (a, b) in pieces {
            let key = if a < b { (a, b) } else { (b, a) };
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Analyses four distinct vertices as a square with opposite side pairs
/// `{uv, wz}` and `{uw, vz}`.
///
/// When one pair has the strictly larger sum, the square is oriented so
/// that it is `{uv, wz}`; then `(u+w) ∩ (v+z)` must be empty, and the lines
/// running from `uv` to `wz` are the cosets of `V − U` with
/// `U = (u+w) ∪ (v+z)` and `V = (u+v) ∪ (w+z)`. Equal sums give no crossing
/// lines and no check.
pub fn square_analysis(
    system: &TrackSystem,
    table: &MetricTable,
    u: usize,
    v: usize,
    w: usize,
    z: usize,
) -> Result<SquareAnalysis, PatternError> {
    let mut ids = [u, v, w, z];
    ids.sort_unstable();
    if ids.windows(2).any(|p| p[0] == p[1]) {
        return Err(PatternError::RepeatedVertex);
    }
    let long = table.d(u, v) + table.d(w, z);
    let short = table.d(u, w) + table.d(v, z);
    if long == short {
        return Ok(SquareAnalysis {
            oriented: [u, v, w, z],
            transposed: false,
            strict: false,
            crossing_lines: 0,
            diagonal_independent: true,
        });
    }
    let transposed = short > long;
    let [u, v, w, z] = if transposed { [u, w, v, z] } else { [u, v, w, z] };

    let mut both = table.diff(u, w).clone();
    both.intersect_with(table.diff(v, z));
    if let Some(t) = both.ones().next() {
        return Err(PatternError::NonNestedSquare(u, v, w, z, system.text(t).to_string()));
    }
    let mut big_u = table.diff(u, w).clone();
    big_u.union_with(table.diff(v, z));
    let mut big_v = table.diff(u, v).clone();
    big_v.union_with(table.diff(w, z));
    if !big_u.is_subset(&big_v) {
        return Err(PatternError::NonNestedSquare(u, v, w, z, "U is not contained in V".into()));
    }
    let mut rest = big_v.clone();
    rest.difference_with(&big_u);
    let crossing_lines = rest.count_ones(..);
    if 2 * crossing_lines != table.d(u, v) + table.d(w, z) - table.d(u, w) - table.d(v, z) {
        return Err(PatternError::NonNestedSquare(u, v, w, z, "crossing count disagrees with the sums".into()));
    }
    let diagonal_independent = side_pairs(system, [u, v, w, z], (v, w)) == side_pairs(system, [u, v, w, z], (u, z));
    Ok(SquareAnalysis { oriented: [u, v, w, z], transposed, strict: true, crossing_lines, diagonal_independent })
}

/// Property (b) for two disjoint edges `[u,v]`, `[w,z]` sharing labels `J`:
/// one orientation of the square is strict and exactly `|J|` distinct
/// tracks run between the two edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyB {
    pub edges: ((usize, usize), (usize, usize)),
    pub shared: usize,
    pub crossing_lines: usize,
    pub holds: bool,
}

pub fn property_b(
    system: &TrackSystem,
    table: &MetricTable,
    (u, v): (usize, usize),
    (w, z): (usize, usize),
) -> Result<Option<PropertyB>, PatternError> {
    let mut j = table.diff(u, v).clone();
    j.intersect_with(table.diff(w, z));
    let shared = j.count_ones(..);
    if shared == 0 {
        return Ok(None);
    }
    let mut best = None;
    for (a, b) in [(w, z), (z, w)] {
        let s = square_analysis(system, table, u, v, a, b)?;
        if s.strict && !s.transposed {
            best = Some(s.crossing_lines);
        }
    }
    let crossing_lines = best.unwrap_or(0);
    Ok(Some(PropertyB { edges: ((u, v), (w, z)), shared, crossing_lines, holds: crossing_lines == shared }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{metric, SetFamily};

    fn system(universe: &[&str], sets: &[&[&str]]) -> TrackSystem {
        let sets: Vec<Vec<&str>> = sets.iter().map(|s| s.to_vec()).collect();
        TrackSystem::new(SetFamily::explicit(universe, &sets).unwrap()).unwrap()
    }

    #[test]
    fn three_element_square() {
        let s = system(&["1", "2", "3"], &[&[], &["1", "2"], &["1"], &["1", "2", "3"]]);
        let t = metric(&s);
        let a = square_analysis(&s, &t, 0, 1, 2, 3).unwrap();
        assert!(a.strict);
        assert!(!a.transposed);
        assert_eq!(a.crossing_lines, 1);
        assert!(a.diagonal_independent);
    }

    #[test]
    fn equal_sums_declare_no_crossing() {
        let s = system(&["1", "2", "3"], &[&[], &["1"], &["1", "2"], &["1", "2", "3"]]);
        let t = metric(&s);
        // sides (0,1)+(2,3) = 2 versus (0,2)+(1,3) = 4: transposed orientation.
        let a = square_analysis(&s, &t, 0, 1, 2, 3).unwrap();
        assert!(a.transposed);
        assert_eq!(a.oriented, [0, 2, 1, 3]);
        assert_eq!(a.crossing_lines, 1);
        // (0,2)+(3,1) = 4 = (0,3)+(2,1): a tie.
        let b = square_analysis(&s, &t, 0, 2, 3, 1).unwrap();
        assert!(!b.strict);
        assert_eq!(b.crossing_lines, 0);
    }

    #[test]
    fn crossing_square_is_rejected() {
        let s = system(&["a", "b"], &[&[], &["a"], &["b"], &["a", "b"]]);
        let t = metric(&s);
        // u=∅, v={a}, w={a,b}, z={b}: long sides uv+wz = 2, short uw+vz = 4.
        let err = square_analysis(&s, &t, 0, 1, 3, 2).unwrap_err();
        assert!(matches!(err, PatternError::NonNestedSquare(..)));
    }

    #[test]
    fn side_pairs_cover_the_perimeter() {
        let s = system(&["1", "2", "3"], &[&[], &["1"], &["1", "2"], &["1", "2", "3"]]);
        let t = metric(&s);
        let sq = [0, 2, 1, 3];
        let a = side_pairs(&s, sq, (2, 1));
        assert_eq!(a, side_pairs(&s, sq, (0, 3)));
        let perimeter = t.d(0, 2) + t.d(2, 3) + t.d(3, 1) + t.d(1, 0);
        assert_eq!(2 * a.values().sum::<usize>(), perimeter);
    }

    #[test]
    fn property_b_on_a_path() {
        let s = system(&["1", "2", "3"], &[&[], &["1"], &["1", "2"], &["1", "2", "3"]]);
        let t = metric(&s);
        let b = property_b(&s, &t, (0, 2), (1, 3)).unwrap().unwrap();
        assert_eq!(b.shared, 1);
        assert!(b.holds);
        assert!(property_b(&s, &t, (0, 1), (2, 3)).unwrap().is_none());
    }
}
