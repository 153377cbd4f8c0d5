use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use super::{CosetLabel, PatternError, SetFamily, DEFAULT_FAMILY_CAP};

/// Coset-labelled tracks of a set family.
///
/// Track `t` is the `t`-th coset (in ShortLex order) lying in some
/// `u + v`. Vertex masks have bit `v` set for family vertex `v`.
#[derive(Debug, Clone)]
pub struct TrackSystem {
    family: SetFamily,
    tracks: Vec<usize>,
    indicators: Vec<u32>,
    sides: Vec<u32>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl TrackSystem {
    pub fn new(family: SetFamily) -> Result<Self, PatternError> {
        Self::with_cap(family, DEFAULT_FAMILY_CAP)
    }

    pub fn with_cap(family: SetFamily, cap: usize) -> Result<Self, PatternError> {
        let n = family.len();
        if n > cap.min(32) {
            return Err(PatternError::FamilyTooLarge(n, cap.min(32)));
        }
        let m = family.universe_len();
        let mut tracks = Vec::new();
        let mut indicators = Vec::new();
        let mut sides = Vec::new();
        for c in 0..m {
            let side: u32 = (0..n).filter(|&v| family.flips(v).contains(c)).map(|v| 1u32 << v).sum();
            // Cosets constant on the family label no track.
            if side == 0 {
                continue;
            }
            let indicator = if family.base_members().contains(c) { !side & mask(n) } else { side };
            tracks.push(c);
            indicators.push(indicator);
            sides.push(side);
        }
        let classes = parallel_classes(&sides);
        let mut class_of = vec![0; tracks.len()];
        for (i, class) in classes.iter().enumerate() {
            for &t in class {
                class_of[t] = i;
            }
        }
        Ok(TrackSystem { family, tracks, indicators, sides, classes, class_of })
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn num_vertices(&self) -> usize {
        self.family.len()
    }

    pub fn num_tracks(&self) -> usize {
        self.tracks.len()
    }

    pub fn all_vertices(&self) -> u32 {
        mask(self.num_vertices())
    }

    /// Universe index of track `t`.
    pub fn universe_index(&self, t: usize) -> usize {
        self.tracks[t]
    }

    pub fn label(&self, t: usize) -> &CosetLabel {
        &self.family.labels()[self.tracks[t]]
    }

    pub fn text(&self, t: usize) -> &str {
        &self.label(t).text
    }

    /// `f_c(v) = [c ∈ v]` as a vertex mask.
    pub fn indicator(&self, t: usize) -> u32 {
        self.indicators[t]
    }

    /// Vertices on the far side of track `t` from the base vertex.
    pub fn side(&self, t: usize) -> u32 {
        self.sides[t]
    }

    pub fn separates(&self, t: usize, u: usize, v: usize) -> bool {
        (self.sides[t] >> u & 1) != (self.sides[t] >> v & 1)
    }

    /// `u + v` as a set of track indices.
    pub fn diff(&self, u: usize, v: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.num_tracks());
        for t in 0..self.num_tracks() {
            if self.separates(t, u, v) {
                out.insert(t);
            }
        }
        out
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, t: usize) -> usize {
        self.class_of[t]
    }

    /// Side mask shared by every track of a class.
    pub fn class_side(&self, class: usize) -> u32 {
        self.sides[self.classes[class][0]]
    }

    pub fn class_text(&self, class: usize) -> String {
        format!("[{}]", self.text(self.classes[class][0]))
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }
}

pub(crate) fn mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Groups tracks whose indicators agree or are complementary on the family.
///
/// With indicators normalized to the base vertex this is equality of side
/// masks. Classes come out ordered by their least member.
pub fn parallel_classes(sides: &[u32]) -> Vec<Vec<usize>> {
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (t, &s) in sides.iter().enumerate() {
        groups.entry(s).or_default().push(t);
    }
    let mut classes: Vec<Vec<usize>> = groups.into_values().collect();
    classes.sort_by_key(|c| c[0]);
    classes
}

/// Four family vertices, one in each quadrant of a crossing pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossingWitness {
    pub cosets: (String, String),
    pub tracks: (usize, usize),
    /// Vertices with (c1 ∈ v, c2 ∈ v) = (1,1), (1,0), (0,1), (0,0).
    pub vertices: [usize; 4],
}

/// True iff all four quadrants `{v : f_c1(v) = s1, f_c2(v) = s2}` are inhabited.
pub fn crossing_test(system: &TrackSystem, t1: usize, t2: usize) -> bool {
    quadrants(system, t1, t2).is_some()
}

fn quadrants(system: &TrackSystem, t1: usize, t2: usize) -> Option<[usize; 4]> {
    let all = system.all_vertices();
    let (a, b) = (system.indicator(t1), system.indicator(t2));
    let q = [a & b, a & !b & all, !a & b & all, !a & !b & all];
    if q.iter().all(|&m| m != 0) {
        Some(q.map(|m| m.trailing_zeros() as usize))
    } else {
        None
    }
}

/// Scans track pairs in index order and reports the first crossing.
pub fn nestedness_check(system: &TrackSystem) -> Result<(), CrossingWitness> {
    for t1 in 0..system.num_tracks() {
        for t2 in t1 + 1..system.num_tracks() {
            if let Some(vertices) = quadrants(system, t1, t2) {
                return Err(CrossingWitness {
                    cosets: (system.text(t1).to_string(), system.text(t2).to_string()),
                    tracks: (t1, t2),
                    vertices,
                });
            }
        }
    }
    Ok(())
}
