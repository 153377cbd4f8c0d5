//! Tracks, their coset labels and the combinatorics of the pattern.
//!
//! No geometric pattern is materialized: a track is represented by its coset
//! label `c` and the indicator `f_c(v) = [c ∈ v]` on the vertex family.
//! Everything else (edge crossings `d(u,v)`, corner lines, bands, the order
//! of parallel classes along an edge) is read off these indicators.

mod metric;
mod order;
mod square;
mod tracks;

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use thiserror::Error;

use crate::window::{VertexFamily, Window};

pub use metric::{
    corner_analysis, corner_counts, edge_weights_from_corners, metric, parity_and_coloring, Corners, MetricTable,
};
pub use order::{assign_labels, class_order, ClassOrder, EdgeLabels, Labelling};
pub use square::{property_b, side_pairs, square_analysis, PropertyB, SquareAnalysis};
pub use tracks::{crossing_test, nestedness_check, parallel_classes, CrossingWitness, TrackSystem};

/// Default cap on the number of family vertices.
pub const DEFAULT_FAMILY_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("family has {0} vertices; the cap is {1}")]
    FamilyTooLarge(usize, usize),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("odd perimeter on triple ({0}, {1}, {2})")]
    ParityViolation(usize, usize, usize),
    #[error("negative corner count at {0} in triple ({0}, {1}, {2})")]
    NegativeCorner(usize, usize, usize),
    #[error("corner formula and corner set disagree in triple ({0}, {1}, {2})")]
    CornerMismatch(usize, usize, usize),
    #[error("square ({0}, {1}, {2}, {3}) is not nested: coset {4} lies on both sides of the short pair")]
    NonNestedSquare(usize, usize, usize, usize, String),
    #[error("classes of {0} and {1} are incomparable")]
    NotTotal(String, String),
    #[error("vertices must be distinct")]
    RepeatedVertex,
}

/// A coset label with its ShortLex position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetLabel {
    pub text: String,
    pub order_key: (usize, Vec<u8>),
    /// Key index in the originating window, if any.
    pub key: Option<usize>,
}

/// A finite family of sets over a labelled universe, stored relative to a
/// base vertex: vertex `v` is `A + F_v`.
#[derive(Debug, Clone)]
pub struct SetFamily {
    labels: Vec<CosetLabel>,
    base_members: FixedBitSet,
    flips: Vec<FixedBitSet>,
    names: Vec<String>,
    base: usize,
}

impl SetFamily {
    pub fn new(
        labels: Vec<CosetLabel>,
        base_members: FixedBitSet,
        flips: Vec<FixedBitSet>,
        names: Vec<String>,
        base: usize,
    ) -> Result<Self, PatternError> {
        let m = labels.len();
        if flips.is_empty() {
            return Err(PatternError::InvalidFamily("no vertices".into()));
        }
        if base >= flips.len() || names.len() != flips.len() {
            return Err(PatternError::InvalidFamily("base index or names out of range".into()));
        }
        if base_members.len() != m || flips.iter().any(|f| f.len() != m) {
            return Err(PatternError::InvalidFamily("set sizes disagree with the universe".into()));
        }
        if flips[base].count_ones(..) != 0 {
            return Err(PatternError::InvalidFamily("base vertex must have an empty flip set".into()));
        }
        if labels.windows(2).any(|w| w[0].order_key >= w[1].order_key) {
            return Err(PatternError::InvalidFamily("labels must be distinct and in ShortLex order".into()));
        }
        Ok(SetFamily { labels, base_members, flips, names, base })
    }

    /// Builds a family from explicit named sets. The first set is the base.
    pub fn explicit<S: AsRef<str>>(universe: &[S], vertices: &[Vec<S>]) -> Result<Self, PatternError> {
        let mut names: Vec<&str> = universe.iter().map(|s| s.as_ref()).collect();
        names.sort_by(|a, b| (a.len(), a.as_bytes()).cmp(&(b.len(), b.as_bytes())));
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(PatternError::InvalidFamily("duplicate universe element".into()));
        }
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let m = names.len();
        let mut sets = Vec::new();
        for v in vertices {
            let mut bits = FixedBitSet::with_capacity(m);
            for s in v {
                let i = *index
                    .get(s.as_ref())
                    .ok_or_else(|| PatternError::InvalidFamily(format!("unknown element '{}'", s.as_ref())))?;
                bits.insert(i);
            }
            sets.push(bits);
        }
        if sets.is_empty() {
            return Err(PatternError::InvalidFamily("no vertices".into()));
        }
        let base_members = sets[0].clone();
        let flips = sets.iter().map(|s| sym_diff(s, &base_members)).collect();
        let labels = names
            .iter()
            .map(|n| CosetLabel { text: n.to_string(), order_key: (n.len(), n.as_bytes().to_vec()), key: None })
            .collect();
        let vnames = vertices.iter().map(|v| format_set(v.iter().map(|s| s.as_ref()))).collect();
        Self::new(labels, base_members, flips, vnames, 0)
    }

    /// Restricts a certified translate family to the cosets that label tracks.
    pub fn from_vertex_family(window: &Window, family: &VertexFamily) -> Self {
        let keys = family.track_keys();
        let pos: BTreeMap<usize, usize> = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let m = keys.len();
        let labels = keys
            .iter()
            .map(|&k| CosetLabel {
                text: window.key_label(k),
                order_key: window.key_element(k).shortlex_key(),
                key: Some(k),
            })
            .collect();
        let mut base_members = FixedBitSet::with_capacity(m);
        for (i, &k) in keys.iter().enumerate() {
            base_members.set(i, family.base.contains(k));
        }
        let flips = family
            .vertices
            .iter()
            .map(|v| {
                let mut f = FixedBitSet::with_capacity(m);
                for k in &v.flips {
                    f.insert(pos[k]);
                }
                f
            })
            .collect();
        let model = window.model();
        let names = family
            .vertices
            .iter()
            .map(|v| {
                let w = model.format_word(&v.element);
                if w.is_empty() {
                    "A".to_string()
                } else {
                    format!("A·{w}")
                }
            })
            .collect();
        Self::new(labels, base_members, flips, names, family.base_index).expect("certified family is well formed")
    }

    pub fn len(&self) -> usize {
        self.flips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[CosetLabel] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn universe_len(&self) -> usize {
        self.labels.len()
    }

    pub fn base_members(&self) -> &FixedBitSet {
        &self.base_members
    }

    pub fn flips(&self, v: usize) -> &FixedBitSet {
        &self.flips[v]
    }

    /// The vertex as an absolute subset of the universe.
    pub fn vertex_set(&self, v: usize) -> FixedBitSet {
        sym_diff(&self.base_members, &self.flips[v])
    }

    pub fn diff(&self, u: usize, v: usize) -> FixedBitSet {
        sym_diff(&self.flips[u], &self.flips[v])
    }
}

pub(crate) fn sym_diff(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.symmetric_difference_with(b);
    out
}

pub(crate) fn format_set<'a>(items: impl Iterator<Item = &'a str>) -> String {
    let v: Vec<&str> = items.collect();
    format!("{{{}}}", v.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_family_sorts_universe() {
        let fam = SetFamily::explicit(&["bb", "a", "b"], &[vec![], vec!["bb", "a"]]).unwrap();
        let texts: Vec<&str> = fam.labels().iter().map(|l| l.text.as_str()).collect();
        assert_eq!(texts, vec!["a", "b", "bb"]);
        assert_eq!(fam.diff(0, 1).ones().collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn explicit_family_errors() {
        assert!(SetFamily::explicit(&["a", "a"], &[vec![]]).is_err());
        assert!(SetFamily::explicit(&["a"], &[vec!["z"]]).is_err());
        assert!(SetFamily::explicit::<&str>(&["a"], &[]).is_err());
    }

    #[test]
    fn base_relative_storage() {
        let fam = SetFamily::explicit(&["a", "b", "c"], &[vec!["a"], vec!["b"], vec!["c"]]).unwrap();
        assert_eq!(fam.flips(1).ones().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(fam.vertex_set(2).ones().collect::<Vec<_>>(), vec![2]);
    }
}
