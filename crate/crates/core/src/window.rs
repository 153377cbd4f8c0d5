//! Finite, certified models of the vertex set `AG`.
//!
//! A [`Window`] truncates `H\G` to the right cosets meeting a ball of the
//! Cayley graph. Base sets are unions of cosets, so they are stored as
//! subsets of the window's coset universe. Translates `A·g` are computed by
//! the partial right action on cosets, and every symmetric difference that
//! leaves the window interior is refused rather than truncated.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{CosetInvariant, GroupElement, GroupError, GroupModel, Subgroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("conflicting base-set rule: {0}")]
    ConflictingRule(String),
    #[error("word '{0}' names a coset outside the window")]
    UnknownKey(String),
    #[error("translations must contain the identity")]
    MissingIdentity,
    #[error("certification failed for translates by '{0}' and '{1}': {2}")]
    CertificationFailure(String, String, String),
    #[error("witness for '{0}' is not certified: {1}")]
    UncertifiedWitness(String, String),
}

#[derive(Debug, Clone)]
pub struct Window {
    model: GroupModel,
    subgroup: Subgroup,
    radius: usize,
    margin: usize,
    elements: Vec<GroupElement>,
    element_keys: Vec<usize>,
    keys: Vec<usize>,
    by_invariant: HashMap<CosetInvariant, usize>,
}

/// Builds the window of radius `radius` with boundary shell of width `margin`.
pub fn build_window(
    model: &GroupModel,
    subgroup: &Subgroup,
    radius: usize,
    margin: usize,
) -> Result<Window, WindowError> {
    if margin == 0 {
        return Err(WindowError::InvalidWindow("margin must be at least 1".into()));
    }
    if radius < 2 * margin {
        return Err(WindowError::InvalidWindow(format!("radius {radius} must be at least twice the margin {margin}")));
    }
    if subgroup.model() != model {
        return Err(GroupError::ModelMismatch.into());
    }
    let elements = model.ball(radius)?;
    let mut by_invariant = HashMap::new();
    let mut keys = Vec::new();
    let mut element_keys = Vec::with_capacity(elements.len());
    // The ball is in ShortLex order, so the first element seen in a coset is its key.
    for (i, e) in elements.iter().enumerate() {
        let inv = subgroup.invariant(e);
        let k = *by_invariant.entry(inv).or_insert_with(|| {
            keys.push(i);
            keys.len() - 1
        });
        element_keys.push(k);
    }
    Ok(Window {
        model: model.clone(),
        subgroup: subgroup.clone(),
        radius,
        margin,
        elements,
        element_keys,
        keys,
        by_invariant,
    })
}

impl Window {
    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Coset key index of the `i`-th ball element.
    pub fn element_key(&self, i: usize) -> usize {
        self.element_keys[i]
    }

    /// Size of the coset universe Ω.
    pub fn omega_len(&self) -> usize {
        self.keys.len()
    }

    /// ShortLex-least representative of key `k`.
    pub fn key_element(&self, k: usize) -> &GroupElement {
        &self.elements[self.keys[k]]
    }

    pub fn key_word(&self, k: usize) -> String {
        self.model.format_word(self.key_element(k))
    }

    pub fn key_label(&self, k: usize) -> String {
        self.model.label_text(self.key_element(k))
    }

    /// Keys first seen beyond `radius - margin`.
    pub fn is_shell(&self, k: usize) -> bool {
        self.key_element(k).len() > self.radius - self.margin
    }

    pub fn key_of(&self, e: &GroupElement) -> Option<usize> {
        self.by_invariant.get(&self.subgroup.invariant(e)).copied()
    }

    pub fn key_of_word(&self, word: &str) -> Result<usize, WindowError> {
        let e = self.model.normalize(word)?;
        self.key_of(&e).ok_or_else(|| WindowError::UnknownKey(word.to_string()))
    }

    /// Partial right action `Hx · g`; `None` when the image coset is not in Ω.
    pub fn act(&self, k: usize, g: &GroupElement) -> Option<usize> {
        self.key_of(&self.model.mul(self.key_element(k), g))
    }

    /// Symmetric difference `A + A·g` over Ω, certified to avoid the shell.
    ///
    /// A key lies in `A·g` iff its image under `g^-1` lies in `A`. Interior
    /// keys must have a defined preimage; shell keys with an undefined
    /// preimage are outside the certified region.
    pub fn translate_diff(&self, base: &BaseSet, g: &GroupElement) -> Result<Vec<usize>, WindowError> {
        let g_inv = self.model.inv(g);
        let mut out = Vec::new();
        for k in 0..self.omega_len() {
            match self.act(k, &g_inv) {
                None if !self.is_shell(k) => {
                    return Err(WindowError::UncertifiedWitness(
                        self.model.format_word(g),
                        format!("interior coset {} has no preimage in the window", self.key_label(k)),
                    ))
                }
                None => {}
                Some(p) if base.contains(p) != base.contains(k) => {
                    if self.is_shell(k) {
                        return Err(WindowError::UncertifiedWitness(
                            self.model.format_word(g),
                            format!("difference reaches shell coset {}", self.key_label(k)),
                        ));
                    }
                    out.push(k);
                }
                Some(_) => {}
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixRule {
    pub prefix: String,
    pub side: Side,
}

/// Rules selecting the base set A as a set of coset keys.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseSetSpec {
    #[serde(default)]
    pub rules: Vec<PrefixRule>,
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    pub default: Side,
}

impl BaseSetSpec {
    pub fn new(default: Side) -> Self {
        BaseSetSpec { rules: Vec::new(), include: Vec::new(), exclude: Vec::new(), default }
    }

    pub fn rule(mut self, prefix: &str, side: Side) -> Self {
        self.rules.push(PrefixRule { prefix: prefix.to_string(), side });
        self
    }

    pub fn include(mut self, word: &str) -> Self {
        self.include.push(word.to_string());
        self
    }

    pub fn exclude(mut self, word: &str) -> Self {
        self.exclude.push(word.to_string());
        self
    }
}

/// The base set A, as a subset of Ω.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseSet {
    members: FixedBitSet,
}

impl BaseSet {
    pub fn contains(&self, k: usize) -> bool {
        self.members.contains(k)
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn universe_len(&self) -> usize {
        self.members.len()
    }
}

/// Decides membership per key: explicit includes and excludes first, then
/// the longest matching prefix rule, then the default side.
pub fn build_base_set(window: &Window, spec: &BaseSetSpec) -> Result<BaseSet, WindowError> {
    let mut by_prefix: HashMap<&str, Side> = HashMap::new();
    for r in &spec.rules {
        if let Some(&s) = by_prefix.get(r.prefix.as_str()) {
            if s != r.side {
                return Err(WindowError::ConflictingRule(format!("prefix '{}' is both in and out", r.prefix)));
            }
        }
        by_prefix.insert(&r.prefix, r.side);
    }
    let include: BTreeSet<usize> = spec.include.iter().map(|w| window.key_of_word(w)).collect::<Result<_, _>>()?;
    let exclude: BTreeSet<usize> = spec.exclude.iter().map(|w| window.key_of_word(w)).collect::<Result<_, _>>()?;
    if let Some(k) = include.intersection(&exclude).next() {
        return Err(WindowError::ConflictingRule(format!(
            "coset {} is both included and excluded",
            window.key_label(*k)
        )));
    }
    let mut members = FixedBitSet::with_capacity(window.omega_len());
    for k in 0..window.omega_len() {
        let side = if include.contains(&k) {
            Side::In
        } else if exclude.contains(&k) {
            Side::Out
        } else {
            let word = window.key_word(k);
            spec.rules
                .iter()
                .filter(|r| word.starts_with(r.prefix.as_str()))
                .max_by_key(|r| r.prefix.len())
                .map(|r| r.side)
                .unwrap_or(spec.default)
        };
        members.set(k, side == Side::In);
    }
    Ok(BaseSet { members })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyVertex {
    pub element: GroupElement,
    /// `F = A + A·g`, as sorted key indices.
    pub flips: Vec<usize>,
    /// Other translations producing the same set.
    pub merged: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCertificate {
    pub i: usize,
    pub j: usize,
    pub diff: Vec<usize>,
}

/// The translates `A·g` of the base set, deduplicated and certified.
#[derive(Debug, Clone)]
pub struct VertexFamily {
    pub base: BaseSet,
    pub vertices: Vec<FamilyVertex>,
    pub base_index: usize,
    pub certificates: Vec<PairCertificate>,
}

impl VertexFamily {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// All keys in some symmetric difference, in key (ShortLex) order.
    pub fn track_keys(&self) -> Vec<usize> {
        let all: BTreeSet<usize> = self.vertices.iter().flat_map(|v| v.flips.iter().copied()).collect();
        all.into_iter().collect()
    }
}

pub fn build_family(
    window: &Window,
    base: &BaseSet,
    translations: &[GroupElement],
) -> Result<VertexFamily, WindowError> {
    let model = window.model();
    if !translations.iter().any(|g| g.is_identity()) {
        return Err(WindowError::MissingIdentity);
    }
    let mut vertices: Vec<FamilyVertex> = Vec::new();
    let mut diffs: Vec<Vec<usize>> = Vec::new();
    for g in translations {
        model.validate(g)?;
        let flips = window
            .translate_diff(base, g)
            .map_err(|e| WindowError::CertificationFailure("1".into(), model.format_word(g), e.to_string()))?;
        match vertices.iter_mut().find(|v| v.flips == flips) {
            Some(v) => {
                if g.is_identity() {
                    let previous = std::mem::replace(&mut v.element, g.clone());
                    v.merged.push(previous);
                } else if *g != v.element {
                    v.merged.push(g.clone());
                }
            }
            None => {
                diffs.push(flips.clone());
                vertices.push(FamilyVertex { element: g.clone(), flips, merged: Vec::new() });
            }
        }
    }
    let base_index = vertices.iter().position(|v| v.element.is_identity()).expect("identity translate");

    let inverses: Vec<GroupElement> = vertices.iter().map(|v| model.inv(&v.element)).collect();
    let mut certificates = Vec::new();
    for i in 0..vertices.len() {
        for j in i + 1..vertices.len() {
            let mut diff = Vec::new();
            for k in 0..window.omega_len() {
                let (Some(pi), Some(pj)) = (window.act(k, &inverses[i]), window.act(k, &inverses[j])) else {
                    continue;
                };
                if base.contains(pi) != base.contains(pj) {
                    diff.push(k);
                }
            }
            let fail = |reason: String| {
                WindowError::CertificationFailure(
                    model.format_word(&vertices[i].element),
                    model.format_word(&vertices[j].element),
                    reason,
                )
            };
            if let Some(&k) = diff.iter().find(|&&k| window.is_shell(k)) {
                return Err(fail(format!("difference reaches shell coset {}", window.key_label(k))));
            }
            let expected: BTreeSet<usize> = diffs[i]
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .symmetric_difference(&diffs[j].iter().copied().collect())
                .copied()
                .collect();
            if diff.iter().copied().collect::<BTreeSet<_>>() != expected {
                return Err(fail("pairwise difference disagrees with the base differences".into()));
            }
            certificates.push(PairCertificate { i, j, diff });
        }
    }
    Ok(VertexFamily { base: base.clone(), vertices, base_index, certificates })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranslationWitness {
    pub element: String,
    pub witness: Vec<String>,
    pub certified: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropernessVerdict {
    pub passed: bool,
    /// (distance, side) pairs where a shell misses A or its complement.
    pub failures: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixVerdict {
    pub element: String,
    pub fixes_base: bool,
    pub witness: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    /// `HA = A` holds because A is stored as a set of right cosets.
    pub left_invariance: String,
    pub almost_invariance: Vec<TranslationWitness>,
    pub properness: PropernessVerdict,
    /// Generators of H acting on the right must fix A (H ≤ K).
    pub subgroup_in_stabilizer: Vec<FixVerdict>,
    pub expected_k: Vec<FixVerdict>,
}

impl HypothesisReport {
    pub fn all_certified(&self) -> bool {
        self.almost_invariance.iter().all(|w| w.certified)
    }

    pub fn stabilizer_checks_pass(&self) -> bool {
        self.subgroup_in_stabilizer.iter().chain(&self.expected_k).all(|v| v.fixes_base)
    }
}

fn fix_verdict(window: &Window, base: &BaseSet, g: &GroupElement) -> FixVerdict {
    let element = window.model().format_word(g);
    match window.translate_diff(base, g) {
        Ok(d) => {
            FixVerdict { element, fixes_base: d.is_empty(), witness: d.iter().map(|&k| window.key_label(k)).collect() }
        }
        Err(e) => FixVerdict { element, fixes_base: false, witness: vec![e.to_string()] },
    }
}

pub fn hypothesis_report(
    window: &Window,
    base: &BaseSet,
    subgroup: &Subgroup,
    translations: &[GroupElement],
    expected_k: &[GroupElement],
) -> HypothesisReport {
    let model = window.model();
    let almost_invariance = translations
        .iter()
        .map(|g| match window.translate_diff(base, g) {
            Ok(d) => TranslationWitness {
                element: model.format_word(g),
                witness: d.iter().map(|&k| window.key_label(k)).collect(),
                certified: true,
                reason: None,
            },
            Err(e) => TranslationWitness {
                element: model.format_word(g),
                witness: Vec::new(),
                certified: false,
                reason: Some(e.to_string()),
            },
        })
        .collect();

    let mut failures = Vec::new();
    for s in window.margin()..=window.radius() - window.margin() {
        let shell: Vec<usize> = (0..window.omega_len()).filter(|&k| window.key_element(k).len() == s).collect();
        if !shell.iter().any(|&k| base.contains(k)) {
            failures.push((s, "A".to_string()));
        }
        if !shell.iter().any(|&k| !base.contains(k)) {
            failures.push((s, "A*".to_string()));
        }
    }

    HypothesisReport {
        left_invariance: "structural: A is a union of right H-cosets".into(),
        almost_invariance,
        properness: PropernessVerdict { passed: failures.is_empty(), failures },
        subgroup_in_stabilizer: subgroup.generators().iter().map(|h| fix_verdict(window, base, h)).collect(),
        expected_k: expected_k.iter().map(|k| fix_verdict(window, base, k)).collect(),
    }
}
