//! Exact arithmetic for the supported group families.
//!
//! Three kinds of finitely generated groups are modelled: free groups,
//! free abelian groups and free products of finite cyclic groups. Every
//! element is kept in a canonical normal form so that equality of words is
//! equality of group elements. Words use one lowercase letter per
//! generator; the uppercase letter is its inverse.

pub mod folding;
pub mod lattice;
mod subgroup;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use subgroup::{CosetInvariant, MembershipEngine, Subgroup};

/// Largest radius accepted by [`GroupModel::ball`] unless reconfigured.
pub const DEFAULT_MAX_RADIUS: usize = 12;
/// Largest ball (in elements) accepted unless reconfigured.
pub const DEFAULT_ELEMENT_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("letter '{0}' is not a generator of this group")]
    UnknownLetter(char),
    #[error("exponent data out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("element does not belong to this group model")]
    ModelMismatch,
    #[error("ball of radius {radius} exceeds the configured limit ({reason})")]
    RadiusTooLarge { radius: usize, reason: String },
    #[error("unsupported subgroup: {0}")]
    UnsupportedSubgroup(String),
    #[error("coset key search exceeded its budget of {0} elements")]
    SearchBudgetExceeded(usize),
    #[error("invalid group model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupKind {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    FreeProductCyclic { orders: Vec<u32> },
}

impl GroupKind {
    pub fn rank(&self) -> usize {
        match self {
            GroupKind::Free { rank } | GroupKind::FreeAbelian { rank } => *rank,
            GroupKind::FreeProductCyclic { orders } => orders.len(),
        }
    }
}

/// A generator or its inverse. Ordered `a < A < b < B < ...`, which is the
/// letter order used by ShortLex everywhere.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter((generator as u8) << 1 | inverse as u8)
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> u8 {
        self.0
    }
}

/// A group element in canonical normal form.
///
/// Ordering is ShortLex: shorter words first, then lexicographic in the
/// letter order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct GroupElement {
    letters: Vec<Letter>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// ShortLex sort key usable outside this module (labels, reports).
    pub fn shortlex_key(&self) -> (usize, Vec<u8>) {
        (self.len(), self.letters.iter().map(|l| l.code()).collect())
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters.len().cmp(&other.letters.len()).then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupModel {
    kind: GroupKind,
    names: Vec<char>,
    max_radius: usize,
    element_cap: usize,
}

impl GroupModel {
    pub fn new(kind: GroupKind, names: &str) -> Result<Self, GroupError> {
        let names: Vec<char> = names.chars().collect();
        if kind.rank() == 0 {
            return Err(GroupError::InvalidModel("rank must be at least 1".into()));
        }
        if names.len() != kind.rank() {
            return Err(GroupError::InvalidModel(format!("{} generator names for rank {}", names.len(), kind.rank())));
        }
        if names.iter().any(|c| !c.is_ascii_lowercase()) {
            return Err(GroupError::InvalidModel("generator names must be letters a-z".into()));
        }
        let distinct: HashSet<_> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(GroupError::InvalidModel("generator names must be distinct".into()));
        }
        if let GroupKind::FreeProductCyclic { orders } = &kind {
            if orders.iter().any(|&o| o < 2) {
                return Err(GroupError::InvalidModel("cyclic factor orders must be >= 2".into()));
            }
        }
        Ok(GroupModel { kind, names, max_radius: DEFAULT_MAX_RADIUS, element_cap: DEFAULT_ELEMENT_CAP })
    }

    pub fn free(names: &str) -> Result<Self, GroupError> {
        Self::new(GroupKind::Free { rank: names.chars().count() }, names)
    }

    pub fn free_abelian(names: &str) -> Result<Self, GroupError> {
        Self::new(GroupKind::FreeAbelian { rank: names.chars().count() }, names)
    }

    pub fn free_product_cyclic(names: &str, orders: &[u32]) -> Result<Self, GroupError> {
        Self::new(GroupKind::FreeProductCyclic { orders: orders.to_vec() }, names)
    }

    pub fn with_limits(mut self, max_radius: usize, element_cap: usize) -> Self {
        self.max_radius = max_radius;
        self.element_cap = element_cap;
        self
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity()
    }

    fn parse_letter(&self, c: char) -> Result<Letter, GroupError> {
        let lower = c.to_ascii_lowercase();
        let generator = self.names.iter().position(|&n| n == lower).ok_or(GroupError::UnknownLetter(c))?;
        Ok(Letter::new(generator, c.is_ascii_uppercase()))
    }

    /// Parses a raw word and returns its canonical normal form.
    ///
    /// The empty string and `"1"` both denote the identity.
    pub fn normalize(&self, raw: &str) -> Result<GroupElement, GroupError> {
        let raw = raw.trim();
        if raw == "1" {
            return Ok(GroupElement::identity());
        }
        let letters =
            raw.chars().filter(|c| !c.is_whitespace()).map(|c| self.parse_letter(c)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.reduce(letters))
    }

    /// Builds an element of a free abelian group from its exponent vector.
    pub fn from_exponents(&self, exponents: &[i64]) -> Result<GroupElement, GroupError> {
        if !matches!(self.kind, GroupKind::FreeAbelian { .. }) {
            return Err(GroupError::ModelMismatch);
        }
        if exponents.len() != self.rank() {
            return Err(GroupError::ExponentOutOfRange(format!(
                "expected {} exponents, got {}",
                self.rank(),
                exponents.len()
            )));
        }
        if exponents.iter().any(|e| e.unsigned_abs() > u32::MAX as u64) {
            return Err(GroupError::ExponentOutOfRange("exponent too large".into()));
        }
        Ok(self.element_of_exponents(exponents))
    }

    fn element_of_exponents(&self, exponents: &[i64]) -> GroupElement {
        let mut letters = Vec::new();
        for (g, &e) in exponents.iter().enumerate() {
            let letter = Letter::new(g, e < 0);
            letters.extend(std::iter::repeat_n(letter, e.unsigned_abs() as usize));
        }
        GroupElement { letters }
    }

    /// Exponent sum per generator. For free abelian groups this is the
    /// element's coordinate vector.
    pub fn exponent_vector(&self, e: &GroupElement) -> Vec<i64> {
        let mut v = vec![0i64; self.rank()];
        for l in &e.letters {
            v[l.generator()] += if l.is_inverse() { -1 } else { 1 };
        }
        v
    }

    /// Maximal runs of one generator, as (generator, signed exponent).
    pub fn syllables(&self, e: &GroupElement) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for l in &e.letters {
            let step = if l.is_inverse() { -1 } else { 1 };
            match out.last_mut() {
                Some((g, exp)) if *g == l.generator() && exp.signum() == step => *exp += step,
                _ => out.push((l.generator(), step)),
            }
        }
        out
    }

    pub(crate) fn reduce(&self, letters: impl IntoIterator<Item = Letter>) -> GroupElement {
        match &self.kind {
            GroupKind::Free { .. } => {
                let mut stack: Vec<Letter> = Vec::new();
                for l in letters {
                    if stack.last() == Some(&l.inverse()) {
                        stack.pop();
                    } else {
                        stack.push(l);
                    }
                }
                GroupElement { letters: stack }
            }
            GroupKind::FreeAbelian { rank } => {
                let mut v = vec![0i64; *rank];
                for l in letters {
                    v[l.generator()] += if l.is_inverse() { -1 } else { 1 };
                }
                self.element_of_exponents(&v)
            }
            GroupKind::FreeProductCyclic { orders } => {
                let mut stack: Vec<(usize, u32)> = Vec::new();
                for l in letters {
                    let g = l.generator();
                    let order = orders[g];
                    let step = if l.is_inverse() { order - 1 } else { 1 };
                    match stack.last_mut() {
                        Some((top, exp)) if *top == g => {
                            *exp = (*exp + step) % order;
                            if *exp == 0 {
                                stack.pop();
                            }
                        }
                        _ => stack.push((g, step)),
                    }
                }
                let letters = stack
                    .into_iter()
                    .flat_map(|(g, exp)| std::iter::repeat_n(Letter::new(g, false), exp as usize))
                    .collect();
                GroupElement { letters }
            }
        }
    }

    /// Checks that `e` is a canonical element of this model.
    pub fn validate(&self, e: &GroupElement) -> Result<(), GroupError> {
        if e.letters.iter().any(|l| l.generator() >= self.rank()) {
            return Err(GroupError::ModelMismatch);
        }
        if self.reduce(e.letters.iter().copied()) != *e {
            return Err(GroupError::ModelMismatch);
        }
        Ok(())
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(self.mul(a, b))
    }

    pub fn invert(&self, e: &GroupElement) -> Result<GroupElement, GroupError> {
        self.validate(e)?;
        Ok(self.inv(e))
    }

    /// Product without validation; both inputs must already be canonical.
    pub(crate) fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.reduce(a.letters.iter().chain(b.letters.iter()).copied())
    }

    pub(crate) fn inv(&self, e: &GroupElement) -> GroupElement {
        match &self.kind {
            GroupKind::Free { .. } => GroupElement { letters: e.letters.iter().rev().map(|l| l.inverse()).collect() },
            _ => self.reduce(e.letters.iter().rev().map(|l| l.inverse())),
        }
    }

    /// Letters used to grow balls. Free products of cyclic groups use only
    /// the positive generators since inverses are positive powers.
    pub fn step_letters(&self) -> Vec<Letter> {
        let signed = !matches!(self.kind, GroupKind::FreeProductCyclic { .. });
        (0..self.rank())
            .flat_map(|g| {
                let mut v = vec![Letter::new(g, false)];
                if signed {
                    v.push(Letter::new(g, true));
                }
                v
            })
            .collect()
    }

    /// All canonical elements of word length at most `radius`, in ShortLex order.
    pub fn ball(&self, radius: usize) -> Result<Vec<GroupElement>, GroupError> {
        if radius > self.max_radius {
            return Err(GroupError::RadiusTooLarge {
                radius,
                reason: format!("maximum radius is {}", self.max_radius),
            });
        }
        let steps = self.step_letters();
        let mut all = vec![GroupElement::identity()];
        let mut frontier = vec![GroupElement::identity()];
        for n in 1..=radius {
            let mut next: HashSet<GroupElement> = HashSet::new();
            for w in &frontier {
                for &l in &steps {
                    let p = self.reduce(w.letters.iter().copied().chain(std::iter::once(l)));
                    if p.len() == n {
                        next.insert(p);
                    }
                }
            }
            if all.len() + next.len() > self.element_cap {
                return Err(GroupError::RadiusTooLarge {
                    radius,
                    reason: format!("ball would exceed {} elements", self.element_cap),
                });
            }
            let mut level: Vec<GroupElement> = next.into_iter().collect();
            level.sort();
            all.extend(level.iter().cloned());
            frontier = level;
        }
        Ok(all)
    }

    /// Word syntax: lowercase generators, uppercase inverses, empty for the identity.
    pub fn format_word(&self, e: &GroupElement) -> String {
        e.letters
            .iter()
            .map(|l| {
                let c = self.names[l.generator()];
                if l.is_inverse() {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    /// Compact exponent notation used for track labels, e.g. `t-1`, `b1a2`.
    /// The identity is written as the first generator to the power zero.
    pub fn label_text(&self, e: &GroupElement) -> String {
        if e.is_identity() {
            return format!("{}0", self.names[0]);
        }
        self.syllables(e).into_iter().map(|(g, exp)| format!("{}{}", self.names[g], exp)).collect()
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Free { rank } => write!(f, "F{rank}"),
            GroupKind::FreeAbelian { rank } => write!(f, "Z^{rank}"),
            GroupKind::FreeProductCyclic { orders } => {
                let parts: Vec<String> = orders.iter().map(|o| format!("Z{o}")).collect();
                write!(f, "{}", parts.join("*"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(m: &GroupModel, w: &str) -> GroupElement {
        m.normalize(w).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        assert_eq!(f2.format_word(&word(&f2, "aAb")), "b");

        let z2 = GroupModel::free_abelian("xy").unwrap();
        assert_eq!(z2.exponent_vector(&word(&z2, "xyx")), vec![2, 1]);

        let c23 = GroupModel::free_product_cyclic("st", &[2, 3]).unwrap();
        assert!(word(&c23, "ssttt").is_identity());
    }

    #[test]
    fn normalize_rejects_unknown_letters() {
        let f2 = GroupModel::free("ab").unwrap();
        assert_eq!(f2.normalize("abc"), Err(GroupError::UnknownLetter('c')));
        assert_eq!(f2.normalize("aQ"), Err(GroupError::UnknownLetter('Q')));
    }

    #[test]
    fn compose_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        let p = f2.compose(&word(&f2, "ab"), &word(&f2, "B")).unwrap();
        assert_eq!(f2.format_word(&p), "a");

        let z2 = GroupModel::free_abelian("xy").unwrap();
        let p = z2.compose(&z2.from_exponents(&[1, 0]).unwrap(), &z2.from_exponents(&[0, 1]).unwrap()).unwrap();
        assert_eq!(z2.exponent_vector(&p), vec![1, 1]);

        let d = GroupModel::free_product_cyclic("st", &[2, 2]).unwrap();
        assert!(d.compose(&word(&d, "st"), &word(&d, "ts")).unwrap().is_identity());
    }

    #[test]
    fn compose_detects_model_mismatch() {
        let f2 = GroupModel::free("ab").unwrap();
        let c = GroupModel::free_product_cyclic("abc", &[2, 2, 2]).unwrap();
        let foreign = word(&c, "c");
        assert_eq!(f2.compose(&foreign, &word(&f2, "a")), Err(GroupError::ModelMismatch));
        // "aA" is not reduced in F(a,b), so it cannot be a canonical element.
        let unreduced = GroupElement { letters: vec![Letter::new(0, false), Letter::new(0, true)] };
        assert_eq!(f2.invert(&unreduced), Err(GroupError::ModelMismatch));
    }

    #[test]
    fn invert_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        assert_eq!(f2.format_word(&f2.invert(&word(&f2, "ab")).unwrap()), "BA");

        let z2 = GroupModel::free_abelian("xy").unwrap();
        let e = z2.from_exponents(&[2, -1]).unwrap();
        assert_eq!(z2.exponent_vector(&z2.invert(&e).unwrap()), vec![-2, 1]);

        let c23 = GroupModel::free_product_cyclic("st", &[2, 3]).unwrap();
        assert_eq!(c23.format_word(&c23.invert(&word(&c23, "st")).unwrap()), "tts");
    }

    #[test]
    fn ball_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        let b: Vec<String> = f2.ball(1).unwrap().iter().map(|e| f2.format_word(e)).collect();
        assert_eq!(b, vec!["", "a", "A", "b", "B"]);

        let z = GroupModel::free("t").unwrap();
        assert_eq!(z.ball(3).unwrap().len(), 7);

        let d = GroupModel::free_product_cyclic("st", &[2, 2]).unwrap();
        let b: Vec<String> = d.ball(2).unwrap().iter().map(|e| d.format_word(e)).collect();
        assert_eq!(b, vec!["", "s", "t", "st", "ts"]);
    }

    #[test]
    fn ball_limits() {
        let f2 = GroupModel::free("ab").unwrap();
        assert!(matches!(f2.ball(13), Err(GroupError::RadiusTooLarge { .. })));
        let small = GroupModel::free("ab").unwrap().with_limits(12, 100);
        assert!(matches!(small.ball(4), Err(GroupError::RadiusTooLarge { .. })));
    }

    #[test]
    fn label_text_uses_exponents() {
        let z = GroupModel::free("t").unwrap();
        assert_eq!(z.label_text(&word(&z, "")), "t0");
        assert_eq!(z.label_text(&word(&z, "TT")), "t-2");
        let f2 = GroupModel::free("ab").unwrap();
        assert_eq!(f2.label_text(&word(&f2, "baaB")), "b1a2b-1");
    }

    #[test]
    fn invalid_models() {
        assert!(GroupModel::free("").is_err());
        assert!(GroupModel::free("aa").is_err());
        assert!(GroupModel::free("aB").is_err());
        assert!(GroupModel::free_product_cyclic("st", &[2, 1]).is_err());
        assert!(GroupModel::new(GroupKind::Free { rank: 3 }, "ab").is_err());
    }
}
