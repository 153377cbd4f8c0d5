use super::folding::FoldedGraph;
use super::lattice::Lattice;
use super::{GroupElement, GroupError, GroupKind, GroupModel, Letter};

/// How membership in a subgroup is decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MembershipEngine {
    Folding(FoldedGraph),
    Lattice(Lattice),
    /// `H = <x^modulus>` inside the cyclic factor generated by `x`.
    Factor {
        factor: usize,
        modulus: u32,
    },
    Trivial,
}

/// A complete invariant of the right coset `He`: two elements share an
/// invariant iff they lie in the same right coset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CosetInvariant {
    /// Free groups: the state where reading stops in the folded graph and
    /// the unread suffix, i.e. a vertex of the Schreier graph.
    Schreier { state: u32, tail: Vec<Letter> },
    /// Free abelian groups: reduced coordinates modulo the lattice.
    Residue(Vec<i64>),
    /// Free products: first syllable residue and the remaining word.
    Syllable { residue: u32, tail: Vec<Letter> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    model: GroupModel,
    generators: Vec<GroupElement>,
    engine: MembershipEngine,
}

impl Subgroup {
    pub fn new(model: &GroupModel, generators: Vec<GroupElement>) -> Result<Self, GroupError> {
        for g in &generators {
            model.validate(g)?;
        }
        let engine = match model.kind() {
            GroupKind::Free { rank } => MembershipEngine::Folding(FoldedGraph::from_generators(*rank, &generators)),
            GroupKind::FreeAbelian { rank } => {
                let vectors: Vec<Vec<i64>> = generators.iter().map(|g| model.exponent_vector(g)).collect();
                MembershipEngine::Lattice(Lattice::from_generators(*rank, &vectors))
            }
            GroupKind::FreeProductCyclic { orders } => {
                let nontrivial: Vec<&GroupElement> = generators.iter().filter(|g| !g.is_identity()).collect();
                if nontrivial.is_empty() {
                    MembershipEngine::Trivial
                } else {
                    let mut factor = None;
                    let mut modulus = 0u32;
                    for g in nontrivial {
                        let syllables = model.syllables(g);
                        if syllables.len() != 1 {
                            return Err(GroupError::UnsupportedSubgroup(format!(
                                "generator {} is not inside a single cyclic factor",
                                model.format_word(g)
                            )));
                        }
                        let (f, exp) = syllables[0];
                        if factor.is_some_and(|x| x != f) {
                            return Err(GroupError::UnsupportedSubgroup(
                                "generators lie in different cyclic factors".into(),
                            ));
                        }
                        factor = Some(f);
                        modulus = gcd(modulus, exp as u32);
                    }
                    let f = factor.expect("nonempty generator list");
                    let modulus = gcd(modulus, orders[f]);
                    MembershipEngine::Factor { factor: f, modulus }
                }
            }
        };
        Ok(Subgroup { model: model.clone(), generators, engine })
    }

    pub fn from_words(model: &GroupModel, words: &[&str]) -> Result<Self, GroupError> {
        let gens = words.iter().map(|w| model.normalize(w)).collect::<Result<Vec<_>, _>>()?;
        Self::new(model, gens)
    }

    pub fn trivial(model: &GroupModel) -> Self {
        Self::new(model, Vec::new()).expect("trivial subgroup is always supported")
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn engine(&self) -> &MembershipEngine {
        &self.engine
    }

    /// Membership test (`member_H`).
    pub fn contains(&self, e: &GroupElement) -> Result<bool, GroupError> {
        self.model.validate(e)?;
        Ok(self.contains_unchecked(e))
    }

    pub(crate) fn contains_unchecked(&self, e: &GroupElement) -> bool {
        match &self.engine {
            MembershipEngine::Folding(g) => g.accepts(e),
            _ => self.invariant(e) == self.invariant(&GroupElement::identity()),
        }
    }

    /// The coset invariant of `He`. `e` must be canonical for the model.
    pub fn invariant(&self, e: &GroupElement) -> CosetInvariant {
        match &self.engine {
            MembershipEngine::Folding(g) => {
                let (state, read) = g.read(e);
                CosetInvariant::Schreier { state, tail: e.letters()[read..].to_vec() }
            }
            MembershipEngine::Lattice(l) => CosetInvariant::Residue(l.reduce(&self.model.exponent_vector(e))),
            MembershipEngine::Trivial => CosetInvariant::Syllable { residue: 0, tail: e.letters().to_vec() },
            MembershipEngine::Factor { factor, modulus } => {
                let letters = e.letters();
                let run = letters.iter().take_while(|l| l.generator() == *factor).count();
                if run == 0 {
                    CosetInvariant::Syllable { residue: 0, tail: letters.to_vec() }
                } else {
                    CosetInvariant::Syllable { residue: run as u32 % modulus, tail: letters[run..].to_vec() }
                }
            }
        }
    }

    pub fn same_coset(&self, a: &GroupElement, b: &GroupElement) -> bool {
        self.invariant(a) == self.invariant(b)
    }

    /// ShortLex-least element of `He`, found by scanning the ball of radius
    /// `|e|` in ShortLex order and testing `g e^-1 ∈ H`.
    ///
    /// This is the slow reference route; windows use the invariant map.
    pub fn coset_key(&self, e: &GroupElement, budget: usize) -> Result<GroupElement, GroupError> {
        self.model.validate(e)?;
        let model = self.model.clone().with_limits(e.len().max(1), budget);
        let ball = match model.ball(e.len()) {
            Ok(b) => b,
            Err(GroupError::RadiusTooLarge { .. }) => return Err(GroupError::SearchBudgetExceeded(budget)),
            Err(other) => return Err(other),
        };
        let e_inv = self.model.inv(e);
        ball.into_iter()
            .find(|g| self.contains_unchecked(&self.model.mul(g, &e_inv)))
            .ok_or(GroupError::SearchBudgetExceeded(budget))
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        let h = Subgroup::from_words(&f2, &["a"]).unwrap();
        assert!(h.contains(&f2.normalize("aaa").unwrap()).unwrap());
        assert!(!h.contains(&f2.normalize("baB").unwrap()).unwrap());

        let h = Subgroup::from_words(&f2, &["ab"]).unwrap();
        assert!(h.contains(&f2.normalize("abab").unwrap()).unwrap());
        assert!(!h.contains(&f2.normalize("ba").unwrap()).unwrap());
        assert!(h.contains(&f2.identity()).unwrap());
    }

    #[test]
    fn coset_key_examples() {
        let f2 = GroupModel::free("ab").unwrap();
        let h = Subgroup::from_words(&f2, &["a"]).unwrap();
        let key = h.coset_key(&f2.normalize("aab").unwrap(), 1000).unwrap();
        assert_eq!(f2.format_word(&key), "b");
        assert!(h.coset_key(&f2.normalize("aaa").unwrap(), 1000).unwrap().is_identity());

        let z = GroupModel::free("t").unwrap();
        let trivial = Subgroup::trivial(&z);
        for n in ["ttt", "TT", ""] {
            let e = z.normalize(n).unwrap();
            assert_eq!(trivial.coset_key(&e, 1000).unwrap(), e);
        }
    }

    #[test]
    fn coset_key_budget() {
        let f2 = GroupModel::free("ab").unwrap();
        let h = Subgroup::from_words(&f2, &["a"]).unwrap();
        let e = f2.normalize("aabbbb").unwrap();
        assert_eq!(h.coset_key(&e, 50), Err(GroupError::SearchBudgetExceeded(50)));
    }

    #[test]
    fn free_abelian_cosets() {
        let z2 = GroupModel::free_abelian("xy").unwrap();
        let h = Subgroup::from_words(&z2, &["x"]).unwrap();
        let e = z2.from_exponents(&[3, -2]).unwrap();
        let key = h.coset_key(&e, 10_000).unwrap();
        assert_eq!(z2.exponent_vector(&key), vec![0, -2]);
        assert!(h.contains(&z2.from_exponents(&[-4, 0]).unwrap()).unwrap());
    }

    #[test]
    fn free_product_support_matrix() {
        let c = GroupModel::free_product_cyclic("st", &[2, 6]).unwrap();
        let h = Subgroup::from_words(&c, &["tttt"]).unwrap();
        // <t^4> in Z6 is <t^2>.
        assert!(h.contains(&c.normalize("tt").unwrap()).unwrap());
        assert!(!h.contains(&c.normalize("t").unwrap()).unwrap());
        assert!(h.same_coset(&c.normalize("ts").unwrap(), &c.normalize("ttts").unwrap()));
        assert!(!h.same_coset(&c.normalize("st").unwrap(), &c.normalize("tst").unwrap()));

        assert!(matches!(Subgroup::from_words(&c, &["st"]), Err(GroupError::UnsupportedSubgroup(_))));
        assert!(matches!(Subgroup::from_words(&c, &["s", "t"]), Err(GroupError::UnsupportedSubgroup(_))));
    }
}
