use std::collections::HashSet;

use proptest::prelude::*;

use coset_tracks::group::folding::FoldedGraph;
use coset_tracks::group::{GroupElement, GroupModel, Subgroup};
use coset_tracks::harness::{random_family, run_instance, RunOptions, Status};
use coset_tracks::pattern::{corner_counts, edge_weights_from_corners};

fn models() -> Vec<GroupModel> {
    vec![
        GroupModel::free("ab").unwrap(),
        GroupModel::free_abelian("xyz").unwrap(),
        GroupModel::free_product_cyclic("st", &[2, 3]).unwrap(),
    ]
}

fn word(alphabet: &'static str, max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(alphabet.chars().collect::<Vec<_>>()), 0..=max)
        .prop_map(|cs| cs.into_iter().collect())
}

const ALPHABETS: [&str; 3] = ["aAbB", "xXyYzZ", "sStT"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn multiplication_is_associative(m in 0usize..3, a in word("aAbBxXyYzZsStT", 8), b in word("aAbBxXyYzZsStT", 8), c in word("aAbBxXyYzZsStT", 8)) {
        let model = &models()[m];
        let keep = |w: &str| -> String { w.chars().filter(|ch| ALPHABETS[m].contains(*ch)).collect() };
        let (a, b, c) = (model.normalize(&keep(&a)).unwrap(), model.normalize(&keep(&b)).unwrap(), model.normalize(&keep(&c)).unwrap());
        let left = model.compose(&model.compose(&a, &b).unwrap(), &c).unwrap();
        let right = model.compose(&a, &model.compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn normalize_is_idempotent_and_inverse_cancels(m in 0usize..3, w in word("aAbBxXyYzZsStT", 12)) {
        let model = &models()[m];
        let w: String = w.chars().filter(|ch| ALPHABETS[m].contains(*ch)).collect();
        let e = model.normalize(&w).unwrap();
        let again = model.normalize(&model.format_word(&e)).unwrap();
        prop_assert_eq!(&again, &e);
        let inv = model.invert(&e).unwrap();
        prop_assert!(model.compose(&e, &inv).unwrap().is_identity());
        prop_assert_eq!(model.invert(&inv).unwrap(), e);
    }

    #[test]
    fn folding_agrees_with_products(gens in proptest::collection::vec(word("aAbB", 3), 1..=2), w in word("aAbB", 6)) {
        let f2 = GroupModel::free("ab").unwrap();
        let gens: Vec<GroupElement> = gens.iter().map(|g| f2.normalize(g).unwrap()).filter(|g| !g.is_identity()).collect();
        let graph = FoldedGraph::from_generators(2, &gens);
        prop_assert!(graph.is_folded());
        // Subgroup elements reachable through products of bounded length.
        let mut seen: HashSet<GroupElement> = HashSet::from([f2.identity()]);
        let mut frontier = vec![f2.identity()];
        let steps: Vec<GroupElement> = gens.iter().flat_map(|g| [g.clone(), f2.invert(g).unwrap()]).collect();
        while let Some(x) = frontier.pop() {
            for s in &steps {
                let y = f2.compose(&x, s).unwrap();
                if y.len() <= 9 && seen.insert(y.clone()) {
                    frontier.push(y);
                }
            }
        }
        let w = f2.normalize(&w).unwrap();
        prop_assert_eq!(graph.accepts(&w), seen.contains(&w), "word {}", f2.format_word(&w));
        for s in seen.iter().filter(|s| s.len() <= 8) {
            prop_assert!(graph.accepts(s));
        }
    }

    #[test]
    fn random_nested_families_pass_every_check(seed in 0u64..1_000_000, classes in 1usize..=10) {
        let spec = random_family(seed, classes).unwrap();
        let out = run_instance(&spec, RunOptions::default()).unwrap();
        let bad: Vec<_> = out.report.checks.iter().filter(|c| c.status == Status::Fail || c.status == Status::Uncertified).collect();
        prop_assert!(bad.is_empty(), "{}: {:?}", spec.name, bad);
        let tree = out.tree.unwrap();
        prop_assert_eq!(tree.edges.len() + 1, tree.len());
    }

    #[test]
    fn corner_formula_round_trips(a in 0usize..20, b in 0usize..20, c in 0usize..20) {
        let (uv, uw, vw) = edge_weights_from_corners(a, b, c);
        prop_assert_eq!((uv + uw + vw) % 2, 0);
        prop_assert_eq!(corner_counts(uv, uw, vw), Some([a, b, c]));
    }
}

#[test]
fn ball_sizes_and_nesting() {
    let f2 = GroupModel::free("ab").unwrap();
    let z3 = GroupModel::free_abelian("xyz").unwrap();
    let d = GroupModel::free_product_cyclic("st", &[2, 2]).unwrap();
    for r in 0..=6usize {
        // Free group of rank 2: 1 + 4 * (3^r - 1) / 2.
        assert_eq!(f2.ball(r).unwrap().len(), 1 + 2 * (3usize.pow(r as u32) - 1));
        // Z^3 in the l1 metric.
        let z3_count: usize = (0..=3).map(|k| binom(3, k) * binom(r, k) * 2usize.pow(k as u32)).sum();
        assert_eq!(z3.ball(r).unwrap().len(), z3_count);
        assert_eq!(d.ball(r).unwrap().len(), 2 * r + 1);
    }
    for model in models() {
        let small = model.ball(3).unwrap();
        let big = model.ball(4).unwrap();
        assert_eq!(&big[..small.len()], &small[..]);
        let mut sorted = big.clone();
        sorted.sort();
        assert_eq!(sorted, big);
    }
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Exhaustive over ball(4): two elements share a coset key exactly when
/// `x y^-1` lies in H, and the fast invariant agrees with the slow search.
#[test]
fn coset_keys_match_membership() {
    let f2 = GroupModel::free("ab").unwrap();
    let z2 = GroupModel::free_abelian("xy").unwrap();
    let d = GroupModel::free_product_cyclic("st", &[2, 3]).unwrap();
    let cases = vec![
        Subgroup::from_words(&f2, &["a"]).unwrap(),
        Subgroup::from_words(&f2, &["ab", "bA"]).unwrap(),
        Subgroup::from_words(&z2, &["xx", "xy"]).unwrap(),
        Subgroup::from_words(&d, &["t"]).unwrap(),
        Subgroup::trivial(&d),
    ];
    for h in cases {
        let model = h.model().clone();
        let ball = model.ball(4).unwrap();
        let keys: Vec<GroupElement> = ball.iter().map(|e| h.coset_key(e, 100_000).unwrap()).collect();
        for (i, x) in ball.iter().enumerate() {
            for (j, y) in ball.iter().enumerate() {
                let member = h.contains(&model.compose(x, &model.invert(y).unwrap()).unwrap()).unwrap();
                assert_eq!(keys[i] == keys[j], member, "{} {}", model.format_word(x), model.format_word(y));
                assert_eq!(h.same_coset(x, y), member);
            }
        }
    }
}
