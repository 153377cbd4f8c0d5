//! Seeded random nested families, built from the edge cuts of a random tree.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{ExplicitSpec, InstanceSpec};
use super::HarnessError;

pub const MAX_RANDOM_CLASSES: usize = 11;
pub const MAX_FAMILY: usize = 12;
pub const MAX_UNIVERSE: usize = 64;

/// A random nested family with `classes` tree edges.
///
/// Each edge of a random tree on `classes + 1` nodes carries one to three
/// cosets. The family holds every leaf plus a random subset of internal
/// nodes, so every coset separates two family members. A few cosets lie in
/// no difference at all.
pub fn random_family(seed: u64, classes: usize) -> Result<InstanceSpec, HarnessError> {
    if classes == 0 || classes > MAX_RANDOM_CLASSES {
        return Err(HarnessError::Parse(format!("classes must be between 1 and {MAX_RANDOM_CLASSES}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = classes + 1;
    let parent: Vec<usize> = (0..nodes).map(|i| if i == 0 { 0 } else { rng.gen_range(0..i) }).collect();
    let mut degree = vec![0usize; nodes];
    for i in 1..nodes {
        degree[i] += 1;
        degree[parent[i]] += 1;
    }

    let mut universe = Vec::new();
    // Cosets of the edge from node i to its parent.
    let mut edge_cosets: Vec<Vec<String>> = vec![Vec::new(); nodes];
    for cosets in edge_cosets.iter_mut().skip(1) {
        for _ in 0..rng.gen_range(1..=3) {
            let name = format!("c{:02}", universe.len());
            cosets.push(name.clone());
            universe.push(name);
        }
    }
    let constants: Vec<String> = (0..rng.gen_range(0..=3)).map(|i| format!("z{i}")).collect();
    universe.extend(constants.iter().cloned());
    debug_assert!(universe.len() <= MAX_UNIVERSE);

    let mut members: Vec<usize> = (0..nodes).filter(|&i| degree[i] <= 1 || rng.gen_bool(0.5)).collect();
    members.shuffle(&mut rng);
    members.truncate(MAX_FAMILY);

    let offset: Vec<bool> = universe.iter().map(|_| rng.gen_bool(0.5)).collect();
    let vertices = members
        .iter()
        .map(|&node| {
            let mut on_path = vec![false; universe.len()];
            let mut x = node;
            while x != 0 {
                for c in &edge_cosets[x] {
                    let i = universe.iter().position(|u| u == c).expect("known coset");
                    on_path[i] = true;
                }
                x = parent[x];
            }
            universe.iter().enumerate().filter(|&(i, _)| offset[i] != on_path[i]).map(|(_, c)| c.clone()).collect()
        })
        .collect();
    Ok(InstanceSpec {
        name: format!("random-{seed}-{classes}"),
        group: None,
        subgroup: Default::default(),
        window: None,
        base_set: None,
        family: None,
        expected_k: Default::default(),
        expect: super::spec::Expectations { nested: Some(true), ..Default::default() },
        explicit: Some(ExplicitSpec { universe, vertices }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_bounded() {
        let a = random_family(7, 6).unwrap();
        assert_eq!(a, random_family(7, 6).unwrap());
        assert_ne!(a, random_family(8, 6).unwrap());
        for seed in 0..50 {
            let s = random_family(seed, 10).unwrap();
            let e = s.explicit.unwrap();
            assert!(e.vertices.len() <= MAX_FAMILY && e.vertices.len() >= 2);
            assert!(e.universe.len() <= MAX_UNIVERSE);
        }
        assert!(random_family(0, 0).is_err());
    }
}
