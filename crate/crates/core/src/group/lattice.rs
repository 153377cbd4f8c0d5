//! Integer sublattices of Z^n in Hermite normal form.

/// A sublattice of Z^n kept as an echelon basis with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    rows: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(dim: usize, generators: &[Vec<i64>]) -> Self {
        let mut m: Vec<Vec<i64>> = generators.iter().filter(|v| v.iter().any(|&x| x != 0)).cloned().collect();
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..dim {
            loop {
                // Smallest nonzero entry in this column among the remaining rows.
                let best = (r..m.len()).filter(|&i| m[i][col] != 0).min_by_key(|&i| m[i][col].abs());
                let Some(p) = best else { break };
                m.swap(r, p);
                let mut done = true;
                for i in r + 1..m.len() {
                    if m[i][col] != 0 {
                        let q = m[i][col].div_euclid(m[r][col]);
                        let pivot_row = m[r].clone();
                        for (x, y) in m[i].iter_mut().zip(pivot_row) {
                            *x -= q * y;
                        }
                        if m[i][col] != 0 {
                            done = false;
                        }
                    }
                }
                if done {
                    if m[r][col] < 0 {
                        m[r].iter_mut().for_each(|x| *x = -*x);
                    }
                    pivots.push(col);
                    r += 1;
                    break;
                }
            }
            if r == m.len() {
                break;
            }
        }
        m.truncate(r);
        for i in 0..m.len() {
            let c = pivots[i];
            for j in 0..i {
                let q = m[j][c].div_euclid(m[i][c]);
                if q != 0 {
                    let row = m[i].clone();
                    for (x, y) in m[j].iter_mut().zip(row) {
                        *x -= q * y;
                    }
                }
            }
        }
        Lattice { dim, rows: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical representative of `v + L`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut v = v.to_vec();
        for (row, &c) in self.rows.iter().zip(&self.pivots) {
            let q = v[c].div_euclid(row[c]);
            if q != 0 {
                for (x, y) in v.iter_mut().zip(row) {
                    *x -= q * y;
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_subgroup() {
        let l = Lattice::from_generators(2, &[vec![1, 0]]);
        assert!(l.contains(&[5, 0]));
        assert!(!l.contains(&[5, 1]));
        assert_eq!(l.reduce(&[7, -3]), vec![0, -3]);
    }

    #[test]
    fn redundant_and_negative_generators() {
        let l = Lattice::from_generators(2, &[vec![4, 6], vec![-6, -9], vec![0, 0]]);
        // gcd structure: the lattice is generated by (2,3).
        assert_eq!(l.rank(), 1);
        assert!(l.contains(&[2, 3]));
        assert!(l.contains(&[-2, -3]));
        assert!(!l.contains(&[1, 1]));
    }

    #[test]
    fn full_rank_index() {
        let l = Lattice::from_generators(2, &[vec![2, 1], vec![0, 3]]);
        assert!(l.contains(&[2, 4]));
        assert!(!l.contains(&[1, 0]));
        // Representatives are canonical: equal cosets reduce identically.
        assert_eq!(l.reduce(&[3, 5]), l.reduce(&[1, 1]));
        assert_eq!(l.reduce(&[3, 5]), l.reduce(&[5, 9]));
    }

    #[test]
    fn brute_force_agreement() {
        let gens = vec![vec![2, 2], vec![0, 4], vec![6, 0]];
        let l = Lattice::from_generators(2, &gens);
        // Enumerate small integer combinations as an independent route.
        let mut members = std::collections::HashSet::new();
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                for c in -3i64..=3 {
                    members.insert(vec![2 * a + 6 * c, 2 * a + 4 * b]);
                }
            }
        }
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                assert_eq!(l.contains(&[x, y]), members.contains(&vec![x, y]), "({x},{y})");
            }
        }
    }
}
