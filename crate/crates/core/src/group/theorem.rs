//! Equivariant bases built directly from the structure of a group
//! expression, without generators or orbit search.

use super::expr::GroupExpr;
use super::partition::PairPartition;
use super::GroupError;

struct Built {
    degree: usize,
    labels: Vec<u32>,
    cells: usize,
    orbit: Vec<usize>,
    orbits: usize,
}

/// Recursive basis construction for sums, Kronecker products and wreath
/// products. Every basis element is a 0/1 matrix and supports are disjoint,
/// so the result is returned as the partition formed by those supports.
pub fn basis_from_theorem(g: &GroupExpr, max_degree: usize) -> Result<PairPartition, GroupError> {
    let d = g.degree();
    if d > max_degree {
        return Err(GroupError::DegreeOverflow {
            degree: d,
            max: max_degree,
            pos: 0,
        });
    }
    let b = build(g);
    PairPartition::from_labels(b.degree, &b.labels)
}

fn build(g: &GroupExpr) -> Built {
    match g {
        GroupExpr::Trivial(m) => Built {
            degree: *m,
            labels: (0..(m * m) as u32).collect(),
            cells: m * m,
            orbit: (0..*m).collect(),
            orbits: *m,
        },
        GroupExpr::Cyclic(m) => {
            let m = *m;
            let mut labels = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    labels.push(((j + m - i) % m) as u32);
                }
            }
            Built {
                degree: m,
                labels,
                cells: m,
                orbit: vec![0; m],
                orbits: 1,
            }
        }
        GroupExpr::Symmetric(m) => {
            let m = *m;
            let mut labels = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    labels.push(u32::from(i != j));
                }
            }
            Built {
                degree: m,
                labels,
                cells: if m == 1 { 1 } else { 2 },
                orbit: vec![0; m],
                orbits: 1,
            }
        }
        GroupExpr::Sum(a, b) => {
            let (a, b) = (build(a), build(b));
            let (p, q) = (a.degree, b.degree);
            let n = p + q;
            let base_b = a.cells;
            let base_ab = base_b + b.cells;
            let base_ba = base_ab + a.orbits * b.orbits;
            let mut labels = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let l = match (i < p, j < p) {
                        (true, true) => a.labels[i * p + j] as usize,
                        (false, false) => base_b + b.labels[(i - p) * q + (j - p)] as usize,
                        // 1_{O × (p + O')}
                        (true, false) => base_ab + a.orbit[i] * b.orbits + b.orbit[j - p],
                        // 1_{(p + O') × O}
                        (false, true) => base_ba + a.orbit[j] * b.orbits + b.orbit[i - p],
                    };
                    labels.push(l as u32);
                }
            }
            let mut orbit = a.orbit.clone();
            orbit.extend(b.orbit.iter().map(|o| o + a.orbits));
            Built {
                degree: n,
                labels,
                cells: base_ba + a.orbits * b.orbits,
                orbit,
                orbits: a.orbits + b.orbits,
            }
        }
        GroupExpr::Product(a, b) => {
            let (a, b) = (build(a), build(b));
            let (p, q) = (a.degree, b.degree);
            let n = p * q;
            let mut labels = Vec::with_capacity(n * n);
            for r in 0..n {
                let (i, j) = (r / q, r % q);
                for s in 0..n {
                    let (i2, j2) = (s / q, s % q);
                    let ca = a.labels[i * p + i2] as usize;
                    let cb = b.labels[j * q + j2] as usize;
                    labels.push((ca * b.cells + cb) as u32);
                }
            }
            let mut orbit = Vec::with_capacity(n);
            for i in 0..p {
                for j in 0..q {
                    orbit.push(a.orbit[i] * b.orbits + b.orbit[j]);
                }
            }
            Built {
                degree: n,
                labels,
                cells: a.cells * b.cells,
                orbit,
                orbits: a.orbits * b.orbits,
            }
        }
        GroupExpr::Wreath { inner, outer } => {
            let (h, g) = (build(inner), build(outer));
            let (p, q) = (g.degree, h.degree);
            let n = p * q;
            // Diagonal blocks: I_O ⊗ B for each outer orbit O and inner element B.
            // Off-diagonal blocks: A ⊗ 1_{O' × O''} for the off-diagonal part of
            // each outer element A and each pair of inner orbits.
            let diag_cells = g.orbits * h.cells;
            let mut labels = Vec::with_capacity(n * n);
            for r in 0..n {
                let (i, j) = (r / q, r % q);
                for s in 0..n {
                    let (i2, j2) = (s / q, s % q);
                    let l = if i == i2 {
                        g.orbit[i] * h.cells + h.labels[j * q + j2] as usize
                    } else {
                        let ca = g.labels[i * p + i2] as usize;
                        diag_cells + (ca * h.orbits + h.orbit[j]) * h.orbits + h.orbit[j2]
                    };
                    labels.push(l as u32);
                }
            }
            let mut orbit = Vec::with_capacity(n);
            for i in 0..p {
                for j in 0..q {
                    orbit.push(g.orbit[i] * h.orbits + h.orbit[j]);
                }
            }
            Built {
                degree: n,
                labels,
                // upper bound on label values; canonical relabelling compacts them
                cells: diag_cells + g.cells * h.orbits * h.orbits,
                orbit,
                orbits: g.orbits * h.orbits,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{generator_set, pair_orbits};

    fn check(text: &str) -> usize {
        let g: GroupExpr = text.parse().unwrap();
        let t = basis_from_theorem(&g, 4096).unwrap();
        let o = pair_orbits(&generator_set(&g, 4096).unwrap());
        assert_eq!(t, o, "{text}");
        assert_eq!(t.num_cells(), g.basis_dim(), "{text}");
        t.num_cells()
    }

    #[test]
    fn theorem_examples() {
        assert_eq!(check("S3 wr S3"), 3);
        assert_eq!(check("S2 + S2"), 6);
        assert_eq!(check("Z4"), 4);
        assert_eq!(check("I3"), 9);
        assert_eq!(check("(Z3 wr I2) wr S2"), check("(Z3 wr I2) wr S2"));
        check("(S2 + Z3) wr Z2");
        check("(S2 wr S2) wr (Z2 + I1)");
        check("Z2 wr (S2 + I2)");
    }

    #[test]
    fn sudoku_basis_has_18_cells() {
        assert_eq!(check("(S3 wr S3) * (S3 wr S3) * S9"), 18);
    }
}
