//! Rearrangement search for wreath blocks.
//!
//! In a matrix equivariant under `H ≀ G` with `H` on `q` points, two points of
//! the same inner block have rows (and columns) that agree everywhere except
//! on the other points of that block, while points of different blocks
//! disagree on at least `2q - 2` positions. Grouping points by that relation
//! recovers the inner blocks whatever order they arrive in.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::group::generators::UnionFind;

/// Largest block size for which exhaustive alignment is attempted.
const ALIGN_MAX: usize = 6;

/// Number of positions `k ∉ {i, j}` where row `i` differs from row `j` or
/// column `i` differs from column `j`, counting up to `limit + 1`.
fn disagreements(m: &DMatrix<f64>, i: usize, j: usize, tol: f64, limit: usize) -> usize {
    let mut count = 0;
    for k in 0..m.nrows() {
        if k == i || k == j {
            continue;
        }
        if (m[(i, k)] - m[(j, k)]).abs() > tol || (m[(k, i)] - m[(k, j)]).abs() > tol {
            count += 1;
            if count > limit {
                break;
            }
        }
    }
    count
}

/// Splits `points` into classes of exactly `q` interchangeable points, or
/// returns `None` if the relation does not produce such a split.
pub(crate) fn twin_classes(
    m: &DMatrix<f64>,
    points: &[usize],
    q: usize,
    tol: f64,
) -> Option<Vec<Vec<usize>>> {
    let b = points.len();
    if q < 2 || b % q != 0 {
        return None;
    }
    let limit = q - 2;
    let mut uf = UnionFind::new(b);
    let mut degree = vec![0usize; b];
    for x in 0..b {
        for y in x + 1..b {
            if disagreements(m, points[x], points[y], tol, limit) <= limit {
                uf.union(x, y);
                degree[x] += 1;
                degree[y] += 1;
            }
        }
    }
    // every class must be a clique of size q
    if degree.iter().any(|&d| d != q - 1) {
        return None;
    }
    let (labels, count) = uf.labels();
    let mut classes = vec![Vec::with_capacity(q); count];
    for (x, &l) in labels.iter().enumerate() {
        classes[l as usize].push(points[x]);
    }
    if classes.iter().any(|c| c.len() != q) {
        return None;
    }
    Some(classes)
}

/// Reorders `other` so that its diagonal block differs from the diagonal
/// block of `reference` by a constant, if such an order exists among those
/// tried.
pub(crate) fn align(
    m: &DMatrix<f64>,
    reference: &[usize],
    other: &[usize],
    tol: f64,
) -> Option<Vec<usize>> {
    let q = reference.len();
    if other.len() != q {
        return None;
    }
    let fits = |cand: &[usize]| {
        let diffs: Vec<f64> = (0..q)
            .flat_map(|x| (0..q).map(move |y| (x, y)))
            .map(|(x, y)| m[(cand[x], cand[y])] - m[(reference[x], reference[y])])
            .collect();
        let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
        diffs.iter().all(|d| (d - mean).abs() <= tol)
    };
    if fits(other) {
        return Some(other.to_vec());
    }
    if q > ALIGN_MAX {
        return None;
    }
    other
        .iter()
        .copied()
        .permutations(q)
        .find(|cand| fits(cand))
}

/// Groups aligned classes whose diagonal blocks agree up to a constant.
pub(crate) fn group_aligned(
    m: &DMatrix<f64>,
    atoms: Vec<Vec<usize>>,
    tol: f64,
) -> Vec<Vec<Vec<usize>>> {
    let mut groups: Vec<Vec<Vec<usize>>> = Vec::new();
    'atoms: for atom in atoms {
        for g in groups.iter_mut() {
            if atom.len() > 1 {
                if let Some(aligned) = align(m, &g[0], &atom, tol) {
                    g.push(aligned);
                    continue 'atoms;
                }
            }
        }
        groups.push(vec![atom]);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{conjugated_basis, GroupExpr, Perm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inner_blocks_of_a_permuted_wreath() {
        let g: GroupExpr = "S3 wr S4".parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = Perm::random(12, &mut rng);
        let part = conjugated_basis(&g, &sigma).unwrap();
        let m = part.symmetrize().partition().random_equivariant(2);
        let pts: Vec<usize> = (0..12).collect();
        let classes = twin_classes(&m, &pts, 3, 1e-9).unwrap();
        assert_eq!(classes.len(), 4);
        for c in &classes {
            // σ maps block b of the unpermuted group onto the class
            let blocks: Vec<usize> = c.iter().map(|&x| sigma.inverse().apply(x) / 3).collect();
            assert!(blocks.iter().all(|&b| b == blocks[0]), "{c:?}");
        }
        assert!(twin_classes(&m, &pts, 2, 1e-9).is_none());
        assert!(twin_classes(&m, &pts, 4, 1e-9).is_none());
    }

    #[test]
    fn alignment_finds_matching_order() {
        let g: GroupExpr = "Z4 wr S2".parse().unwrap();
        let part = conjugated_basis(&g, &Perm::identity(8)).unwrap();
        let m = part.random_equivariant(5);
        // reversed order of the second block breaks the cyclic pattern
        let found = align(&m, &[0, 1, 2, 3], &[7, 6, 5, 4], 1e-9).unwrap();
        let check = |c: &[usize]| {
            (0..4).all(|x| (0..4).all(|y| (m[(c[x], c[y])] - m[(x, y)]).abs() < 1e-9))
        };
        assert!(check(&found));
    }
}
