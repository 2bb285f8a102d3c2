//! Partitions of `[n] × [n]` into cells. Each cell's 0/1 indicator is one
//! element of an equivariant basis, and averaging over cells is the Reynolds
//! projection onto the span of those indicators.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::generators::{GeneratorSet, UnionFind};
use super::perm::Perm;
use super::GroupError;

/// Cell labels of every pair `(i, j)`, stored row-major. Labels are
/// canonical: cells are numbered by the position of their smallest pair in
/// row-major order, so two partitions with the same cells compare equal.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct PairPartition {
    degree: usize,
    cell_id: Vec<u32>,
    num_cells: usize,
}

impl std::fmt::Debug for PairPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PairPartition {{ degree: {}, num_cells: {} }}",
            self.degree, self.num_cells
        )
    }
}

impl PairPartition {
    /// Builds a partition from arbitrary labels, relabelling canonically.
    pub fn from_labels(degree: usize, labels: &[u32]) -> Result<Self, GroupError> {
        if labels.len() != degree * degree {
            return Err(GroupError::DegreeMismatch {
                expected: degree * degree,
                found: labels.len(),
            });
        }
        let mut map = std::collections::HashMap::new();
        let mut cell_id = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = map.len() as u32;
            cell_id.push(*map.entry(l).or_insert(next));
        }
        Ok(PairPartition {
            degree,
            cell_id,
            num_cells: map.len(),
        })
    }

    /// Labels must already be canonical.
    pub(crate) fn from_canonical(degree: usize, cell_id: Vec<u32>, num_cells: usize) -> Self {
        debug_assert_eq!(cell_id.len(), degree * degree);
        PairPartition {
            degree,
            cell_id,
            num_cells,
        }
    }

    /// Every pair in its own cell: the basis of the trivial group.
    pub fn singletons(n: usize) -> Self {
        PairPartition {
            degree: n,
            cell_id: (0..(n * n) as u32).collect(),
            num_cells: n * n,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> usize {
        self.cell_id[i * self.degree + j] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.cell_id
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.num_cells];
        for &c in &self.cell_id {
            sizes[c as usize] += 1;
        }
        sizes
    }

    /// Flat row-major pair indices of each cell.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_cells];
        for (idx, &c) in self.cell_id.iter().enumerate() {
            out[c as usize].push(idx);
        }
        out
    }

    /// 0/1 indicator matrix of one cell.
    pub fn indicator(&self, cell: usize) -> DMatrix<f64> {
        let n = self.degree;
        DMatrix::from_fn(n, n, |i, j| if self.cell(i, j) == cell { 1.0 } else { 0.0 })
    }

    /// Point orbits read off the diagonal cells. Orbit labels are numbered
    /// by first appearance.
    pub fn point_orbits(&self) -> Vec<usize> {
        let n = self.degree;
        let mut map = std::collections::HashMap::new();
        (0..n)
            .map(|i| {
                let next = map.len();
                *map.entry(self.cell(i, i)).or_insert(next)
            })
            .collect()
    }

    pub fn num_point_orbits(&self) -> usize {
        self.point_orbits().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_transpose_closed(&self) -> bool {
        let n = self.degree;
        (0..n).all(|i| (0..n).all(|j| self.cell(i, j) == self.cell(j, i)))
    }

    /// True when every generator maps every pair into its own cell.
    pub fn is_invariant_under(&self, gs: &GeneratorSet) -> bool {
        let n = self.degree;
        gs.degree() == n
            && gs.gens().iter().all(|g| {
                (0..n).all(|i| (0..n).all(|j| self.cell(i, j) == self.cell(g.apply(i), g.apply(j))))
            })
    }

    fn check_matrix(&self, m: &DMatrix<f64>) -> Result<(), GroupError> {
        if m.nrows() != self.degree || m.ncols() != self.degree {
            return Err(GroupError::DegreeMismatch {
                expected: self.degree,
                found: if m.nrows() != self.degree { m.nrows() } else { m.ncols() },
            });
        }
        Ok(())
    }

    /// Per-cell means of `m`.
    pub fn cell_means(&self, m: &DMatrix<f64>) -> Result<Vec<f64>, GroupError> {
        self.check_matrix(m)?;
        let n = self.degree;
        let mut sums = vec![0.0; self.num_cells];
        let mut counts = vec![0usize; self.num_cells];
        for i in 0..n {
            for j in 0..n {
                let c = self.cell(i, j);
                sums[c] += m[(i, j)];
                counts[c] += 1;
            }
        }
        Ok(sums
            .into_iter()
            .zip(counts)
            .map(|(s, c)| s / c as f64)
            .collect())
    }

    /// Matrix with `values[cell(i, j)]` at every entry.
    pub fn fill(&self, values: &[f64]) -> DMatrix<f64> {
        assert_eq!(values.len(), self.num_cells);
        let n = self.degree;
        DMatrix::from_fn(n, n, |i, j| values[self.cell(i, j)])
    }

    /// Orthogonal projection onto the span of the cell indicators: every entry
    /// is replaced by the mean of its cell. For pair-orbit partitions this is
    /// the group average `(1/|G|) Σ g M gᵀ`.
    pub fn reynolds_project(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>, GroupError> {
        let means = self.cell_means(m)?;
        Ok(self.fill(&means))
    }

    /// Frobenius distance from `m` to its projection.
    pub fn projection_distance(&self, m: &DMatrix<f64>) -> Result<f64, GroupError> {
        let means = self.cell_means(m)?;
        let n = self.degree;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = m[(i, j)] - means[self.cell(i, j)];
                acc += d * d;
            }
        }
        Ok(acc.sqrt())
    }

    /// Standard normal draw projected onto the symmetric equivariant space.
    pub fn random_equivariant(&self, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.degree;
        let draw = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        self.symmetrize()
            .partition()
            .reynolds_project(&draw)
            .expect("degree matches")
    }

    /// True iff every cell of `coarse` is a union of cells of `self`.
    pub fn is_refinement_of(&self, coarse: &PairPartition) -> Result<bool, GroupError> {
        if self.degree != coarse.degree {
            return Err(GroupError::DegreeMismatch {
                expected: self.degree,
                found: coarse.degree,
            });
        }
        let mut image = vec![u32::MAX; self.num_cells];
        for (f, c) in self.cell_id.iter().zip(&coarse.cell_id) {
            let slot = &mut image[*f as usize];
            if *slot == u32::MAX {
                *slot = *c;
            } else if *slot != *c {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Relocates cells along `sigma`: `cell'(σ(i), σ(j)) = cell(i, j)`.
    pub fn conjugate(&self, sigma: &Perm) -> Result<PairPartition, GroupError> {
        let n = self.degree;
        if sigma.degree() != n {
            return Err(GroupError::DegreeMismatch {
                expected: n,
                found: sigma.degree(),
            });
        }
        let mut labels = vec![0u32; n * n];
        for i in 0..n {
            let si = sigma.apply(i);
            for j in 0..n {
                labels[si * n + sigma.apply(j)] = self.cell_id[i * n + j];
            }
        }
        PairPartition::from_labels(n, &labels)
    }

    /// Merges each cell with its transpose image.
    pub fn symmetrize(&self) -> SymBasis {
        let n = self.degree;
        let mut uf = UnionFind::new(self.num_cells);
        for i in 0..n {
            for j in (i + 1)..n {
                uf.union(self.cell(i, j), self.cell(j, i));
            }
        }
        let (merged, _) = uf.labels();
        let labels: Vec<u32> = self.cell_id.iter().map(|&c| merged[c as usize]).collect();
        let partition = PairPartition::from_labels(n, &labels).expect("length matches");
        SymBasis::new(partition, BasisNorm::Indicator).expect("transpose closed by construction")
    }

    /// Block-diagonal combination of two partitions, with the off-diagonal
    /// blocks split by point orbits (the direct-sum rule of the basis theorem).
    pub fn direct_sum(&self, other: &PairPartition) -> PairPartition {
        let (p, q) = (self.degree, other.degree);
        let n = p + q;
        let oa = self.point_orbits();
        let ob = other.point_orbits();
        let na = oa.iter().max().map_or(0, |m| m + 1);
        let nb = ob.iter().max().map_or(0, |m| m + 1);
        let base_b = self.num_cells;
        let base_ab = base_b + other.num_cells;
        let base_ba = base_ab + na * nb;
        let mut labels = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let l = match (i < p, j < p) {
                    (true, true) => self.cell(i, j),
                    (false, false) => base_b + other.cell(i - p, j - p),
                    (true, false) => base_ab + oa[i] * nb + ob[j - p],
                    (false, true) => base_ba + oa[j] * nb + ob[i - p],
                };
                labels[i * n + j] = l as u32;
            }
        }
        PairPartition::from_labels(n, &labels).unwrap()
    }

    /// Restriction to the index set `idx` (in the given order).
    pub fn restrict(&self, idx: &[usize]) -> PairPartition {
        let k = idx.len();
        let mut labels = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                labels.push(self.cell_id[i * self.degree + j]);
            }
        }
        PairPartition::from_labels(k, &labels).unwrap()
    }
}

impl TryFrom<Vec<u32>> for PairPartition {
    type Error = GroupError;

    fn try_from(labels: Vec<u32>) -> Result<Self, Self::Error> {
        let n = (labels.len() as f64).sqrt().round() as usize;
        PairPartition::from_labels(n, &labels)
    }
}

impl From<PairPartition> for Vec<u32> {
    fn from(p: PairPartition) -> Self {
        p.cell_id
    }
}

/// Orbits of the pair action `(i, j) -> (g(i), g(j))`.
pub fn pair_orbits(gs: &GeneratorSet) -> PairPartition {
    let n = gs.degree();
    let mut uf = UnionFind::new(n * n);
    for g in gs.gens() {
        if g.is_identity() {
            continue;
        }
        let img = g.images();
        for i in 0..n {
            let gi = img[i] * n;
            for j in 0..n {
                uf.union(i * n + j, gi + img[j]);
            }
        }
    }
    let (labels, count) = uf.labels();
    PairPartition::from_canonical(n, labels, count)
}

/// How basis matrices are scaled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BasisNorm {
    /// Raw 0/1 cell indicators.
    #[default]
    Indicator,
    /// Indicators divided by `sqrt(cell size)`, giving an orthonormal basis.
    Unit,
}

/// An ordered orthogonal basis of symmetric equivariant matrices, one
/// element per transpose-closed cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SymBasis {
    partition: PairPartition,
    scale: Vec<f64>,
    norm: BasisNorm,
}

impl SymBasis {
    pub fn new(partition: PairPartition, norm: BasisNorm) -> Result<Self, GroupError> {
        if !partition.is_transpose_closed() {
            return Err(GroupError::NotSymmetric);
        }
        let scale = match norm {
            BasisNorm::Indicator => vec![1.0; partition.num_cells()],
            BasisNorm::Unit => partition
                .cell_sizes()
                .into_iter()
                .map(|s| 1.0 / (s as f64).sqrt())
                .collect(),
        };
        Ok(SymBasis {
            partition,
            scale,
            norm,
        })
    }

    pub fn with_norm(self, norm: BasisNorm) -> Self {
        SymBasis::new(self.partition, norm).unwrap()
    }

    pub fn partition(&self) -> &PairPartition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.partition.num_cells()
    }

    pub fn degree(&self) -> usize {
        self.partition.degree()
    }

    pub fn norm(&self) -> BasisNorm {
        self.norm
    }

    /// Value each basis element takes on its cell.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn element(&self, alpha: usize) -> DMatrix<f64> {
        self.partition.indicator(alpha) * self.scale[alpha]
    }

    /// `Σ θ_α B_α`.
    pub fn assemble(&self, theta: &[f64]) -> DMatrix<f64> {
        assert_eq!(theta.len(), self.dim(), "theta length must equal basis size");
        let values: Vec<f64> = theta.iter().zip(&self.scale).map(|(t, s)| t * s).collect();
        self.partition.fill(&values)
    }

    /// `⟨G, B_α⟩` for every α.
    pub fn coefficients_of_gradient(&self, grad: &DMatrix<f64>) -> Vec<f64> {
        let n = self.degree();
        let mut out = vec![0.0; self.dim()];
        for i in 0..n {
            for j in 0..n {
                out[self.partition.cell(i, j)] += grad[(i, j)];
            }
        }
        out.iter_mut().zip(&self.scale).for_each(|(o, s)| *o *= s);
        out
    }

    /// Coefficients θ with `Σ θ_α B_α` equal to the Reynolds projection of `m`.
    pub fn project_coefficients(&self, m: &DMatrix<f64>) -> Result<Vec<f64>, GroupError> {
        let means = self.partition.cell_means(m)?;
        Ok(means.iter().zip(&self.scale).map(|(v, s)| v / s).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::generators::generator_set;
    use super::super::GroupExpr;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn orbits_of(text: &str) -> PairPartition {
        let g: GroupExpr = text.parse().unwrap();
        pair_orbits(&generator_set(&g, 4096).unwrap())
    }

    /// All elements of a small group, by closure.
    fn elements(gs: &GeneratorSet) -> Vec<Perm> {
        let mut seen = std::collections::HashSet::new();
        let mut out = vec![Perm::identity(gs.degree())];
        seen.insert(out[0].clone());
        let mut k = 0;
        while k < out.len() {
            for g in gs.gens() {
                let q = g.compose(&out[k]);
                if seen.insert(q.clone()) {
                    out.push(q);
                }
            }
            k += 1;
        }
        out
    }

    /// Pair orbits by enumerating every group element.
    fn brute_pair_orbits(gs: &GeneratorSet) -> PairPartition {
        let n = gs.degree();
        let els = elements(gs);
        let mut labels = vec![u32::MAX; n * n];
        let mut next = 0;
        for i in 0..n {
            for j in 0..n {
                if labels[i * n + j] != u32::MAX {
                    continue;
                }
                for g in &els {
                    labels[g.apply(i) * n + g.apply(j)] = next;
                }
                next += 1;
            }
        }
        PairPartition::from_labels(n, &labels).unwrap()
    }

    fn group_average(gs: &GeneratorSet, m: &DMatrix<f64>) -> DMatrix<f64> {
        let els = elements(gs);
        let mut acc = DMatrix::zeros(m.nrows(), m.ncols());
        for g in &els {
            let p = g.to_matrix();
            acc += &p * m * p.transpose();
        }
        acc / els.len() as f64
    }

    #[test]
    fn pair_orbits_match_enumeration() {
        for text in ["S3", "Z4", "S2 + S2", "Z3 wr S2", "S2 * Z3", "I3"] {
            let g: GroupExpr = text.parse().unwrap();
            let gs = generator_set(&g, 4096).unwrap();
            assert_eq!(pair_orbits(&gs), brute_pair_orbits(&gs), "{text}");
        }
        assert_eq!(orbits_of("S3").num_cells(), 2);
        assert_eq!(orbits_of("Z4").num_cells(), 4);
    }

    #[test]
    fn reynolds_matches_group_average() {
        let g: GroupExpr = "Z3".parse().unwrap();
        let gs = generator_set(&g, 4096).unwrap();
        let p = pair_orbits(&gs);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0]);
        let proj = p.reynolds_project(&m).unwrap();
        assert_abs_diff_eq!(proj, group_average(&gs, &m), epsilon = 1e-12);
        // circulant with the three diagonal-band means
        assert_abs_diff_eq!(proj[(0, 0)], (1.0 + 5.0 + 10.0) / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(proj[(0, 1)], (2.0 + 6.0 + 7.0) / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(proj[(0, 2)], (3.0 + 4.0 + 8.0) / 3.0, epsilon = 1e-12);

        let s2 = orbits_of("S2");
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 5.0]);
        let proj = s2.reynolds_project(&m).unwrap();
        assert_eq!(proj, DMatrix::from_row_slice(2, 2, &[3.0, 2.5, 2.5, 3.0]));
    }

    #[test]
    fn symmetrize_examples() {
        let z3 = orbits_of("Z3").symmetrize();
        assert_eq!(z3.dim(), 2);
        assert_eq!(orbits_of("S3").symmetrize().dim(), 2);
        let i2 = PairPartition::singletons(2).symmetrize();
        assert_eq!(i2.dim(), 3);
    }

    #[test]
    fn random_equivariant_trivial_group_is_symmetric_draw() {
        let p = PairPartition::singletons(4);
        let m = p.random_equivariant(11);
        assert_eq!(m, p.random_equivariant(11));
        assert_abs_diff_eq!(m.clone(), m.transpose(), epsilon = 0.0);
        assert!(p.symmetrize().partition().projection_distance(&m).unwrap() < 1e-12);
    }

    #[test]
    fn refinement_and_conjugation() {
        let z4 = orbits_of("Z4");
        let s4 = orbits_of("S4");
        assert!(z4.is_refinement_of(&s4).unwrap());
        assert!(!s4.is_refinement_of(&z4).unwrap());
        assert!(PairPartition::singletons(4).is_refinement_of(&z4).unwrap());
        assert!(z4.is_refinement_of(&z4).unwrap());

        let p = orbits_of("S2 + S2");
        let sigma = Perm::from_images(vec![2, 0, 3, 1]).unwrap();
        let c = p.conjugate(&sigma).unwrap();
        assert_eq!(c.num_cells(), 6);
        let gs = generator_set(&"S2 + S2".parse().unwrap(), 64).unwrap();
        assert_eq!(c, pair_orbits(&gs.conjugate(&sigma).unwrap()));
        assert_eq!(c.conjugate(&sigma.inverse()).unwrap(), p);
        assert_eq!(p.conjugate(&Perm::identity(4)).unwrap(), p);
    }

    #[test]
    fn direct_sum_matches_generator_orbits() {
        let a = orbits_of("Z3");
        let b = orbits_of("S2 * S2");
        assert_eq!(a.direct_sum(&b), orbits_of("Z3 + S2 * S2"));
    }

    #[test]
    fn json_is_a_flat_label_array() {
        let p = orbits_of("S2");
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, "[0,1,1,0]");
        let back: PairPartition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn unit_norm_basis_is_orthonormal() {
        let b = orbits_of("S2 wr Z3").symmetrize().with_norm(BasisNorm::Unit);
        for a in 0..b.dim() {
            for c in 0..b.dim() {
                let ip = b.element(a).dot(&b.element(c));
                assert_abs_diff_eq!(ip, if a == c { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
        let theta: Vec<f64> = (0..b.dim()).map(|x| x as f64 * 0.5 - 1.0).collect();
        let c = b.assemble(&theta);
        let back = b.project_coefficients(&c).unwrap();
        for (x, y) in theta.iter().zip(&back) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }
}
