//! Discovery of a grammar group `G` and permutation `σ` such that a matrix
//! is approximately `{σ g σ⁻¹ : g ∈ G}`-equivariant.
//!
//! The search follows a fixed candidate list: the symmetric group, the
//! trivial group, the cyclic group, a direct-sum split found by block
//! clustering, and Kronecker / wreath factorisations for every divisor of the
//! dimension. The admissible candidate with the smallest equivariant basis
//! wins.

mod kron;
mod sum;
mod twins;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{basis_from_theorem, GroupExpr, PairPartition, Perm};

pub use kron::{
    kronecker_spectrum, prod_find, rearrange_hat, rearrange_hat_inverse, svd_desc, wreath_split,
    SvdTriplets, WreathParts,
};
pub use sum::sum_find;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymFindError {
    #[error("matrix is {rows}x{cols}, expected {expected}")]
    Shape {
        rows: usize,
        cols: usize,
        expected: String,
    },
}

/// Tolerances for the discovery search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymFindConfig {
    /// Relative entry-clustering tolerance; see [`ToleranceScale`].
    pub lambda1: f64,
    /// Threshold on the projection distance, in the units of the input.
    /// Callers holding matrices of arbitrary scale normalize first.
    pub lambda2: f64,
    /// Largest Kronecker rank accepted by the factor search.
    pub gamma_max: usize,
    /// Recursion depth cap.
    pub max_depth: usize,
    /// Number of alternative first-swap choices tried per block.
    pub backtrack_budget: usize,
    #[serde(default)]
    pub tolerance_scale: ToleranceScale,
}

/// What `λ₁ ‖M‖_F` is divided by to get the entrywise tolerance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToleranceScale {
    /// `m`: a tenth of the RMS entry at `λ₁ = 0.1`.
    #[default]
    Entry,
    /// `√m`: a tenth of the RMS row norm. Tolerates more noise on mid-sized
    /// matrices, but merges distinct values on small ones.
    Row,
}

impl Default for SymFindConfig {
    fn default() -> Self {
        SymFindConfig {
            lambda1: 0.1,
            lambda2: 0.4,
            gamma_max: 8,
            max_depth: 12,
            backtrack_budget: 64,
            tolerance_scale: ToleranceScale::Entry,
        }
    }
}

impl SymFindConfig {
    /// `λ₂` keyed by the number of corrupted entries per training example.
    pub fn for_corruption(level: usize) -> Self {
        let lambda2 = match level {
            0 => 0.4,
            1 => 0.5,
            2 => 0.55,
            _ => 0.6,
        };
        SymFindConfig {
            lambda2,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda1 > 0.0 && self.lambda1 < 1.0) {
            return Err(format!("lambda1 must lie in (0, 1), got {}", self.lambda1));
        }
        if self.lambda2 <= 0.0 || self.lambda2.is_nan() {
            return Err(format!("lambda2 must be positive, got {}", self.lambda2));
        }
        if self.gamma_max < 2 {
            return Err(format!("gamma_max must be at least 2, got {}", self.gamma_max));
        }
        Ok(())
    }
}

/// One entry of the candidate list of the top-level call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub source: String,
    pub expr: String,
    pub sigma: Vec<usize>,
    pub dim: usize,
    pub distance: f64,
}

/// Result of a discovery run.
#[derive(Clone, Debug)]
pub struct SymFindResult {
    pub expr: GroupExpr,
    pub sigma: Perm,
    /// Projection distance of the input to the winner's space.
    pub distance: f64,
    pub candidates: Vec<Candidate>,
    /// Number of blocks where the backtracking budget ran out.
    pub budget_hits: usize,
}

impl SymFindResult {
    /// Pair partition of the discovered conjugated group.
    pub fn partition(&self) -> PairPartition {
        let d = self.expr.degree();
        basis_from_theorem(&self.expr, d)
            .and_then(|p| p.conjugate(&self.sigma))
            .expect("discovered expression matches its permutation")
    }
}

#[derive(Default)]
pub(crate) struct Stats {
    pub budget_hits: usize,
}

/// Runs the discovery search on a square matrix.
pub fn sym_find(m: &DMatrix<f64>, cfg: &SymFindConfig) -> SymFindResult {
    assert!(m.is_square(), "sym_find needs a square matrix");
    let mut stats = Stats::default();
    let mut table = Vec::new();
    let (expr, sigma, distance) = find(m, cfg, 0, &mut stats, Some(&mut table));
    SymFindResult {
        expr,
        sigma,
        distance,
        candidates: table,
        budget_hits: stats.budget_hits,
    }
}

/// `M / ‖M‖_F`, or `M` itself when the norm vanishes.
pub fn normalized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let norm = m.norm();
    if norm > 0.0 && norm.is_finite() {
        m / norm
    } else {
        m.clone()
    }
}

/// Entrywise clustering tolerance, `λ₁ ‖M‖_F` divided by `m` or `√m`.
pub(crate) fn entry_tol(m: &DMatrix<f64>, cfg: &SymFindConfig) -> f64 {
    let n = m.nrows() as f64;
    let scale = match cfg.tolerance_scale {
        ToleranceScale::Entry => n,
        ToleranceScale::Row => n.sqrt(),
    };
    cfg.lambda1 * m.norm() / scale
}

/// Projection distance of `m` to the space of `group(expr, sigma)`.
pub fn candidate_distance(m: &DMatrix<f64>, expr: &GroupExpr, sigma: &Perm) -> f64 {
    let p = basis_from_theorem(expr, expr.degree())
        .and_then(|p| p.conjugate(sigma))
        .expect("candidate degree matches matrix");
    p.projection_distance(m).expect("degree matches")
}

pub(crate) fn find(
    m: &DMatrix<f64>,
    cfg: &SymFindConfig,
    depth: usize,
    stats: &mut Stats,
    mut table: Option<&mut Vec<Candidate>>,
) -> (GroupExpr, Perm, f64) {
    let n = m.nrows();
    let id = Perm::identity(n);
    let mut record = |source: &str, expr: &GroupExpr, sigma: &Perm, distance: f64| {
        if let Some(t) = table.as_deref_mut() {
            t.push(Candidate {
                source: source.to_string(),
                expr: expr.to_string(),
                sigma: sigma.images().to_vec(),
                dim: expr.basis_dim(),
                distance,
            });
        }
    };

    let full = GroupExpr::Symmetric(n);
    let d_full = candidate_distance(m, &full, &id);
    record("symmetric", &full, &id, d_full);
    if d_full <= cfg.lambda2 {
        return (full, id, d_full);
    }

    let trivial = GroupExpr::Trivial(n);
    let mut cands: Vec<(GroupExpr, Perm, f64)> = vec![(trivial.clone(), id.clone(), 0.0)];
    record("trivial", &trivial, &id, 0.0);
    if n == 1 || depth >= cfg.max_depth {
        return cands.remove(0);
    }

    let cyc = GroupExpr::Cyclic(n);
    let d_cyc = candidate_distance(m, &cyc, &id);
    record("cyclic", &cyc, &id, d_cyc);
    if d_cyc <= cfg.lambda2 {
        cands.push((cyc, id.clone(), d_cyc));
    }

    let (g_sum, s_sum) = sum::sum_find_inner(m, cfg, depth, stats);
    let d_sum = candidate_distance(m, &g_sum, &s_sum);
    record("sum", &g_sum, &s_sum, d_sum);
    cands.push((g_sum, s_sum, d_sum));

    for p in 2..n {
        if n % p != 0 {
            continue;
        }
        if let Some((g, s)) = kron::prod_find_inner(m, p, cfg, depth, stats) {
            let d = candidate_distance(m, &g, &s);
            record(&format!("product p={p}"), &g, &s, d);
            cands.push((g, s, d));
        }
    }

    // argmin of basis dimension over admissible candidates; ties go to the
    // smaller distance, then to the earlier candidate
    let mut best = 0;
    for (k, c) in cands.iter().enumerate().skip(1) {
        if c.2 > cfg.lambda2 {
            continue;
        }
        let (dc, db) = (c.0.basis_dim(), cands[best].0.basis_dim());
        if dc < db || (dc == db && c.2 < cands[best].2) {
            best = k;
        }
    }
    cands.swap_remove(best)
}

/// `M'[i, j] = M[order[i], order[j]]`.
pub(crate) fn permute(m: &DMatrix<f64>, order: &[usize]) -> DMatrix<f64> {
    let n = order.len();
    DMatrix::from_fn(n, n, |i, j| m[(order[i], order[j])])
}
