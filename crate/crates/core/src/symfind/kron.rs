//! Kronecker and wreath factor detection.

use nalgebra::DMatrix;

use super::{entry_tol, find, SymFindConfig, SymFindError, Stats};
use crate::group::{GroupExpr, Perm};

/// Van Loan rearrangement:
/// `M̂[i' p + i, j' q + j] = M[i q + j, i' q + j']`.
///
/// It maps `X ⊗ Y` to `vec(X) vec(Y)ᵀ` with column-major `vec`.
pub fn rearrange_hat(m: &DMatrix<f64>, p: usize, q: usize) -> Result<DMatrix<f64>, SymFindError> {
    check_shape(m, p * q)?;
    let mut out = DMatrix::zeros(p * p, q * q);
    for i in 0..p {
        for i2 in 0..p {
            for j in 0..q {
                for j2 in 0..q {
                    out[(i2 * p + i, j2 * q + j)] = m[(i * q + j, i2 * q + j2)];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`rearrange_hat`].
pub fn rearrange_hat_inverse(
    mh: &DMatrix<f64>,
    p: usize,
    q: usize,
) -> Result<DMatrix<f64>, SymFindError> {
    if mh.nrows() != p * p || mh.ncols() != q * q {
        return Err(SymFindError::Shape {
            rows: mh.nrows(),
            cols: mh.ncols(),
            expected: format!("{}x{}", p * p, q * q),
        });
    }
    let mut out = DMatrix::zeros(p * q, p * q);
    for i in 0..p {
        for i2 in 0..p {
            for j in 0..q {
                for j2 in 0..q {
                    out[(i * q + j, i2 * q + j2)] = mh[(i2 * p + i, j2 * q + j)];
                }
            }
        }
    }
    Ok(out)
}

fn check_shape(m: &DMatrix<f64>, n: usize) -> Result<(), SymFindError> {
    if m.nrows() != n || m.ncols() != n {
        return Err(SymFindError::Shape {
            rows: m.nrows(),
            cols: m.ncols(),
            expected: format!("{n}x{n}"),
        });
    }
    Ok(())
}

/// The two factors of `M = A ⊗ 𝟙_q + I_p ⊗ B`.
#[derive(Clone, Debug)]
pub struct WreathParts {
    /// `p × p`; its diagonal sums to zero.
    pub a: DMatrix<f64>,
    /// `q × q`.
    pub b: DMatrix<f64>,
}

impl WreathParts {
    pub fn assemble(&self) -> DMatrix<f64> {
        let (p, q) = (self.a.nrows(), self.b.nrows());
        DMatrix::from_fn(p * q, p * q, |r, c| {
            let (i, j) = (r / q, r % q);
            let (i2, j2) = (c / q, c % q);
            self.a[(i, i2)] + if i == i2 { self.b[(j, j2)] } else { 0.0 }
        })
    }
}

/// Tests whether every off-diagonal `q × q` block and every difference of
/// diagonal blocks is constant within `tol`, and if so splits `M` into
/// `A ⊗ 𝟙_q + I_p ⊗ B`.
///
/// The shift ambiguity `(A + cI, B − c𝟙)` is fixed by making the diagonal of
/// `A` sum to zero; when all diagonal blocks agree the diagonal of `A` is zero.
pub fn wreath_split(m: &DMatrix<f64>, p: usize, q: usize, tol: f64) -> Option<WreathParts> {
    if m.nrows() != p * q || m.ncols() != p * q || p == 0 || q == 0 {
        return None;
    }
    let block = |i: usize, j: usize| m.view((i * q, j * q), (q, q));
    let qq = (q * q) as f64;
    let mut a = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let blk = block(i, j);
            let mean = blk.sum() / qq;
            if blk.iter().any(|x| (x - mean).abs() > tol) {
                return None;
            }
            a[(i, j)] = mean;
        }
    }
    let first = block(0, 0);
    for i in 1..p {
        let diff = block(i, i) - first;
        let mean = diff.sum() / qq;
        if diff.iter().any(|x| (x - mean).abs() > tol) {
            return None;
        }
    }
    let mut b = DMatrix::zeros(q, q);
    for i in 0..p {
        b += block(i, i);
    }
    b /= p as f64;
    for i in 0..p {
        a[(i, i)] = (block(i, i) - &b).sum() / qq;
    }
    Some(WreathParts { a, b })
}

/// Looks for `M ≈ X ⊗ Y` (or a wreath form) with `X` of size `p × p`, and
/// returns the product of the groups found for the two factors.
pub fn prod_find(m: &DMatrix<f64>, p: usize, cfg: &SymFindConfig) -> Option<(GroupExpr, Perm)> {
    let mut stats = Stats::default();
    prod_find_inner(m, p, cfg, 0, &mut stats)
}

/// Singular values of `M̂`, largest first.
pub fn kronecker_spectrum(m: &DMatrix<f64>, p: usize) -> Result<Vec<f64>, SymFindError> {
    let q = m.nrows() / p.max(1);
    let mh = rearrange_hat(m, p, q)?;
    Ok(svd_desc(&mh).map(|t| t.s).unwrap_or_default())
}

/// Thin SVD with singular values in decreasing order.
pub struct SvdTriplets {
    pub s: Vec<f64>,
    /// Left singular vectors as columns.
    pub u: DMatrix<f64>,
    /// Right singular vectors as columns.
    pub v: DMatrix<f64>,
}

/// Thin SVD through faer. nalgebra 0.33's SVD returns wrong factors for a
/// sizeable share of exactly low-rank inputs, which is the typical
/// rearranged Kronecker matrix.
pub fn svd_desc(m: &DMatrix<f64>) -> Option<SvdTriplets> {
    if m.is_empty() || m.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let f = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let svd = f.thin_svd().ok()?;
    let sv = svd.S().column_vector();
    let r = sv.nrows();
    let (u, v) = (svd.U(), svd.V());
    Some(SvdTriplets {
        s: (0..r).map(|i| sv[i]).collect(),
        u: DMatrix::from_fn(m.nrows(), r, |i, j| u[(i, j)]),
        v: DMatrix::from_fn(m.ncols(), r, |i, j| v[(i, j)]),
    })
}

pub(crate) fn prod_find_inner(
    m: &DMatrix<f64>,
    p: usize,
    cfg: &SymFindConfig,
    depth: usize,
    stats: &mut Stats,
) -> Option<(GroupExpr, Perm)> {
    let n = m.nrows();
    if p <= 1 || p >= n || n % p != 0 {
        return None;
    }
    let q = n / p;
    let mh = rearrange_hat(m, p, q).ok()?;
    let svd = svd_desc(&mh)?;
    let s1 = svd.s[0];
    if !(s1 > 0.0) {
        return None;
    }
    let gamma = svd.s.iter().filter(|&&x| x >= s1 / 5.0).count();
    if gamma > cfg.gamma_max {
        return None;
    }

    // a wreath form is a rank-two rearrangement, but its second singular
    // value can fall below the s₁/5 cut, so rank one is tested as well
    if gamma <= 2 {
        if let Some(parts) = wreath_split(m, p, q, entry_tol(m, cfg)) {
            let (g, sg, _) = find(&parts.a, cfg, depth + 1, stats, None);
            let (h, sh, _) = find(&parts.b, cfg, depth + 1, stats, None);
            if !(g.is_trivial() && h.is_trivial()) {
                return Some((GroupExpr::wreath(h, g), sg.kron(&sh)));
            }
        }
    }

    let root = s1.sqrt();
    let x1 = DMatrix::from_column_slice(p, p, (svd.u.column(0) * root).as_slice());
    let y1 = DMatrix::from_column_slice(q, q, (svd.v.column(0) * root).as_slice());
    let (h, sh, _) = find(&x1, cfg, depth + 1, stats, None);
    let (k, sk, _) = find(&y1, cfg, depth + 1, stats, None);
    if h.is_trivial() && k.is_trivial() {
        return None;
    }
    Some((GroupExpr::product(h, k), sh.kron(&sk)))
}
