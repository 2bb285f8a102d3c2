use nalgebra::DMatrix;

use super::forward::axpy;
use super::{Forward, ProblemSplit, SolverConfig, SolverError, DEGENERATE_NORM};

/// Result of differentiating the forward fixed point.
#[derive(Clone, Debug)]
pub struct Backward {
    /// Adjoint columns `u_o`, one per output in split order; `u_o ⟂ v_o`.
    pub u: DMatrix<f64>,
    /// `R = −ŨᵀV` restricted to the output rows (`|𝓞| × n`, zero at
    /// `(o, o)`). The symmetric gradient is `∂ℓ/∂C = (R + Rᵀ)/2` once `R` is
    /// embedded in an `n × n` matrix.
    pub rows: DMatrix<f64>,
    /// `∂ℓ/∂v_i = −Σ_o C_oi u_o`, one column per input in split order.
    pub grad_v_in: DMatrix<f64>,
    pub sweeps: usize,
    /// False when the iteration hit its sweep limit; `u` is then the last
    /// iterate.
    pub converged: bool,
    /// The iteration stalled and `u` comes from the dense solve.
    pub dense: bool,
}

impl Backward {
    /// Adds `w · R` into the `n × n` accumulator `acc`.
    pub fn add_rows_to(&self, split: &ProblemSplit, acc: &mut DMatrix<f64>, w: f64) {
        for (b, &o) in split.outputs().iter().enumerate() {
            for s in 0..acc.ncols() {
                acc[(o, s)] += w * self.rows[(b, s)];
            }
        }
    }

    /// Dense symmetric `∂ℓ/∂C`.
    pub fn grad_c(&self, split: &ProblemSplit) -> DMatrix<f64> {
        let n = split.n();
        let mut r = DMatrix::zeros(n, n);
        self.add_rows_to(split, &mut r, 1.0);
        (&r + r.transpose()) * 0.5
    }
}

/// Gauss–Seidel solution of the adjoint system
/// `‖g_o‖ u_o + P_o Σ_{j≠o} C_oj u_j = P_o ∂ℓ/∂v_o`, `P_o = I − v_o v_oᵀ`,
/// followed by the parameter and input gradients.
///
/// `grad_out` holds `∂ℓ/∂v_o` as columns in split order.
pub fn backward(
    c: &DMatrix<f64>,
    fwd: &Forward,
    split: &ProblemSplit,
    grad_out: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<Backward, SolverError> {
    let (ins, outs) = (split.inputs(), split.outputs());
    let (k, n, no) = (fwd.v.nrows(), split.n(), outs.len());
    if c.nrows() != n || c.ncols() != n || fwd.v.ncols() != n {
        return Err(SolverError::Shape("C, V and split disagree".into()));
    }
    if grad_out.nrows() != k || grad_out.ncols() != no {
        return Err(SolverError::Shape(format!(
            "output gradient is {}x{}, expected {k}x{no}",
            grad_out.nrows(),
            grad_out.ncols()
        )));
    }
    let c_oo = DMatrix::from_fn(no, no, |a, b| c[(outs[a], outs[b])]);
    let v_o = fwd.v.select_columns(outs);

    // column-major storage: column b of u is u_buf[b*k..(b+1)*k]
    let mut u_buf = vec![0.0; k * no];
    let g_buf = grad_out.as_slice();
    let v_buf = v_o.as_slice();
    let mut t = vec![0.0; k];
    let mut sweeps = 0;
    let mut converged = no == 0 || grad_out.iter().all(|&x| x == 0.0);
    while !converged && sweeps < cfg.backward_max_sweeps {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for b in 0..no {
            let gn = fwd.gnorm[b];
            if gn < DEGENERATE_NORM {
                continue;
            }
            t.copy_from_slice(&g_buf[b * k..(b + 1) * k]);
            for (j, &cjb) in c_oo.column(b).as_slice().iter().enumerate() {
                if j != b && cjb != 0.0 {
                    axpy(-cjb, &u_buf[j * k..(j + 1) * k], &mut t);
                }
            }
            let vb = &v_buf[b * k..(b + 1) * k];
            let dot: f64 = vb.iter().zip(&t).map(|(a, b)| a * b).sum();
            let mut change = 0.0;
            for ((ui, &tp), &vp) in u_buf[b * k..(b + 1) * k].iter_mut().zip(&t).zip(vb) {
                let new = (tp - dot * vp) / gn;
                change += (new - *ui) * (new - *ui);
                *ui = new;
            }
            delta = delta.max(change.sqrt());
        }
        converged = delta < cfg.backward_eps;
    }
    let mut dense = false;
    if !converged && k * no <= cfg.dense_fallback {
        if let Some(u) = dense_adjoint(&c_oo, &v_o, &fwd.gnorm, grad_out) {
            u_buf = u;
            converged = true;
            dense = true;
        }
    }
    let u = DMatrix::from_vec(k, no, u_buf);

    let mut rows = -(u.tr_mul(&fwd.v));
    for (b, &o) in outs.iter().enumerate() {
        rows[(b, o)] = 0.0;
    }
    let c_oi = DMatrix::from_fn(no, ins.len(), |a, b| c[(outs[a], ins[b])]);
    let grad_v_in = -(&u * c_oi);

    Ok(Backward {
        u,
        rows,
        grad_v_in,
        sweeps,
        converged,
        dense,
    })
}

/// Minimum-norm solution of the stacked adjoint system `P M P u = P ∂ℓ/∂v`
/// with `M = diag(‖g_o‖) ⊗ I_k + C'_{𝓞𝓞} ⊗ I_k`, for when Gauss–Seidel
/// stalls. That happens near saddles and flat directions of the forward
/// objective, where `P M P` is indefinite or singular. Degenerate outputs
/// keep `u_o = 0` as in the iteration. Returns `None` if the system is
/// inconsistent.
fn dense_adjoint(
    c_oo: &DMatrix<f64>,
    v_o: &DMatrix<f64>,
    gnorm: &[f64],
    grad_out: &DMatrix<f64>,
) -> Option<Vec<f64>> {
    let k = v_o.nrows();
    let active: Vec<usize> = (0..gnorm.len()).filter(|&b| gnorm[b] >= DEGENERATE_NORM).collect();
    let d = active.len() * k;
    let proj = |b: usize, x: &[f64]| -> Vec<f64> {
        let v = v_o.column(b);
        let dot: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
        x.iter().zip(v.iter()).map(|(xi, vi)| xi - dot * vi).collect()
    };
    // P M P assembled block by block: P_a (C_ab or ‖g_a‖) P_b
    let mut a_mat = faer::Mat::<f64>::zeros(d, d);
    for (ia, &a) in active.iter().enumerate() {
        let va = v_o.column(a);
        for (ib, &b) in active.iter().enumerate() {
            let coef = if a == b { gnorm[a] } else { c_oo[(a, b)] };
            if coef == 0.0 {
                continue;
            }
            let vb = v_o.column(b);
            let ab: f64 = va.dot(&vb);
            for r in 0..k {
                for s in 0..k {
                    // (I − v_a v_aᵀ)(I − v_b v_bᵀ) entry (r, s)
                    let id = if r == s { 1.0 } else { 0.0 };
                    let e = id - va[r] * va[s] - vb[r] * vb[s] + va[r] * ab * vb[s];
                    a_mat[(ia * k + r, ib * k + s)] = coef * e;
                }
            }
        }
    }
    let mut rhs = vec![0.0; d];
    for (ia, &a) in active.iter().enumerate() {
        rhs[ia * k..(ia + 1) * k].copy_from_slice(&proj(a, grad_out.column(a).as_slice()));
    }
    let svd = a_mat.thin_svd().ok()?;
    let s = svd.S().column_vector();
    let (u, v) = (svd.U(), svd.V());
    let smax = (0..s.nrows()).map(|i| s[i]).fold(0.0, f64::max);
    let cut = smax * 1e-10;
    let mut x = vec![0.0; d];
    for i in 0..s.nrows() {
        if s[i] <= cut {
            continue;
        }
        let coef: f64 = (0..d).map(|r| u[(r, i)] * rhs[r]).sum::<f64>() / s[i];
        for (r, xr) in x.iter_mut().enumerate() {
            *xr += coef * v[(r, i)];
        }
    }
    // accept only a genuine solution
    let scale = rhs.iter().map(|r| r * r).sum::<f64>().sqrt().max(1e-300);
    let resid = (0..d)
        .map(|r| {
            let ax: f64 = (0..d).map(|c| a_mat[(r, c)] * x[c]).sum();
            (ax - rhs[r]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    if !(resid <= 1e-8 * scale) {
        return None;
    }
    let mut out = vec![0.0; gnorm.len() * k];
    for (ia, &a) in active.iter().enumerate() {
        out[a * k..(a + 1) * k].copy_from_slice(&x[ia * k..(ia + 1) * k]);
    }
    Some(out)
}
