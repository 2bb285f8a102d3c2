use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{ProblemSplit, SolverConfig, SolverError, DEGENERATE_NORM};

/// Converged forward state.
#[derive(Clone, Debug)]
pub struct Forward {
    /// `k × n`; inputs as given, outputs at the fixed point.
    pub v: DMatrix<f64>,
    /// `‖g_o‖` at the final iterate, one per output in split order.
    pub gnorm: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Updates skipped because `‖g_o‖` vanished.
    pub degenerate: usize,
    /// `⟨C, VᵀV⟩` after each sweep; filled only when requested.
    pub trace: Vec<f64>,
}

/// `⟨C, VᵀV⟩`.
pub fn objective(c: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
    c.component_mul(&v.tr_mul(v)).sum()
}

fn check(c_n: usize, v_in: &DMatrix<f64>, split: &ProblemSplit) -> Result<(), SolverError> {
    if c_n != split.n() || v_in.ncols() != split.n() {
        return Err(SolverError::Shape(format!(
            "parameters have {c_n} variables, split {}, inputs {}",
            split.n(),
            v_in.ncols()
        )));
    }
    if v_in.nrows() < 2 {
        return Err(SolverError::Shape("k must be at least 2".into()));
    }
    Ok(())
}

fn random_unit_columns(k: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k * count);
    for _ in 0..count {
        let col: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(col.iter().map(|x| x / norm));
    }
    out
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Mixing-method forward pass on the coupling matrix `c`.
///
/// Input columns of `v_in` must be unit vectors; its output columns are
/// ignored and replaced by seeded random unit vectors. Outputs are swept in
/// ascending index order with `v_o ← −g_o/‖g_o‖`, `g_o = V c_o − C_oo v_o`.
pub fn forward(
    c: &DMatrix<f64>,
    v_in: &DMatrix<f64>,
    split: &ProblemSplit,
    seed: u64,
    cfg: &SolverConfig,
    trace: bool,
) -> Result<Forward, SolverError> {
    if c.nrows() != c.ncols() {
        return Err(SolverError::Shape("C must be square".into()));
    }
    check(c.nrows(), v_in, split)?;
    let k = v_in.nrows();
    let (ins, outs) = (split.inputs(), split.outputs());
    let no = outs.len();

    // contribution of the fixed inputs to every g_o
    let c_io = DMatrix::from_fn(ins.len(), no, |a, b| c[(ins[a], outs[b])]);
    let v_i = v_in.select_columns(ins);
    let base = &v_i * &c_io;
    let c_oo = DMatrix::from_fn(no, no, |a, b| c[(outs[a], outs[b])]);

    let mut vo = random_unit_columns(k, no, seed);
    let mut g = vec![0.0; k];
    let mut gnorm = vec![0.0; no];
    let mut degenerate = 0;
    let mut sweeps = 0;
    let mut converged = no == 0;
    let mut history = Vec::new();

    let assemble = |v: &DMatrix<f64>, vo: &[f64]| {
        let mut full = v.clone();
        for (b, &o) in outs.iter().enumerate() {
            full.column_mut(o).copy_from_slice(&vo[b * k..(b + 1) * k]);
        }
        full
    };

    let compute_g = |vo: &[f64], b: usize, g: &mut [f64]| {
        g.copy_from_slice(base.column(b).as_slice());
        let col = c_oo.column(b);
        for (j, &cjb) in col.as_slice().iter().enumerate() {
            if j != b && cjb != 0.0 {
                axpy(cjb, &vo[j * k..(j + 1) * k], g);
            }
        }
    };

    while !converged && sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for b in 0..no {
            compute_g(&vo, b, &mut g);
            let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < DEGENERATE_NORM {
                degenerate += 1;
                continue;
            }
            let col = &mut vo[b * k..(b + 1) * k];
            let mut change = 0.0;
            for (x, gi) in col.iter_mut().zip(&g) {
                let new = -gi / norm;
                change += (new - *x) * (new - *x);
                *x = new;
            }
            delta = delta.max(change.sqrt());
        }
        if trace {
            history.push(objective(c, &assemble(v_in, &vo)));
        }
        converged = delta < cfg.eps;
    }

    for (b, gn) in gnorm.iter_mut().enumerate() {
        compute_g(&vo, b, &mut g);
        *gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    }

    Ok(Forward {
        v: assemble(v_in, &vo),
        gnorm,
        sweeps,
        converged,
        degenerate,
        trace: history,
    })
}

/// The same iteration through `Ω = V Sᵀ` with rank-one updates, for
/// `C = SᵀS`: `g_o = Ω s_o − ‖s_o‖² v_o`. Costs `O(mk)` per update instead
/// of `O(nk)`, which pays off when `m ≪ n`.
pub fn forward_lowrank(
    s: &DMatrix<f64>,
    v_in: &DMatrix<f64>,
    split: &ProblemSplit,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Forward, SolverError> {
    check(s.ncols(), v_in, split)?;
    let k = v_in.nrows();
    let outs = split.outputs();
    let mut v = v_in.clone();
    let init = random_unit_columns(k, outs.len(), seed);
    for (b, &o) in outs.iter().enumerate() {
        v.column_mut(o).copy_from_slice(&init[b * k..(b + 1) * k]);
    }
    let mut omega = &v * s.transpose();
    let sq: Vec<f64> = (0..s.ncols()).map(|o| s.column(o).norm_squared()).collect();

    let mut degenerate = 0;
    let mut sweeps = 0;
    let mut converged = outs.is_empty();
    while !converged && sweeps < cfg.max_sweeps {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        for &o in outs {
            let s_o = s.column(o);
            let g = &omega * s_o - v.column(o) * sq[o];
            let norm = g.norm();
            if norm < DEGENERATE_NORM {
                degenerate += 1;
                continue;
            }
            let new = g / -norm;
            let diff = &new - v.column(o);
            delta = delta.max(diff.norm());
            omega += &diff * s_o.transpose();
            v.column_mut(o).copy_from(&new);
        }
        converged = delta < cfg.eps;
    }
    let omega = &v * s.transpose();
    let gnorm = outs
        .iter()
        .map(|&o| (&omega * s.column(o) - v.column(o) * sq[o]).norm())
        .collect();
    Ok(Forward {
        v,
        gnorm,
        sweeps,
        converged,
        degenerate,
        trace: Vec::new(),
    })
}
