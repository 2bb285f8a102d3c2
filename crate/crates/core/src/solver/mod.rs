//! Coordinate-descent relaxation of MAXSAT and its implicit backward pass.
//!
//! Variables are unit vectors `v_1 … v_n ∈ ℝᵏ`. Given the input columns, the
//! forward pass minimises `⟨C, VᵀV⟩` over the output columns by cyclic
//! coordinate descent; the backward pass differentiates the fixed point.
//! `C` is either `SᵀS` ([`PlainParams`]) or `Σ θ_α B_α` over a symmetric
//! equivariant basis ([`SymParams`]).

mod backward;
mod checkpoint;
mod forward;
mod optim;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{BasisNorm, GroupError, GroupExpr, PairPartition, Perm, SymBasis};

pub use backward::{backward, Backward};
pub use checkpoint::{load_matrix, load_model, read_model, save_matrix, save_model, write_model};
pub use forward::{forward, forward_lowrank, objective, Forward};
pub use optim::Adam;

/// Probabilities are clamped to `[PROB_CLAMP, 1 − PROB_CLAMP]`.
pub const PROB_CLAMP: f64 = 1e-7;
/// `‖g_o‖` below this is treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid split: {0}")]
    Split(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("checkpoint format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Embedding dimension used when none is given: `⌈√(2n)⌉ + 1`.
pub fn default_k(n: usize) -> usize {
    (2.0 * n as f64).sqrt().ceil() as usize + 1
}

/// Partition of the variables into inputs and outputs.
///
/// The truth column is variable 0 and is always an input. Auxiliary
/// variables are outputs that carry no label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSplit {
    n: usize,
    input_idx: Vec<usize>,
    output_idx: Vec<usize>,
    is_aux: Vec<bool>,
}

impl ProblemSplit {
    /// `inputs` lists the given variables besides the truth column; every
    /// other variable becomes an output. `aux` must be outputs.
    pub fn new(n: usize, inputs: &[usize], aux: &[usize]) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::Split("no variables".into()));
        }
        let mut is_input = vec![false; n];
        is_input[0] = true;
        for &i in inputs {
            if i >= n {
                return Err(SolverError::Split(format!("input {i} out of range {n}")));
            }
            is_input[i] = true;
        }
        let mut is_aux = vec![false; n];
        for &a in aux {
            if a >= n || is_input[a] {
                return Err(SolverError::Split(format!("aux {a} is not an output")));
            }
            is_aux[a] = true;
        }
        let input_idx = (0..n).filter(|&i| is_input[i]).collect();
        let output_idx = (0..n).filter(|&i| !is_input[i]).collect();
        Ok(ProblemSplit {
            n,
            input_idx,
            output_idx,
            is_aux,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truth(&self) -> usize {
        0
    }

    /// Sorted, includes the truth column.
    pub fn inputs(&self) -> &[usize] {
        &self.input_idx
    }

    /// Sorted.
    pub fn outputs(&self) -> &[usize] {
        &self.output_idx
    }

    pub fn is_aux(&self, i: usize) -> bool {
        self.is_aux[i]
    }

    /// Outputs that carry a label.
    pub fn supervised(&self) -> impl Iterator<Item = usize> + '_ {
        self.output_idx.iter().copied().filter(|&o| !self.is_aux[o])
    }
}

/// Convergence settings of the forward and backward iterations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Largest column change per sweep at which the forward pass stops.
    pub eps: f64,
    pub max_sweeps: usize,
    pub backward_eps: f64,
    pub backward_max_sweeps: usize,
    /// When the backward iteration does not converge and the adjoint has at
    /// most this many unknowns (`outputs × k`), it is solved densely instead.
    #[serde(default = "default_dense_fallback")]
    pub dense_fallback: usize,
}

fn default_dense_fallback() -> usize {
    512
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-4,
            max_sweeps: 40,
            backward_eps: 1e-4,
            backward_max_sweeps: 100,
            dense_fallback: default_dense_fallback(),
        }
    }
}

impl SolverConfig {
    /// Tight settings for gradient checks.
    pub fn exact() -> Self {
        SolverConfig {
            eps: 1e-12,
            max_sweeps: 100_000,
            backward_eps: 1e-14,
            backward_max_sweeps: 100_000,
            dense_fallback: 2048,
        }
    }
}

/// `C = SᵀS` with `S` of shape `m × n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlainParams {
    pub s: DMatrix<f64>,
}

impl PlainParams {
    pub fn c(&self) -> DMatrix<f64> {
        self.s.tr_mul(&self.s)
    }
}

/// Group and conjugating permutation a symmetric basis was built from.
///
/// `expr` is a grammar expression, or the name of a group given by explicit
/// generators (currently `rubik`). `lead` and `trail` pad the group with fixed
/// points on either side, as `I_lead ⊕ G ⊕ I_trail`; this is how the truth
/// column and auxiliary variables are attached.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub expr: String,
    pub sigma: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub lead: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub trail: usize,
}

fn is_zero(x: &usize) -> bool {
    *x == 0
}

/// Named generator groups accepted in place of an expression.
pub const NAMED_GROUPS: [&str; 1] = ["rubik"];

impl GroupSpec {
    pub fn new(g: &GroupExpr, sigma: &Perm) -> Self {
        GroupSpec {
            expr: g.to_string(),
            sigma: sigma.images().to_vec(),
            lead: 0,
            trail: 0,
        }
    }

    pub fn identity(g: &GroupExpr) -> Self {
        Self::new(g, &Perm::identity(g.degree()))
    }

    /// A named generator group with identity conjugation.
    pub fn named(name: &str) -> Result<Self, SolverError> {
        let p = named_partition(name)
            .ok_or_else(|| SolverError::Shape(format!("unknown group name '{name}'")))?;
        Ok(GroupSpec {
            expr: name.to_string(),
            sigma: (0..p.degree()).collect(),
            lead: 0,
            trail: 0,
        })
    }

    pub fn padded(mut self, lead: usize, trail: usize) -> Self {
        self.lead += lead;
        self.trail += trail;
        self
    }

    /// Degree of the unpadded group.
    pub fn core_degree(&self) -> usize {
        self.sigma.len()
    }

    pub fn degree(&self) -> usize {
        self.lead + self.sigma.len() + self.trail
    }

    /// The unpadded group as an expression; `None` for named groups.
    pub fn core_expr(&self) -> Option<GroupExpr> {
        crate::group::parse_group_expr(&self.expr, usize::MAX).ok()
    }

    /// Pair partition of the padded, conjugated group (not symmetrised).
    pub fn partition(&self) -> Result<PairPartition, SolverError> {
        let sigma = Perm::from_images(self.sigma.clone())?;
        let core = match named_partition(&self.expr) {
            Some(p) => p,
            None => {
                let g = crate::group::parse_group_expr(&self.expr, usize::MAX)?;
                if sigma.degree() != g.degree() {
                    return Err(GroupError::DegreeMismatch {
                        expected: g.degree(),
                        found: sigma.degree(),
                    }
                    .into());
                }
                crate::group::basis_from_theorem(&g, g.degree())?
            }
        };
        if core.degree() != sigma.degree() {
            return Err(GroupError::DegreeMismatch {
                expected: core.degree(),
                found: sigma.degree(),
            }
            .into());
        }
        let mut p = core.conjugate(&sigma)?;
        if self.lead > 0 {
            p = PairPartition::singletons(self.lead).direct_sum(&p);
        }
        if self.trail > 0 {
            p = p.direct_sum(&PairPartition::singletons(self.trail));
        }
        Ok(p)
    }

    /// Indicator basis of the symmetrised pair partition.
    pub fn basis(&self) -> Result<SymBasis, SolverError> {
        Ok(self.partition()?.symmetrize().with_norm(BasisNorm::Indicator))
    }
}

fn named_partition(name: &str) -> Option<PairPartition> {
    match name {
        "rubik" => Some(crate::group::pair_orbits(&crate::tasks::cube_generators().combined)),
        _ => None,
    }
}

/// `C = Σ θ_α B_α`.
#[derive(Clone, Debug)]
pub struct SymParams {
    pub theta: Vec<f64>,
    pub basis: Arc<SymBasis>,
    pub group: GroupSpec,
}

impl SymParams {
    pub fn new(theta: Vec<f64>, group: GroupSpec) -> Result<Self, SolverError> {
        let basis = group.basis()?;
        Self::with_basis(theta, Arc::new(basis), group)
    }

    pub fn with_basis(
        theta: Vec<f64>,
        basis: Arc<SymBasis>,
        group: GroupSpec,
    ) -> Result<Self, SolverError> {
        if theta.len() != basis.dim() {
            return Err(SolverError::Shape(format!(
                "theta has {} entries, basis has {}",
                theta.len(),
                basis.dim()
            )));
        }
        Ok(SymParams {
            theta,
            basis,
            group,
        })
    }

    /// θ equal to the cell means of `c`, so that the assembled matrix is the
    /// Reynolds projection of `c`.
    pub fn projected(c: &DMatrix<f64>, basis: Arc<SymBasis>, group: GroupSpec) -> Result<Self, SolverError> {
        let theta = basis.project_coefficients(c)?;
        Self::with_basis(theta, basis, group)
    }
}

#[derive(Clone, Debug)]
pub enum Params {
    Plain(PlainParams),
    Sym(SymParams),
}

/// Gradient with the same layout as [`Params`].
#[derive(Clone, Debug, PartialEq)]
pub enum ParamGrad {
    Plain(DMatrix<f64>),
    Sym(Vec<f64>),
}

impl ParamGrad {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            ParamGrad::Plain(s) => s.as_slice(),
            ParamGrad::Sym(t) => t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Plain,
    Sym,
}

impl ParamKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParamKind::Plain => "plain",
            ParamKind::Sym => "sym",
        }
    }
}

/// Parameters together with what is needed to run them.
#[derive(Clone, Debug)]
pub struct Model {
    pub params: Params,
    /// Embedding dimension.
    pub k: usize,
    /// Task tag of the data the model was trained on.
    pub task: Option<String>,
    /// Number of trailing auxiliary variables.
    pub aux: usize,
}

impl Params {
    pub fn kind(&self) -> ParamKind {
        match self {
            Params::Plain(_) => ParamKind::Plain,
            Params::Sym(_) => ParamKind::Sym,
        }
    }

    /// Number of variables.
    pub fn n(&self) -> usize {
        match self {
            Params::Plain(p) => p.s.ncols(),
            Params::Sym(p) => p.basis.degree(),
        }
    }

    pub fn len(&self) -> usize {
        self.as_slice().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        match self {
            Params::Plain(p) => p.s.as_slice(),
            Params::Sym(p) => &p.theta,
        }
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        match self {
            Params::Plain(p) => p.s.as_mut_slice(),
            Params::Sym(p) => &mut p.theta,
        }
    }

    /// The coupling matrix.
    pub fn assemble_c(&self) -> DMatrix<f64> {
        match self {
            Params::Plain(p) => p.c(),
            Params::Sym(p) => assemble_c(p),
        }
    }

    /// Chain rule from `∂ℓ/∂C`, given as the row-form `R` with
    /// `∂ℓ/∂C = (R + Rᵀ)/2` (see [`Backward::add_rows_to`]).
    pub fn grad_from_rows(&self, r: &DMatrix<f64>) -> ParamGrad {
        match self {
            Params::Plain(p) => ParamGrad::Plain(&p.s * (r + r.transpose())),
            // cells are transpose-closed, so the cell sums of R and Rᵀ agree
            Params::Sym(p) => ParamGrad::Sym(p.basis.coefficients_of_gradient(r)),
        }
    }
}

/// `Σ θ_α B_α`.
pub fn assemble_c(params: &SymParams) -> DMatrix<f64> {
    params.basis.assemble(&params.theta)
}

/// Random initial parameters. Plain: `S` entries `N(0, scale/√n)` with `m`
/// rows. Symmetric: `θ` entries `N(0, scale/√d)`.
pub fn init_plain(n: usize, m: usize, seed: u64, scale: f64) -> PlainParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Normal::new(0.0, scale / (n as f64).sqrt()).expect("finite scale");
    PlainParams {
        s: DMatrix::from_fn(m, n, |_, _| dist.sample(&mut rng)),
    }
}

pub fn init_sym(basis: Arc<SymBasis>, group: GroupSpec, seed: u64, scale: f64) -> SymParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.dim();
    let dist = Normal::new(0.0, scale / (d as f64).sqrt()).expect("finite scale");
    let theta = (0..d).map(|_| dist.sample(&mut rng)).collect();
    SymParams {
        theta,
        basis,
        group,
    }
}

/// Input embedding: truth column `e₁`, given variables `±e₁` by their bit,
/// outputs zero (they are initialised by the forward pass).
pub fn embed_inputs(bits: &[bool], split: &ProblemSplit, k: usize) -> Result<DMatrix<f64>, SolverError> {
    if bits.len() != split.n() {
        return Err(SolverError::Shape(format!(
            "{} bits for {} variables",
            bits.len(),
            split.n()
        )));
    }
    if k < 2 {
        return Err(SolverError::Shape("k must be at least 2".into()));
    }
    let mut v = DMatrix::zeros(k, split.n());
    for &i in split.inputs() {
        v[(0, i)] = if i == split.truth() || bits[i] { 1.0 } else { -1.0 };
    }
    Ok(v)
}

/// Loss and decoded outputs of one example.
#[derive(Clone, Debug)]
pub struct LossOutput {
    pub loss: f64,
    /// `p_o` for every output, in split order.
    pub probs: Vec<f64>,
    /// `∂ℓ/∂v_o`, one column per output in split order (zero for aux).
    pub grad: DMatrix<f64>,
}

/// `p_o = (1 + v_⊤ᵀv_o)/2`, clamped; mean binary cross-entropy over the
/// supervised outputs.
pub fn probs_and_loss(v: &DMatrix<f64>, split: &ProblemSplit, targets: &[bool]) -> LossOutput {
    let k = v.nrows();
    let truth = v.column(split.truth());
    let outs = split.outputs();
    let count = split.supervised().count().max(1) as f64;
    let mut grad = DMatrix::zeros(k, outs.len());
    let mut probs = Vec::with_capacity(outs.len());
    let mut loss = 0.0;
    for (col, &o) in outs.iter().enumerate() {
        let p = ((1.0 + truth.dot(&v.column(o))) / 2.0).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        probs.push(p);
        if split.is_aux(o) {
            continue;
        }
        let z = if targets[o] { 1.0 } else { 0.0 };
        loss -= z * p.ln() + (1.0 - z) * (1.0 - p).ln();
        let scale = (p - z) / (p * (1.0 - p)) / 2.0 / count;
        grad.column_mut(col).axpy(scale, &truth, 0.0);
    }
    LossOutput {
        loss: loss / count,
        probs,
        grad,
    }
}

#[cfg(test)]
mod tests;
