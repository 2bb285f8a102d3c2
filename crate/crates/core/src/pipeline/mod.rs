//! Training loops, the automatic symmetry pipeline (warm-up, discovery,
//! component validation, projection, symmetric training), the discovery
//! benchmark and transfer runs.

mod auto;
mod bench;
mod report;
mod train;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::GroupError;
use crate::solver::{embed_inputs, ProblemSplit, SolverConfig, SolverError};
use crate::symfind::SymFindConfig;
use crate::tasks::{Example, Task, TaskError};

pub use auto::{
    auto_run, discover, ground_truth, mask_component, validate_components, ComponentDecision,
    Validation,
};
pub use bench::{
    parse_bench_specs, symfind_bench, wilson_interval, BenchRow, BenchSpec, SigmaKind,
    PAPER_BENCH_SPECS,
};
pub use report::{Discovery, EpochRecord, RunReport, CSV_COLUMNS};
pub use train::{
    evaluate, evaluate_c, new_model, reference_partition, train, train_from, transfer_run,
    Evaluation, Run,
};

pub const DEFAULT_LR_PLAIN: f64 = 2e-3;
pub const DEFAULT_LR_SYM: f64 = 4e-2;
/// Auxiliary variables of the `plain-aux` model.
pub const DEFAULT_AUX: usize = 300;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("configuration: {0}")]
    Config(String),
    #[error("non-finite {what} at epoch {epoch}, batch {batch}")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        batch: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Plain,
    PlainAux,
    Sym,
    Auto,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Plain => "plain",
            ModelKind::PlainAux => "plain-aux",
            ModelKind::Sym => "sym",
            ModelKind::Auto => "auto",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(ModelKind::Plain),
            "plain-aux" | "plain-aux300" => Ok(ModelKind::PlainAux),
            "sym" => Ok(ModelKind::Sym),
            "auto" => Ok(ModelKind::Auto),
            _ => Err(PipelineError::Config(format!("unknown model '{s}'"))),
        }
    }
}

/// Everything a training run depends on besides the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub epochs: usize,
    pub batch_size: usize,
    /// Learning rate of plain parameters (and the warm-up of auto runs).
    pub lr_plain: f64,
    /// Learning rate of symmetric parameters.
    pub lr_sym: f64,
    pub seed: u64,
    /// Warm-up length of auto runs; defaults by task.
    pub symfind_epoch: Option<usize>,
    /// Corruptions per training example; selects the λ₂ and threshold defaults.
    pub corruption: usize,
    /// Discovery tolerances; defaults by corruption level.
    pub symfind: Option<SymFindConfig>,
    /// Accuracy improvement a component must exceed to be kept.
    pub threshold: Option<f64>,
    /// Validate components by entry accuracy instead of board accuracy.
    pub entry_level_validation: bool,
    /// Keep every discovered component without validation.
    pub skip_validation: bool,
    /// Auxiliary variables; defaults to 300 for `plain-aux`, 0 otherwise.
    pub aux: Option<usize>,
    /// Embedding dimension; defaults to `⌈√(2n)⌉ + 1`.
    pub k: Option<usize>,
    /// Rows of `S`; defaults to `n`.
    pub m: Option<usize>,
    pub init_scale: f64,
    pub solver: SolverConfig,
    /// Group of `sym` runs over the task variables; defaults to the task's
    /// ground truth.
    pub group: Option<crate::solver::GroupSpec>,
    /// Group for the projection-error series; defaults to the task's ground
    /// truth.
    pub reference: Option<crate::solver::GroupSpec>,
    /// Replaces the discovery step of auto runs by this group.
    pub force_group: Option<crate::solver::GroupSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelKind::Plain,
            epochs: 25,
            batch_size: 40,
            lr_plain: DEFAULT_LR_PLAIN,
            lr_sym: DEFAULT_LR_SYM,
            seed: 0,
            symfind_epoch: None,
            corruption: 0,
            symfind: None,
            threshold: None,
            entry_level_validation: false,
            skip_validation: false,
            aux: None,
            k: None,
            m: None,
            init_scale: 1.0,
            solver: SolverConfig::default(),
            group: None,
            reference: None,
            force_group: None,
        }
    }
}

impl TrainConfig {
    pub fn symfind_epoch_for(&self, task: Task) -> usize {
        self.symfind_epoch.unwrap_or(match task {
            Task::Sudoku9 => 10,
            Task::Cube333 => 20,
        })
    }

    pub fn symfind_config(&self) -> SymFindConfig {
        self.symfind
            .clone()
            .unwrap_or_else(|| SymFindConfig::for_corruption(self.corruption))
    }

    pub fn threshold_value(&self) -> f64 {
        self.threshold.unwrap_or(match self.corruption {
            0 | 1 => 0.05,
            2 => 0.15,
            _ => 0.2,
        })
    }

    pub fn aux_count(&self) -> usize {
        self.aux.unwrap_or(match self.model {
            ModelKind::PlainAux => DEFAULT_AUX,
            _ => 0,
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        for (name, lr) in [("lr_plain", self.lr_plain), ("lr_sym", self.lr_sym)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return bad(format!("{name} must be positive, got {lr}"));
            }
        }
        if matches!(self.k, Some(k) if k < 2) {
            return bad("k must be at least 2".into());
        }
        if matches!(self.m, Some(0)) {
            return bad("m must be positive".into());
        }
        if let Some(sf) = &self.symfind {
            sf.validate().map_err(PipelineError::Config)?;
        }
        Ok(())
    }
}

/// Number of model variables: truth, task entries, auxiliaries.
pub fn model_n(task: Task, aux: usize) -> usize {
    1 + task.n() + aux
}

/// One example laid out for the solver. Task entry `b` is variable `b + 1`,
/// auxiliaries follow the task entries.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub split: ProblemSplit,
    pub v_in: DMatrix<f64>,
    /// Value of every model variable (truth true, auxiliaries false).
    pub targets: Vec<bool>,
}

pub fn encode(ex: &Example, aux: usize, k: usize) -> Result<Encoded, PipelineError> {
    let tn = ex.task.n();
    let n = model_n(ex.task, aux);
    let inputs: Vec<usize> = (0..tn).filter(|&b| ex.mask[b]).map(|b| b + 1).collect();
    let aux_idx: Vec<usize> = (tn + 1..n).collect();
    let split = ProblemSplit::new(n, &inputs, &aux_idx)?;
    let mut targets = vec![false; n];
    targets[0] = true;
    targets[1..=tn].copy_from_slice(&ex.bits);
    let v_in = embed_inputs(&targets, &split, k)?;
    Ok(Encoded {
        split,
        v_in,
        targets,
    })
}

/// Probability of every task entry: given entries at their bit, outputs as
/// decoded (`probs` in split output order).
pub fn entry_probs(ex: &Example, split: &ProblemSplit, probs: &[f64]) -> Vec<f64> {
    let tn = ex.task.n();
    let mut out: Vec<f64> = ex.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    for (&o, &p) in split.outputs().iter().zip(probs) {
        if (1..=tn).contains(&o) {
            out[o - 1] = p;
        }
    }
    out
}

/// Deterministic seed for `(seed, stream, index)`.
pub(crate) fn mix(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
