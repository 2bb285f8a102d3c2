use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ComponentDecision, ModelKind, PipelineError, TrainConfig};
use crate::solver::ParamKind;
use crate::symfind::Candidate;
use crate::tasks::Task;

/// Columns of [`RunReport::to_csv`].
pub const CSV_COLUMNS: &str = "epoch,phase,train_loss,test_loss,board_accuracy,entry_accuracy,\
projection_error,forward_unconverged,backward_unconverged,seconds";

/// Metrics after one epoch. Epoch 0 holds the metrics at initialisation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: ParamKind,
    /// Mean batch loss over the epoch; `None` for epoch 0.
    pub train_loss: Option<f64>,
    pub test_loss: f64,
    pub board_accuracy: f64,
    pub entry_accuracy: f64,
    /// `‖C − Π(C)‖_F` against the reference group.
    pub projection_error: Option<f64>,
    /// Training examples whose forward or backward iteration hit its sweep
    /// limit during the epoch.
    pub forward_unconverged: usize,
    pub backward_unconverged: usize,
    /// Wall-clock seconds since the start of the run.
    pub seconds: f64,
}

/// Outcome of the discovery step of an auto run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discovery {
    /// Found over the task variables.
    pub expr: String,
    pub sigma: Vec<usize>,
    pub distance: f64,
    pub basis_dim: usize,
    pub budget_hits: usize,
    pub candidates: Vec<Candidate>,
    /// Expression after component validation.
    pub final_expr: String,
    pub final_basis_dim: usize,
    /// The group was supplied instead of discovered.
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: ModelKind,
    pub task: Task,
    pub seed: u64,
    pub k: usize,
    pub aux: usize,
    pub param_count: usize,
    pub train_size: usize,
    pub val_size: usize,
    pub test_size: usize,
    pub records: Vec<EpochRecord>,
    pub discovery: Option<Discovery>,
    pub validation: Vec<ComponentDecision>,
    /// Auto run that fell back to the plain model (trivial group).
    pub degenerated: bool,
    pub warnings: Vec<String>,
    pub config: TrainConfig,
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| format!("{v}"))
}

impl RunReport {
    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }

    pub fn final_accuracy(&self) -> f64 {
        self.last().map_or(0.0, |r| r.board_accuracy)
    }

    pub fn best_accuracy(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.board_accuracy)
            .fold(0.0, f64::max)
    }

    /// Copy with the wall-clock column zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.seconds = 0.0;
        }
        r
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_COLUMNS);
        out.push('\n');
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{:.3}",
                r.epoch,
                r.phase.as_str(),
                opt(r.train_loss),
                r.test_loss,
                r.board_accuracy,
                r.entry_accuracy,
                opt(r.projection_error),
                r.forward_unconverged,
                r.backward_unconverged,
                r.seconds
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), PipelineError> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        fs::write(&csv, self.to_csv())?;
        fs::write(&json, self.to_json())?;
        Ok((csv, json))
    }
}
