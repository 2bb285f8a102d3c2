//! Sudoku and Rubik's-cube completion data.
//!
//! Both tasks are one-hot encoded: a Sudoku board is 81 cells × 9 digits
//! (index `r·81 + c·9 + d`), a cube is 54 facelets × 6 colours (index
//! `f·6 + colour`). A mask marks the given entries and always covers whole
//! cells or facelets.

mod cube;
mod dataset;
mod sudoku;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cube::{
    cube_generate, cube_generators, facelet_kind, CubeGenerators, CubeState, FaceletKind,
    MissingSpec, Move, CUBE_MOVES,
    whole_cube_turns,
};
pub use dataset::{read_dataset, write_dataset, DatasetStats};
pub use sudoku::{
    count_completions, is_valid_board, solve_count, sudoku_generate, sudoku_group, Board,
    MaskSpec, SUDOKU_GROUP,
};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error("invalid example: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sudoku9,
    Cube333,
}

impl Task {
    /// Number of one-hot blocks (cells or facelets).
    pub fn blocks(&self) -> usize {
        match self {
            Task::Sudoku9 => 81,
            Task::Cube333 => 54,
        }
    }

    /// Values per block (digits or colours).
    pub fn values(&self) -> usize {
        match self {
            Task::Sudoku9 => 9,
            Task::Cube333 => 6,
        }
    }

    /// Length of the encoded assignment.
    pub fn n(&self) -> usize {
        self.blocks() * self.values()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Sudoku9 => "sudoku9",
            Task::Cube333 => "cube333",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sudoku" | "sudoku9" => Ok(Task::Sudoku9),
            "cube" | "cube333" | "rubik" => Ok(Task::Cube333),
            _ => Err(TaskError::Spec(format!("unknown task '{s}'"))),
        }
    }
}

/// One instance: the full assignment and which entries are given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Example {
    pub task: Task,
    pub bits: Vec<bool>,
    pub mask: Vec<bool>,
}

impl Example {
    /// Builds an example from block values and a per-block given flag.
    pub fn from_values(task: Task, values: &[usize], given: &[bool]) -> Self {
        let v = task.values();
        let mut bits = vec![false; task.n()];
        let mut mask = vec![false; task.n()];
        for (b, (&x, &g)) in values.iter().zip(given).enumerate() {
            bits[b * v + x] = true;
            mask[b * v..(b + 1) * v].fill(g);
        }
        Example { task, bits, mask }
    }

    /// Value of every block; `None` if the one-hot structure is broken.
    pub fn values(&self) -> Option<Vec<usize>> {
        let v = self.task.values();
        self.bits
            .chunks(v)
            .map(|c| {
                let mut hot = c.iter().enumerate().filter(|(_, &b)| b);
                match (hot.next(), hot.next()) {
                    (Some((i, _)), None) => Some(i),
                    _ => None,
                }
            })
            .collect()
    }

    pub fn given_blocks(&self) -> Vec<bool> {
        self.mask.chunks(self.task.values()).map(|c| c[0]).collect()
    }

    pub fn masked_count(&self) -> usize {
        self.given_blocks().iter().filter(|&&g| !g).count()
    }

    /// Checks lengths, one-hot structure and whole-block masks.
    pub fn validate(&self) -> Result<(), TaskError> {
        let n = self.task.n();
        if self.bits.len() != n || self.mask.len() != n {
            return Err(TaskError::Invalid(format!(
                "expected {n} entries, found {} bits and {} mask",
                self.bits.len(),
                self.mask.len()
            )));
        }
        if self.values().is_none() {
            return Err(TaskError::Invalid("assignment is not one-hot".into()));
        }
        let v = self.task.values();
        if self.mask.chunks(v).any(|c| c.iter().any(|&m| m != c[0])) {
            return Err(TaskError::Invalid("mask splits a block".into()));
        }
        Ok(())
    }
}

/// Named difficulty levels of the transfer experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Normal,
    Hard,
}

impl Difficulty {
    /// Masked Sudoku cells.
    pub fn sudoku_masked(&self) -> usize {
        match self {
            Difficulty::Easy => 21,
            Difficulty::Normal => 31,
            Difficulty::Hard => 41,
        }
    }

    /// Missing cube facelets.
    pub fn cube_missing(&self) -> usize {
        match self {
            Difficulty::Easy => 3,
            Difficulty::Normal => 4,
            Difficulty::Hard => 5,
        }
    }
}

impl FromStr for Difficulty {
    type Err = TaskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "normal" => Ok(Difficulty::Normal),
            "hard" => Ok(Difficulty::Hard),
            _ => Err(TaskError::Spec(format!("unknown difficulty '{s}'"))),
        }
    }
}

/// Independent generator for example `index` of a dataset drawn with `seed`.
pub(crate) fn example_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Replaces the value of `t` distinct given blocks of every example by a
/// different uniformly random value. Masks are unchanged.
pub fn corrupt(dataset: &[Example], t: usize, seed: u64) -> Result<Vec<Example>, TaskError> {
    dataset
        .par_iter()
        .enumerate()
        .map(|(idx, ex)| {
            let mut rng = example_rng(seed ^ 0x636f_7272_7570_7400, idx);
            let given: Vec<usize> = ex
                .given_blocks()
                .iter()
                .enumerate()
                .filter_map(|(b, &g)| g.then_some(b))
                .collect();
            if t > given.len() {
                return Err(TaskError::Spec(format!(
                    "cannot corrupt {t} of {} given entries",
                    given.len()
                )));
            }
            let mut values = ex
                .values()
                .ok_or_else(|| TaskError::Invalid("assignment is not one-hot".into()))?;
            let v = ex.task.values();
            for &b in given.choose_multiple(&mut rng, t) {
                let shift = rng.gen_range(1..v);
                values[b] = (values[b] + shift) % v;
            }
            Ok(Example::from_values(ex.task, &values, &ex.given_blocks()))
        })
        .collect()
}

/// Argmax over each block of `probs`, lowest index on ties.
pub fn decode_blocks(probs: &[f64], values: usize) -> Vec<usize> {
    probs
        .chunks(values)
        .map(|c| {
            let mut best = 0;
            for (i, &p) in c.iter().enumerate() {
                if p > c[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// True iff every masked block of `ex` decodes to its ground truth.
pub fn is_solved(probs: &[f64], ex: &Example) -> bool {
    let truth = ex.values().expect("validated example");
    let pred = decode_blocks(probs, ex.task.values());
    ex.given_blocks()
        .iter()
        .zip(truth.iter().zip(&pred))
        .all(|(&g, (t, p))| g || t == p)
}

/// Fraction of examples whose masked blocks are all predicted correctly.
/// `probs[e]` holds one probability per encoded entry of example `e`.
pub fn board_accuracy(probs: &[Vec<f64>], examples: &[Example]) -> f64 {
    assert_eq!(probs.len(), examples.len(), "one prediction per example");
    if examples.is_empty() {
        return 0.0;
    }
    let solved = probs
        .iter()
        .zip(examples)
        .filter(|(p, ex)| is_solved(p, ex))
        .count();
    solved as f64 / examples.len() as f64
}

/// Fraction of masked blocks predicted correctly.
pub fn entry_accuracy(probs: &[Vec<f64>], examples: &[Example]) -> f64 {
    let (mut right, mut total) = (0usize, 0usize);
    for (p, ex) in probs.iter().zip(examples) {
        let truth = ex.values().expect("validated example");
        let pred = decode_blocks(p, ex.task.values());
        for (b, &g) in ex.given_blocks().iter().enumerate() {
            if !g {
                total += 1;
                right += (truth[b] == pred[b]) as usize;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        right as f64 / total as f64
    }
}
