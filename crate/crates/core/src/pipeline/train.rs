use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    auto_run, encode, entry_probs, mix, model_n, EpochRecord, ModelKind, PipelineError,
    RunReport, TrainConfig,
};
use crate::group::PairPartition;
use crate::solver::{
    backward, default_k, forward, init_plain, init_sym, probs_and_loss, Adam, GroupSpec, Model,
    ParamKind, Params, SolverConfig,
};
use crate::tasks::{
    board_accuracy, cube_generate, entry_accuracy, sudoku_generate, sudoku_group, Difficulty,
    Example, MaskSpec, MissingSpec, Task,
};

const STREAM_INIT: u64 = 1;
const STREAM_SHUFFLE: u64 = 2;
const STREAM_TRAIN: u64 = 3;
const STREAM_EVAL: u64 = 4;

/// A finished run: its report and final model.
#[derive(Clone, Debug)]
pub struct Run {
    pub report: RunReport,
    pub model: Model,
}

/// Metrics of a coupling matrix over a dataset.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub loss: f64,
    pub board_accuracy: f64,
    pub entry_accuracy: f64,
    /// One probability per task entry and example.
    pub probs: Vec<Vec<f64>>,
    pub unconverged: usize,
}

/// Ground-truth symmetry of the task variables.
pub(crate) fn task_group(task: Task) -> GroupSpec {
    match task {
        Task::Sudoku9 => GroupSpec::identity(&sudoku_group()),
        Task::Cube333 => GroupSpec::named("rubik").expect("built-in group"),
    }
}

/// Symmetrised pair partition of the reference group over all model
/// variables (truth and auxiliaries attached as fixed points).
pub fn reference_partition(
    cfg: &TrainConfig,
    task: Task,
    aux: usize,
) -> Result<PairPartition, PipelineError> {
    let spec = cfg.reference.clone().unwrap_or_else(|| task_group(task));
    check_degree(&spec, task)?;
    Ok(spec.padded(1, aux).basis()?.partition().clone())
}

fn check_degree(spec: &GroupSpec, task: Task) -> Result<(), PipelineError> {
    if spec.degree() != task.n() {
        return Err(PipelineError::Config(format!(
            "group '{}' has degree {}, task {} has {} variables",
            spec.expr,
            spec.degree(),
            task,
            task.n()
        )));
    }
    Ok(())
}

/// Fresh parameters for `cfg.model` (auto runs start plain).
pub fn new_model(cfg: &TrainConfig, task: Task) -> Result<Model, PipelineError> {
    let aux = cfg.aux_count();
    let n = model_n(task, aux);
    let k = cfg.k.unwrap_or_else(|| default_k(n));
    let seed = mix(cfg.seed, STREAM_INIT, 0);
    let params = match cfg.model {
        ModelKind::Plain | ModelKind::PlainAux | ModelKind::Auto => {
            Params::Plain(init_plain(n, cfg.m.unwrap_or(n), seed, cfg.init_scale))
        }
        ModelKind::Sym => {
            let spec = cfg.group.clone().unwrap_or_else(|| task_group(task));
            check_degree(&spec, task)?;
            let spec = spec.padded(1, aux);
            let basis = Arc::new(spec.basis()?);
            Params::Sym(init_sym(basis, spec, seed, cfg.init_scale))
        }
    };
    Ok(Model {
        params,
        k,
        task: Some(task.as_str().to_string()),
        aux,
    })
}

fn check_data(task: Task, sets: &[&[Example]]) -> Result<(), PipelineError> {
    for set in sets {
        if let Some(ex) = set.iter().find(|e| e.task != task) {
            return Err(PipelineError::Config(format!(
                "dataset mixes tasks {task} and {}",
                ex.task
            )));
        }
    }
    Ok(())
}

/// Runs the forward pass of `c` on every example. `k` and `aux` describe the
/// model layout.
pub fn evaluate_c(
    c: &DMatrix<f64>,
    k: usize,
    aux: usize,
    data: &[Example],
    seed: u64,
    solver: &SolverConfig,
) -> Result<Evaluation, PipelineError> {
    let results: Vec<Result<(f64, Vec<f64>, bool), PipelineError>> = data
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            let enc = encode(ex, aux, k)?;
            let fwd = forward(c, &enc.v_in, &enc.split, mix(seed, STREAM_EVAL, i as u64), solver, false)?;
            let out = probs_and_loss(&fwd.v, &enc.split, &enc.targets);
            Ok((out.loss, entry_probs(ex, &enc.split, &out.probs), fwd.converged))
        })
        .collect();
    let mut loss = 0.0;
    let mut probs = Vec::with_capacity(data.len());
    let mut unconverged = 0;
    for r in results {
        let (l, p, conv) = r?;
        loss += l;
        probs.push(p);
        unconverged += usize::from(!conv);
    }
    let count = data.len().max(1) as f64;
    Ok(Evaluation {
        loss: loss / count,
        board_accuracy: board_accuracy(&probs, data),
        entry_accuracy: entry_accuracy(&probs, data),
        probs,
        unconverged,
    })
}

pub fn evaluate(
    model: &Model,
    data: &[Example],
    seed: u64,
    solver: &SolverConfig,
) -> Result<Evaluation, PipelineError> {
    if let (Some(ex), Some(tag)) = (data.first(), &model.task) {
        if ex.task.as_str() != tag {
            return Err(PipelineError::Config(format!(
                "model was trained on {tag}, data is {}",
                ex.task
            )));
        }
    }
    if let Some(ex) = data.first() {
        let expected = model_n(ex.task, model.aux);
        if model.params.n() != expected {
            return Err(PipelineError::Config(format!(
                "model has {} variables, {} data with {} auxiliaries needs {expected}",
                model.params.n(),
                ex.task,
                model.aux
            )));
        }
    }
    evaluate_c(&model.params.assemble_c(), model.k, model.aux, data, seed, solver)
}

pub(crate) struct EpochStats {
    loss: f64,
    forward_unconverged: usize,
    backward_unconverged: usize,
}

fn run_epoch(
    model: &mut Model,
    adam: &mut Adam,
    data: &[Example],
    cfg: &TrainConfig,
    epoch: usize,
) -> Result<EpochStats, PipelineError> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(mix(cfg.seed, STREAM_SHUFFLE, epoch as u64)));
    let epoch_seed = mix(cfg.seed, STREAM_TRAIN, epoch as u64);
    let n = model.params.n();
    let mut stats = EpochStats {
        loss: 0.0,
        forward_unconverged: 0,
        backward_unconverged: 0,
    };
    let mut batches = 0;
    for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
        let c = model.params.assemble_c();
        let outs: Vec<_> = batch
            .par_iter()
            .map(|&i| -> Result<_, PipelineError> {
                let enc = encode(&data[i], model.aux, model.k)?;
                let fwd = forward(&c, &enc.v_in, &enc.split, mix(epoch_seed, 0, i as u64), &cfg.solver, false)?;
                let out = probs_and_loss(&fwd.v, &enc.split, &enc.targets);
                let bwd = backward(&c, &fwd, &enc.split, &out.grad, &cfg.solver)?;
                Ok((out.loss, fwd.converged, bwd, enc.split))
            })
            .collect();
        // ordered reduction keeps the sum independent of the thread count
        let mut rows = DMatrix::zeros(n, n);
        let w = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for out in outs {
            let (l, fconv, bwd, split) = out?;
            loss += l * w;
            stats.forward_unconverged += usize::from(!fconv);
            stats.backward_unconverged += usize::from(!bwd.converged);
            bwd.add_rows_to(&split, &mut rows, w);
        }
        let nonfinite = |what| PipelineError::NonFinite { what, epoch, batch: b };
        if !loss.is_finite() {
            return Err(nonfinite("loss"));
        }
        let grad = model.params.grad_from_rows(&rows);
        if grad.as_slice().iter().any(|g| !g.is_finite()) {
            return Err(nonfinite("gradient"));
        }
        adam.step(model.params.as_mut_slice(), grad.as_slice());
        stats.loss += loss;
        batches += 1;
    }
    stats.loss /= batches.max(1) as f64;
    Ok(stats)
}

pub(crate) fn adam_for(model: &Model, cfg: &TrainConfig) -> Adam {
    let lr = match model.params.kind() {
        ParamKind::Plain => cfg.lr_plain,
        ParamKind::Sym => cfg.lr_sym,
    };
    Adam::new(model.params.len(), lr)
}

pub(crate) fn record(
    model: &Model,
    epoch: usize,
    stats: Option<EpochStats>,
    test: &[Example],
    cfg: &TrainConfig,
    reference: Option<&PairPartition>,
    start: Instant,
) -> Result<EpochRecord, PipelineError> {
    let c = model.params.assemble_c();
    let eval = evaluate_c(&c, model.k, model.aux, test, cfg.seed, &cfg.solver)?;
    let projection_error = reference.map(|p| p.projection_distance(&c)).transpose()?;
    let (train_loss, fu, bu) = match stats {
        Some(s) => (Some(s.loss), s.forward_unconverged, s.backward_unconverged),
        None => (None, 0, 0),
    };
    Ok(EpochRecord {
        epoch,
        phase: model.params.kind(),
        train_loss,
        test_loss: eval.loss,
        board_accuracy: eval.board_accuracy,
        entry_accuracy: eval.entry_accuracy,
        projection_error,
        forward_unconverged: fu,
        backward_unconverged: bu,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Trains `model` for epochs `first..=last`, appending one record per epoch.
/// Shuffles and forward seeds depend only on the absolute epoch number, so a
/// run can be split into phases without changing its random streams.
#[allow(clippy::too_many_arguments)]
pub fn train_from(
    model: &mut Model,
    adam: &mut Adam,
    first: usize,
    last: usize,
    cfg: &TrainConfig,
    train: &[Example],
    test: &[Example],
    reference: Option<&PairPartition>,
    report: &mut RunReport,
    start: Instant,
) -> Result<(), PipelineError> {
    for epoch in first..=last {
        let stats = run_epoch(model, adam, train, cfg, epoch)?;
        let rec = record(model, epoch, Some(stats), test, cfg, reference, start)?;
        if rec.backward_unconverged > 0 {
            report.warnings.push(format!(
                "epoch {epoch}: backward pass hit its sweep limit on {} examples",
                rec.backward_unconverged
            ));
        }
        report.records.push(rec);
    }
    Ok(())
}

pub(crate) fn empty_report(
    cfg: &TrainConfig,
    task: Task,
    model: &Model,
    sizes: (usize, usize, usize),
) -> RunReport {
    RunReport {
        model: cfg.model,
        task,
        seed: cfg.seed,
        k: model.k,
        aux: model.aux,
        param_count: model.params.len(),
        train_size: sizes.0,
        val_size: sizes.1,
        test_size: sizes.2,
        records: Vec::new(),
        discovery: None,
        validation: Vec::new(),
        degenerated: false,
        warnings: Vec::new(),
        config: cfg.clone(),
    }
}

/// Trains the configured model. Auto runs hold out the last ninth of `train`
/// for component validation (the 8 : 1 split of the full protocol).
pub fn train(cfg: &TrainConfig, train: &[Example], test: &[Example]) -> Result<Run, PipelineError> {
    cfg.validate()?;
    let task = train
        .first()
        .or(test.first())
        .map(|e| e.task)
        .ok_or_else(|| PipelineError::Config("no data".into()))?;
    check_data(task, &[train, test])?;
    if cfg.model == ModelKind::Auto {
        let cut = train.len() - train.len() / 9;
        return auto_run(cfg, &train[..cut], &train[cut..], test);
    }
    let start = Instant::now();
    let mut model = new_model(cfg, task)?;
    let reference = reference_partition(cfg, task, model.aux)?;
    let mut report = empty_report(cfg, task, &model, (train.len(), 0, test.len()));
    report
        .records
        .push(record(&model, 0, None, test, cfg, Some(&reference), start)?);
    let mut adam = adam_for(&model, cfg);
    train_from(&mut model, &mut adam, 1, cfg.epochs, cfg, train, test, Some(&reference), &mut report, start)?;
    Ok(Run { report, model })
}

/// Generates fresh data at the two difficulty levels and trains on the first,
/// testing on the second.
pub fn transfer_run(
    cfg: &TrainConfig,
    task: Task,
    train_level: Difficulty,
    test_level: Difficulty,
    sizes: (usize, usize),
    data_seed: u64,
) -> Result<Run, PipelineError> {
    let gen = |level: Difficulty, count: usize, seed: u64| -> Result<Vec<Example>, PipelineError> {
        Ok(match task {
            Task::Sudoku9 => sudoku_generate(count, MaskSpec::Fixed(level.sudoku_masked()), seed),
            Task::Cube333 => cube_generate(count, MissingSpec::Total(level.cube_missing()), seed)?,
        })
    };
    let train_set = gen(train_level, sizes.0, data_seed)?;
    let test_set = gen(test_level, sizes.1, mix(data_seed, 5, 0))?;
    train(cfg, &train_set, &test_set)
}
