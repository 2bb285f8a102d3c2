use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::train::{adam_for, empty_report, new_model, record, task_group};
use super::{
    evaluate_c, reference_partition, train_from, Discovery, PipelineError, Run, TrainConfig,
};
use crate::group::{GroupExpr, Perm};
use crate::solver::{GroupSpec, Model, Params, SymParams};
use crate::symfind::{candidate_distance, normalized, sym_find, SymFindResult};
use crate::tasks::Example;

/// Replaces every leaf except the one at `keep` by the trivial group of the
/// same degree.
pub fn mask_component(g: &GroupExpr, keep: &[u8]) -> Result<GroupExpr, PipelineError> {
    match g.subexpr(keep) {
        Some(leaf) if leaf.is_leaf() => {}
        _ => {
            return Err(PipelineError::Config(format!(
                "path {keep:?} does not address a leaf of {g}"
            )))
        }
    }
    Ok(g.map_leaves(&mut |leaf, path| {
        if path == keep {
            leaf.clone()
        } else {
            GroupExpr::Trivial(leaf.degree())
        }
    }))
}

/// Evidence for keeping or dropping one leaf of a discovered group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecision {
    pub path: Vec<u8>,
    pub leaf: String,
    /// The group the warm-up matrix was projected onto.
    pub masked: String,
    pub baseline: f64,
    pub accuracy: f64,
    pub improvement: f64,
    pub kept: bool,
}

#[derive(Clone, Debug)]
pub struct Validation {
    pub expr: GroupExpr,
    pub decisions: Vec<ComponentDecision>,
}

fn accuracy_of(
    c: &DMatrix<f64>,
    model: &Model,
    val: &[Example],
    cfg: &TrainConfig,
) -> Result<f64, PipelineError> {
    let e = evaluate_c(c, model.k, model.aux, val, cfg.seed, &cfg.solver)?;
    Ok(if cfg.entry_level_validation {
        e.entry_accuracy
    } else {
        e.board_accuracy
    })
}

/// Projects the snapshot's matrix onto each single-leaf restriction of
/// `(g, σ)` and keeps the leaves whose projection improves validation
/// accuracy by more than `threshold`. No retraining happens in between.
pub fn validate_components(
    g: &GroupExpr,
    sigma: &Perm,
    model: &Model,
    val: &[Example],
    threshold: f64,
    cfg: &TrainConfig,
) -> Result<Validation, PipelineError> {
    let c = model.params.assemble_c();
    let baseline = accuracy_of(&c, model, val, cfg)?;
    let mut decisions = Vec::new();
    for path in g.leaf_paths() {
        let leaf = g.subexpr(&path).expect("path from leaf_paths");
        if leaf.is_trivial() {
            continue;
        }
        let masked = mask_component(g, &path)?;
        let spec = GroupSpec::new(&masked, sigma).padded(1, model.aux);
        let projected = spec.basis()?.partition().reynolds_project(&c)?;
        let accuracy = accuracy_of(&projected, model, val, cfg)?;
        let improvement = accuracy - baseline;
        decisions.push(ComponentDecision {
            path,
            leaf: leaf.to_string(),
            masked: masked.to_string(),
            baseline,
            accuracy,
            improvement,
            kept: improvement > threshold,
        });
    }
    let expr = g.map_leaves(&mut |leaf, path| {
        let kept = decisions.iter().any(|d| d.kept && d.path == path);
        if kept {
            leaf.clone()
        } else {
            GroupExpr::Trivial(leaf.degree())
        }
    });
    let expr = if expr.is_trivial() {
        GroupExpr::Trivial(expr.degree())
    } else {
        expr
    };
    Ok(Validation { expr, decisions })
}

/// Runs discovery on the task block of a model's coupling matrix (truth and
/// auxiliary variables removed), scaled to unit Frobenius norm.
pub fn discover(model: &Model, tn: usize, cfg: &TrainConfig) -> SymFindResult {
    sym_find(&task_block(model, tn), &cfg.symfind_config())
}

fn task_block(model: &Model, tn: usize) -> DMatrix<f64> {
    let c = model.params.assemble_c();
    normalized(&c.view((1, 1), (tn, tn)).into_owned())
}

/// Warm-up, discovery, validation, projection and symmetric training.
pub fn auto_run(
    cfg: &TrainConfig,
    train: &[Example],
    val: &[Example],
    test: &[Example],
) -> Result<Run, PipelineError> {
    cfg.validate()?;
    let task = train
        .first()
        .map(|e| e.task)
        .ok_or_else(|| PipelineError::Config("no training data".into()))?;
    let start = Instant::now();
    let mut plain_cfg = cfg.clone();
    plain_cfg.model = super::ModelKind::Auto;
    let mut model = new_model(&plain_cfg, task)?;
    let aux = model.aux;
    let reference = reference_partition(cfg, task, aux)?;
    let mut report = empty_report(cfg, task, &model, (train.len(), val.len(), test.len()));
    report
        .records
        .push(record(&model, 0, None, test, cfg, Some(&reference), start)?);

    let warmup = cfg.symfind_epoch_for(task);
    let mut adam = adam_for(&model, cfg);
    train_from(&mut model, &mut adam, 1, warmup.min(cfg.epochs), cfg, train, test, Some(&reference), &mut report, start)?;
    if cfg.epochs < warmup {
        report
            .warnings
            .push(format!("run ended before the warm-up epoch {warmup}; no discovery"));
        return Ok(Run { report, model });
    }

    let tn = task.n();
    let (expr, sigma, mut discovery) = match &cfg.force_group {
        Some(spec) => {
            let g = spec.core_expr().ok_or_else(|| {
                PipelineError::Config("forced group must be a grammar expression".into())
            })?;
            let sigma = Perm::from_images(spec.sigma.clone())?;
            let d = Discovery {
                expr: g.to_string(),
                sigma: spec.sigma.clone(),
                distance: candidate_distance(&task_block(&model, tn), &g, &sigma),
                basis_dim: g.basis_dim(),
                budget_hits: 0,
                candidates: Vec::new(),
                final_expr: String::new(),
                final_basis_dim: 0,
                forced: true,
            };
            (g, sigma, d)
        }
        None => {
            let found = discover(&model, tn, cfg);
            let d = Discovery {
                expr: found.expr.to_string(),
                sigma: found.sigma.images().to_vec(),
                distance: found.distance,
                basis_dim: found.expr.basis_dim(),
                budget_hits: found.budget_hits,
                candidates: found.candidates.clone(),
                final_expr: String::new(),
                final_basis_dim: 0,
                forced: false,
            };
            (found.expr, found.sigma, d)
        }
    };
    if expr.degree() != tn {
        return Err(PipelineError::Config(format!(
            "group {expr} has degree {}, task has {tn} variables",
            expr.degree()
        )));
    }

    let kept = if expr.is_trivial() || cfg.skip_validation {
        expr
    } else {
        let v = validate_components(&expr, &sigma, &model, val, cfg.threshold_value(), cfg)?;
        report.validation = v.decisions;
        v.expr
    };
    discovery.final_expr = kept.to_string();
    discovery.final_basis_dim = kept.basis_dim();
    report.discovery = Some(discovery);

    if kept.is_trivial() {
        report.degenerated = true;
        report
            .warnings
            .push("trivial group after discovery; continuing with the plain model".into());
    } else {
        let spec = GroupSpec::new(&kept, &sigma).padded(1, aux);
        let basis = Arc::new(spec.basis()?);
        let c = model.params.assemble_c();
        model.params = Params::Sym(SymParams::projected(&c, basis, spec)?);
        adam = adam_for(&model, cfg);
    }
    train_from(&mut model, &mut adam, warmup + 1, cfg.epochs, cfg, train, test, Some(&reference), &mut report, start)?;
    Ok(Run { report, model })
}

/// Ground-truth group of the task variables, for forcing discovery.
pub fn ground_truth(task: crate::tasks::Task) -> GroupSpec {
    task_group(task)
}
