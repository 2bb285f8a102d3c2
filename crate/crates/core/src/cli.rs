//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use serde_json::json;

use crate::group::{GroupExpr, Perm};
use crate::pipeline::{
    self, parse_bench_specs, symfind_bench, BenchRow, ModelKind, PipelineError, TrainConfig,
    CSV_COLUMNS, PAPER_BENCH_SPECS,
};
use crate::solver::{load_matrix, load_model, save_model, GroupSpec, SolverError, NAMED_GROUPS};
use crate::symfind::{normalized, sym_find, SymFindConfig, ToleranceScale};
use crate::tasks::{
    corrupt, cube_generate, read_dataset, sudoku_generate, write_dataset, DatasetStats,
    Difficulty, MaskSpec, MissingSpec, Task, TaskError, SUDOKU_GROUP,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Numerical(_) => EXIT_NUMERIC,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            PipelineError::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::Spec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "symsat",
    version,
    about = "Symmetry-aware differentiable MAXSAT: data, training, discovery, benchmarks",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SYMSAT_THREADS")]
    pub threads: Option<usize>,

    /// Plain-text `key=value` file whose entries act as flags placed before
    /// the command line; later flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a dataset as JSON lines.
    Gen(GenArgs),
    /// Train a model and write report, config echo and checkpoint.
    #[command(after_help = TRAIN_HELP)]
    Train(TrainArgs),
    /// Discover the symmetry group of a matrix or checkpoint.
    Symfind(SymfindArgs),
    /// Recovery benchmark of the discovery algorithm on synthetic matrices.
    #[command(after_help = BENCH_HELP)]
    BenchSymfind(BenchArgs),
    /// Evaluate a checkpoint on a dataset.
    Eval(EvalArgs),
}

const TRAIN_HELP: &str = "Report CSV columns: epoch, phase (plain|sym), train_loss (empty at \
epoch 0), test_loss, board_accuracy, entry_accuracy, projection_error (Frobenius distance of C \
to its projection onto the reference group), forward_unconverged, backward_unconverged, seconds.";

const BENCH_HELP: &str = "Spec file: one group per line, `<expression> ; identity|random`, `#` \
comments. CSV columns: group, sigma, degree, basis_dim, runs, full_acc, full_lo, full_hi, \
partial_acc, partial_lo, partial_hi (95% Wilson intervals), budget_hits, seconds.";

#[derive(Args, Debug)]
pub struct GenArgs {
    /// sudoku or cube.
    pub task: Task,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Sudoku masked cells: `31` or `31..42`.
    #[arg(long)]
    pub mask: Option<MaskSpec>,
    /// Cube missing facelets: `corner,edge,centre` or a total.
    #[arg(long)]
    pub missing: Option<MissingSpec>,
    /// easy, normal or hard; overrides --mask and --missing.
    #[arg(long)]
    pub difficulty: Option<Difficulty>,
    /// Corrupted given entries per example.
    #[arg(long, default_value_t = 0)]
    pub corrupt: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct TrainArgs {
    /// plain, plain-aux300, sym or auto.
    #[arg(value_name = "MODEL")]
    pub model_pos: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Validation set of auto runs (default: last ninth of the training set).
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// Task of the data; checked against the files.
    #[arg(long)]
    pub task: Option<Task>,
    /// Group of sym runs: an expression, `auto-default` for the task's
    /// ground truth, or a named group (`rubik`).
    #[arg(long)]
    pub group: Option<String>,
    /// Conjugating permutation of --group as a JSON array.
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Paper-scale settings: 100 epochs unless --epochs is given.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 40)]
    pub batch_size: usize,
    /// Learning rate (default 2e-3 plain, 4e-2 sym).
    #[arg(long)]
    pub lr: Option<f64>,
    /// Learning rate of the symmetric phase of auto runs.
    #[arg(long)]
    pub lr_sym: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Warm-up epochs before discovery (default 10 Sudoku, 20 cube).
    #[arg(long)]
    pub symfind_epoch: Option<usize>,
    /// Corruption level of the training data; selects λ₂ and threshold.
    #[arg(long, default_value_t = 0)]
    pub corruption: usize,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Validation improvement a component must exceed.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Validate components by entry accuracy.
    #[arg(long)]
    pub entry_validation: bool,
    /// Keep all discovered components.
    #[arg(long)]
    pub skip_validation: bool,
    #[arg(long)]
    pub aux: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "runs")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub tag: Option<String>,
}

#[derive(Args, Debug)]
pub struct SymfindArgs {
    /// Matrix file or model checkpoint (`.ssn`).
    pub input: PathBuf,
    /// Scale to unit Frobenius norm first.
    #[arg(long)]
    pub normalize: bool,
    /// For checkpoints, search the full matrix including truth and
    /// auxiliary variables.
    #[arg(long)]
    pub keep_truth: bool,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub gamma_max: Option<usize>,
    /// entry or row.
    #[arg(long)]
    pub tolerance_scale: Option<String>,
    /// Write the discovery report as JSON.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Spec file (default: the four groups of the published table).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value_t = 5e-3)]
    pub omega: f64,
    #[arg(long, default_value_t = 200)]
    pub runs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub tolerance_scale: Option<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    pub checkpoint: PathBuf,
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print metrics as JSON.
    #[arg(long)]
    pub json: bool,
}

/// Reads a `key=value` overlay into flags. Blank lines and `#` comments are
/// skipped; `flag=true` becomes a bare `--flag`, `flag=false` is dropped.
pub fn overlay_args(text: &str) -> CliResult<Vec<OsString>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => out.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                out.push(format!("--{key}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}

/// Inserts overlay flags after the subcommand name, so that flags given on
/// the command line come later and win.
fn with_overlay(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let pos = args.iter().position(|a| a == "--config");
    let Some(pos) = pos else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let extra = overlay_args(&text)?;
    let sub = args
        .iter()
        .position(|a| {
            ["gen", "train", "symfind", "bench-symfind", "eval"]
                .iter()
                .any(|s| a == s)
        })
        .ok_or_else(|| CliError::Usage("--config needs a subcommand".into()))?;
    let mut out: Vec<OsString> = Vec::with_capacity(args.len() + extra.len());
    for (i, a) in args.into_iter().enumerate() {
        if i == pos || i == pos + 1 {
            continue;
        }
        out.push(a);
        if i == sub {
            out.extend(extra.iter().cloned());
        }
    }
    Ok(out)
}

/// Parses and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match with_overlay(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Symfind(a) => cmd_symfind(&a),
        Command::BenchSymfind(a) => cmd_bench(&a),
        Command::Eval(a) => cmd_eval(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let clean = match a.task {
        Task::Sudoku9 => {
            let mask = match a.difficulty {
                Some(d) => MaskSpec::Fixed(d.sudoku_masked()),
                None => a.mask.unwrap_or(MaskSpec::Range(31, 42)),
            };
            mask.validate(81)?;
            sudoku_generate(a.count, mask, a.seed)
        }
        Task::Cube333 => {
            let missing = match a.difficulty {
                Some(d) => MissingSpec::Total(d.cube_missing()),
                None => a.missing.unwrap_or(MissingSpec::Exact(2, 2, 1)),
            };
            cube_generate(a.count, missing, a.seed)?
        }
    };
    let data = if a.corrupt > 0 {
        corrupt(&clean, a.corrupt, a.seed ^ 0x5eed)?
    } else {
        clean
    };
    write_dataset(&a.out, &data)?;
    let s = DatasetStats::of(&data);
    println!(
        "wrote {} {} examples to {}; masked blocks min {} max {} mean {:.2}; corruption {}",
        s.count,
        a.task,
        a.out.display(),
        s.masked_min,
        s.masked_max,
        s.masked_mean,
        a.corrupt
    );
    Ok(())
}

fn parse_group(text: &str, sigma: Option<&str>, task: Task) -> CliResult<GroupSpec> {
    let mut spec = match text {
        "auto-default" | "default" => match task {
            Task::Sudoku9 => GroupSpec::identity(&SUDOKU_GROUP.parse().expect("constant")),
            Task::Cube333 => GroupSpec::named("rubik")?,
        },
        name if NAMED_GROUPS.contains(&name) => GroupSpec::named(name)?,
        expr => {
            let g: GroupExpr = expr
                .parse()
                .map_err(|e| CliError::Usage(format!("--group: {e}")))?;
            GroupSpec::identity(&g)
        }
    };
    if let Some(s) = sigma {
        let images: Vec<usize> =
            serde_json::from_str(s).map_err(|e| CliError::Usage(format!("--sigma: {e}")))?;
        Perm::from_images(images.clone()).map_err(|e| CliError::Usage(format!("--sigma: {e}")))?;
        if images.len() != spec.sigma.len() {
            return Err(CliError::Usage(format!(
                "--sigma has {} entries, group has degree {}",
                images.len(),
                spec.sigma.len()
            )));
        }
        spec.sigma = images;
    }
    Ok(spec)
}

fn symfind_config(
    base: SymFindConfig,
    l1: Option<f64>,
    l2: Option<f64>,
    scale: Option<&str>,
) -> CliResult<SymFindConfig> {
    let mut cfg = base;
    if let Some(v) = l1 {
        cfg.lambda1 = v;
    }
    if let Some(v) = l2 {
        cfg.lambda2 = v;
    }
    if let Some(s) = scale {
        cfg.tolerance_scale = match s {
            "entry" => ToleranceScale::Entry,
            "row" => ToleranceScale::Row,
            _ => return Err(CliError::Usage(format!("unknown tolerance scale '{s}'"))),
        };
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

impl TrainArgs {
    pub fn model_kind(&self) -> CliResult<ModelKind> {
        let text = self
            .model_pos
            .as_deref()
            .or(self.model.as_deref())
            .ok_or_else(|| CliError::Usage("train needs a model (plain, plain-aux300, sym, auto)".into()))?;
        Ok(text.parse()?)
    }

    /// Resolved configuration.
    pub fn config(&self, task: Task) -> CliResult<TrainConfig> {
        let model = self.model_kind()?;
        let mut cfg = TrainConfig {
            model,
            epochs: self.epochs.unwrap_or(if self.full { 100 } else { 25 }),
            batch_size: self.batch_size,
            seed: self.seed,
            symfind_epoch: self.symfind_epoch,
            corruption: self.corruption,
            threshold: self.threshold,
            entry_level_validation: self.entry_validation,
            skip_validation: self.skip_validation,
            aux: self.aux,
            k: self.k,
            m: self.m,
            ..Default::default()
        };
        match (model, self.lr) {
            (ModelKind::Sym, Some(lr)) => cfg.lr_sym = lr,
            (_, Some(lr)) => cfg.lr_plain = lr,
            _ => {}
        }
        if let Some(lr) = self.lr_sym {
            cfg.lr_sym = lr;
        }
        if self.lambda1.is_some() || self.lambda2.is_some() {
            cfg.symfind = Some(symfind_config(
                SymFindConfig::for_corruption(self.corruption),
                self.lambda1,
                self.lambda2,
                None,
            )?);
        }
        if let Some(g) = &self.group {
            let spec = parse_group(g, self.sigma.as_deref(), task)?;
            if model == ModelKind::Auto {
                cfg.force_group = Some(spec);
            } else {
                cfg.group = Some(spec);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The arguments in `--config` overlay form.
    pub fn to_overlay(&self) -> String {
        let mut lines = vec![
            "# symsat train --config <this file>".to_string(),
        ];
        let mut put = |k: &str, v: String| lines.push(format!("{k}={v}"));
        if let Ok(m) = self.model_kind() {
            put("model", m.as_str().into());
        }
        put("train", self.train.display().to_string());
        put("test", self.test.display().to_string());
        if let Some(v) = &self.val {
            put("val", v.display().to_string());
        }
        if let Some(t) = self.task {
            put("task", t.as_str().into());
        }
        if let Some(g) = &self.group {
            put("group", g.clone());
        }
        if let Some(s) = &self.sigma {
            put("sigma", s.clone());
        }
        if let Some(e) = self.epochs {
            put("epochs", e.to_string());
        }
        put("full", self.full.to_string());
        put("batch-size", self.batch_size.to_string());
        if let Some(v) = self.lr {
            put("lr", v.to_string());
        }
        if let Some(v) = self.lr_sym {
            put("lr-sym", v.to_string());
        }
        put("seed", self.seed.to_string());
        if let Some(v) = self.symfind_epoch {
            put("symfind-epoch", v.to_string());
        }
        put("corruption", self.corruption.to_string());
        if let Some(v) = self.lambda1 {
            put("lambda1", v.to_string());
        }
        if let Some(v) = self.lambda2 {
            put("lambda2", v.to_string());
        }
        if let Some(v) = self.threshold {
            put("threshold", v.to_string());
        }
        put("entry-validation", self.entry_validation.to_string());
        put("skip-validation", self.skip_validation.to_string());
        if let Some(v) = self.aux {
            put("aux", v.to_string());
        }
        if let Some(v) = self.k {
            put("k", v.to_string());
        }
        if let Some(v) = self.m {
            put("m", v.to_string());
        }
        put("out-dir", self.out_dir.display().to_string());
        if let Some(t) = &self.tag {
            put("tag", t.clone());
        }
        lines.join("\n") + "\n"
    }
}

fn run_dir(base: &Path, tag: &str) -> CliResult<PathBuf> {
    let stamp = humantime::format_rfc3339_seconds(SystemTime::now())
        .to_string()
        .replace([':', '-'], "")
        .trim_end_matches('Z')
        .to_string();
    let mut dir = base.join(format!("{stamp}-{tag}"));
    let mut i = 1;
    while dir.exists() {
        dir = base.join(format!("{stamp}-{tag}-{i}"));
        i += 1;
    }
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_data(path: &Path) -> CliResult<Vec<crate::tasks::Example>> {
    read_dataset(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Runs `train` and returns the output directory.
pub fn cmd_train(a: &TrainArgs) -> CliResult<PathBuf> {
    let train_set = load_data(&a.train)?;
    let test_set = load_data(&a.test)?;
    let task = train_set
        .first()
        .map(|e| e.task)
        .ok_or_else(|| CliError::Data("empty training set".into()))?;
    if let Some(t) = a.task {
        if t != task {
            return Err(CliError::Data(format!("--task {t} but the training data is {task}")));
        }
    }
    if let Some(ex) = test_set.iter().find(|e| e.task != task) {
        return Err(CliError::Data(format!("training data is {task}, test data is {}", ex.task)));
    }
    let cfg = a.config(task)?;
    let tag = a
        .tag
        .clone()
        .unwrap_or_else(|| format!("{}-{}-s{}", task, cfg.model.as_str(), cfg.seed));
    let dir = run_dir(&a.out_dir, &tag)?;
    fs::write(dir.join("config.txt"), a.to_overlay())?;
    fs::write(
        dir.join("config.json"),
        serde_json::to_string_pretty(&cfg).expect("config serialises"),
    )?;
    let run = match (cfg.model, &a.val) {
        (ModelKind::Auto, Some(val)) => {
            let val_set = load_data(val)?;
            pipeline::auto_run(&cfg, &train_set, &val_set, &test_set)?
        }
        _ => pipeline::train(&cfg, &train_set, &test_set)?,
    };
    run.report.write(&dir, "report")?;
    save_model(&dir.join("model.ssn"), &run.model)?;
    let last = run.report.last().expect("initial record");
    println!(
        "{} {} epochs {}: board accuracy {:.4}, entry accuracy {:.4}, test loss {:.5}",
        task,
        cfg.model.as_str(),
        last.epoch,
        last.board_accuracy,
        last.entry_accuracy,
        last.test_loss
    );
    if let Some(d) = &run.report.discovery {
        println!("discovered {} (dim {}), kept {} (dim {})", d.expr, d.basis_dim, d.final_expr, d.final_basis_dim);
    }
    for w in &run.report.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", dir.display());
    Ok(dir)
}

/// Matrix to search: a plain matrix file as is, a checkpoint's task block
/// unless `keep_truth`.
fn symfind_input(a: &SymfindArgs) -> CliResult<DMatrix<f64>> {
    if let Ok(model) = load_model(&a.input) {
        let c = model.params.assemble_c();
        if a.keep_truth || model.task.is_none() {
            return Ok(c);
        }
        let n = c.nrows() - 1 - model.aux;
        return Ok(c.view((1, 1), (n, n)).into_owned());
    }
    Ok(load_matrix(&a.input)?)
}

pub fn cmd_symfind(a: &SymfindArgs) -> CliResult<()> {
    let mut m = symfind_input(a)?;
    if !m.is_square() {
        return Err(CliError::Data(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if a.normalize {
        m = normalized(&m);
    }
    let mut base = SymFindConfig::default();
    if let Some(g) = a.gamma_max {
        base.gamma_max = g;
    }
    let cfg = symfind_config(base, a.lambda1, a.lambda2, a.tolerance_scale.as_deref())?;
    let res = sym_find(&m, &cfg);
    println!("{}", res.expr);
    println!("{}", serde_json::to_string(res.sigma.images()).expect("serialises"));
    println!("source,expr,dim,distance");
    for c in &res.candidates {
        println!("{},\"{}\",{},{}", c.source, c.expr, c.dim, c.distance);
    }
    if let Some(out) = &a.out {
        let report = json!({
            "expr": res.expr.to_string(),
            "sigma": res.sigma.images(),
            "distance": res.distance,
            "basis_dim": res.expr.basis_dim(),
            "budget_hits": res.budget_hits,
            "candidates": res.candidates,
            "config": cfg,
        });
        fs::write(out, serde_json::to_string_pretty(&report).expect("serialises"))?;
    }
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    let text = match &a.spec {
        Some(p) => fs::read_to_string(p)?,
        None => PAPER_BENCH_SPECS.to_string(),
    };
    let specs = parse_bench_specs(&text)?;
    if !(a.omega >= 0.0) {
        return Err(CliError::Usage("omega must be non-negative".into()));
    }
    let cfg = symfind_config(SymFindConfig::default(), a.lambda1, a.lambda2, a.tolerance_scale.as_deref())?;
    let rows = symfind_bench(&specs, a.omega, a.runs, a.seed, &cfg);
    let csv = BenchRow::table_csv(&rows);
    print!("{csv}");
    if let Some(out) = &a.out {
        fs::write(out, csv)?;
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    let model = load_model(&a.checkpoint)?;
    let data = load_data(&a.dataset)?;
    let e = pipeline::evaluate(&model, &data, a.seed, &Default::default()).map_err(|e| match e {
        PipelineError::Config(m) => CliError::Data(m),
        other => other.into(),
    })?;
    if a.json {
        println!(
            "{}",
            json!({
                "examples": data.len(),
                "board_accuracy": e.board_accuracy,
                "entry_accuracy": e.entry_accuracy,
                "loss": e.loss,
                "unconverged": e.unconverged,
            })
        );
    } else {
        println!(
            "examples {} board accuracy {:.4} entry accuracy {:.4} loss {:.5}",
            data.len(),
            e.board_accuracy,
            e.entry_accuracy,
            e.loss
        );
    }
    Ok(())
}

/// Header line of the report CSV, re-exported for scripts.
pub fn report_columns() -> &'static str {
    CSV_COLUMNS
}
