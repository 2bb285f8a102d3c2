use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mix, PipelineError};
use crate::group::{conjugated_basis, parse_group_expr, GroupExpr, Perm, DEFAULT_MAX_DEGREE};
use crate::symfind::{sym_find, SymFindConfig};

/// How the hidden conjugating permutation of a benchmark group is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaKind {
    Identity,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub expr: GroupExpr,
    pub sigma: SigmaKind,
}

/// The four groups of the published recovery table.
pub const PAPER_BENCH_SPECS: &str = "\
Z3 + Z3 + Z3 + Z3 + Z3 ; random
S3 wr S10 ; random
(S3 wr S3) + Z3 ; random
S2 * S2 * S2 ; identity
";

/// One spec per line, `<expression> ; identity|random`; `#` starts a
/// comment. The σ kind defaults to `random`.
pub fn parse_bench_specs(text: &str) -> Result<Vec<BenchSpec>, PipelineError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (expr, kind) = match line.split_once(';') {
            Some((e, k)) => (e.trim(), k.trim()),
            None => (line, "random"),
        };
        let sigma = match kind {
            "identity" | "id" => SigmaKind::Identity,
            "random" => SigmaKind::Random,
            other => {
                return Err(PipelineError::Config(format!(
                    "line {}: unknown sigma kind '{other}'",
                    no + 1
                )))
            }
        };
        let expr = parse_group_expr(expr, DEFAULT_MAX_DEGREE)
            .map_err(|e| PipelineError::Config(format!("line {}: {e}", no + 1)))?;
        out.push(BenchSpec { expr, sigma });
    }
    Ok(out)
}

/// Wilson score interval at `z` standard deviations.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub expr: String,
    pub sigma: SigmaKind,
    pub degree: usize,
    pub basis_dim: usize,
    pub runs: usize,
    pub full: usize,
    pub partial: usize,
    pub full_ci: (f64, f64),
    pub partial_ci: (f64, f64),
    pub budget_hits: usize,
    pub seconds: f64,
}

impl BenchRow {
    pub const CSV_HEADER: &'static str = "group,sigma,degree,basis_dim,runs,full_acc,full_lo,full_hi,\
partial_acc,partial_lo,partial_hi,budget_hits,seconds";

    pub fn full_acc(&self) -> f64 {
        self.full as f64 / self.runs.max(1) as f64
    }

    pub fn partial_acc(&self) -> f64 {
        self.partial as f64 / self.runs.max(1) as f64
    }

    pub fn csv_line(&self) -> String {
        let mut s = String::new();
        write!(
            s,
            "\"{}\",{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{},{:.2}",
            self.expr,
            match self.sigma {
                SigmaKind::Identity => "identity",
                SigmaKind::Random => "random",
            },
            self.degree,
            self.basis_dim,
            self.runs,
            self.full_acc(),
            self.full_ci.0,
            self.full_ci.1,
            self.partial_acc(),
            self.partial_ci.0,
            self.partial_ci.1,
            self.budget_hits,
            self.seconds
        )
        .unwrap();
        s
    }

    pub fn table_csv(rows: &[BenchRow]) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in rows {
            s.push_str(&r.csv_line());
            s.push('\n');
        }
        s
    }
}

/// Outcome of one trial: (full, partial, budget hits).
fn trial(spec: &BenchSpec, omega: f64, seed: u64, cfg: &SymFindConfig) -> (bool, bool, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.expr.degree();
    let sigma = match spec.sigma {
        SigmaKind::Identity => Perm::identity(n),
        SigmaKind::Random => Perm::random(n, &mut rng),
    };
    let target = conjugated_basis(&spec.expr, &sigma)
        .expect("parsed expression")
        .symmetrize()
        .partition()
        .clone();
    let mut m = target.random_equivariant(rng.gen());
    if omega > 0.0 {
        let noise = Normal::new(0.0, omega).expect("finite omega");
        for x in m.iter_mut() {
            *x += noise.sample(&mut rng);
        }
    }
    let res = sym_find(&m, cfg);
    let got = res.partition().symmetrize().partition().clone();
    let full = got == target;
    let partial = full
        || (!res.expr.is_trivial() && got.is_refinement_of(&target).expect("same degree"));
    (full, partial, res.budget_hits)
}

/// Recovery benchmark: per run, a random equivariant matrix of the target
/// group plus `N(0, ω²)` noise is handed to discovery. Full recovery means
/// equal symmetrised pair partitions; partial means a nontrivial refinement.
pub fn symfind_bench(
    specs: &[BenchSpec],
    omega: f64,
    runs: usize,
    seed: u64,
    cfg: &SymFindConfig,
) -> Vec<BenchRow> {
    specs
        .iter()
        .enumerate()
        .map(|(si, spec)| {
            let t0 = Instant::now();
            let results: Vec<(bool, bool, usize)> = (0..runs)
                .into_par_iter()
                .map(|r| trial(spec, omega, mix(seed, si as u64, r as u64), cfg))
                .collect();
            let full = results.iter().filter(|r| r.0).count();
            let partial = results.iter().filter(|r| r.1).count();
            BenchRow {
                expr: spec.expr.to_string(),
                sigma: spec.sigma,
                degree: spec.expr.degree(),
                basis_dim: spec.expr.basis_dim(),
                runs,
                full,
                partial,
                full_ci: wilson_interval(full, runs, 1.96),
                partial_ci: wilson_interval(partial, runs, 1.96),
                budget_hits: results.iter().map(|r| r.2).sum(),
                seconds: t0.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
