//! Command-line front end: one TOML-configured job per invocation.
//!
//! Exit status is 0 on success, 1 when the command line or config is
//! invalid, 2 when the computation itself fails and 3 when a certification
//! ends in a failing or unstable verdict.

pub mod config;
pub mod emit;

use crate::certify::{certify_inequality, convergence_study_with, estimate_operator_norm, InequalityReport};
use crate::decomposition::{atomic_decompose, cz_decompose};
use crate::error::{Error, Result};
use crate::operators::hl_maximal;
use crate::sampled::{sample, Grid};
use clap::{Args, Parser, Subcommand};
use config::{DecomposeMethod, Format, Job, JobConfig, JobKind, Overrides};
use emit::{DecompositionSummary, NormRow, PieceRow};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MIXMORREY_OUT";

#[derive(Debug, Parser)]
#[command(name = "mixmorrey", version, about = "Norms, operators, decompositions and inequality certification on sampled grids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one norm of one function.
    Norm(JobArgs),
    /// Estimate an operator norm over a corpus.
    Op(JobArgs),
    /// Decompose a function into atoms or Calderón–Zygmund pieces.
    Decompose(JobArgs),
    /// Certify registry inequalities over a corpus.
    Certify(JobArgs),
    /// Tabulate a norm across resolutions and extrapolate.
    Sweep(JobArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Job configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Corpus and sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid sizes, e.g. `257,513`.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
}

impl Command {
    fn parts(&self) -> (JobKind, &JobArgs) {
        match self {
            Command::Norm(a) => (JobKind::Norm, a),
            Command::Op(a) => (JobKind::Operator, a),
            Command::Decompose(a) => (JobKind::Decompose, a),
            Command::Certify(a) => (JobKind::Certify, a),
            Command::Sweep(a) => (JobKind::Sweep, a),
        }
    }
}

/// A file written by a job.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub path: PathBuf,
    pub summary: String,
}

/// Outcome of a successful job.
#[derive(Debug, Clone, Default)]
pub struct JobOutcome {
    pub artifacts: Vec<Artifact>,
    pub reports: Vec<InequalityReport>,
}

impl JobOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.reports.iter().any(|r| r.verdict.is_failure()) {
            EXIT_VERDICT
        } else {
            EXIT_OK
        }
    }
}

/// Failure of a job together with its exit status.
#[derive(Debug)]
pub struct JobError {
    pub code: i32,
    pub error: Error,
}

fn validation(error: Error) -> JobError {
    JobError { code: EXIT_VALIDATION, error }
}

fn runtime(error: Error) -> JobError {
    let code = if matches!(error, Error::Config { .. }) { EXIT_VALIDATION } else { EXIT_RUNTIME };
    JobError { code, error }
}

/// Reads and validates a config, runs the job and writes its artifacts.
pub fn run_job(kind: JobKind, args: &JobArgs) -> std::result::Result<JobOutcome, JobError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| validation(Error::config(args.config.display().to_string(), format!("cannot read: {e}"))))?;
    let cfg = JobConfig::from_toml(&text).map_err(validation)?;
    let over = Overrides { seed: args.seed, resolutions: args.resolutions.clone(), format: args.format };
    let job = cfg.validate(kind, &over).map_err(validation)?;
    let format = over.format.or(cfg.format).unwrap_or(Format::Csv);
    let stem = cfg.name.clone().unwrap_or_else(|| {
        args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "job".into())
    });
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    execute(job, &out, &stem, format).map_err(runtime)
}

fn write(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    Ok(path)
}

/// Runs a validated job, writing `<stem>.<ext>` (one file per inequality for
/// certification) under `out`.
pub fn execute(job: Job, out: &Path, stem: &str, format: Format) -> Result<JobOutcome> {
    let ext = format.extension();
    let mut outcome = JobOutcome::default();
    match job {
        Job::Norm { function_id, spec, grid, norm } => {
            let f = sample(&spec, &grid)?;
            let v = norm.eval(&f)?;
            let row = NormRow {
                function_id: function_id.clone(),
                norm: norm.kind().as_str().into(),
                resolution: grid.points(),
                value: v.value,
                outer_sensitivity: v.outer_sensitivity,
                inner_sensitivity: v.inner_sensitivity,
                truncation_flag: v.truncation_flag,
            };
            let path = write(out, &format!("{stem}.{ext}"), &emit::emit_norm(std::slice::from_ref(&row), format)?)?;
            let flag = if v.truncation_flag { " (truncation flagged)" } else { "" };
            let summary =
                format!("{function_id} {} norm at m={}: {}{flag}", row.norm, row.resolution, emit::fmt_float(v.value));
            outcome.artifacts.push(Artifact { path, summary });
        }
        Job::Operator { op, space, corpus, resolutions, options } => {
            let rep = estimate_operator_norm(op, &space, &corpus, &resolutions, &options)?;
            let path = write(out, &format!("{stem}.{ext}"), &emit::emit_operator(&rep, format)?)?;
            let drift = rep.drift.map(emit::fmt_float).unwrap_or_else(|| "n/a".into());
            let summary = format!("{op} estimate {} over {} functions, drift {drift}", emit::fmt_float(rep.estimate), corpus.len());
            outcome.artifacts.push(Artifact { path, summary });
        }
        Job::Decompose { function_id, spec, grid, section } => {
            let f = sample(&spec, &grid)?;
            let degree = section.degree.unwrap_or(1);
            let summary = decompose(&function_id, &f, grid, degree, &section)?;
            let path = write(out, &format!("{stem}.{ext}"), &emit::emit_decomposition(&summary, format)?)?;
            let line = format!(
                "{function_id} {} decomposition: {} pieces, residual {}",
                summary.method,
                summary.pieces.len(),
                emit::fmt_float(summary.residual)
            );
            outcome.artifacts.push(Artifact { path, summary: line });
        }
        Job::Certify { names, params, corpus, resolutions } => {
            for name in names {
                let rep = certify_inequality(&name, &params, &corpus, &resolutions)?;
                let path = write(out, &format!("{stem}_{name}.{ext}"), &emit::emit_report(&rep, format)?)?;
                let max = rep.max_ratio.map(emit::fmt_float).unwrap_or_else(|| "n/a".into());
                let drift = rep.drift.map(emit::fmt_float).unwrap_or_else(|| "n/a".into());
                let summary = format!("{name}: {} (max ratio {max}, drift {drift})", rep.verdict.as_str());
                outcome.artifacts.push(Artifact { path, summary });
                outcome.reports.push(rep);
            }
        }
        Job::Sweep { function_id, spec, dim, half_width, norm, resolutions } => {
            let table = convergence_study_with(&resolutions, half_width, |m| {
                let grid = Grid::new(dim, half_width, m)?;
                Ok(norm.eval(&sample(&spec, &grid)?)?.value)
            })?;
            let label = norm.kind().as_str();
            let path = write(out, &format!("{stem}.{ext}"), &emit::emit_sweep(&function_id, label, &table, format)?)?;
            let order = table.observed_order.map(emit::fmt_float).unwrap_or_else(|| "n/a".into());
            let summary = format!(
                "{function_id} {label} norm: extrapolated {}, observed order {order}",
                emit::fmt_float(table.extrapolated)
            );
            outcome.artifacts.push(Artifact { path, summary });
        }
    }
    Ok(outcome)
}

fn decompose(
    function_id: &str,
    f: &crate::sampled::SampledFunction,
    grid: Grid,
    degree: usize,
    section: &config::DecomposeSection,
) -> Result<DecompositionSummary> {
    let dim = grid.dim();
    Ok(match section.method {
        DecomposeMethod::Atomic => {
            let [lo, hi] = section.levels.unwrap_or([-4, 4]);
            let dec = atomic_decompose(f, degree, lo, hi)?;
            DecompositionSummary {
                function_id: function_id.into(),
                method: "atomic".into(),
                resolution: grid.points(),
                residual: dec.residual,
                degree_reduced: dec.degree_reduced,
                pieces: dec
                    .atoms
                    .iter()
                    .enumerate()
                    .map(|(index, a)| PieceRow {
                        index,
                        level: a.level,
                        coefficient: a.lambda,
                        center: a.cube.center.clone(),
                        half_side: a.cube.half_side,
                        degree: a.degree,
                        moment_residual: a.moment_residual,
                        nodes: a.a.indices().len(),
                    })
                    .collect(),
            }
        }
        DecomposeMethod::Cz => {
            let level = section.level.unwrap_or(0);
            let cz = cz_decompose(f, level, degree, &hl_maximal(f))?;
            let residual = f.sub(&cz.reconstruct())?.max_abs();
            DecompositionSummary {
                function_id: function_id.into(),
                method: "cz".into(),
                resolution: grid.points(),
                residual,
                degree_reduced: cz.reduced_pieces > 0,
                pieces: cz
                    .pieces
                    .iter()
                    .enumerate()
                    .map(|(index, p)| PieceRow {
                        index,
                        level,
                        coefficient: p.piece.max_abs(),
                        center: p.cube.center()[..dim].to_vec(),
                        half_side: p.cube.side() / 2.0,
                        degree: p.degree_used,
                        moment_residual: p.moment_residual,
                        nodes: p.piece.indices().len(),
                    })
                    .collect(),
            }
        }
    })
}

/// Parses `args` (program name first), runs the job and returns the exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (kind, args) = cli.command.parts();
    match run_job(kind, args) {
        Ok(outcome) => {
            for a in &outcome.artifacts {
                println!("{} -> {}", a.summary, a.path.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {}", e.error);
            e.code
        }
    }
}
