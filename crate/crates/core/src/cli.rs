//! Command-line front end.
//!
//! Exit status is 0 on success, 1 on a runtime or I/O failure and 2 on a
//! usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::csvio::{read_features_path, read_labeled_path, write_dataset_path};
use crate::datagen::{
    gen_hypercube_mixture, gen_hypersphere_mixture, generate_named, Generated, MixtureParams,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate, tuned_vs_best, EvalReport, TunedVsBest};
use crate::model::{load_model, save_model, TunedModel};
use crate::projection::{make_projection, project};
use crate::tuner::{tune, tune_with_projection, TuningGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "loftune", version, about = "LOF anomaly scoring with automatic (c, k) selection")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic training CSV and labeled validation CSV.
    Generate(GenerateArgs),
    /// Select (c, k) on a training CSV and write the model.
    Tune(TuneArgs),
    /// Score an unlabeled CSV with a model.
    Score(ScoreArgs),
    /// Report precision, recall, F1 and AUC on a labeled CSV.
    Evaluate(EvaluateArgs),
    /// Repeat generate, project, tune and evaluate on high-dimensional mixtures.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// polygons, balls, spheres or cubes.
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Contamination values, comma separated.
    #[arg(long = "c", value_parser = parse_c_list, value_delimiter = ',', default_value = "0.006,0.008,0.01")]
    pub contaminations: Vec<f64>,
    /// Neighborhood sizes as lo:hi[:step].
    #[arg(long = "k", value_parser = parse_k_range, default_value = "10:50")]
    pub neighborhood_sizes: KRange,
}

impl GridArgs {
    pub fn grid(&self) -> Result<TuningGrid> {
        TuningGrid::new(self.contaminations.clone(), self.neighborhood_sizes.0.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KRange(pub Vec<usize>);

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Tab-separated per-cell statistics.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Project to this many dimensions before tuning.
    #[arg(long)]
    pub project_dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub project_seed: u64,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    /// Also write the report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// spheres or cubes.
    #[arg(long, default_value = "spheres")]
    pub set: String,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_train: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n_valid: usize,
    #[arg(long, default_value_t = 3)]
    pub project_dim: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

pub fn parse_c_list(s: &str) -> std::result::Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("{s:?} is not a number"))
}

pub fn parse_k_range(s: &str) -> std::result::Result<KRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(format!("{s:?} is not lo:hi[:step]"));
    }
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("{t:?} is not a non-negative integer"))
    };
    let lo = num(parts[0])?;
    let hi = num(parts[1])?;
    let step = if parts.len() == 3 { num(parts[2])? } else { 1 };
    if step == 0 || lo == 0 || lo > hi {
        return Err(format!("{s:?} needs 1 <= lo <= hi and step >= 1"));
    }
    Ok(KRange((lo..=hi).step_by(step).collect()))
}

fn is_usage_error(e: &Error) -> bool {
    matches!(e, Error::UnknownGenerator { .. } | Error::InvalidGrid(_))
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        // a global pool can only be installed once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, &mut out),
        Command::Tune(a) => cmd_tune(&a, &mut out),
        Command::Score(a) => cmd_score(&a, &mut out),
        Command::Evaluate(a) => cmd_evaluate(&a, &mut out),
        Command::Bench(a) => cmd_bench(&a, &mut out),
    }
}

fn file_stem(dir: &Path, set: &str, part: &str) -> PathBuf {
    dir.join(format!("{set}_{part}.csv"))
}

pub fn cmd_generate(a: &GenerateArgs, out: &mut impl Write) -> Result<()> {
    let Generated { train, validation } = generate_named(&a.set, a.seed)?;
    fs::create_dir_all(&a.out)?;
    let train_path = file_stem(&a.out, &a.set, "train");
    let valid_path = file_stem(&a.out, &a.set, "validation");
    write_dataset_path(&train_path, &train, None)?;
    write_dataset_path(&valid_path, &validation.data, Some(&validation.labels))?;
    writeln!(out, "train\t{}\t{} rows", train_path.display(), train.n())?;
    writeln!(
        out,
        "validation\t{}\t{} rows\tanomalies {} ({:.4})",
        valid_path.display(),
        validation.data.n(),
        validation.anomaly_count(),
        validation.anomaly_fraction()
    )?;
    Ok(())
}

pub fn cmd_tune(a: &TuneArgs, out: &mut impl Write) -> Result<()> {
    let grid = a.grid.grid()?;
    let train = read_features_path(&a.train)?.data;
    let start = Instant::now();
    let model = match a.project_dim {
        Some(d) => tune_with_projection(&train, &grid, make_projection(train.p(), d, a.project_seed)?)?,
        None => tune(&train, &grid)?,
    };
    let elapsed = start.elapsed();
    save_model(&model, &a.model)?;
    if let (Some(path), Some(table)) = (&a.diagnostics, model.score_table()) {
        table.write_tsv(io::BufWriter::new(fs::File::create(path)?))?;
    }
    writeln!(out, "c_opt\t{}\nk_opt\t{}", model.c_opt(), model.k_opt())?;
    writeln!(out, "threshold\t{}", model.threshold())?;
    if let Some(table) = model.score_table() {
        writeln!(out, "c\tm\tk_opt\tT\tdf\tncp\tquantile")?;
        for s in &table.per_c {
            writeln!(
                out,
                "{}\t{}\t{}\t{:.6}\t{}\t{:.6}\t{:.6}",
                s.c, s.m, s.k_opt, s.t_opt, s.df, s.ncp, s.quantile
            )?;
        }
        writeln!(out, "cells\t{}", table.cells.len())?;
    }
    writeln!(out, "seconds\t{:.3}", elapsed.as_secs_f64())?;
    Ok(())
}

fn check_input_dim(model: &TunedModel, p: usize) -> Result<()> {
    if model.input_dim() != p {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: p,
        });
    }
    Ok(())
}

pub fn cmd_score(a: &ScoreArgs, out: &mut impl Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let data = read_features_path(&a.input)?.data;
    check_input_dim(&model, data.p())?;
    let scores = model.score(&data)?;
    let mut w = io::BufWriter::new(fs::File::create(&a.out)?);
    writeln!(w, "score,prediction")?;
    for s in &scores {
        writeln!(w, "{},{}", s, u8::from(*s >= model.threshold()))?;
    }
    w.flush()?;
    let flagged = scores.iter().filter(|s| **s >= model.threshold()).count();
    writeln!(out, "scored\t{}\tanomalies\t{}", scores.len(), flagged)?;
    Ok(())
}

fn report_lines(r: &EvalReport) -> String {
    format!(
        "tp\tfp\ttn\tfn\tprecision\trecall\tf1\tauc\n{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        r.tp, r.fp, r.tn, r.fn_, r.precision, r.recall, r.f1, r.auc
    )
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut impl Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let (table, labels) = read_labeled_path(&a.validation)?;
    check_input_dim(&model, table.data.p())?;
    let report = evaluate(&model, &table.data, &labels)?;
    let text = report_lines(&report);
    if let Some(path) = &a.report {
        fs::write(path, &text)?;
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Mean and standard error; the error is `None` for fewer than two values.
pub fn mean_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

fn fmt_mean_se(values: &[f64]) -> String {
    match mean_se(values) {
        (m, Some(se)) => format!("{m:.4} ({se:.4})"),
        (m, None) => format!("{m:.4} (-)"),
    }
}

/// One repetition of the mixture benchmark.
pub fn bench_rep(set: &str, seed: u64, params: &MixtureParams, project_dim: usize, grid: &TuningGrid) -> Result<TunedVsBest> {
    let generated = match set {
        "spheres" => gen_hypersphere_mixture(seed, params)?.generated,
        "cubes" => gen_hypercube_mixture(seed, params)?.generated,
        other => {
            return Err(Error::UnknownGenerator {
                name: other.to_string(),
                valid: "spheres, cubes".into(),
            })
        }
    };
    let spec = make_projection(params.dim, project_dim, seed)?;
    let train = project(&generated.train, &spec)?;
    let valid = project(&generated.validation.data, &spec)?;
    tuned_vs_best(&train, grid, &valid, &generated.validation.labels)
}

pub fn cmd_bench(a: &BenchArgs, out: &mut impl Write) -> Result<()> {
    let grid = a.grid.grid()?;
    let params = MixtureParams {
        dim: a.dim,
        n_train: a.n_train,
        n_valid: a.n_valid,
        ..MixtureParams::default()
    };
    writeln!(out, "rep\tseed\tc_opt\tk_opt\tf1\tauc\tbest_f1\tbest_auc\ttune_s")?;
    let mut rows = Vec::with_capacity(a.reps);
    for rep in 0..a.reps {
        let seed = a.seed.wrapping_add(rep as u64);
        let r = bench_rep(&a.set, seed, &params, a.project_dim, &grid)?;
        writeln!(
            out,
            "{rep}\t{seed}\t{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.3}",
            r.c_opt,
            r.k_opt,
            r.tuned.f1,
            r.tuned.auc,
            r.best_f1,
            r.best_auc,
            r.tune_time.as_secs_f64()
        )?;
        rows.push(r);
    }
    let col = |f: fn(&TunedVsBest) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    writeln!(out)?;
    writeln!(out, "set\tF1\tAUC\tbest F1\tbest AUC\tF1 gap\tAUC gap\ttune s")?;
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        a.set,
        fmt_mean_se(&col(|r| r.tuned.f1)),
        fmt_mean_se(&col(|r| r.tuned.auc)),
        fmt_mean_se(&col(|r| r.best_f1)),
        fmt_mean_se(&col(|r| r.best_auc)),
        fmt_mean_se(&col(|r| r.f1_gap())),
        fmt_mean_se(&col(|r| r.auc_gap())),
        fmt_mean_se(&col(|r| r.tune_time.as_secs_f64())),
    )?;
    Ok(())
}
