//! The `scvx` command line.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use scvx_core::fit::{fit_all_at_once, mse, sweep_plan, train_test_split, cell_seed, FitReport};
use scvx_core::pareto::{FailurePolicy, SampleMeta, SampleOptions};
use scvx_core::simplex::grid_points;
use scvx_core::{SamplePoint, SolverConfig};
use serde_json::{json, Value};

use crate::bundle::{creation_timestamp, export_model_bundle, BundleMeta};
use crate::dataset::{DatasetSource, DatasetSpec, SyntheticSpec};
use crate::error::{Result, ScvxError};
use crate::formats::{
    fit_report_json, load_sample, read_model, read_sample, save_sample, write_model, write_sweep_reports,
    write_sweep_summary, SampleSidecar, SkippedPoint, SolverSettings, SAMPLE_FORMAT,
};
use crate::parallel::{sample_parallel, sweep_parallel};
use crate::serve::{self, ServeConfig};
use crate::verify::{verify_remark, verify_sample, SampleChecks};

#[derive(Debug, Parser)]
#[command(name = "scvx", version, about = "Elastic-net Pareto sampling and Bezier simplex fitting")]
pub struct Cli {
    /// Seed for splits, synthetic data and random solver starts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Perturbation added to every objective.
    #[arg(long, global = true, default_value_t = 1e-16)]
    pub epsilon: f64,
    /// Coordinate-descent stopping tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tolerance: f64,
    /// Sweep limit per solve.
    #[arg(long = "max-iters", global = true, default_value_t = 100_000)]
    pub max_iters: usize,
    /// Worker threads; 0 uses every core. Never changes any output.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Primary output path (file or bundle directory).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Suppress progress lines.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the weighted problem on a grid of the weight simplex.
    Sample(SampleArgs),
    /// Fit one Bezier simplex to a random split of a sample.
    Fit(FitArgs),
    /// Degree x split x trial sweep of fits.
    Sweep(SweepArgs),
    /// Check a sample, or the built-in one-dimensional example.
    Verify(VerifyArgs),
    /// Write a model bundle for the explorer.
    Export(ExportArgs),
    /// Serve a bundle and the explorer's static files over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinDataset {
    Example1,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "builtin", "synthetic"])))]
pub struct SampleArgs {
    /// Delimited text file with predictors and response.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinDataset>,
    /// Generated data: number of predictors and observations.
    #[arg(long, value_name = "PREDICTORS,OBSERVATIONS")]
    pub synthetic: Option<String>,
    /// Predictor columns by name or 0-based index (default: all but the response).
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,
    /// Response column by name or 0-based index (default: last).
    #[arg(long)]
    pub response: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long)]
    pub no_header: bool,
    /// Keep raw values instead of min-max scaling.
    #[arg(long)]
    pub no_normalize: bool,
    /// Grid resolution R; the grid has (R+1)(R+2)/2 weights.
    #[arg(long, default_value_t = 100)]
    pub resolution: u32,
    /// Drop weights that fail to converge instead of aborting.
    #[arg(long)]
    pub skip_failures: bool,
    #[arg(long)]
    pub no_warm_start: bool,
    /// Start every solve from a random point drawn with --seed.
    #[arg(long)]
    pub random_start: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub sample: PathBuf,
    #[arg(long)]
    pub degree: u32,
    #[arg(long)]
    pub train_count: usize,
    /// Also write the report JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub sample: PathBuf,
    /// Comma-separated degrees and ranges, e.g. 1-15,20,25,30.
    #[arg(long)]
    pub degrees: String,
    /// Comma-separated training-set sizes.
    #[arg(long)]
    pub train_counts: String,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinCheck {
    Remark,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("subject").required(true).args(["sample", "builtin"])))]
pub struct VerifyArgs {
    pub sample: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinCheck>,
    #[arg(long, default_value_t = 1e-7)]
    pub dominance_tol: f64,
    /// Brute-force grid size for --builtin remark.
    #[arg(long, default_value_t = 1_000_000)]
    pub nodes: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Model JSON written by `scvx fit`.
    pub model: PathBuf,
    /// Manifest timestamp (default: SOURCE_DATE_EPOCH or now).
    #[arg(long)]
    pub created_at: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub bundle: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Static files of the explorer.
    #[arg(long)]
    pub assets: Option<PathBuf>,
}

/// Parses arguments, runs the command and returns the process exit code.
/// Errors go to stderr as one JSON object.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report_error(&ScvxError::Usage(e.render().to_string().trim().to_owned()));
            return 2;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &ScvxError) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{}", e.to_json());
}

pub fn run(cli: &Cli) -> Result<()> {
    let solver = solver_config(cli, None)?;
    match &cli.command {
        Command::Sample(a) => cmd_sample(cli, a, solver),
        Command::Fit(a) => cmd_fit(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Verify(a) => cmd_verify(cli, a),
        Command::Export(a) => cmd_export(cli, a),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn solver_config(cli: &Cli, random_start: Option<u64>) -> Result<SolverConfig> {
    if !(cli.epsilon.is_finite() && cli.epsilon > 0.0) {
        return Err(ScvxError::Usage(format!("--epsilon must be positive, got {}", cli.epsilon)));
    }
    let cfg = SolverConfig {
        tolerance: cli.tolerance,
        max_iterations: cli.max_iters,
        seed: random_start,
        ..SolverConfig::default()
    };
    cfg.validate()
        .map_err(|_| ScvxError::Usage("--tolerance must be positive and --max-iters at least 1".into()))?;
    Ok(cfg)
}

fn progress(cli: &Cli, line: std::fmt::Arguments) {
    if !cli.quiet {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{line}");
    }
}

/// Writes a line to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn output_or(cli: &Cli, default: &str) -> PathBuf {
    cli.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn parse_synthetic(text: &str, seed: u64) -> Result<SyntheticSpec> {
    let bad = || ScvxError::Usage(format!("--synthetic expects PREDICTORS,OBSERVATIONS, got {text:?}"));
    let (p, o) = text.split_once(',').ok_or_else(bad)?;
    let p: usize = p.trim().parse().map_err(|_| bad())?;
    let o: usize = o.trim().parse().map_err(|_| bad())?;
    Ok(SyntheticSpec::new(p, o, seed))
}

/// `1-3,7` → `[1, 2, 3, 7]`.
pub fn parse_list<T: TryFrom<u64>>(text: &str, flag: &str) -> Result<Vec<T>> {
    let bad = || ScvxError::Usage(format!("{flag}: cannot parse {text:?}"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let mut raw = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b || b - a > 1_000_000 {
                    return Err(bad());
                }
                raw.extend(a..=b);
            }
            None => raw.push(num(part)?),
        }
    }
    if raw.is_empty() {
        return Err(bad());
    }
    raw.into_iter().map(|v| T::try_from(v).map_err(|_| bad())).collect()
}

fn cmd_sample(cli: &Cli, a: &SampleArgs, _: SolverConfig) -> Result<()> {
    if a.resolution == 0 {
        return Err(ScvxError::Usage("--resolution must be at least 1".into()));
    }
    let source = if let Some(path) = &a.data {
        DatasetSource::File(DatasetSpec {
            path: path.clone(),
            predictor_columns: a.predictors.clone(),
            response_column: a.response.clone(),
            delimiter: a.delimiter,
            has_header: !a.no_header,
            normalize: !a.no_normalize,
        })
    } else if a.builtin.is_some() {
        DatasetSource::Example1
    } else {
        let spec = a.synthetic.as_deref().ok_or_else(|| ScvxError::Usage("no dataset given".into()))?;
        DatasetSource::Synthetic(parse_synthetic(spec, cli.seed)?)
    };
    let random_start = a.random_start.then_some(cli.seed);
    let config = solver_config(cli, random_start)?;
    let out = output_or(cli, "sample.csv");

    let data = source.load(cli.epsilon)?;
    for w in &data.warnings {
        progress(cli, format_args!("warning: {w}"));
    }
    let n = data.problem.n_predictors();
    let grid = grid_points(3, a.resolution);
    progress(
        cli,
        format_args!("sampling {} weights (resolution {}) on {} [{} x {}]", grid.len(), a.resolution, data.name, data.problem.n_obs(), n),
    );
    let options = SampleOptions {
        warm_start: !a.no_warm_start,
        policy: if a.skip_failures { FailurePolicy::Skip } else { FailurePolicy::Abort },
    };
    let meta = SampleMeta {
        dataset: data.name.clone(),
        epsilon: cli.epsilon,
        resolution: a.resolution,
    };
    let started = Instant::now();
    let outcome = sample_parallel(&data.problem, &grid, &config, options, meta, cli.threads)?;
    let sidecar = SampleSidecar {
        format: SAMPLE_FORMAT.into(),
        dataset_name: data.name.clone(),
        dataset: source,
        epsilon: cli.epsilon,
        resolution: a.resolution,
        n,
        records: outcome.sample.len(),
        seed: cli.seed,
        solver: SolverSettings {
            tolerance: config.tolerance,
            max_iterations: config.max_iterations,
            random_start,
            refine: config.refine,
            warm_start: options.warm_start,
        },
        skipped: outcome
            .failures
            .iter()
            .map(|f| SkippedPoint {
                index: f.index,
                weight: f.weight.as_slice().to_vec(),
                sweeps: f.sweeps,
                last_delta: f.last_delta,
            })
            .collect(),
    };
    save_sample(&out, &outcome.sample, &sidecar)?;
    progress(
        cli,
        format_args!(
            "wrote {} records to {} ({} skipped) in {:.2} s",
            outcome.sample.len(),
            out.display(),
            outcome.failures.len(),
            started.elapsed().as_secs_f64()
        ),
    );
    Ok(())
}

fn fit_points(path: &Path) -> Result<(Vec<SamplePoint>, SampleSidecar)> {
    let (sample, sidecar) = load_sample(path, None)?;
    if sample.is_empty() {
        return Err(ScvxError::Usage(format!("{}: sample has no records", path.display())));
    }
    Ok((sample.solution_mapping_points(), sidecar))
}

fn cmd_fit(cli: &Cli, a: &FitArgs) -> Result<()> {
    let out = output_or(cli, "model.json");
    let (points, sidecar) = fit_points(&a.sample)?;
    let seed = cell_seed(cli.seed, a.train_count, 0);
    let (train_idx, test_idx) = train_test_split(points.len(), a.train_count, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| points[i].clone()).collect::<Vec<_>>();
    let (train, test) = (pick(&train_idx), pick(&test_idx));
    let fitted = fit_all_at_once(&train, 3, a.degree)?;
    let report = FitReport {
        train_mse: mse(&fitted.model, &train)?,
        test_mse: mse(&fitted.model, &test)?,
        degree: a.degree,
        train_count: train.len(),
        test_count: test.len(),
        trial: 0,
        seed,
        condition_diagnostic: fitted.diagnostics.condition,
        rank_deficient: fitted.diagnostics.truncated || fitted.diagnostics.underdetermined,
    };
    let meta = json!({
        "dataset": sidecar.dataset_name,
        "epsilon": sidecar.epsilon,
        "n": sidecar.n,
        "resolution": sidecar.resolution,
        "train_count": report.train_count,
        "seed": seed,
        "target_labels": target_labels(sidecar.n),
    });
    write_model(&out, &fitted.model, &meta)?;
    let mut doc = fit_report_json(&report, &fitted.diagnostics);
    doc["model"] = json!(out.display().to_string());
    let text = serde_json::to_string_pretty(&doc).expect("report serializes");
    if let Some(p) = &a.report {
        std::fs::write(p, format!("{text}\n")).map_err(|e| ScvxError::io(p, e))?;
    }
    emit(&text);
    Ok(())
}

fn target_labels(n: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=n).map(|j| format!("theta_{j}")).collect();
    v.extend(["f1", "f2", "f3"].map(String::from));
    v
}

fn summary_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map_or_else(|| "sweep".into(), |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}.summary.csv"))
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let degrees: Vec<u32> = parse_list(&a.degrees, "--degrees")?;
    let train_counts: Vec<usize> = parse_list(&a.train_counts, "--train-counts")?;
    if a.trials == 0 {
        return Err(ScvxError::Usage("--trials must be at least 1".into()));
    }
    let out = output_or(cli, "sweep.csv");
    let (points, _) = fit_points(&a.sample)?;
    if let Some(&k) = train_counts.iter().find(|&&k| k == 0 || k >= points.len()) {
        return Err(ScvxError::Usage(format!(
            "--train-counts: {k} must be between 1 and {} for a {}-record sample",
            points.len() - 1,
            points.len()
        )));
    }
    let cells = sweep_plan(&train_counts, &degrees, a.trials, cli.seed);
    progress(cli, format_args!("running {} fits on {} records", cells.len(), points.len()));
    let started = Instant::now();
    let outcome = sweep_parallel(&points, 3, &cells, cli.threads)?;
    write_sweep_reports(&out, &outcome.reports)?;
    let summary = summary_path(&out);
    write_sweep_summary(&summary, &outcome.summary, &outcome.best, points.len())?;
    for (cell, err) in &outcome.failures {
        progress(
            cli,
            format_args!("failed: train_count {} degree {} trial {}: {err}", cell.train_count, cell.degree, cell.trial),
        );
    }
    for (k, d) in &outcome.best {
        progress(cli, format_args!("train_count {k}: best degree {d}"));
    }
    progress(
        cli,
        format_args!(
            "wrote {} and {} in {:.2} s",
            out.display(),
            summary.display(),
            started.elapsed().as_secs_f64()
        ),
    );
    if !outcome.failures.is_empty() {
        return Err(ScvxError::Usage(format!("{} sweep cells failed", outcome.failures.len())));
    }
    Ok(())
}

fn emit_report(report: &crate::verify::VerifyReport, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&report.to_json()).expect("report serializes");
    if let Some(p) = out {
        std::fs::write(p, format!("{text}\n")).map_err(|e| ScvxError::io(p, e))?;
    }
    emit(&text);
    if report.passed() {
        Ok(())
    } else {
        Err(ScvxError::Verification(format!("{}: {}", report.subject, report.failed().join(", "))))
    }
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Result<()> {
    if let Some(BuiltinCheck::Remark) = a.builtin {
        if a.nodes < 2 {
            return Err(ScvxError::Usage("--nodes must be at least 2".into()));
        }
        return emit_report(&verify_remark(a.nodes), cli.output.as_deref());
    }
    let path = a.sample.as_deref().ok_or_else(|| ScvxError::Usage("nothing to verify".into()))?;
    let (sample, sidecar) = read_sample(path)?;
    if sample.is_empty() {
        return Err(ScvxError::Usage(format!("{}: sample has no records", path.display())));
    }
    let data = sidecar.dataset.load_relative_to(path.parent(), sidecar.epsilon)?;
    if data.problem.n_predictors() != sidecar.n {
        return Err(ScvxError::schema(path, "dataset does not match the sample's predictor count"));
    }
    let settings = SampleChecks {
        dominance_tolerance: a.dominance_tol,
        certificate_slack: 10.0 * sidecar.solver.tolerance,
    };
    let report = verify_sample(&path.display().to_string(), &sample, Some(&data.problem), settings)?;
    emit_report(&report, cli.output.as_deref())
}

fn meta_field<'a>(meta: &'a Value, key: &str, path: &Path) -> Result<&'a Value> {
    meta.get(key)
        .filter(|v| !v.is_null())
        .ok_or_else(|| ScvxError::schema(path, format!("model meta lacks {key:?}; fit it with `scvx fit`")))
}

fn cmd_export(cli: &Cli, a: &ExportArgs) -> Result<()> {
    let (model, meta) = read_model(&a.model)?;
    let p = a.model.as_path();
    let bundle_meta = BundleMeta {
        dataset: meta_field(&meta, "dataset", p)?.as_str().unwrap_or_default().to_owned(),
        epsilon: meta_field(&meta, "epsilon", p)?
            .as_f64()
            .ok_or_else(|| ScvxError::schema(p, "epsilon is not a number"))?,
        n: meta_field(&meta, "n", p)?
            .as_u64()
            .ok_or_else(|| ScvxError::schema(p, "n is not an integer"))? as usize,
        resolution: meta.get("resolution").and_then(Value::as_u64).unwrap_or(0) as u32,
        created_at: a.created_at.clone().unwrap_or_else(creation_timestamp),
    };
    let dir = output_or(cli, "bundle");
    export_model_bundle(&model, &bundle_meta, &dir)?;
    progress(cli, format_args!("wrote bundle to {}", dir.display()));
    Ok(())
}

fn cmd_serve(a: &ServeArgs) -> Result<()> {
    let config = ServeConfig {
        bundle_dir: a.bundle.clone(),
        assets_dir: a.assets.clone(),
    };
    serve::run(SocketAddr::new(a.host, a.port), &config, |addr| {
        emit(&format!("serving {} on http://{addr}", a.bundle.display()));
    })
}
