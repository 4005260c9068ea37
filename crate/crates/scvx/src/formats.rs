//! On-disk formats: Pareto samples (CSV + JSON sidecar), model JSON and
//! sweep tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use scvx_core::fit::{CellSummary, FitDiagnostics, FitReport};
use scvx_core::pareto::{ParetoRecord, ParetoSample, SampleMeta};
use scvx_core::simplex::WeightVector;
use scvx_core::{BezierSimplexModel, ElasticNetProblem};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use serde_json::{json, Value};

use crate::dataset::DatasetSource;
use crate::error::{Result, ScvxError};

pub const SAMPLE_FORMAT: &str = "scvx-sample/1";
pub const INDEX_ORDER: &str = "revlex";

/// 17 significant digits: enough to read back the identical `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn raw17(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt17(x)).expect("finite float is a JSON number")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ScvxError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| ScvxError::io(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(bytes).and_then(|_| w.flush()).map_err(|e| ScvxError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> ScvxError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ScvxError::io(path, io),
        other => ScvxError::schema(path, format!("{other:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Seed of the random starting point; `None` starts at zero.
    pub random_start: Option<u64>,
    pub refine: bool,
    pub warm_start: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub index: usize,
    pub weight: Vec<f64>,
    pub sweeps: usize,
    pub last_delta: f64,
}

/// Metadata stored next to a sample CSV as `<stem>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub format: String,
    pub dataset_name: String,
    pub dataset: DatasetSource,
    pub epsilon: f64,
    pub resolution: u32,
    pub n: usize,
    pub records: usize,
    pub seed: u64,
    pub solver: SolverSettings,
    #[serde(default)]
    pub skipped: Vec<SkippedPoint>,
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

pub fn sample_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["w1".into(), "w2".into(), "w3".into()];
    h.extend((1..=n).map(|j| format!("theta_{j}")));
    h.extend(["f1", "f2", "f3"].map(String::from));
    h
}

/// Writes the CSV at `path` and the sidecar beside it.
pub fn save_sample(path: &Path, sample: &ParetoSample, sidecar: &SampleSidecar) -> Result<()> {
    let n = sample.n_predictors();
    if sidecar.n != n && !sample.is_empty() {
        return Err(ScvxError::Usage(format!("sidecar says n = {}, records have {n}", sidecar.n)));
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(sample_header(sidecar.n)).map_err(|e| csv_err(path, e))?;
    let mut row: Vec<String> = Vec::with_capacity(n + 6);
    for r in &sample.records {
        if r.weight.dim() != 3 {
            return Err(ScvxError::Usage("sample weights must lie on the 2-simplex".into()));
        }
        row.clear();
        row.extend(r.weight.as_slice().iter().chain(&r.theta).chain(&r.losses).map(|&x| fmt17(x)));
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| ScvxError::io(path, e))?;
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    text.push('\n');
    write_bytes(&side, text.as_bytes())
}

pub fn read_sidecar(csv_path: &Path) -> Result<SampleSidecar> {
    let side = sidecar_path(csv_path);
    let text = fs::read_to_string(&side).map_err(|e| ScvxError::io(&side, e))?;
    let s: SampleSidecar = serde_json::from_str(&text).map_err(|e| ScvxError::schema(&side, e.to_string()))?;
    if s.format != SAMPLE_FORMAT {
        return Err(ScvxError::schema(&side, format!("unknown format {:?}", s.format)));
    }
    Ok(s)
}

/// Parses a sample without checking losses against `theta`; shapes,
/// finiteness and weight validity are still enforced.
pub fn read_sample(path: &Path) -> Result<(ParetoSample, SampleSidecar)> {
    let sidecar = read_sidecar(path)?;
    let file = File::open(path).map_err(|e| ScvxError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(path, e))?
        .iter()
        .map(str::to_owned)
        .collect();
    let expected = sample_header(sidecar.n);
    if header != expected {
        return Err(ScvxError::schema(
            path,
            format!("header {:?} does not match expected {:?}", header.join(","), expected.join(",")),
        ));
    }
    let n = sidecar.n;
    let mut records = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(k + 2, |p| p.line() as usize);
        if rec.len() != expected.len() {
            return Err(ScvxError::parse(
                path,
                line,
                "",
                format!("expected {} fields, found {}", expected.len(), rec.len()),
            ));
        }
        let mut vals = Vec::with_capacity(rec.len());
        for (c, raw) in rec.iter().enumerate() {
            match raw.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => vals.push(v),
                _ => return Err(ScvxError::parse(path, line, &expected[c], format!("bad value {raw:?}"))),
            }
        }
        let weight = WeightVector::new(vals[..3].to_vec())
            .map_err(|e| ScvxError::parse(path, line, "w1", e.to_string()))?;
        records.push(ParetoRecord {
            weight,
            theta: vals[3..3 + n].to_vec(),
            losses: [vals[3 + n], vals[4 + n], vals[5 + n]],
        });
    }
    if records.len() != sidecar.records {
        return Err(ScvxError::schema(
            path,
            format!("sidecar lists {} records, file has {}", sidecar.records, records.len()),
        ));
    }
    let sample = ParetoSample {
        records,
        meta: SampleMeta {
            dataset: sidecar.dataset_name.clone(),
            epsilon: sidecar.epsilon,
            resolution: sidecar.resolution,
        },
    };
    Ok((sample, sidecar))
}

/// [`read_sample`] followed by full validation. `f1` is only checked when
/// `problem` is given.
pub fn load_sample(path: &Path, problem: Option<&ElasticNetProblem>) -> Result<(ParetoSample, SampleSidecar)> {
    let (sample, sidecar) = read_sample(path)?;
    if let Some(p) = problem {
        if p.epsilon() != sidecar.epsilon {
            return Err(ScvxError::schema(path, "problem epsilon differs from the sample's"));
        }
    }
    sample.validate(problem)?;
    Ok((sample, sidecar))
}

#[derive(Serialize)]
struct ModelOut<'a> {
    m: usize,
    d: u32,
    out_dim: usize,
    index_order: &'static str,
    control_points: Vec<Vec<Box<RawValue>>>,
    meta: &'a Value,
}

#[derive(Deserialize)]
struct ModelIn {
    m: usize,
    d: u32,
    out_dim: usize,
    index_order: String,
    control_points: Vec<Vec<f64>>,
    #[serde(default)]
    meta: Value,
}

/// Model JSON text, control points in revlex order.
pub fn model_to_json(model: &BezierSimplexModel, meta: &Value) -> String {
    let out = ModelOut {
        m: model.m(),
        d: model.degree(),
        out_dim: model.out_dim(),
        index_order: INDEX_ORDER,
        control_points: model.control_points().map(|p| p.iter().map(|&x| raw17(x)).collect()).collect(),
        meta,
    };
    let mut s = serde_json::to_string(&out).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> std::result::Result<(BezierSimplexModel, Value), String> {
    let m: ModelIn = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if m.index_order != INDEX_ORDER {
        return Err(format!("unsupported index_order {:?}", m.index_order));
    }
    let model = BezierSimplexModel::new(m.m, m.d, m.out_dim, m.control_points).map_err(|e| e.to_string())?;
    Ok((model, m.meta))
}

pub fn write_model(path: &Path, model: &BezierSimplexModel, meta: &Value) -> Result<()> {
    write_bytes(path, model_to_json(model, meta).as_bytes())
}

pub fn read_model(path: &Path) -> Result<(BezierSimplexModel, Value)> {
    let text = fs::read_to_string(path).map_err(|e| ScvxError::io(path, e))?;
    model_from_json(&text).map_err(|m| ScvxError::schema(path, m))
}

pub fn split_label(train_count: usize, test_count: usize) -> String {
    format!("{train_count}:{test_count}")
}

pub fn fit_report_json(report: &FitReport, diagnostics: &FitDiagnostics) -> Value {
    json!({
        "split": split_label(report.train_count, report.test_count),
        "train_count": report.train_count,
        "test_count": report.test_count,
        "degree": report.degree,
        "trial": report.trial,
        "seed": report.seed,
        "train_mse": report.train_mse,
        "test_mse": report.test_mse,
        "mse_convention": "mean over points and output coordinates",
        "condition_diagnostic": report.condition_diagnostic,
        "rank_deficient": report.rank_deficient,
        "rank": diagnostics.rank,
        "columns": diagnostics.columns,
        "underdetermined": diagnostics.underdetermined,
    })
}

pub const SWEEP_HEADER: [&str; 8] =
    ["split", "degree", "trial", "seed", "train_mse", "test_mse", "condition", "rank_deficient"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "split",
    "degree",
    "trials",
    "train_mse_mean",
    "train_mse_std",
    "test_mse_mean",
    "test_mse_std",
    "best",
];

/// One row per (split, degree, trial).
pub fn write_sweep_reports(path: &Path, reports: &[FitReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(SWEEP_HEADER).map_err(|e| csv_err(path, e))?;
    for r in reports {
        w.write_record([
            split_label(r.train_count, r.test_count),
            r.degree.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            fmt17(r.train_mse),
            fmt17(r.test_mse),
            fmt17(r.condition_diagnostic),
            r.rank_deficient.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| ScvxError::io(path, e))
}

/// Mean and standard deviation per (split, degree); `best` marks d*.
pub fn write_sweep_summary(
    path: &Path,
    summary: &[CellSummary],
    best: &[(usize, u32)],
    total: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    for c in summary {
        let is_best = best.contains(&(c.train_count, c.degree));
        w.write_record([
            split_label(c.train_count, total - c.train_count),
            c.degree.to_string(),
            c.trials.to_string(),
            fmt17(c.train_mse_mean),
            fmt17(c.train_mse_std),
            fmt17(c.test_mse_mean),
            fmt17(c.test_mse_std),
            is_best.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| ScvxError::io(path, e))
}
