//! Model bundles read by the browser explorer: model, manifest, edge traces
//! and evaluation fixtures.

use std::fs;
use std::path::{Path, PathBuf};

use scvx_core::rng::SplitMix64;
use scvx_core::simplex::WeightVector;
use scvx_core::BezierSimplexModel;
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::{json, Value};

use crate::error::{Result, ScvxError};
use crate::formats::{fmt17, read_model, write_model};

pub const MODEL_FILE: &str = "model.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const EDGES_FILE: &str = "edges.json";
pub const FIXTURES_FILE: &str = "fixtures.json";
pub const EDGE_POINTS: usize = 201;
pub const FIXTURE_COUNT: usize = 20;
pub const TOOL_VERSION: &str = concat!("scvx ", env!("CARGO_PKG_VERSION"));

/// The three edges of the 2-simplex, 1-based vertex labels.
pub const EDGES: [(&str, [usize; 2]); 3] = [("lasso", [1, 2]), ("ridge", [1, 3]), ("regularizers", [2, 3])];

/// Manifest fields supplied by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMeta {
    pub dataset: String,
    pub epsilon: f64,
    pub n: usize,
    pub resolution: u32,
    pub created_at: String,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub model: BezierSimplexModel,
    pub manifest: Value,
    pub edges: Value,
    pub fixtures: Value,
}

fn raw17(x: f64) -> Box<RawValue> {
    RawValue::from_string(fmt17(x)).expect("finite float")
}

fn raw_vec(v: &[f64]) -> Vec<Box<RawValue>> {
    v.iter().map(|&x| raw17(x)).collect()
}

/// Weights `(1 - t) e_a + t e_b` for `t = k / (points - 1)`.
pub fn edge_weights(face: [usize; 2], points: usize) -> Vec<WeightVector> {
    let steps = (points - 1) as f64;
    (0..points)
        .map(|k| {
            let mut w = vec![0.0; 3];
            w[face[0] - 1] = (points - 1 - k) as f64 / steps;
            w[face[1] - 1] = k as f64 / steps;
            WeightVector::new(w).expect("edge point is on the simplex")
        })
        .collect()
}

/// Vertices, edge midpoints, the centroid and pseudo-random interior points.
pub fn fixture_weights() -> Vec<WeightVector> {
    let third = 1.0 / 3.0;
    let mut out: Vec<WeightVector> = (0..3).map(|k| WeightVector::vertex(3, k)).collect();
    for w in [[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [third, third, 1.0 - 2.0 * third]] {
        out.push(WeightVector::new(w.to_vec()).unwrap());
    }
    let mut rng = SplitMix64::new(20);
    while out.len() < FIXTURE_COUNT {
        let e: Vec<f64> = (0..3).map(|_| -(1.0 - rng.next_f64()).ln()).collect();
        let s: f64 = e.iter().sum();
        let (a, b) = (e[0] / s, e[1] / s);
        out.push(WeightVector::new(vec![a, b, (1.0 - a - b).max(0.0)]).unwrap());
    }
    out
}

#[derive(Serialize)]
struct EdgeTrace {
    name: &'static str,
    face: [usize; 2],
    weights: Vec<Vec<Box<RawValue>>>,
    values: Vec<Vec<Box<RawValue>>>,
}

pub fn edges_json(model: &BezierSimplexModel) -> Result<String> {
    let mut edges = Vec::with_capacity(3);
    for (name, face) in EDGES {
        let ws = edge_weights(face, EDGE_POINTS);
        let mut values = Vec::with_capacity(ws.len());
        for w in &ws {
            values.push(raw_vec(&model.evaluate(w)?));
        }
        edges.push(EdgeTrace {
            name,
            face,
            weights: ws.iter().map(|w| raw_vec(w.as_slice())).collect(),
            values,
        });
    }
    let doc = json!({ "points_per_edge": EDGE_POINTS, "edges": edges });
    Ok(format!("{doc}\n"))
}

#[derive(Serialize)]
struct FixtureCase {
    w: Vec<Box<RawValue>>,
    b: Vec<Box<RawValue>>,
}

pub fn fixtures_json(model: &BezierSimplexModel) -> Result<String> {
    let mut cases = Vec::with_capacity(FIXTURE_COUNT);
    for w in fixture_weights() {
        cases.push(FixtureCase {
            b: raw_vec(&model.evaluate(&w)?),
            w: raw_vec(w.as_slice()),
        });
    }
    let doc = json!({
        "model": MODEL_FILE,
        "relative_tolerance": 1e-9,
        "cases": cases,
    });
    Ok(format!("{doc}\n"))
}

pub fn manifest_json(model: &BezierSimplexModel, meta: &BundleMeta) -> Value {
    json!({
        "dataset": meta.dataset,
        "epsilon": meta.epsilon,
        "n": meta.n,
        "resolution": meta.resolution,
        "created_at": meta.created_at,
        "tool_version": TOOL_VERSION,
        "m": model.m(),
        "degree": model.degree(),
        "out_dim": model.out_dim(),
        "index_order": crate::formats::INDEX_ORDER,
        "loss_labels": ["f1", "f2", "f3"],
        "coefficient_labels": (1..=meta.n).map(|j| format!("theta_{j}")).collect::<Vec<_>>(),
        "edges": EDGES.iter().map(|(name, face)| json!({"name": name, "face": face})).collect::<Vec<_>>(),
        "files": {
            "model": MODEL_FILE,
            "edges": EDGES_FILE,
            "fixtures": FIXTURES_FILE,
        },
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| ScvxError::io(path, e))
}

/// Writes `model.json`, `manifest.json`, `edges.json` and `fixtures.json`
/// into `dir`. The model must map the 2-simplex to `(theta, f1, f2, f3)`.
pub fn export_model_bundle(model: &BezierSimplexModel, meta: &BundleMeta, dir: &Path) -> Result<PathBuf> {
    if model.m() != 3 {
        return Err(ScvxError::Usage(format!("bundle models live on the 2-simplex, got m = {}", model.m())));
    }
    if model.out_dim() != meta.n + 3 {
        return Err(ScvxError::Usage(format!(
            "model out_dim {} does not match n + 3 = {}",
            model.out_dim(),
            meta.n + 3
        )));
    }
    fs::create_dir_all(dir).map_err(|e| ScvxError::io(dir, e))?;
    let model_meta = json!({ "dataset": meta.dataset, "epsilon": meta.epsilon, "n": meta.n });
    write_model(&dir.join(MODEL_FILE), model, &model_meta)?;
    let mut manifest = serde_json::to_string_pretty(&manifest_json(model, meta)).expect("manifest serializes");
    manifest.push('\n');
    write_text(&dir.join(MANIFEST_FILE), &manifest)?;
    write_text(&dir.join(EDGES_FILE), &edges_json(model)?)?;
    write_text(&dir.join(FIXTURES_FILE), &fixtures_json(model)?)?;
    Ok(dir.to_path_buf())
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| ScvxError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ScvxError::schema(path, e.to_string()))
}

pub fn load_bundle(dir: &Path) -> Result<Bundle> {
    let (model, _) = read_model(&dir.join(MODEL_FILE))?;
    let manifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest["out_dim"].as_u64() != Some(model.out_dim() as u64) {
        return Err(ScvxError::schema(dir.join(MANIFEST_FILE), "out_dim disagrees with model.json"));
    }
    let edges = read_json(&dir.join(EDGES_FILE))?;
    let fixtures = read_json(&dir.join(FIXTURES_FILE))?;
    Ok(Bundle {
        model,
        manifest,
        edges,
        fixtures,
    })
}

/// `SOURCE_DATE_EPOCH` when set, otherwise the current UTC time.
pub fn creation_timestamp() -> String {
    let when = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    when.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}
