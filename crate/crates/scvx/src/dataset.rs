//! Delimited-text datasets, min-max scaling and the synthetic generator.

use std::fs::File;
use std::path::{Path, PathBuf};

use scvx_core::rng::SplitMix64;
use scvx_core::ElasticNetProblem;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScvxError};

/// Where the predictors and response live in a delimited file.
///
/// Columns are named by header label, or by 0-based position. With no
/// response given the last column is used; with no predictors given every
/// other column is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub predictor_columns: Option<Vec<String>>,
    #[serde(default)]
    pub response_column: Option<String>,
    pub delimiter: char,
    pub has_header: bool,
    /// Min-max scale every column to [0, 1].
    pub normalize: bool,
}

impl DatasetSpec {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            path: path.into(),
            predictor_columns: None,
            response_column: None,
            delimiter: ',',
            has_header: true,
            normalize: true,
        }
    }
}

/// Affine map taking a raw column onto [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub min: f64,
    pub max: f64,
    /// All raw values equal; the column maps to 0.
    pub constant: bool,
}

impl ColumnScaling {
    pub const IDENTITY: ColumnScaling = ColumnScaling {
        min: 0.0,
        max: 1.0,
        constant: false,
    };

    fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ColumnScaling {
            min,
            max,
            constant: max <= min,
        }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.constant {
            0.0
        } else {
            (v - self.min) / (self.max - self.min)
        }
    }

    pub fn invert(&self, u: f64) -> f64 {
        if self.constant {
            self.min
        } else {
            self.min + u * (self.max - self.min)
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub problem: ElasticNetProblem,
    pub predictor_names: Vec<String>,
    pub response_name: String,
    pub predictor_scaling: Vec<ColumnScaling>,
    pub response_scaling: ColumnScaling,
    pub warnings: Vec<String>,
}

fn resolve_column(path: &Path, header: &[String], width: usize, key: &str) -> Result<usize> {
    if let Some(k) = header.iter().position(|h| h == key) {
        return Ok(k);
    }
    match key.parse::<usize>() {
        Ok(k) if k < width => Ok(k),
        _ => Err(ScvxError::parse(path, 1, key, "column not present in file")),
    }
}

/// Reads `spec.path`, picks out the columns and (optionally) scales them.
pub fn load_dataset(spec: &DatasetSpec, epsilon: f64) -> Result<LoadedDataset> {
    let path = spec.path.as_path();
    if !spec.delimiter.is_ascii() {
        return Err(ScvxError::Usage(format!("delimiter {:?} is not a single ASCII character", spec.delimiter)));
    }
    let file = File::open(path).map_err(|e| ScvxError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(spec.delimiter as u8)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            ScvxError::parse(path, line, "", e.to_string())
        })?;
        let line = rec.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, rec));
    }
    if rows.is_empty() {
        return Err(ScvxError::parse(path, 1, "", "empty file"));
    }
    let width = rows[0].1.len();
    let header: Vec<String> = if spec.has_header {
        rows.remove(0).1.iter().map(str::to_owned).collect()
    } else {
        (0..width).map(|k| format!("column_{k}")).collect()
    };
    if rows.is_empty() {
        return Err(ScvxError::parse(path, 2, "", "no data rows"));
    }

    let response = match &spec.response_column {
        Some(key) => resolve_column(path, &header, width, key)?,
        None => width - 1,
    };
    let predictors: Vec<usize> = match &spec.predictor_columns {
        Some(keys) => keys
            .iter()
            .map(|k| resolve_column(path, &header, width, k))
            .collect::<Result<_>>()?,
        None => (0..width).filter(|&k| k != response).collect(),
    };
    if predictors.is_empty() {
        return Err(ScvxError::Usage("no predictor columns selected".into()));
    }
    if predictors.contains(&response) {
        return Err(ScvxError::Usage(format!("column {} is both predictor and response", header[response])));
    }
    let mut seen = predictors.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != predictors.len() {
        return Err(ScvxError::Usage("predictor column listed twice".into()));
    }

    let n_obs = rows.len();
    let n_pred = predictors.len();
    let mut columns = vec![0.0; n_obs * n_pred];
    let mut y = vec![0.0; n_obs];
    for (i, (line, rec)) in rows.iter().enumerate() {
        if rec.len() != width {
            return Err(ScvxError::parse(
                path,
                *line,
                "",
                format!("expected {width} fields, found {}", rec.len()),
            ));
        }
        let cell = |k: usize| -> Result<f64> {
            let raw = &rec[k];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(ScvxError::parse(path, *line, &header[k], format!("non-finite value {raw:?}"))),
                Err(_) => Err(ScvxError::parse(path, *line, &header[k], format!("not a number: {raw:?}"))),
            }
        };
        for (j, &k) in predictors.iter().enumerate() {
            columns[j * n_obs + i] = cell(k)?;
        }
        y[i] = cell(response)?;
    }

    let name = path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned());
    build(
        name,
        n_obs,
        columns,
        y,
        predictors.iter().map(|&k| header[k].clone()).collect(),
        header[response].clone(),
        spec.normalize,
        epsilon,
    )
}

#[allow(clippy::too_many_arguments)]
fn build(
    name: String,
    n_obs: usize,
    mut columns: Vec<f64>,
    mut y: Vec<f64>,
    predictor_names: Vec<String>,
    response_name: String,
    normalize: bool,
    epsilon: f64,
) -> Result<LoadedDataset> {
    let n_pred = predictor_names.len();
    let mut warnings = Vec::new();
    let mut scale = |values: &mut [f64], label: &str| {
        let s = ColumnScaling::fit(values);
        if s.constant {
            warnings.push(format!("column {label} is constant"));
        }
        if !normalize {
            return ColumnScaling { constant: s.constant, ..ColumnScaling::IDENTITY };
        }
        values.iter_mut().for_each(|v| *v = s.apply(*v));
        s
    };
    let predictor_scaling: Vec<ColumnScaling> = columns
        .chunks_mut(n_obs)
        .zip(&predictor_names)
        .map(|(col, label)| scale(col, label))
        .collect();
    let response_scaling = scale(&mut y, &response_name);
    let problem = ElasticNetProblem::from_columns(n_obs, n_pred, columns, y, epsilon)?;
    Ok(LoadedDataset {
        name,
        problem,
        predictor_names,
        response_name,
        predictor_scaling,
        response_scaling,
        warnings,
    })
}

/// The 4 x 3 toy problem, unscaled.
pub fn example1_dataset(epsilon: f64) -> Result<LoadedDataset> {
    Ok(LoadedDataset {
        name: "example1".into(),
        problem: ElasticNetProblem::example1(epsilon)?,
        predictor_names: vec!["x1".into(), "x2".into(), "x3".into()],
        response_name: "y".into(),
        predictor_scaling: vec![ColumnScaling::IDENTITY; 3],
        response_scaling: ColumnScaling::IDENTITY,
        warnings: Vec::new(),
    })
}

/// Parameters of the synthetic regression problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub predictors: usize,
    pub observations: usize,
    pub seed: u64,
    pub noise: f64,
}

impl SyntheticSpec {
    pub fn new(predictors: usize, observations: usize, seed: u64) -> Self {
        SyntheticSpec {
            predictors,
            observations,
            seed,
            noise: 0.1,
        }
    }

    /// Coefficients used to generate the response: the first half
    /// alternate in sign and shrink, the rest are zero.
    pub fn true_coefficients(&self) -> Vec<f64> {
        let n = self.predictors;
        (0..n)
            .map(|j| {
                if 2 * j < n {
                    let mag = 1.0 - j as f64 / n as f64;
                    if j % 2 == 0 {
                        mag
                    } else {
                        -mag
                    }
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn gaussian_pair(rng: &mut SplitMix64) -> (f64, f64) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    let u = 1.0 - rng.next_f64();
    let v = rng.next_f64();
    let r = (-2.0 * u.ln()).sqrt();
    let t = 2.0 * std::f64::consts::PI * v;
    (r * t.cos(), r * t.sin())
}

/// Correlated Gaussian predictors, a sparse linear response plus noise,
/// every column min-max scaled.
pub fn synthetic_dataset(spec: &SyntheticSpec, epsilon: f64) -> Result<LoadedDataset> {
    let (n, m) = (spec.predictors, spec.observations);
    if n == 0 || m < 2 {
        return Err(ScvxError::Usage("synthetic data needs at least 1 predictor and 2 observations".into()));
    }
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(ScvxError::Usage("synthetic noise must be finite and non-negative".into()));
    }
    let mut rng = SplitMix64::new(spec.seed);
    let mut spare: Option<f64> = None;
    let mut normal = move |rng: &mut SplitMix64| match spare.take() {
        Some(z) => z,
        None => {
            let (a, b) = gaussian_pair(rng);
            spare = Some(b);
            a
        }
    };
    let truth = spec.true_coefficients();
    let mut columns = vec![0.0; n * m];
    let mut y = vec![0.0; m];
    for i in 0..m {
        let shared = normal(&mut rng);
        let mut acc = 0.0;
        for j in 0..n {
            let x = 0.8 * normal(&mut rng) + 0.6 * shared;
            columns[j * m + i] = x;
            acc += truth[j] * x;
        }
        y[i] = acc + spec.noise * normal(&mut rng);
    }
    build(
        format!("synthetic-n{n}-m{m}-s{}", spec.seed),
        m,
        columns,
        y,
        (1..=n).map(|j| format!("x{j}")).collect(),
        "y".into(),
        true,
        epsilon,
    )
}

/// How a sample's dataset can be rebuilt; recorded in the sample sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    File(DatasetSpec),
    Example1,
    Synthetic(SyntheticSpec),
}

impl DatasetSource {
    pub fn load(&self, epsilon: f64) -> Result<LoadedDataset> {
        match self {
            DatasetSource::File(spec) => load_dataset(spec, epsilon),
            DatasetSource::Example1 => example1_dataset(epsilon),
            DatasetSource::Synthetic(spec) => synthetic_dataset(spec, epsilon),
        }
    }

    /// Like [`load`](Self::load), but a relative file path that does not
    /// exist from the working directory is retried against `base`.
    pub fn load_relative_to(&self, base: Option<&Path>, epsilon: f64) -> Result<LoadedDataset> {
        if let (DatasetSource::File(spec), Some(base)) = (self, base) {
            if spec.path.is_relative() && !spec.path.exists() {
                let alt = base.join(&spec.path);
                if alt.exists() {
                    let spec = DatasetSpec { path: alt, ..spec.clone() };
                    return load_dataset(&spec, epsilon);
                }
            }
        }
        self.load(epsilon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn zero_ten_scales_to_unit() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y\n0,5\n10,7\n");
        let d = load_dataset(&DatasetSpec::new(&p), 1e-6).unwrap();
        assert_eq!(d.problem.column(0), &[0.0, 1.0]);
        assert_eq!(d.problem.response(), &[0.0, 1.0]);
        assert_eq!(d.predictor_scaling[0].invert(1.0), 10.0);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn constant_column_is_zeroed_and_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "c.csv", "a,b,y\n3,1,0\n3,2,1\n3,4,2\n");
        let d = load_dataset(&DatasetSpec::new(&p), 1e-6).unwrap();
        assert_eq!(d.problem.column(0), &[0.0, 0.0, 0.0]);
        assert!(d.predictor_scaling[0].constant);
        assert_eq!(d.warnings.len(), 1);
        assert!(d.warnings[0].contains('a'));
    }

    #[test]
    fn columns_by_name_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "n.csv", "y,a,b\n1,0,4\n2,1,8\n0,2,6\n");
        let spec = DatasetSpec {
            predictor_columns: Some(vec!["b".into(), "1".into()]),
            response_column: Some("y".into()),
            normalize: false,
            ..DatasetSpec::new(&p)
        };
        let d = load_dataset(&spec, 1e-6).unwrap();
        assert_eq!(d.predictor_names, ["b", "a"]);
        assert_eq!(d.problem.column(0), &[4.0, 8.0, 6.0]);
        assert_eq!(d.problem.response(), &[1.0, 2.0, 0.0]);
    }

    #[test]
    fn headerless_semicolon_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "h.txt", "1;2;3\n4;5;6\n");
        let spec = DatasetSpec {
            delimiter: ';',
            has_header: false,
            normalize: false,
            ..DatasetSpec::new(&p)
        };
        let d = load_dataset(&spec, 1e-6).unwrap();
        assert_eq!(d.problem.n_predictors(), 2);
        assert_eq!(d.problem.response(), &[3.0, 6.0]);
    }

    #[test]
    fn parse_errors_carry_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.csv", "a,y\n1,2\n3,oops\n");
        match load_dataset(&DatasetSpec::new(&p), 1e-6).unwrap_err() {
            ScvxError::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "y");
            }
            e => panic!("{e:?}"),
        }
        let p = write(dir.path(), "nan.csv", "a,y\nNaN,2\n");
        assert!(matches!(load_dataset(&DatasetSpec::new(&p), 1e-6), Err(ScvxError::Parse { row: 2, .. })));
        let p = write(dir.path(), "ragged.csv", "a,b,y\n1,2,3\n1,2\n");
        assert!(matches!(load_dataset(&DatasetSpec::new(&p), 1e-6), Err(ScvxError::Parse { row: 3, .. })));
        let p = write(dir.path(), "empty.csv", "");
        assert!(matches!(load_dataset(&DatasetSpec::new(&p), 1e-6), Err(ScvxError::Parse { .. })));
        let p = write(dir.path(), "hdr.csv", "a,y\n");
        assert!(matches!(load_dataset(&DatasetSpec::new(&p), 1e-6), Err(ScvxError::Parse { .. })));
        let spec = DatasetSpec {
            response_column: Some("zz".into()),
            ..DatasetSpec::new(dir.path().join("bad.csv"))
        };
        assert!(matches!(load_dataset(&spec, 1e-6), Err(ScvxError::Parse { row: 1, .. })));
        assert!(matches!(
            load_dataset(&DatasetSpec::new(dir.path().join("none.csv")), 1e-6),
            Err(ScvxError::Io { .. })
        ));
    }

    #[test]
    fn overlapping_columns_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "o.csv", "a,y\n1,2\n3,4\n");
        let spec = DatasetSpec {
            predictor_columns: Some(vec!["a".into(), "y".into()]),
            response_column: Some("y".into()),
            ..DatasetSpec::new(&p)
        };
        assert!(matches!(load_dataset(&spec, 1e-6), Err(ScvxError::Usage(_))));
    }

    #[test]
    fn synthetic_is_deterministic_and_scaled() {
        let spec = SyntheticSpec::new(6, 500, 9);
        let a = synthetic_dataset(&spec, 1e-6).unwrap();
        let b = synthetic_dataset(&spec, 1e-6).unwrap();
        assert_eq!(a.problem, b.problem);
        for j in 0..6 {
            let c = a.problem.column(j);
            assert_eq!(c.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
            assert_eq!(c.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
        let other = synthetic_dataset(&SyntheticSpec::new(6, 500, 10), 1e-6).unwrap();
        assert_ne!(a.problem, other.problem);
    }

    #[test]
    fn source_round_trips_through_json() {
        for s in [
            DatasetSource::Example1,
            DatasetSource::Synthetic(SyntheticSpec::new(3, 40, 1)),
            DatasetSource::File(DatasetSpec::new("data/x.csv")),
        ] {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(serde_json::from_str::<DatasetSource>(&text).unwrap(), s);
        }
    }
}
