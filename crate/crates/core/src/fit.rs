//! All-at-once least-squares fitting of Bézier simplices, error metrics,
//! reproducible train/test splits and the degree × split sweep.
//!
//! A Bézier simplex is linear in its control points, so minimizing
//! `Σ_s ‖b(w_s) − t_s‖²` is the linear least-squares problem `min ‖B P − T‖`
//! with the Bernstein design matrix `B[s, i] = C(d, i) w_s^i`. It is solved
//! by a QR factorization of `B` followed by an SVD of the triangular factor,
//! returning the minimum-norm solution when `B` is rank deficient.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bezier::{basis_with, BezierSimplexModel};
use crate::error::{Error, Result};
use crate::rng::{mix, SplitMix64};
use crate::simplex::{enumerate_multi_indices, multinomial_f64, WeightVector};

/// One `(w, target)` pair of a fitting sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub weight: WeightVector,
    pub target: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// Number of basis functions, `C(d+m−1, m−1)`.
    pub columns: usize,
    /// Largest over smallest retained singular value.
    pub condition: f64,
    /// Some singular directions were dropped (minimum-norm solution).
    pub truncated: bool,
    /// Fewer samples than basis functions.
    pub underdetermined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub model: BezierSimplexModel,
    pub diagnostics: FitDiagnostics,
}

/// Bernstein design matrix, rows = points, columns = multi-indices.
pub fn design_matrix(m: usize, degree: u32, weights: &[&WeightVector]) -> Result<DMatrix<f64>> {
    let indices = enumerate_multi_indices(m, degree);
    let coefficients: Vec<f64> = indices.iter().map(multinomial_f64).collect();
    let mut b = DMatrix::<f64>::zeros(weights.len(), indices.len());
    for (s, w) in weights.iter().enumerate() {
        if w.dim() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: w.dim(),
            });
        }
        for (k, v) in basis_with(&indices, &coefficients, degree, w.as_slice()).into_iter().enumerate() {
            b[(s, k)] = v;
        }
    }
    Ok(b)
}

fn check_points(points: &[SamplePoint]) -> Result<usize> {
    let first = points.first().ok_or(Error::EmptySample)?;
    let out_dim = first.target.len();
    if out_dim == 0 {
        return Err(Error::InvalidModel("empty target vectors"));
    }
    for p in points {
        if p.target.len() != out_dim {
            return Err(Error::DimensionMismatch {
                expected: out_dim,
                found: p.target.len(),
            });
        }
        if p.target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite target"));
        }
    }
    Ok(out_dim)
}

/// Fits the degree-`d` Bézier simplex over Δ^{m−1} minimizing the total
/// squared residual over `points`.
pub fn fit_all_at_once(points: &[SamplePoint], m: usize, degree: u32) -> Result<FittedModel> {
    let out_dim = check_points(points)?;
    let weights: Vec<&WeightVector> = points.iter().map(|p| &p.weight).collect();
    let b = design_matrix(m, degree, &weights)?;
    let (rows, cols) = b.shape();
    let mut t = DMatrix::<f64>::zeros(rows, out_dim);
    for (s, p) in points.iter().enumerate() {
        for (j, &v) in p.target.iter().enumerate() {
            t[(s, j)] = v;
        }
    }

    // Reduce a tall system to its K × K triangular factor first.
    let (core, rhs) = if rows > cols {
        let qr = b.qr();
        let mut qt = t;
        qr.q_tr_mul(&mut qt);
        (qr.r(), qt.rows(0, cols).into_owned())
    } else {
        (b, t)
    };
    let svd = core.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let cutoff = s_max * rows.max(cols) as f64 * f64::EPSILON;

    let utb = u.transpose() * rhs;
    let mut solution = DMatrix::<f64>::zeros(cols, out_dim);
    let mut rank = 0;
    let mut s_min = f64::INFINITY;
    for (k, &sk) in s.iter().enumerate() {
        if sk > cutoff {
            rank += 1;
            s_min = s_min.min(sk);
            let scaled = utb.row(k) / sk;
            solution += v_t.row(k).transpose() * scaled;
        }
    }
    let condition = if rank == 0 { f64::INFINITY } else { s_max / s_min };

    let mut flat = Vec::with_capacity(cols * out_dim);
    for k in 0..cols {
        flat.extend(solution.row(k).iter().copied());
    }
    let model = BezierSimplexModel::from_flat(m, degree, out_dim, flat)?;
    Ok(FittedModel {
        model,
        diagnostics: FitDiagnostics {
            rank,
            columns: cols,
            condition,
            truncated: rank < cols,
            underdetermined: rows < cols,
        },
    })
}

/// Mean over points of `‖b(w_s) − t_s‖² / out_dim`.
pub fn mse(model: &BezierSimplexModel, points: &[SamplePoint]) -> Result<f64> {
    let out_dim = check_points(points)?;
    if out_dim != model.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.out_dim(),
            found: out_dim,
        });
    }
    let mut total = 0.0;
    for p in points {
        let pred = model.evaluate(&p.weight)?;
        total += pred.iter().zip(&p.target).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / out_dim as f64;
    }
    Ok(total / points.len() as f64)
}

/// Uniform random partition of `0..total` into `train_count` training and
/// `total − train_count` test indices, both returned in ascending order.
///
/// A partial Fisher–Yates shuffle driven by [`SplitMix64`]: for
/// `k = 0..train_count`, swap position `k` with `k + next_below(total − k)`.
pub fn train_test_split(total: usize, train_count: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if train_count == 0 || train_count >= total {
        return Err(Error::InvalidSplit { train_count, total });
    }
    let mut perm: Vec<usize> = (0..total).collect();
    let mut rng = SplitMix64::new(seed);
    for k in 0..train_count {
        let j = k + rng.next_below((total - k) as u64) as usize;
        perm.swap(k, j);
    }
    let mut train = perm[..train_count].to_vec();
    let mut test = perm[train_count..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Seed of one sweep cell: `base ⊕ mix(mix(train_count) ⊕ trial)`. The
/// degree does not enter, so every degree of a trial sees the same split.
pub fn cell_seed(base_seed: u64, train_count: usize, trial: usize) -> u64 {
    base_seed ^ mix(mix(train_count as u64) ^ trial as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepCell {
    pub train_count: usize,
    pub degree: u32,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub train_mse: f64,
    pub test_mse: f64,
    pub degree: u32,
    pub train_count: usize,
    pub test_count: usize,
    pub trial: usize,
    pub seed: u64,
    pub condition_diagnostic: f64,
    pub rank_deficient: bool,
}

/// Cells in `(train_count, degree, trial)` order.
pub fn sweep_plan(train_counts: &[usize], degrees: &[u32], trials: usize, base_seed: u64) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(train_counts.len() * degrees.len() * trials);
    for &train_count in train_counts {
        for &degree in degrees {
            for trial in 0..trials {
                cells.push(SweepCell {
                    train_count,
                    degree,
                    trial,
                    seed: cell_seed(base_seed, train_count, trial),
                });
            }
        }
    }
    cells
}

/// Split → fit → score for one cell.
pub fn run_cell(points: &[SamplePoint], m: usize, cell: &SweepCell) -> Result<FitReport> {
    let (train_idx, test_idx) = train_test_split(points.len(), cell.train_count, cell.seed)?;
    let train: Vec<SamplePoint> = train_idx.iter().map(|&i| points[i].clone()).collect();
    let test: Vec<SamplePoint> = test_idx.iter().map(|&i| points[i].clone()).collect();
    let fitted = fit_all_at_once(&train, m, cell.degree)?;
    Ok(FitReport {
        train_mse: mse(&fitted.model, &train)?,
        test_mse: mse(&fitted.model, &test)?,
        degree: cell.degree,
        train_count: train.len(),
        test_count: test.len(),
        trial: cell.trial,
        seed: cell.seed,
        condition_diagnostic: fitted.diagnostics.condition,
        rank_deficient: fitted.diagnostics.truncated || fitted.diagnostics.underdetermined,
    })
}

/// Aggregate of all trials of one `(train_count, degree)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub train_count: usize,
    pub degree: u32,
    pub trials: usize,
    pub train_mse_mean: f64,
    pub train_mse_std: f64,
    pub test_mse_mean: f64,
    pub test_mse_std: f64,
}

/// Mean and sample standard deviation (n − 1 denominator, 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, libm::sqrt(var))
}

/// Groups reports by `(train_count, degree)` in first-appearance order.
pub fn summarize(reports: &[FitReport]) -> Vec<CellSummary> {
    let mut keys: Vec<(usize, u32)> = Vec::new();
    for r in reports {
        if !keys.contains(&(r.train_count, r.degree)) {
            keys.push((r.train_count, r.degree));
        }
    }
    keys.into_iter()
        .map(|(train_count, degree)| {
            let cell: Vec<&FitReport> = reports.iter().filter(|r| r.train_count == train_count && r.degree == degree).collect();
            let train: Vec<f64> = cell.iter().map(|r| r.train_mse).collect();
            let test: Vec<f64> = cell.iter().map(|r| r.test_mse).collect();
            let (train_mse_mean, train_mse_std) = mean_std(&train);
            let (test_mse_mean, test_mse_std) = mean_std(&test);
            CellSummary {
                train_count,
                degree,
                trials: cell.len(),
                train_mse_mean,
                train_mse_std,
                test_mse_mean,
                test_mse_std,
            }
        })
        .collect()
}

/// `(train_count, d*)` where `d*` minimizes mean test MSE; ties go to the
/// lower degree.
pub fn best_degrees(summary: &[CellSummary]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32, f64)> = Vec::new();
    for c in summary {
        match out.iter_mut().find(|(tc, _, _)| *tc == c.train_count) {
            Some(best) => {
                if c.test_mse_mean < best.2 || (c.test_mse_mean == best.2 && c.degree < best.1) {
                    *best = (c.train_count, c.degree, c.test_mse_mean);
                }
            }
            None => out.push((c.train_count, c.degree, c.test_mse_mean)),
        }
    }
    out.into_iter().map(|(tc, d, _)| (tc, d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub reports: Vec<FitReport>,
    /// Cells that failed; the sweep carries on without them.
    pub failures: Vec<(SweepCell, Error)>,
    pub summary: Vec<CellSummary>,
    pub best: Vec<(usize, u32)>,
}

/// Collects per-cell results (in plan order) into an outcome.
pub fn collect_sweep(cells: &[SweepCell], results: Vec<Result<FitReport>>) -> SweepOutcome {
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (cell, r) in cells.iter().zip(results) {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push((*cell, e)),
        }
    }
    let summary = summarize(&reports);
    let best = best_degrees(&summary);
    SweepOutcome {
        reports,
        failures,
        summary,
        best,
    }
}

/// Runs every `(train_count, degree, trial)` cell sequentially.
pub fn degree_sweep(
    points: &[SamplePoint],
    m: usize,
    degrees: &[u32],
    train_counts: &[usize],
    trials: usize,
    base_seed: u64,
) -> SweepOutcome {
    let cells = sweep_plan(train_counts, degrees, trials, base_seed);
    let results = cells.iter().map(|c| run_cell(points, m, c)).collect();
    collect_sweep(&cells, results)
}
