//! Sampling the solution mapping `w ↦ (θ*(w), f̃(θ*(w)))` over a weight grid,
//! and consistency checks on the result.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::elastic_net::{perturb, ElasticNetProblem};
use crate::error::{Error, Result};
use crate::fit::SamplePoint;
use crate::simplex::WeightVector;
use crate::solver::{optimality_certificate, solve_scalarized, solve_scalarized_from, Certificate, SolverConfig};

/// Stored losses may differ from recomputed ones by this much, relative to
/// `max(1, |f|)`.
pub const LOSS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRecord {
    pub weight: WeightVector,
    pub theta: Vec<f64>,
    /// `(f̃1, f̃2, f̃3)` at `theta`.
    pub losses: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleMeta {
    pub dataset: String,
    pub epsilon: f64,
    pub resolution: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSample {
    pub records: Vec<ParetoRecord>,
    pub meta: SampleMeta,
}

fn mismatch(expected: f64, stored: f64) -> bool {
    !((expected - stored).abs() <= LOSS_TOLERANCE * expected.abs().max(1.0))
}

impl ParetoSample {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of coefficients per record (0 for an empty sample).
    pub fn n_predictors(&self) -> usize {
        self.records.first().map_or(0, |r| r.theta.len())
    }

    /// Checks record shapes, weight distinctness and the `f̃2`, `f̃3` columns,
    /// which depend on `theta` and `ε` only. With `problem`, `f̃1` is
    /// recomputed as well.
    pub fn validate(&self, problem: Option<&ElasticNetProblem>) -> Result<()> {
        let n = self.n_predictors();
        let eps = self.meta.epsilon;
        let mut seen = BTreeMap::new();
        for (index, rec) in self.records.iter().enumerate() {
            if rec.theta.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: rec.theta.len(),
                });
            }
            if rec.weight.dim() != 3 {
                return Err(Error::DimensionMismatch {
                    expected: 3,
                    found: rec.weight.dim(),
                });
            }
            if rec.theta.iter().chain(&rec.losses).any(|v| !v.is_finite()) {
                return Err(Error::InconsistentRecord { index });
            }
            let key: Vec<u64> = rec.weight.as_slice().iter().map(|v| v.to_bits()).collect();
            if seen.insert(key, index).is_some() {
                return Err(Error::DuplicateWeight { index });
            }
            let expected = match problem {
                Some(p) => p.perturbed_objectives(&rec.theta)?,
                None => {
                    let l1: f64 = rec.theta.iter().map(|t| t.abs()).sum();
                    let half_sq: f64 = rec.theta.iter().map(|t| t * t).sum::<f64>() / 2.0;
                    let f = perturb([0.0, l1, half_sq], eps);
                    [rec.losses[0], f[1], f[2]]
                }
            };
            if expected.iter().zip(&rec.losses).any(|(&e, &s)| mismatch(e, s)) {
                return Err(Error::InconsistentRecord { index });
            }
        }
        Ok(())
    }

    /// Fitting data: input `w`, target `θ` followed by the three losses.
    pub fn solution_mapping_points(&self) -> Vec<SamplePoint> {
        self.records
            .iter()
            .map(|r| {
                let mut target = r.theta.clone();
                target.extend_from_slice(&r.losses);
                SamplePoint {
                    weight: r.weight.clone(),
                    target,
                }
            })
            .collect()
    }

    /// Largest spread `max − min` of any loss over the sample; a lower bound
    /// for the constant `K0` of the continuity bound.
    pub fn estimated_k0(&self) -> f64 {
        (0..3)
            .map(|i| {
                let (lo, hi) = self.records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r.losses[i]), hi.max(r.losses[i]))
                });
                if hi >= lo {
                    hi - lo
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    /// Stop at the first grid point that fails to converge.
    #[default]
    Abort,
    /// Record the failure and continue without that point.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleOptions {
    /// Start each solve from the previous grid point's solution.
    pub warm_start: bool,
    pub policy: FailurePolicy,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            warm_start: true,
            policy: FailurePolicy::Abort,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub index: usize,
    pub weight: WeightVector,
    pub sweeps: usize,
    pub last_delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    pub sample: ParetoSample,
    /// Skipped grid points (only under [`FailurePolicy::Skip`]).
    pub failures: Vec<PointFailure>,
}

/// Solves every grid point in order and records `(w, θ*(w), f̃(θ*(w)))`.
pub fn sample_pareto(
    problem: &ElasticNetProblem,
    grid: &[WeightVector],
    config: &SolverConfig,
    options: SampleOptions,
    meta: SampleMeta,
) -> Result<SampleOutcome> {
    config.validate()?;
    let mut records = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut previous: Option<Vec<f64>> = None;
    for (index, w) in grid.iter().enumerate() {
        let result = match (&previous, options.warm_start) {
            (Some(start), true) => solve_scalarized_from(problem, w, config, start),
            _ => solve_scalarized(problem, w, config),
        };
        match result {
            Ok(sol) => {
                let losses = problem.perturbed_objectives(&sol.theta)?;
                // The face w1 = 0 always returns θ = 0, a poor warm start.
                if w[0] > 0.0 {
                    previous = Some(sol.theta.clone());
                }
                records.push(ParetoRecord {
                    weight: w.clone(),
                    theta: sol.theta,
                    losses,
                });
            }
            Err(Error::NoConvergence { sweeps, last_delta, .. }) => match options.policy {
                FailurePolicy::Abort => {
                    return Err(Error::PointFailed {
                        index,
                        weight: w.as_slice().to_vec(),
                        sweeps,
                        last_delta,
                    })
                }
                FailurePolicy::Skip => failures.push(PointFailure {
                    index,
                    weight: w.clone(),
                    sweeps,
                    last_delta,
                }),
            },
            Err(e) => return Err(e),
        }
    }
    Ok(SampleOutcome {
        sample: ParetoSample { records, meta },
        failures,
    })
}

/// Pairs `(dominated, dominator)` where the dominator's losses are all lower
/// by more than `tol`. Every record of a converged sample is Pareto optimal,
/// so any pair points at a solver failure.
pub fn check_weak_dominance(sample: &ParetoSample, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (r, rec) in sample.records.iter().enumerate() {
        for (s, other) in sample.records.iter().enumerate() {
            if r != s && (0..3).all(|i| other.losses[i] < rec.losses[i] - tol) {
                out.push((r, s));
            }
        }
    }
    out
}

/// Optimality certificates of every record; returns the worst one and its
/// record index.
pub fn certify_sample(problem: &ElasticNetProblem, sample: &ParetoSample) -> Result<Option<(usize, Certificate)>> {
    let mut worst: Option<(usize, Certificate)> = None;
    for (i, rec) in sample.records.iter().enumerate() {
        let cert = optimality_certificate(problem, &rec.weight, &rec.theta)?;
        if worst.is_none_or(|(_, w)| cert.max_violation > w.max_violation) {
            worst = Some((i, cert));
        }
    }
    Ok(worst)
}

/// Index pairs of grid-adjacent weights: points that differ by moving
/// `1/resolution` of mass between two coordinates.
pub fn grid_neighbor_pairs(grid: &[WeightVector], resolution: u32) -> Vec<(usize, usize)> {
    let r = f64::from(resolution);
    let counts: Vec<Vec<i64>> = grid
        .iter()
        .map(|w| w.as_slice().iter().map(|&x| libm::round(x * r) as i64).collect())
        .collect();
    let lookup: BTreeMap<&[i64], usize> = counts.iter().enumerate().map(|(i, c)| (c.as_slice(), i)).collect();
    let mut pairs = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        for from in 0..c.len() {
            for to in 0..c.len() {
                if from == to || c[from] == 0 {
                    continue;
                }
                let mut n = c.clone();
                n[from] -= 1;
                n[to] += 1;
                if let Some(&j) = lookup.get(n.as_slice()) {
                    if i < j {
                        pairs.push((i, j));
                    }
                }
            }
        }
    }
    pairs
}
