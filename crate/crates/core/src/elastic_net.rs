//! The multi-objective elastic net.
//!
//! With `m` observations, the three objectives are
//!
//! ```text
//! f1(θ) = ‖Xθ − y‖² / (2m)     f2(θ) = ‖θ‖₁     f3(θ) = ‖θ‖² / 2
//! ```
//!
//! and the strongly convex perturbation is `f̃_i = f_i + ε·f3`. For a weight
//! `w` off the face `w1 = 0`, minimizing `Σ w_i f̃_i` is the ordinary elastic
//! net with `μ = w2/w1`, `λ = (w3 + ε)/w1`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::simplex::WeightVector;

/// Relative slack used when testing `ε(μ + 1) ≤ λ`.
const VALIDITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ElasticNetProblem {
    n_obs: usize,
    n_pred: usize,
    /// Column-major `n_obs × n_pred`.
    columns: Vec<f64>,
    y: Vec<f64>,
    epsilon: f64,
    col_sq_norms: Vec<f64>,
}

impl ElasticNetProblem {
    /// Builds a problem from a row-major design matrix.
    pub fn from_rows(n_obs: usize, n_pred: usize, rows: &[f64], y: Vec<f64>, epsilon: f64) -> Result<Self> {
        if rows.len() != n_obs * n_pred {
            return Err(Error::DimensionMismatch {
                expected: n_obs * n_pred,
                found: rows.len(),
            });
        }
        let mut columns = alloc::vec![0.0; n_obs * n_pred];
        for i in 0..n_obs {
            for j in 0..n_pred {
                columns[j * n_obs + i] = rows[i * n_pred + j];
            }
        }
        Self::from_columns(n_obs, n_pred, columns, y, epsilon)
    }

    /// Builds a problem from a column-major design matrix.
    pub fn from_columns(n_obs: usize, n_pred: usize, columns: Vec<f64>, y: Vec<f64>, epsilon: f64) -> Result<Self> {
        if n_obs == 0 || n_pred == 0 {
            return Err(Error::InvalidProblem("need at least one observation and one predictor"));
        }
        if columns.len() != n_obs * n_pred {
            return Err(Error::DimensionMismatch {
                expected: n_obs * n_pred,
                found: columns.len(),
            });
        }
        if y.len() != n_obs {
            return Err(Error::DimensionMismatch {
                expected: n_obs,
                found: y.len(),
            });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidProblem("epsilon must be positive and finite"));
        }
        if columns.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProblem("non-finite data"));
        }
        let col_sq_norms = columns
            .chunks_exact(n_obs)
            .map(|c| c.iter().map(|v| v * v).sum())
            .collect();
        Ok(Self {
            n_obs,
            n_pred,
            columns,
            y,
            epsilon,
            col_sq_norms,
        })
    }

    /// The 4 × 3 toy problem with `y = (1, 2, 3, 4)` used to illustrate the
    /// solution mapping (OLS point, lasso and ridge paths).
    pub fn example1(epsilon: f64) -> Result<Self> {
        #[rustfmt::skip]
        let rows = [
            1.0, 2.0, 3.0,
            6.0, 5.0, 4.0,
            7.0, 8.0, 9.0,
            12.0, 11.0, 10.0,
        ];
        Self::from_rows(4, 3, &rows, alloc::vec![1.0, 2.0, 3.0, 4.0], epsilon)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn n_predictors(&self) -> usize {
        self.n_pred
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::from_columns(self.n_obs, self.n_pred, self.columns.clone(), self.y.clone(), epsilon)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.n_obs..(j + 1) * self.n_obs]
    }

    pub fn response(&self) -> &[f64] {
        &self.y
    }

    pub fn column_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    /// Predictors with `‖X_j‖ = 0`; their coefficients are pinned to zero.
    pub fn degenerate_columns(&self) -> Vec<usize> {
        (0..self.n_pred).filter(|&j| self.col_sq_norms[j] == 0.0).collect()
    }

    pub(crate) fn is_degenerate(&self, j: usize) -> bool {
        self.col_sq_norms[j] == 0.0
    }

    /// `y − Xθ`.
    pub fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let mut r = self.y.clone();
        for (j, &t) in theta.iter().enumerate() {
            if t != 0.0 {
                for (ri, xi) in r.iter_mut().zip(self.column(j)) {
                    *ri -= xi * t;
                }
            }
        }
        r
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_pred {
            return Err(Error::DimensionMismatch {
                expected: self.n_pred,
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// `(f1, f2, f3)` at `theta`.
    pub fn objectives(&self, theta: &[f64]) -> Result<[f64; 3]> {
        self.check_theta(theta)?;
        let r = self.residual(theta);
        let f1 = r.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.n_obs as f64);
        let f2 = theta.iter().map(|t| t.abs()).sum();
        let f3 = theta.iter().map(|t| t * t).sum::<f64>() / 2.0;
        Ok([f1, f2, f3])
    }

    /// `(f̃1, f̃2, f̃3)` with `f̃_i = f_i + ε f3`.
    pub fn perturbed_objectives(&self, theta: &[f64]) -> Result<[f64; 3]> {
        Ok(perturb(self.objectives(theta)?, self.epsilon))
    }
}

/// Applies `f̃_i = f_i + ε f3` to raw objective values.
pub fn perturb(f: [f64; 3], epsilon: f64) -> [f64; 3] {
    let shift = epsilon * f[2];
    [f[0] + shift, f[1] + shift, f[2] + shift]
}

/// Elastic-net regularization coefficients: `μ` on ‖θ‖₁, `λ` on ‖θ‖²/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub mu: f64,
    pub lambda: f64,
}

impl Hyperparams {
    /// Whether `0 ≤ μ ≤ (λ − ε)/ε`, the set of `(μ, λ)` reachable from
    /// weights with `w1 > 0`. Tested as `ε(μ + 1) ≤ λ` with a relative slack
    /// of 1e−12 so boundary points (`w3 = 0`) survive rounding.
    pub fn in_validity_region(&self, epsilon: f64) -> bool {
        self.mu >= 0.0
            && self.lambda >= 0.0
            && epsilon * (self.mu + 1.0) <= self.lambda * (1.0 + VALIDITY_SLACK)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProblem("epsilon must be positive and finite"))
    }
}

/// `μ = w2/w1`, `λ = (w3 + ε)/w1`. Undefined on the face `w1 = 0`.
pub fn weight_to_hyperparams(w: &WeightVector, epsilon: f64) -> Result<Hyperparams> {
    check_epsilon(epsilon)?;
    if w.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: w.dim(),
        });
    }
    if w[0] <= 0.0 {
        return Err(Error::OnFaceTwoThree);
    }
    Ok(Hyperparams {
        mu: w[1] / w[0],
        lambda: (w[2] + epsilon) / w[0],
    })
}

/// Inverse of [`weight_to_hyperparams`] on the validity region:
/// `w = ((1+ε), (1+ε)μ, λ − ε(μ+1)) / (λ + μ + 1)`.
pub fn hyperparams_to_weight(h: Hyperparams, epsilon: f64) -> Result<WeightVector> {
    check_epsilon(epsilon)?;
    if !(h.mu.is_finite() && h.lambda.is_finite()) || !h.in_validity_region(epsilon) {
        return Err(Error::OutsideValidityRegion {
            mu: h.mu,
            lambda: h.lambda,
            epsilon,
        });
    }
    let denom = h.lambda + h.mu + 1.0;
    let w1 = (1.0 + epsilon) / denom;
    let w2 = (1.0 + epsilon) * h.mu / denom;
    // Only rounding can push this below zero inside the region.
    let w3 = ((h.lambda - epsilon * (h.mu + 1.0)) / denom).max(0.0);
    WeightVector::new(alloc::vec![w1, w2, w3])
}
