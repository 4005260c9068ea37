//! Continuity of the solution mapping.
//!
//! For `f1(x) = x² + |x|` and `f2(x) = (x−1)² + |x−1|` on ℝ the weighted-sum
//! minimizer along `w = (w1, 1 − w1)` has a closed form that is constant on
//! two intervals, so the mapping is continuous and surjective but not
//! injective. It also attains the Hölder-type bound
//! `‖x*(w) − x*(w̃)‖ ≤ sqrt((K0/α0) Σ|w_i − w̃_i|)` with equality.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `(f1(x), f2(x))` of the one-dimensional example.
pub fn remark_objectives(x: f64) -> [f64; 2] {
    [x * x + x.abs(), (x - 1.0) * (x - 1.0) + (x - 1.0).abs()]
}

/// Minimizer of `w1 f1 + (1 − w1) f2`:
/// 1 on `[0, 1/4)`, `(3 − 4 w1)/2` on `[1/4, 3/4]`, 0 on `(3/4, 1]`.
pub fn remark_solution_path(w1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w1) {
        return Err(Error::OutOfDomain {
            value: w1,
            low: 0.0,
            high: 1.0,
        });
    }
    Ok(if w1 < 0.25 {
        1.0
    } else if w1 <= 0.75 {
        (3.0 - 4.0 * w1) / 2.0
    } else {
        0.0
    })
}

/// Convexity parameter of both objectives of the example: each is a convex
/// function plus `2 · x²/2`.
pub const REMARK_ALPHA0: f64 = 2.0;
/// Largest variation of either objective over the Pareto set `[0, 1]`.
pub const REMARK_K0: f64 = 2.0;

/// Weight/solution pairs `((w1, 1 − w1), x*(w1))` at `count` equispaced `w1`.
pub fn remark_path_points(count: usize) -> Vec<([f64; 2], [f64; 1])> {
    assert!(count >= 2, "need at least two points");
    (0..count)
        .map(|k| {
            let w1 = k as f64 / (count - 1) as f64;
            let x = remark_solution_path(w1).expect("w1 in [0, 1]");
            ([w1, 1.0 - w1], [x])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoelderReport {
    /// `max (lhs − rhs)` over checked pairs; ≤ 0 when the bound holds.
    pub max_violation: f64,
    pub worst_pair: (usize, usize),
    pub pairs_checked: usize,
}

impl HoelderReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.max_violation <= slack
    }
}

fn hoelder_gap(w: &[f64], x: &[f64], w2: &[f64], x2: &[f64], ratio: f64) -> f64 {
    let dist = libm::sqrt(x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum());
    let weight_l1: f64 = w.iter().zip(w2).map(|(a, b)| (a - b).abs()).sum();
    dist - libm::sqrt(ratio * weight_l1)
}

fn check_args(len: usize, alpha0: f64, k0: f64) -> Result<f64> {
    if len < 2 {
        return Err(Error::TooFewPoints(len));
    }
    if !(alpha0 > 0.0 && k0 > 0.0) {
        return Err(Error::InvalidProblem("alpha0 and K0 must be positive"));
    }
    Ok(k0 / alpha0)
}

/// Checks `‖x(w) − x(w̃)‖ ≤ sqrt((K0/α0) Σ|w_i − w̃_i|)` over all pairs.
pub fn check_hoelder_bound<W: AsRef<[f64]>, X: AsRef<[f64]>>(points: &[(W, X)], alpha0: f64, k0: f64) -> Result<HoelderReport> {
    let ratio = check_args(points.len(), alpha0, k0)?;
    let mut report = HoelderReport {
        max_violation: f64::NEG_INFINITY,
        worst_pair: (0, 1),
        pairs_checked: 0,
    };
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let g = hoelder_gap(points[i].0.as_ref(), points[i].1.as_ref(), points[j].0.as_ref(), points[j].1.as_ref(), ratio);
            report.pairs_checked += 1;
            if g > report.max_violation {
                report.max_violation = g;
                report.worst_pair = (i, j);
            }
        }
    }
    Ok(report)
}

/// Same check restricted to the given index pairs.
pub fn check_hoelder_bound_on_pairs<W: AsRef<[f64]>, X: AsRef<[f64]>>(
    points: &[(W, X)],
    pairs: &[(usize, usize)],
    alpha0: f64,
    k0: f64,
) -> Result<HoelderReport> {
    let ratio = check_args(points.len(), alpha0, k0)?;
    let mut report = HoelderReport {
        max_violation: f64::NEG_INFINITY,
        worst_pair: (0, 1),
        pairs_checked: 0,
    };
    for &(i, j) in pairs {
        let g = hoelder_gap(points[i].0.as_ref(), points[i].1.as_ref(), points[j].0.as_ref(), points[j].1.as_ref(), ratio);
        report.pairs_checked += 1;
        if g > report.max_violation {
            report.max_violation = g;
            report.worst_pair = (i, j);
        }
    }
    Ok(report)
}

/// Grid search for the minimizer of `f` on `[lo, hi]` with `points` nodes.
pub fn grid_minimizer(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> f64 {
    assert!(points >= 2 && hi > lo);
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (lo, f(lo));
    for k in 1..points {
        let x = lo + h * k as f64;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn closed_form_branches() {
        assert_eq!(remark_solution_path(0.0).unwrap(), 1.0);
        assert_eq!(remark_solution_path(0.5).unwrap(), 0.5);
        assert_eq!(remark_solution_path(0.9).unwrap(), 0.0);
        assert_eq!(remark_solution_path(0.25).unwrap(), 1.0);
        assert_eq!(remark_solution_path(0.75).unwrap(), 0.0);
        assert!(remark_solution_path(-0.1).is_err());
        assert!(remark_solution_path(1.1).is_err());
        assert!(remark_solution_path(f64::NAN).is_err());
    }

    #[test]
    fn bound_is_tight_at_quarter_and_three_quarters() {
        let pts = vec![([0.25, 0.75], [1.0]), ([0.75, 0.25], [0.0])];
        let r = check_hoelder_bound(&pts, REMARK_ALPHA0, REMARK_K0).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn identical_weights_give_zero_gap() {
        let pts = vec![([0.5, 0.5], [0.5]), ([0.5, 0.5], [0.5])];
        let r = check_hoelder_bound(&pts, 2.0, 2.0).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn argument_checks() {
        let one = vec![([1.0], [0.0])];
        assert_eq!(check_hoelder_bound(&one, 2.0, 2.0), Err(Error::TooFewPoints(1)));
        let two = vec![([1.0], [0.0]), ([0.0], [1.0])];
        assert!(check_hoelder_bound(&two, 0.0, 2.0).is_err());
    }

    #[test]
    fn violation_is_reported_not_raised() {
        // Solutions far apart for nearby weights.
        let pts = vec![([0.5, 0.5], [0.0]), ([0.51, 0.49], [10.0])];
        let r = check_hoelder_bound(&pts, 2.0, 2.0).unwrap();
        assert!(r.max_violation > 9.0);
        assert_eq!(r.worst_pair, (0, 1));
    }
}
