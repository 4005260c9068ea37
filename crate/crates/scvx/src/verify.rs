//! Verification reports for samples and for the one-dimensional example.

use scvx_core::continuity::{
    check_hoelder_bound, check_hoelder_bound_on_pairs, grid_minimizer, remark_objectives, remark_path_points,
    remark_solution_path, REMARK_ALPHA0, REMARK_K0,
};
use scvx_core::elastic_net::perturb;
use scvx_core::pareto::{check_weak_dominance, grid_neighbor_pairs, ParetoSample, LOSS_TOLERANCE};
use scvx_core::simplex::grid_points;
use scvx_core::solver::optimality_certificate;
use scvx_core::ElasticNetProblem;
use serde_json::{json, Value};

use crate::error::{Result, ScvxError};

/// Listed violations are capped at this many entries.
const MAX_LISTED: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "subject": self.subject,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Brute-force minimizer comparison at 101 values of `w1` plus the
/// continuity bound (with its equality case) on a 101-point path.
pub fn verify_remark(nodes: usize) -> VerifyReport {
    let tol = 2e-6;
    let mut worst = (0.0f64, 0.0f64);
    for k in 0..=100 {
        let w1 = k as f64 / 100.0;
        let x = grid_minimizer(
            |x| {
                let f = remark_objectives(x);
                w1 * f[0] + (1.0 - w1) * f[1]
            },
            -1.0,
            2.0,
            nodes,
        );
        let err = (x - remark_solution_path(w1).expect("w1 in [0, 1]")).abs();
        if err >= worst.0 {
            worst = (err, w1);
        }
    }
    let brute = Check {
        name: "closed_form_vs_brute_force",
        passed: worst.0 <= tol,
        detail: json!({"nodes": nodes, "max_error": worst.0, "at_w1": worst.1, "tolerance": tol}),
    };

    let pts = remark_path_points(101);
    let bound = check_hoelder_bound(&pts, REMARK_ALPHA0, REMARK_K0).expect("101 points");
    let holds = Check {
        name: "continuity_bound",
        passed: bound.holds(1e-12),
        detail: json!({
            "alpha0": REMARK_ALPHA0,
            "k0": REMARK_K0,
            "pairs": bound.pairs_checked,
            "max_violation": bound.max_violation,
        }),
    };

    let (a, b) = (&pts[25], &pts[75]);
    let lhs = (a.1[0] - b.1[0]).abs();
    let rhs = ((REMARK_K0 / REMARK_ALPHA0) * ((a.0[0] - b.0[0]).abs() + (a.0[1] - b.0[1]).abs())).sqrt();
    let tight = Check {
        name: "continuity_bound_equality",
        passed: (lhs - rhs).abs() <= 1e-12,
        detail: json!({"w1": [0.25, 0.75], "lhs": lhs, "rhs": rhs}),
    };

    VerifyReport {
        subject: "builtin:remark".into(),
        checks: vec![brute, holds, tight],
    }
}

/// Settings for [`verify_sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleChecks {
    pub dominance_tolerance: f64,
    /// Certificates pass when their violation is at most this.
    pub certificate_slack: f64,
}

fn capped<T: serde::Serialize>(items: &[T]) -> Value {
    json!(&items[..items.len().min(MAX_LISTED)])
}

/// Loss consistency, mutual non-dominance and (given the dataset)
/// optimality certificates and the grid continuity proxy.
pub fn verify_sample(
    subject: &str,
    sample: &ParetoSample,
    problem: Option<&ElasticNetProblem>,
    settings: SampleChecks,
) -> Result<VerifyReport> {
    if sample.is_empty() {
        return Err(ScvxError::Usage(format!("{subject}: sample has no records")));
    }
    let eps = sample.meta.epsilon;
    let mut checks = Vec::new();

    let structure = sample.validate(None).err().filter(|e| !matches!(e, scvx_core::Error::InconsistentRecord { .. }));
    checks.push(Check {
        name: "structure",
        passed: structure.is_none(),
        detail: json!({"error": structure.map(|e| e.to_string())}),
    });

    let mut bad_losses = Vec::new();
    for (i, r) in sample.records.iter().enumerate() {
        let expected = match problem {
            Some(p) => p.perturbed_objectives(&r.theta)?,
            None => {
                let l1: f64 = r.theta.iter().map(|t| t.abs()).sum();
                let sq: f64 = r.theta.iter().map(|t| t * t).sum::<f64>() / 2.0;
                let f = perturb([0.0, l1, sq], eps);
                [r.losses[0], f[1], f[2]]
            }
        };
        let off = expected
            .iter()
            .zip(&r.losses)
            .any(|(&e, &s)| !((e - s).abs() <= LOSS_TOLERANCE * e.abs().max(1.0)));
        if off {
            bad_losses.push(json!({"record": i, "stored": r.losses, "recomputed": expected}));
        }
    }
    checks.push(Check {
        name: "loss_consistency",
        passed: bad_losses.is_empty(),
        detail: json!({
            "f1_checked": problem.is_some(),
            "violations": bad_losses.len(),
            "first": capped(&bad_losses),
        }),
    });

    let dominated = check_weak_dominance(sample, settings.dominance_tolerance);
    checks.push(Check {
        name: "weak_dominance",
        passed: dominated.is_empty(),
        detail: json!({
            "tolerance": settings.dominance_tolerance,
            "violations": dominated.len(),
            "first": capped(&dominated.iter().map(|&(a, b)| json!({"dominated": a, "by": b})).collect::<Vec<_>>()),
        }),
    });

    if let Some(p) = problem {
        let mut failing = Vec::new();
        let mut worst = f64::NEG_INFINITY;
        for (i, r) in sample.records.iter().enumerate() {
            let c = optimality_certificate(p, &r.weight, &r.theta)?;
            worst = worst.max(c.max_violation);
            if !c.passes(settings.certificate_slack) {
                failing.push(json!({"record": i, "violation": c.max_violation, "coordinate": c.worst_coordinate}));
            }
        }
        checks.push(Check {
            name: "optimality_certificates",
            passed: failing.is_empty(),
            detail: json!({
                "slack": settings.certificate_slack,
                "max_violation": worst,
                "violations": failing.len(),
                "first": capped(&failing),
            }),
        });
    }

    // The continuity proxy needs the full grid in order.
    let r = sample.meta.resolution;
    if r > 0 && eps > 0.0 {
        let grid = grid_points(3, r);
        if grid.len() == sample.len() && grid.iter().zip(&sample.records).all(|(g, rec)| *g == rec.weight) {
            let pairs = grid_neighbor_pairs(&grid, r);
            let pts: Vec<(&[f64], &[f64])> =
                sample.records.iter().map(|r| (r.weight.as_slice(), r.theta.as_slice())).collect();
            let k0 = 2.0 * sample.estimated_k0();
            if k0 > 0.0 {
                let rep = check_hoelder_bound_on_pairs(&pts, &pairs, eps, k0)?;
                checks.push(Check {
                    name: "continuity_proxy",
                    passed: rep.holds(0.0),
                    detail: json!({
                        "alpha0": eps,
                        "k0": k0,
                        "pairs": rep.pairs_checked,
                        "max_violation": rep.max_violation,
                    }),
                });
            }
        }
    }

    Ok(VerifyReport {
        subject: subject.into(),
        checks,
    })
}
