//! Solver results checked against independent oracles: a direct linear
//! solve for the ridge vertex and multi-start proximal gradient elsewhere.

use proptest::prelude::*;
use scvx_core::simplex::{grid_points, WeightVector};
use scvx_core::solver::{optimality_certificate, scalarized_objective, solve_scalarized, solve_scalarized_from};
use scvx_core::{ElasticNetProblem, SolverConfig};

const EXAMPLE_X: [[f64; 3]; 4] = [[1.0, 2.0, 3.0], [6.0, 5.0, 4.0], [7.0, 8.0, 9.0], [12.0, 11.0, 10.0]];
const EXAMPLE_Y: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

fn weight(c: [f64; 3]) -> WeightVector {
    WeightVector::new(c.to_vec()).unwrap()
}

/// Gaussian elimination with partial pivoting on a dense system.
fn linear_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &k| a[i][col].abs().total_cmp(&a[k][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// `(XᵀX/m + εI)⁻¹ Xᵀy/m`.
fn ridge_closed_form(eps: f64) -> Vec<f64> {
    let m = EXAMPLE_X.len() as f64;
    let mut gram = vec![vec![0.0; 3]; 3];
    let mut rhs = vec![0.0; 3];
    for (row, &yi) in EXAMPLE_X.iter().zip(&EXAMPLE_Y) {
        for j in 0..3 {
            rhs[j] += row[j] * yi / m;
            for k in 0..3 {
                gram[j][k] += row[j] * row[k] / m;
            }
        }
    }
    for (j, g) in gram.iter_mut().enumerate() {
        g[j] += eps;
    }
    linear_solve(gram, rhs)
}

/// Proximal gradient on a·f1 + b‖θ‖₁ + (c/2)‖θ‖² from `start`, with the
/// smooth part a·f1 + (c/2)‖θ‖² and prox of b‖·‖₁.
fn prox_gradient(w: [f64; 3], eps: f64, start: [f64; 3], tol: f64) -> Vec<f64> {
    let (a, b, c) = (w[0], w[1], w[2] + eps);
    let m = EXAMPLE_X.len() as f64;
    // Lipschitz bound via the Frobenius norm of XᵀX/m.
    let fro: f64 = EXAMPLE_X.iter().flatten().map(|v| v * v).sum::<f64>() / m;
    let step = 1.0 / (a * fro + c);
    let mut theta = start.to_vec();
    for _ in 0..2_000_000 {
        let mut grad = vec![0.0; 3];
        for (row, &yi) in EXAMPLE_X.iter().zip(&EXAMPLE_Y) {
            let resid: f64 = row.iter().zip(&theta).map(|(x, t)| x * t).sum::<f64>() - yi;
            for j in 0..3 {
                grad[j] += a * row[j] * resid / m;
            }
        }
        let mut change: f64 = 0.0;
        for j in 0..3 {
            let z = theta[j] - step * (grad[j] + c * theta[j]);
            let next = z.signum() * (z.abs() - step * b).max(0.0);
            change = change.max((next - theta[j]).abs());
            theta[j] = next;
        }
        if change < tol * step {
            break;
        }
    }
    theta
}

#[test]
fn ridge_vertex_matches_closed_form() {
    for eps in [1e-2, 1e-4, 1e-6] {
        let p = ElasticNetProblem::example1(eps).unwrap();
        let sol = solve_scalarized(&p, &weight([1.0, 0.0, 0.0]), &SolverConfig::default()).unwrap();
        let oracle = ridge_closed_form(eps);
        for (got, want) in sol.theta.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-6, "eps={eps}: {:?} vs {:?}", sol.theta, oracle);
        }
    }
}

#[test]
fn interior_weight_matches_prox_gradient_oracle() {
    let eps = 1e-6;
    let w = [0.4, 0.3, 0.3];
    let p = ElasticNetProblem::example1(eps).unwrap();
    let sol = solve_scalarized(&p, &weight(w), &SolverConfig::default()).unwrap();
    for start in [[0.0; 3], [1.0, -1.0, 0.5], [-2.0, 3.0, -1.0]] {
        let oracle = prox_gradient(w, eps, start, 1e-10);
        for (got, want) in sol.theta.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-6, "{:?} vs oracle {:?}", sol.theta, oracle);
        }
    }
}

#[test]
fn plain_coordinate_descent_alone_stalls_on_collinear_example() {
    // Documents why the active-set refinement exists: with refinement off
    // the stopping rule fires far from the ridge solution.
    let p = ElasticNetProblem::example1(1e-6).unwrap();
    let cfg = SolverConfig {
        refine: false,
        ..SolverConfig::default()
    };
    let sol = solve_scalarized(&p, &weight([1.0, 0.0, 0.0]), &cfg).unwrap();
    let oracle = ridge_closed_form(1e-6);
    let err = sol.theta.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err > 1e-4, "expected a visible stall, error {err:e}");
}

#[test]
fn objective_never_increases_across_sweeps() {
    let p = ElasticNetProblem::example1(1e-6).unwrap();
    for w in [[0.4, 0.3, 0.3], [0.9, 0.1, 0.0], [0.2, 0.0, 0.8], [1.0, 0.0, 0.0]] {
        let cfg = SolverConfig {
            record_objective: true,
            seed: Some(11),
            ..SolverConfig::default()
        };
        let sol = solve_scalarized(&p, &weight(w), &cfg).unwrap();
        assert!(!sol.objective_trace.is_empty());
        for pair in sol.objective_trace.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-14 * pair[0].abs().max(1.0), "{pair:?}");
        }
    }
}

#[test]
fn random_restarts_agree() {
    let p = ElasticNetProblem::example1(1e-6).unwrap();
    let tol = SolverConfig::default().tolerance;
    for w in grid_points(3, 5) {
        let base = solve_scalarized(&p, &w, &SolverConfig::default()).unwrap();
        for seed in 0..10 {
            let cfg = SolverConfig {
                seed: Some(seed),
                ..SolverConfig::default()
            };
            let other = solve_scalarized(&p, &w, &cfg).unwrap();
            for (a, b) in base.theta.iter().zip(&other.theta) {
                assert!((a - b).abs() <= 100.0 * tol, "w={:?}", w.as_slice());
            }
        }
    }
}

#[test]
fn warm_start_reaches_same_point() {
    let p = ElasticNetProblem::example1(1e-6).unwrap();
    let w = weight([0.5, 0.2, 0.3]);
    let cold = solve_scalarized(&p, &w, &SolverConfig::default()).unwrap();
    let warm = solve_scalarized_from(&p, &w, &SolverConfig::default(), &[0.3, -0.1, 0.2]).unwrap();
    for (a, b) in cold.theta.iter().zip(&warm.theta) {
        assert!((a - b).abs() < 1e-6);
    }
    assert!(solve_scalarized_from(&p, &w, &SolverConfig::default(), &[0.0; 2]).is_err());
}

#[test]
fn returned_point_beats_perturbations() {
    let p = ElasticNetProblem::example1(1e-4).unwrap();
    let w = weight([0.3, 0.5, 0.2]);
    let sol = solve_scalarized(&p, &w, &SolverConfig::default()).unwrap();
    let best = scalarized_objective(&p, &w, &sol.theta).unwrap();
    for j in 0..3 {
        for d in [1e-3, -1e-3] {
            let mut t = sol.theta.clone();
            t[j] += d;
            assert!(scalarized_objective(&p, &w, &t).unwrap() >= best);
        }
    }
}

fn synthetic_problem(seed: u64, n_obs: usize, n_pred: usize, eps: f64) -> ElasticNetProblem {
    let mut rng = scvx_core::rng::SplitMix64::new(seed);
    let rows: Vec<f64> = (0..n_obs * n_pred).map(|_| rng.next_f64()).collect();
    let y: Vec<f64> = (0..n_obs).map(|_| rng.next_f64()).collect();
    ElasticNetProblem::from_rows(n_obs, n_pred, &rows, y, eps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificate_holds_for_random_weights(
        seed in 0u64..1000,
        raw in prop::array::uniform3(0.0f64..1.0),
    ) {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 1e-3);
        let mut c: Vec<f64> = raw.iter().map(|v| v / total).collect();
        c[2] = 1.0 - c[0] - c[1];
        prop_assume!(c[2] >= 0.0);
        let w = WeightVector::new(c).unwrap();
        let p = synthetic_problem(seed, 30, 5, 1e-6);
        let cfg = SolverConfig::default();
        let sol = solve_scalarized(&p, &w, &cfg).unwrap();
        let cert = optimality_certificate(&p, &w, &sol.theta).unwrap();
        prop_assert!(cert.passes(10.0 * cfg.tolerance), "{cert:?}");
    }
}
