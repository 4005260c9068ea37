//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use scvx::dataset::{synthetic_dataset, SyntheticSpec};
use scvx::parallel::{sample_parallel, sweep_parallel};
use scvx::verify::verify_remark;
use scvx_core::continuity::{check_hoelder_bound, remark_path_points, REMARK_ALPHA0, REMARK_K0};
use scvx_core::elastic_net::{hyperparams_to_weight, weight_to_hyperparams};
use scvx_core::fit::{fit_all_at_once, mse, sweep_plan};
use scvx_core::pareto::{check_weak_dominance, sample_pareto, SampleMeta, SampleOptions};
use scvx_core::rng::SplitMix64;
use scvx_core::simplex::{
    bernstein_value, embed_face, enumerate_multi_indices, grid_points, FaceIndex, MultiIndex, WeightVector,
};
use scvx_core::solver::{optimality_certificate, solve_scalarized};
use scvx_core::{BezierSimplexModel, ElasticNetProblem, SamplePoint, SolverConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn remark_oracle() -> Outcome {
    let t = Instant::now();
    let report = verify_remark(1_000_000);
    let secs = t.elapsed().as_secs_f64();
    let c = &report.checks[0];
    ensure(
        c.passed && secs < 10.0,
        format!("max |x_grid - x*| = {:.3e} (tol 2e-6) over 101 w1, {secs:.2} s", c.detail["max_error"].as_f64().unwrap()),
    )
}

fn continuity_bound() -> Outcome {
    let pts = remark_path_points(101);
    let r = check_hoelder_bound(&pts, REMARK_ALPHA0, REMARK_K0).map_err(|e| e.to_string())?;
    let (a, b) = (&pts[25], &pts[75]);
    let lhs = (a.1[0] - b.1[0]).abs();
    let rhs = ((REMARK_K0 / REMARK_ALPHA0) * ((a.0[0] - b.0[0]).abs() + (a.0[1] - b.0[1]).abs())).sqrt();
    ensure(
        r.max_violation <= 1e-12 && (lhs - rhs).abs() <= 1e-12 && r.pairs_checked == 101 * 100 / 2,
        format!("max violation {:.3e} over {} pairs, equality gap at (1/4, 3/4) = {:.3e}", r.max_violation, r.pairs_checked, (lhs - rhs).abs()),
    )
}

fn conversion_round_trip() -> Outcome {
    let eps = 1e-6;
    let weights: Vec<WeightVector> = grid_points(3, 100).into_iter().filter(|w| w[0] > 0.0).collect();
    let mut worst = 0.0f64;
    let mut outside = 0;
    for w in &weights {
        let h = weight_to_hyperparams(w, eps).map_err(|e| e.to_string())?;
        if !h.in_validity_region(eps) {
            outside += 1;
        }
        let back = hyperparams_to_weight(h, eps).map_err(|e| e.to_string())?;
        for k in 0..3 {
            worst = worst.max((back[k] - w[k]).abs());
        }
    }
    ensure(
        weights.len() == 5050 && worst <= 1e-9 && outside == 0,
        format!("{} weights, max componentwise error {worst:.3e}, {outside} outside the validity region", weights.len()),
    )
}

fn solver_certificates() -> Outcome {
    let t = Instant::now();
    let eps = 1e-6;
    let p = ElasticNetProblem::example1(eps).map_err(|e| e.to_string())?;
    let cfg = SolverConfig::default();
    let tol = cfg.tolerance;
    let grid = grid_points(3, 10);
    let mut worst_cert = f64::NEG_INFINITY;
    let mut worst_spread = 0.0f64;
    for w in &grid {
        let base = solve_scalarized(&p, w, &cfg).map_err(|e| e.to_string())?;
        let c = optimality_certificate(&p, w, &base.theta).map_err(|e| e.to_string())?;
        worst_cert = worst_cert.max(c.max_violation);
        for seed in 0..10 {
            let restart = SolverConfig {
                seed: Some(1000 + seed),
                ..cfg.clone()
            };
            let s = solve_scalarized(&p, w, &restart).map_err(|e| e.to_string())?;
            for (a, b) in base.theta.iter().zip(&s.theta) {
                worst_spread = worst_spread.max((a - b).abs());
            }
        }
    }
    let sample = sample_pareto(&p, &grid, &cfg, SampleOptions::default(), SampleMeta::default()).map_err(|e| e.to_string())?;
    let dominated = check_weak_dominance(&sample.sample, 1e-7).len();
    let secs = t.elapsed().as_secs_f64();
    ensure(
        grid.len() == 66 && worst_cert <= 10.0 * tol && worst_spread <= 100.0 * tol && dominated == 0 && secs < 30.0,
        format!(
            "66 weights: worst certificate {worst_cert:.3e} (<= {:.0e}), restart spread {worst_spread:.3e} (<= {:.0e}), {dominated} dominated pairs, {secs:.2} s",
            10.0 * tol,
            100.0 * tol
        ),
    )
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn ridge_closed_form() -> Outcome {
    let x = [[1.0, 2.0, 3.0], [6.0, 5.0, 4.0], [7.0, 8.0, 9.0], [12.0, 11.0, 10.0]];
    let y = [1.0, 2.0, 3.0, 4.0];
    let m = 4.0;
    let mut worst = 0.0f64;
    for eps in [1e-2, 1e-4, 1e-6] {
        // (XᵀX/m + εI) θ = Xᵀy/m
        let a: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| (0..4).map(|r| x[r][i] * x[r][j]).sum::<f64>() / m + if i == j { eps } else { 0.0 })
                    .collect()
            })
            .collect();
        let b: Vec<f64> = (0..3).map(|i| (0..4).map(|r| x[r][i] * y[r]).sum::<f64>() / m).collect();
        let oracle = solve_dense(a, b);
        let p = ElasticNetProblem::example1(eps).map_err(|e| e.to_string())?;
        let theta = solve_scalarized(&p, &WeightVector::vertex(3, 0), &SolverConfig::default())
            .map_err(|e| e.to_string())?
            .theta;
        for (o, t) in oracle.iter().zip(&theta) {
            worst = worst.max((o - t).abs());
        }
    }
    ensure(worst <= 1e-6, format!("max coefficient error {worst:.3e} over eps in {{1e-2, 1e-4, 1e-6}}"))
}

fn random_simplex_point(rng: &mut SplitMix64, m: usize, zero_prob: f64) -> WeightVector {
    loop {
        let mut e: Vec<f64> = (0..m)
            .map(|_| if rng.next_f64() < zero_prob { 0.0 } else { -(1.0 - rng.next_f64()).ln() })
            .collect();
        let s: f64 = e.iter().sum();
        if s <= 0.0 {
            continue;
        }
        e.iter_mut().for_each(|v| *v /= s);
        let head: f64 = e[..m - 1].iter().sum();
        e[m - 1] = (1.0 - head).max(0.0);
        if let Ok(w) = WeightVector::new(e) {
            return w;
        }
    }
}

fn random_model(rng: &mut SplitMix64, m: usize, d: u32, out_dim: usize) -> BezierSimplexModel {
    let count = enumerate_multi_indices(m, d).len();
    let pts = (0..count).map(|_| (0..out_dim).map(|_| 4.0 * rng.next_f64() - 2.0).collect()).collect();
    BezierSimplexModel::new(m, d, out_dim, pts).unwrap()
}

fn bernstein_suite() -> Outcome {
    let mut rng = SplitMix64::new(314);
    let mut unity = 0.0f64;
    let mut negative = 0;
    for _ in 0..1000 {
        let m = 1 + rng.next_below(4) as usize;
        let d = rng.next_below(31) as u32;
        let w = random_simplex_point(&mut rng, m, 0.15);
        let mut total = 0.0;
        for i in enumerate_multi_indices(m, d) {
            let b = bernstein_value(&i, &w);
            if b < 0.0 {
                negative += 1;
            }
            total += b;
        }
        unity = unity.max((total - 1.0).abs());
    }
    let mut corner_mismatch = 0;
    for case in 0..50 {
        let m = 1 + case % 4;
        let d = (case % 13) as u32;
        let model = random_model(&mut rng, m, d, 3);
        for k in 0..m {
            let at = model.evaluate(&WeightVector::vertex(m, k)).unwrap();
            let corner = model.control_point_for(&MultiIndex::corner(m, k, d)).unwrap();
            if at != corner {
                corner_mismatch += 1;
            }
        }
    }
    let mut face = 0.0f64;
    for case in 0..100 {
        let m = 2 + case % 3;
        let d = 1 + rng.next_below(12) as u32;
        let model = random_model(&mut rng, m, d, 3);
        let mask = 1 + rng.next_below((1 << m) - 1) as usize;
        let members: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        let f = FaceIndex::new(&members, m).unwrap();
        let restricted = model.restrict_to_face(&f).unwrap();
        let wf = random_simplex_point(&mut rng, members.len(), 0.0);
        let a = restricted.evaluate(&wf).unwrap();
        let b = model.evaluate(&embed_face(&f, &wf).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            face = face.max((x - y).abs());
        }
    }
    ensure(
        unity <= 1e-12 && negative == 0 && corner_mismatch == 0 && face <= 1e-12,
        format!("partition of unity {unity:.3e}, {negative} negative values, {corner_mismatch} corner mismatches, face restriction {face:.3e}"),
    )
}

fn exact_recovery() -> Outcome {
    let mut rng = SplitMix64::new(5);
    let truth = random_model(&mut rng, 3, 3, 5);
    let points: Vec<SamplePoint> = grid_points(3, 19)
        .into_iter()
        .take(200)
        .map(|w| SamplePoint {
            target: truth.evaluate(&w).unwrap(),
            weight: w,
        })
        .collect();
    let fit = fit_all_at_once(&points, 3, 3).map_err(|e| e.to_string())?;
    let scale = points.iter().flat_map(|p| &p.target).map(|v| v * v).sum::<f64>() / (points.len() * 5) as f64;
    let e = mse(&fit.model, &points).map_err(|e| e.to_string())?;
    ensure(
        points.len() == 200 && e <= 1e-16 * scale,
        format!("train MSE {e:.3e}, relative {:.3e} (<= 1e-16)", e / scale),
    )
}

fn scaled_trend() -> Outcome {
    let t = Instant::now();
    let eps = 1e-6;
    let data = synthetic_dataset(&SyntheticSpec::new(6, 500, 2024), eps).map_err(|e| e.to_string())?;
    let grid = grid_points(3, 100);
    let sample = sample_parallel(&data.problem, &grid, &SolverConfig::default(), SampleOptions::default(), SampleMeta::default(), 0)
        .map_err(|e| e.to_string())?;
    let points = sample.sample.solution_mapping_points();
    let degrees: Vec<u32> = (1..=8).collect();
    let cells = sweep_plan(&[51], &degrees, 10, 7);
    let out = sweep_parallel(&points, 3, &cells, 0).map_err(|e| e.to_string())?;
    if !out.failures.is_empty() || out.summary.len() != 8 {
        return Err(format!("{} failed cells", out.failures.len()));
    }
    let train: Vec<f64> = out.summary.iter().map(|c| c.train_mse_mean).collect();
    let monotone = train.windows(2).all(|p| p[1] <= p[0] + 1e-12);
    let (_, best) = out.best[0];
    let best_test = out.summary.iter().find(|c| c.degree == best).unwrap().test_mse_mean;
    let d1_test = out.summary[0].test_mse_mean;
    let secs = t.elapsed().as_secs_f64();
    ensure(
        points.len() == 5151 && monotone && best_test <= d1_test && secs < 600.0,
        format!(
            "split 51:5100, mean train MSE d=1..8 {}, d* = {best} with test {best_test:.3e} vs d=1 {d1_test:.3e}, {secs:.1} s",
            if monotone { "non-increasing" } else { "NOT monotone" }
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_scvx"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let files = ["s.csv", "s.meta.json", "w.csv", "w.summary.csv"];
    let mut runs: Vec<Vec<Vec<u8>>> = Vec::new();
    for threads in ["1", "1", "3"] {
        run_cli(
            d,
            &["-q", "--threads", threads, "--seed", "11", "--epsilon", "1e-6", "sample", "--synthetic", "5,120", "--resolution", "40", "-o", "s.csv"],
        )?;
        run_cli(
            d,
            &["-q", "--threads", threads, "--seed", "11", "sweep", "s.csv", "--degrees", "1-6", "--train-counts", "60,200", "--trials", "4", "-o", "w.csv"],
        )?;
        runs.push(files.iter().map(|f| std::fs::read(d.join(f)).unwrap()).collect());
    }
    let same = runs.windows(2).all(|p| p[0] == p[1]);
    ensure(
        same,
        format!("sample + sidecar + sweep tables byte-identical across 2 runs at --threads 1 and 1 run at --threads 3 ({} bytes)", runs[0].iter().map(Vec::len).sum::<usize>()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("remark oracle", remark_oracle),
        ("continuity bound on remark path", continuity_bound),
        ("weight/hyperparameter round trip", conversion_round_trip),
        ("solver certificates", solver_certificates),
        ("ridge closed form", ridge_closed_form),
        ("Bernstein suite", bernstein_suite),
        ("exact recovery", exact_recovery),
        ("scaled degree trend", scaled_trend),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
