//! Release gate. Each test checks one acceptance criterion and writes a
//! single PASS/FAIL line to stderr (bypassing output capture).

mod common;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use zeno_subspace::channel::{
    apply_measurement, backward_states, construct_gauge, forward_states, measurement_map, objective, ControlProblem,
    DensityMatrix, UnitaryMatrix,
};
use zeno_subspace::linalg::{commutator, ComplexMatrix};
use zeno_subspace::optimality::{chain_report, gradient, offblock_coupling, subspace_leakage, tau_structure};
use zeno_subspace::optimizer::{
    compare_restricted, optimize, run_restart, OptimizationResult, OptimizerConfig, Restriction,
};
use zeno_subspace::oracle::{equal_angle_sequence, gamma_from_overlap, grid_search_value, optimal_value};

const DIMS: [usize; 4] = [2, 3, 4, 6];
const MEASUREMENTS: [usize; 3] = [1, 2, 3];

type Outcome = Result<String, String>;

fn gate(name: &str, limit: Option<Duration>, body: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let mut outcome = body();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit && outcome.is_ok() {
            outcome = Err(format!("took {:.1}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()));
        }
    }
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let line = format!("[{tag}] {name}: {detail} ({:.2}s)\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().write_all(line.as_bytes());
    if let Err(detail) = outcome {
        panic!("{name}: {detail}");
    }
}

/// Collects failure messages; at most a handful are kept.
#[derive(Default)]
struct Failures(Vec<String>, usize);

impl Failures {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.1 += 1;
            if self.0.len() < 5 {
                self.0.push(msg());
            }
        }
    }

    fn finish(self, summary: String) -> Outcome {
        if self.1 == 0 {
            Ok(summary)
        } else {
            Err(format!("{} failures, e.g. {}", self.1, self.0.join("; ")))
        }
    }
}

#[test]
fn channel_axioms() {
    gate("channel axioms", Some(Duration::from_secs(10)), || {
        let mut f = Failures::default();
        let mut r = rng(1);
        let instances = 1000;
        let mut worst: f64 = 0.0;
        for i in 0..instances {
            let n = 2 + i % 7;
            let u = UnitaryMatrix::haar(n, &mut r);
            let rho = random_density(n, &mut r);
            let after = apply_measurement(&u, &rho).unwrap();
            let again = apply_measurement(&u, &after).unwrap();
            let id = ComplexMatrix::identity(n);
            let b = gaussian_matrix(n, &mut r).hermitian_part();
            let errs = [
                (after.matrix().trace().re - 1.0).abs(),
                again.matrix().distance(after.matrix()),
                measurement_map(u.matrix(), &id).distance(&id),
                (b.trace_product(after.matrix()) - measurement_map(u.matrix(), &b).trace_product(rho.matrix())).norm(),
                (after.purity() - rho.purity()).max(0.0),
            ];
            for (name, e) in ["trace", "idempotence", "unitality", "self-adjointness", "purity"].iter().zip(errs) {
                worst = worst.max(e);
                f.check(e <= 1e-12, || format!("{name} error {e:.1e} at instance {i} (N={n})"));
            }
        }
        f.finish(format!("{instances} instances, N = 2..8, worst deviation {worst:.1e}"))
    });
}

#[test]
fn gradient_finite_differences() {
    gate("gradient vs central differences", Some(Duration::from_secs(30)), || {
        let mut f = Failures::default();
        let mut r = rng(2);
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        let mut triples = 0;
        for i in 0..120 {
            let n = 2 + i % 3;
            let m = 1 + (i / 3) % 3;
            let problem = ControlProblem::new(m, random_density(n, &mut r), random_density(n, &mut r)).unwrap();
            let seq = random_sequence(n, m, &mut r);
            let xs = gradient(&seq, &problem).unwrap();
            for k in 1..=m {
                let a = random_anti_hermitian(n, &mut r);
                let exact = a.trace_product(&xs[k - 1]);
                let fd = (perturbed_objective(&seq, &problem, k, &a, eps)
                    - perturbed_objective(&seq, &problem, k, &a, -eps))
                    / (2.0 * eps);
                let rel = (fd - exact.re).abs() / exact.re.abs();
                worst = worst.max(rel);
                triples += 1;
                f.check(rel <= 1e-6 && exact.im.abs() < 1e-12, || {
                    format!("N={n} m={m} k={k}: fd {fd:.12e} vs {:.12e}", exact.re)
                });
            }
        }
        f.finish(format!("{triples} triples, worst relative error {worst:.1e}"))
    });
}

#[test]
fn cut_invariance_and_chain_identity() {
    gate("cut invariance and chain identity", None, || {
        let mut f = Failures::default();
        let mut r = rng(3);
        let (mut worst_cut, mut worst_chain): (f64, f64) = (0.0, 0.0);
        for i in 0..300 {
            let n = 2 + i % 5;
            let m = 1 + (i / 5) % 5;
            let problem = ControlProblem::new(m, random_density(n, &mut r), random_density(n, &mut r)).unwrap();
            let seq = random_sequence(n, m, &mut r);
            let fw = forward_states(&seq, &problem.initial).unwrap();
            let bw = backward_states(&seq, &problem.target).unwrap();
            let cuts: Vec<f64> = (0..=m).map(|k| fw[k].matrix().trace_product(bw[k].matrix()).re).collect();
            let spread = cuts.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                - cuts.iter().fold(f64::INFINITY, |a, &b| a.min(b));
            worst_cut = worst_cut.max(spread);
            f.check(spread <= 1e-12, || format!("cut spread {spread:.1e} (N={n}, m={m})"));

            let chain: Vec<ComplexMatrix> =
                (0..=m).map(|k| commutator(fw[k].matrix(), bw[k].matrix()).unwrap()).collect();
            let report = chain_report(&seq, &problem).unwrap();
            let xs = gradient(&seq, &problem).unwrap();
            for k in 1..=m {
                let d = xs[k - 1].distance(&(&chain[k] - &chain[k - 1]));
                let c = report.chain[k].distance(&chain[k]);
                worst_chain = worst_chain.max(d).max(c);
                f.check(d <= 1e-14 && c <= 1e-14, || format!("X_{k} off by {d:.1e} (N={n}, m={m})"));
            }
        }
        f.finish(format!("300 instances, cut spread {worst_cut:.1e}, chain mismatch {worst_chain:.1e}"))
    });
}

#[test]
fn two_level_oracle_concordance() {
    gate("two-level oracle concordance", Some(Duration::from_secs(300)), || {
        let mut f = Failures::default();
        let mut rows = String::new();
        for gamma in [PI, PI / 2.0, PI / 4.0] {
            for m in MEASUREMENTS {
                let resolution = if m == 3 { 90 } else { 180 };
                let formula = optimal_value(m, gamma).unwrap();
                let grid = grid_search_value(m, gamma, resolution).unwrap();
                f.check((grid - formula).abs() <= 1e-3, || {
                    format!("γ={gamma:.4} m={m}: grid {grid:.6} vs formula {formula:.6}")
                });
                f.check(grid <= formula + 1e-12, || format!("grid above formula at γ={gamma:.4} m={m}"));

                let seq = equal_angle_sequence(m, gamma).unwrap();
                let target_overlap = (gamma / 2.0).cos().powi(2);
                let problem = ControlProblem::with_overlap(2, m, target_overlap).unwrap();
                let j = objective(&seq, &problem).unwrap();
                let chain = chain_report(&seq, &problem).unwrap().chain_residual;
                f.check((j - formula).abs() <= 1e-12, || format!("sequence J {j} vs {formula} at γ={gamma:.4} m={m}"));
                f.check(chain < 1e-9, || format!("sequence chain residual {chain:.1e} at γ={gamma:.4} m={m}"));
                let _ = write!(rows, " m{m}:{:.0e}", (grid - formula).abs());
            }
        }
        f.finish(format!("|grid − formula| per cell{rows}"))
    });
}

struct Cell {
    n: usize,
    m: usize,
    result: OptimizationResult,
}

fn orthogonal_grid() -> &'static (Vec<Cell>, Duration) {
    static GRID: OnceLock<(Vec<Cell>, Duration)> = OnceLock::new();
    GRID.get_or_init(|| {
        let start = Instant::now();
        let config = OptimizerConfig::default();
        let cells = DIMS
            .iter()
            .flat_map(|&n| MEASUREMENTS.iter().map(move |&m| (n, m)))
            .map(|(n, m)| Cell { n, m, result: optimize(&ControlProblem::orthogonal(n, m).unwrap(), &config).unwrap() })
            .collect();
        (cells, start.elapsed())
    })
}

#[test]
fn effective_subspace_optimum() {
    gate("N-level optimum equals two-level optimum", None, || {
        let (cells, elapsed) = orthogonal_grid();
        let mut f = Failures::default();
        let mut worst: f64 = 0.0;
        for c in cells {
            let oracle = optimal_value(c.m, PI).unwrap();
            let gap = c.result.best_objective - oracle;
            worst = worst.max(gap.abs());
            f.check(gap.abs() <= 1e-6 && gap <= 1e-9, || format!("N={} m={}: gap {gap:+.1e}", c.n, c.m));
        }
        f.check(*elapsed < Duration::from_secs(300), || format!("grid took {:.0}s", elapsed.as_secs_f64()));
        f.finish(format!("12 cells, 16 restarts each, max |gap| {worst:.1e}, optimization {:.1}s", elapsed.as_secs_f64()))
    });
}

#[test]
fn restriction_equivalence() {
    gate("restricted optimum matches unrestricted", None, || {
        let config = OptimizerConfig::default();
        let mut f = Failures::default();
        let (mut worst_gap, mut worst_leak): (f64, f64) = (0.0, 0.0);
        for n in DIMS {
            for m in MEASUREMENTS {
                let problem = ControlProblem::orthogonal(n, m).unwrap();
                let cmp = compare_restricted(&problem, &config).unwrap();
                worst_gap = worst_gap.max(cmp.gap_full_vs_embedded.abs());
                f.check(cmp.gap_full_vs_embedded.abs() < 1e-6, || {
                    format!("N={n} m={m}: gap {:.1e}", cmp.gap_full_vs_embedded)
                });
                f.check(cmp.j_full >= cmp.j_embedded - 1e-9, || format!("N={n} m={m}: full below embedded"));
                if n < 3 {
                    continue;
                }
                for restriction in [Restriction::Block, Restriction::Embedded2] {
                    let cfg = OptimizerConfig { restriction, ..config.clone() };
                    for r in 0..cfg.restarts as u64 {
                        run_restart(&problem, &cfg, cfg.base_seed + r, |e| {
                            for u in e.unitaries {
                                let leak = subspace_leakage(u).unwrap();
                                worst_leak = worst_leak.max(leak);
                                f.check(leak < 1e-10, || format!("{restriction} N={n} m={m}: leakage {leak:.1e}"));
                            }
                        })
                        .unwrap();
                    }
                }
            }
        }
        f.finish(format!("max |j_full − j_embedded| {worst_gap:.1e}, max iterate leakage {worst_leak:.1e}"))
    });
}

#[test]
fn optimum_structure() {
    gate("structure of converged optima", None, || {
        let config = OptimizerConfig::default();
        let mut f = Failures::default();
        let mut optima = 0;
        let (mut chain, mut offblock, mut tau): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for n in DIMS {
            for m in MEASUREMENTS {
                let problem = ControlProblem::orthogonal(n, m).unwrap();
                for r in 0..config.restarts as u64 {
                    let out = run_restart(&problem, &config, config.base_seed + r, |_| {}).unwrap();
                    if !out.summary.converged {
                        continue;
                    }
                    optima += 1;
                    let seq = &out.sequence;
                    let report = chain_report(seq, &problem).unwrap();
                    chain = chain.max(report.chain_residual);
                    f.check(report.chain_residual < 1e-6, || format!("N={n} m={m}: chain {:.1e}", report.chain_residual));
                    if n >= 3 {
                        offblock = offblock.max(report.canonical_offblock);
                        f.check(report.canonical_offblock < 1e-6, || {
                            format!("N={n} m={m}: off-block {:.1e}", report.canonical_offblock)
                        });
                        for k in 1..=m {
                            let d = tau_structure(seq, &problem, k).unwrap().deviation;
                            tau = tau.max(d);
                            f.check(d < 1e-6, || format!("N={n} m={m} k={k}: backward-state deviation {d:.1e}"));
                        }
                    }
                }
            }
        }

        let gamma = gamma_from_overlap(0.5).unwrap();
        let (mut coupling, mut gap): (f64, f64) = (0.0, 0.0);
        for n in DIMS {
            for m in MEASUREMENTS {
                let problem = ControlProblem::with_overlap(n, m, 0.5).unwrap();
                let result = optimize(&problem, &config).unwrap();
                let s = offblock_coupling(&result.best_sequence, &problem).unwrap();
                let g = result.best_objective - optimal_value(m, gamma).unwrap();
                coupling = coupling.max(s);
                gap = gap.max(g.abs());
                f.check(s < 1e-6, || format!("overlap 0.5 N={n} m={m}: ‖s‖ {s:.1e}"));
                f.check(g.abs() < 1e-6, || format!("overlap 0.5 N={n} m={m}: gap {g:+.1e}"));
            }
        }
        f.finish(format!(
            "{optima} optima: chain {chain:.1e}, off-block {offblock:.1e}, backward-state deviation {tau:.1e}; \
             overlap 0.5: ‖s‖ {coupling:.1e}, |gap| {gap:.1e}"
        ))
    });
}

#[test]
fn gauge_invariance() {
    gate("gauge invariance", None, || {
        let mut f = Failures::default();
        let mut r = rng(8);
        let mut worst: f64 = 0.0;
        for n in [3, 4, 6] {
            for m in MEASUREMENTS {
                let problem = ControlProblem::orthogonal(n, m).unwrap();
                for _ in 0..3 {
                    let seq = random_sequence(n, m, &mut r);
                    let j = objective(&seq, &problem).unwrap();
                    for _ in 0..100 {
                        let gauge = construct_gauge(
                            r.random_range(0.0..2.0 * PI),
                            r.random_range(0.0..2.0 * PI),
                            &UnitaryMatrix::haar(n - 2, &mut r),
                        );
                        let moved = objective(&seq.left_multiplied(&gauge).unwrap(), &problem).unwrap();
                        worst = worst.max((moved - j).abs());
                        f.check((moved - j).abs() <= 1e-12, || format!("N={n} m={m}: ΔJ {:.1e}", moved - j));
                    }
                }
            }
        }
        f.finish(format!("27 instances × 100 gauges, max |ΔJ| {worst:.1e}"))
    });
}

#[test]
fn zeno_trend() {
    gate("Zeno trend for N = 2", None, || {
        let config = OptimizerConfig::default();
        let values: Vec<f64> = (1..=8)
            .map(|m| optimize(&ControlProblem::orthogonal(2, m).unwrap(), &config).unwrap().best_objective)
            .collect();
        let mut f = Failures::default();
        for (i, w) in values.windows(2).enumerate() {
            f.check(w[1] > w[0], || format!("J(m={}) = {:.6} not above J(m={}) = {:.6}", i + 2, w[1], i + 1, w[0]));
        }
        for (i, &v) in values.iter().enumerate() {
            let oracle = optimal_value(i + 1, PI).unwrap();
            f.check((v - oracle).abs() < 1e-6, || format!("m={}: {v:.8} vs oracle {oracle:.8}", i + 1));
        }
        let last = values[7];
        f.check(last > 0.9, || format!("J(m=8) = {last:.6} does not exceed 0.9"));
        let listed: Vec<String> = values.iter().map(|v| format!("{v:.4}")).collect();
        f.finish(format!("J(m = 1..8) = [{}]", listed.join(", ")))
    });
}

fn zeno(args: &[&str], dir: &Path, threads: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_zeno"))
        .args(args)
        .current_dir(dir)
        .env("ZENO_THREADS", threads)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn mixed_state_exploration() {
    gate("mixed-state exploration", Some(Duration::from_secs(600)), || {
        let dir = tempfile::tempdir().unwrap();
        let (code, stdout) = zeno(&["mixed", "--n", "3", "--m", "2", "--trials", "50", "--seed", "0", "--out", "mixed.csv"], dir.path(), "4");
        if code != 0 {
            return Err(format!("exit code {code}"));
        }
        let rows = csv::Reader::from_path(dir.path().join("mixed.csv")).unwrap().records().count();
        if rows != 50 {
            return Err(format!("{rows} rows"));
        }
        let gap: f64 = stdout
            .trim()
            .rsplit(' ')
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("no gap in output {stdout:?}"))?;
        let verdict = if gap < 1e-6 { "restriction loses nothing" } else { "restriction loses objective" };
        Ok(format!("50 trials, max |j_full − j_restricted| = {gap:.1e} ({verdict}; reported, not gated)"))
    });
}

#[test]
fn deterministic_outputs() {
    gate("byte-identical reruns", None, || {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        std::fs::write(
            p.join("problem.json"),
            r#"{"n": 4, "m": 3, "initial": {"type": "basis", "index": 0},
                "target": {"type": "pure", "vector": [[0.6, 0], [0, 0.8], [0, 0], [0, 0]]}}"#,
        )
        .unwrap();
        let runs: [(&str, Vec<&str>); 4] = [
            ("result.json", vec!["optimize", "--problem", "problem.json", "--seed", "5", "--out"]),
            ("block.json", vec!["optimize", "--problem", "problem.json", "--restrict", "block", "--out"]),
            ("sweep.csv", vec!["sweep", "--n", "2,3", "--m", "1,2", "--overlap", "0.3", "--out"]),
            ("mixed.csv", vec!["mixed", "--trials", "5", "--seed", "9", "--out"]),
        ];
        let mut compared = Vec::new();
        for (name, args) in &runs {
            let mut outputs = Vec::new();
            for (i, threads) in ["1", "4"].iter().enumerate() {
                let file = format!("{i}-{name}");
                let mut full = args.clone();
                full.push(&file);
                let (code, _) = zeno(&full, p, threads);
                if code != 0 {
                    return Err(format!("{name}: exit code {code}"));
                }
                outputs.push(std::fs::read(p.join(&file)).unwrap());
            }
            if outputs[0] != outputs[1] {
                return Err(format!("{name} differs between runs"));
            }
            compared.push(*name);
        }

        let result: serde_json::Value =
            serde_json::from_slice(&std::fs::read(p.join("0-result.json")).unwrap()).unwrap();
        std::fs::write(p.join("seq.json"), result["best_sequence"].to_string()).unwrap();
        let (a, _) = zeno(&["verify", "--problem", "problem.json", "--sequence", "seq.json", "--out", "v1.json"], p, "1");
        let (b, _) = zeno(&["verify", "--problem", "problem.json", "--sequence", "seq.json", "--out", "v2.json"], p, "4");
        if (a, b) != (0, 0) || std::fs::read(p.join("v1.json")).unwrap() != std::fs::read(p.join("v2.json")).unwrap() {
            return Err("verify report differs between runs".into());
        }
        compared.push("verify.json");

        // The same check through the library, restart by restart.
        let problem = ControlProblem::new(
            2,
            DensityMatrix::pure(&UnitaryMatrix::haar(3, &mut rng(4)).matrix().column(0)).unwrap(),
            random_density(3, &mut rng(5)),
        )
        .unwrap();
        let config = OptimizerConfig { restarts: 6, base_seed: 77, ..OptimizerConfig::default() };
        let (x, y) = (optimize(&problem, &config).unwrap(), optimize(&problem, &config).unwrap());
        if x.per_restart != y.per_restart || x.best_sequence != y.best_sequence {
            return Err("library restarts differ between runs".into());
        }
        Ok(format!("identical bytes across reruns and thread counts for {}", compared.join(", ")))
    });
}
