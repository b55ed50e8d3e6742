//! Acceptance suite. Each test prints one `PASS`/`FAIL` line to stderr,
//! bypassing output capture, and fails when any of its clauses fails.

mod common;

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::checks::{bound_failures, chain_violation, oracle_disagreements, positive_first_order_sum, small_gain_failures};
use common::*;
use mimostab::cli::corpus::{corpus_system, SYSTEMS};
use mimostab::cli::RunOptions;
use mimostab::nyquist::{build_grid, build_grid_with, eigen_loci, generalized_nyquist, siso_segment_check, uniform_margins, GridOptions};
use mimostab::passivity::{classify_pr, PrTier};
use mimostab::polyrat::{Polynomial, RationalFunction};
use mimostab::robustness::perturbed_verdict;
use mimostab::smith_mcmillan::theorem1_check;
use mimostab::tfmatrix::{closed_loop, direct_stability, Status, TransferMatrix, Verdict};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Criterion {
    index: usize,
    title: &'static str,
    failed: Vec<String>,
}

impl Criterion {
    fn new(index: usize, title: &'static str) -> Self {
        Self { index, title, failed: Vec::new() }
    }

    fn check(&mut self, clause: &str, ok: bool, detail: impl FnOnce() -> String) {
        if !ok {
            self.failed.push(format!("{clause} ({})", detail()));
        }
    }

    fn finish(self) {
        let line = if self.failed.is_empty() {
            format!("PASS {:>2} {}\n", self.index, self.title)
        } else {
            format!("FAIL {:>2} {}: {}\n", self.index, self.title, self.failed.join("; "))
        };
        let _ = std::io::stderr().lock().write_all(line.as_bytes());
        assert!(self.failed.is_empty(), "{}", line.trim_end());
    }
}

fn real_roots_close(v: &Verdict, targets: &[Complex64], tol: f64) -> bool {
    let w = v.witnesses();
    !w.is_empty() && w.iter().all(|r| targets.iter().any(|t| (r.z - t).norm() <= tol))
}

fn rational(num: &[f64], den_roots: &[f64]) -> RationalFunction {
    let roots: Vec<Complex64> = den_roots.iter().map(|r| Complex64::new(*r, 0.0)).collect();
    RationalFunction::new(Polynomial::new(num.to_vec()), Polynomial::from_roots(&roots)).unwrap()
}

#[test]
fn criterion_01_hidden_modes() {
    let mut c = Criterion::new(1, "hidden unstable modes and the determinant test");
    let t = tol();
    let start = Instant::now();
    let (p1, p2) = hidden_mode_pair();
    let r1 = theorem1_check(&p1, &t).unwrap();
    let r2 = theorem1_check(&p2, &t).unwrap();
    c.check("P1 unstable pole multiplicity 1", r1.plant.unstable_pole_count == 1, || {
        format!("got {}", r1.plant.unstable_pole_count)
    });
    c.check("P2 unstable pole multiplicity 2", r2.plant.unstable_pole_count == 2, || {
        format!("got {}", r2.plant.unstable_pole_count)
    });
    let expected = rational(&[4.0, 2.0], &[-1.0, -2.0, 1.0]);
    for (name, r) in [("P1", &r1), ("P2", &r2)] {
        c.check(&format!("det(I + {name}) = (2s + 4)/((s + 1)(s + 2)(s - 1))"), r.det.approx_eq(&expected, 1e-8), || {
            format!("got {}", r.det)
        });
    }
    c.check("P1 Stable without hidden mode", r1.verdict.status == Status::Stable && !r1.hidden_mode, || {
        format!("{:?}, hidden {}", r1.verdict.status, r1.hidden_mode)
    });
    c.check("P2 Unstable with hidden mode", r2.verdict.status == Status::Unstable && r2.hidden_mode, || {
        format!("{:?}, hidden {}", r2.verdict.status, r2.hidden_mode)
    });
    let elapsed = start.elapsed();
    c.check("runtime under 1 s", elapsed < Duration::from_secs(1), || format!("{elapsed:?}"));
    c.finish();
}

#[test]
fn criterion_02_open_loci() {
    let mut c = Criterion::new(2, "open eigenvalue loci and the generalized Nyquist test");
    let t = tol();
    let start = Instant::now();
    let p = open_loci_plant();
    let (s, _) = closed_loop(&p, None, &t).unwrap();
    let entries = [
        rational(&[2.0, 2.0], &[0.2]).scale(0.2),
        rational(&[1.0, 1.0], &[0.2]).scale(0.2),
        rational(&[-3.0, 3.0], &[0.2]).scale(0.2),
        rational(&[-2.0, -2.0], &[0.2]).scale(0.2),
    ];
    for (k, want) in entries.iter().enumerate() {
        let (i, j) = (k / 2, k % 2);
        let got = s.get(i, j);
        c.check(&format!("(I + P)⁻¹[{i},{j}] = {want}"), got.approx_eq(want, 1e-8), || format!("got {got}"));
    }
    let pole = [Complex64::new(0.2, 0.0)];
    let direct = direct_stability(&p, None, &t).unwrap();
    let grid = build_grid_with(&p, &GridOptions::default(), &t).unwrap();
    let det = mimostab::nyquist::det_nyquist(&p, &grid, &t).unwrap();
    let gnc = generalized_nyquist(&p, &t).unwrap();
    for v in [&direct, &det.verdict, &gnc.verdict] {
        c.check(
            &format!("{} Unstable with witness 0.2", v.method),
            v.status == Status::Unstable && real_roots_close(v, &pole, 1e-8),
            || format!("{:?} {:?}", v.status, v.witnesses()),
        );
    }
    c.check("one merged curve with |winding| 1 about -1", gnc.curves.len() == 1 && gnc.total_winding().abs() == 1, || {
        format!("{} curves, windings {:?}", gnc.curves.len(), gnc.windings)
    });
    for i in 0..gnc.loci.len() {
        c.check(&format!("branch {i} fails closure"), !gnc.loci.is_closed(i, &t), || {
            format!("gap {}", gnc.loci.closure_gap(i))
        });
    }
    let elapsed = start.elapsed();
    c.check("runtime under 5 s", elapsed < Duration::from_secs(5), || format!("{elapsed:?}"));
    c.finish();
}

#[test]
fn criterion_03_nonuniform_perturbation() {
    let mut c = Criterion::new(3, "uniform margins miss a nonuniform diagonal perturbation");
    let t = tol();
    let p = nonuniform_plant(100.0);
    let m = uniform_margins(&p, &t).unwrap();
    c.check("k2 = +inf", m.k2 == f64::INFINITY, || format!("got {}", m.k2));
    let target = 0.75 * std::f64::consts::PI;
    c.check("θ1 = 3π/4 ± 0.01", (m.theta1 - target).abs() <= 0.01, || format!("got {}", m.theta1));
    let u = TransferMatrix::diag(vec![self::c(96.0 / 104.0), self::c(1.0)]);
    let v = perturbed_verdict(&p, &u, &t).unwrap();
    c.check("diag(96/104, 1) Unstable", v.status == Status::Unstable, || format!("{:?}", v.status));
    let grid = build_grid(&p, 1e3, 400, &t).unwrap();
    let a = eigen_loci(&nonuniform_plant(7.0), &grid, &t).unwrap();
    let b = eigen_loci(&p, &grid, &t).unwrap();
    let dev = a
        .branches
        .iter()
        .zip(&b.branches)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).norm()))
        .fold(0.0, f64::max);
    c.check("loci independent of b", dev < 1e-8, || format!("max deviation {dev}"));
    c.finish();
}

#[test]
fn criterion_04_coupled_perturbation() {
    let mut c = Criterion::new(4, "diagonal gains miss an off-diagonal perturbation");
    let t = tol();
    let p = coupled_plant(100.0);
    let nominal = direct_stability(&p, None, &t).unwrap();
    c.check("nominal Stable", nominal.status == Status::Stable, || format!("{:?}", nominal.status));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let gains: Vec<f64> = (0..2).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect();
        let u = TransferMatrix::diag(gains.iter().map(|g| self::c(*g)).collect());
        let v = direct_stability(&p, Some(&u), &t).unwrap();
        c.check(&format!("gain sample {k} Stable"), v.status == Status::Stable, || format!("gains {gains:?}: {:?}", v.status));
    }
    let u = tm(vec![vec![self::c(1.0), self::c(0.0)], vec![self::c(-0.05), self::c(1.0)]]);
    let v = perturbed_verdict(&p, &u, &t).unwrap();
    let sqrt5 = 5f64.sqrt();
    let roots = [Complex64::new((1.0 + sqrt5) / 2.0, 0.0), Complex64::new((1.0 - sqrt5) / 2.0, 0.0)];
    c.check(
        "lower-triangular block Unstable at roots of s² - s - 1",
        v.status == Status::Unstable && real_roots_close(&v, &roots, 1e-8),
        || format!("{:?} {:?}", v.status, v.witnesses()),
    );
    c.finish();
}

#[test]
fn criterion_05_siso_cautions() {
    let mut c = Criterion::new(5, "scalar segment cautions");
    let t = tol();
    let p = crossing_stable();
    let seg = siso_segment_check(&p, &t).unwrap();
    let v = direct_stability(&p, None, &t).unwrap();
    c.check("5(s+10)²/(s+0.3)³ crosses the segment", seg.crosses_segment, || format!("{seg:?}"));
    c.check("5(s+10)²/(s+0.3)³ closed loop Stable", v.status == Status::Stable, || format!("{:?}", v.status));
    let p = limit_on_segment();
    let seg = siso_segment_check(&p, &t).unwrap();
    let v = direct_stability(&p, None, &t).unwrap();
    c.check("(1-2s)/(1+s) limit on the segment", seg.limit_on_segment, || format!("{seg:?}"));
    c.check(
        "(1-2s)/(1+s) Unstable with pole 2",
        v.status == Status::Unstable && real_roots_close(&v, &[Complex64::new(2.0, 0.0)], 1e-8),
        || format!("{:?} {:?}", v.status, v.witnesses()),
    );
    c.finish();
}

#[test]
fn criterion_06_positive_real_hierarchy() {
    let mut c = Criterion::new(6, "positive-real tiers and interconnections");
    let t = tol();
    let g = touching_pr();
    let tier = classify_pr(&g, &t).unwrap().tier;
    c.check("(6s²+s+3)/(s²+3s+2) PR but not strong", tier == PrTier::PR, || format!("got {tier:?}"));
    let v = direct_stability(&g, Some(&g), &t).unwrap();
    let axis = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
    c.check("two-copy loop has poles ±j", real_roots_close(&v, &axis, 1e-6) && v.witnesses().len() == 2, || {
        format!("{:?}", v.witnesses())
    });
    c.check("two-copy loop Unstable", v.status == Status::Unstable, || format!("got {:?}", v.status));
    let tier = classify_pr(&lead_lag(), &t).unwrap().tier;
    c.check("(s+3)/((s+1)(s+2)) StrictlyPR but not StronglyPR", tier == PrTier::StrictlyPR, || format!("got {tier:?}"));

    let opts = RunOptions::new(t);
    for (id, _) in SYSTEMS {
        let p = corpus_system(id, &Default::default(), &opts).unwrap().matrix;
        let Ok(class) = classify_pr(&p, &t) else { continue };
        let bad = chain_violation(&p, &class);
        c.check(&format!("tier chain on {id}"), bad.is_none(), || bad.unwrap_or_default());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..200 {
        let (g, _, _) = positive_first_order_sum(&mut rng);
        let class = classify_pr(&g, &t).unwrap();
        let bad = chain_violation(&g, &class);
        c.check(&format!("tier chain on random sum {k}"), bad.is_none(), || bad.unwrap_or_default());
    }
    c.finish();
}

#[test]
fn criterion_07_oracle_equivalence() {
    let mut c = Criterion::new(7, "frequency-domain and determinant verdicts equal the oracle");
    let start = Instant::now();
    let bad = oracle_disagreements(500, 3, 1_000);
    c.check("500 random systems agree", bad.is_empty(), || format!("{} disagreements: {}", bad.len(), bad.join(", ")));
    let elapsed = start.elapsed();
    c.check("runtime under 5 min", elapsed < Duration::from_secs(300), || format!("{elapsed:?}"));
    c.finish();
}

/// `det(I + P(s))` from the entry coefficients.
fn det_oracle(p: &TransferMatrix, s: Complex64) -> Complex64 {
    let n = p.rows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let f = p.get(i, j);
        let ev = |c: &[f64]| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, x| acc * s + x);
        let v = ev(f.num().coeffs()) / ev(f.den().coeffs());
        if i == j { v + 1.0 } else { v }
    });
    m.determinant()
}

#[test]
fn criterion_08_determinant_eigenvalue_identity() {
    let mut c = Criterion::new(8, "determinant equals the product of eigenvalue terms");
    let t = tol();
    let opts = RunOptions::new(t);
    let mut worst = (0.0f64, String::new());
    for (id, _) in SYSTEMS {
        let p = corpus_system(id, &Default::default(), &opts).unwrap().matrix;
        if !p.is_square() {
            continue;
        }
        let grid = build_grid_with(&p, &GridOptions::default(), &t).unwrap();
        let loci = eigen_loci(&p, &grid, &t).unwrap();
        for (k, pt) in grid.points().iter().enumerate() {
            let Some(s) = pt.s() else { continue };
            let det = det_oracle(&p, s);
            let prod = loci.branches.iter().fold(Complex64::new(1.0, 0.0), |acc, b| acc * (1.0 + b[k]));
            let dev = (det - prod).norm() / det.norm().max(prod.norm());
            if dev > worst.0 {
                worst = (dev, format!("{id} at s = {s}"));
            }
        }
    }
    c.check("max relative deviation below 1e-8", worst.0 < 1e-8, || format!("{:e} on {}", worst.0, worst.1));
    c.finish();
}

#[test]
fn criterion_09_small_gain_and_bounds() {
    let mut c = Criterion::new(9, "small-gain certificates and uncertainty bounds are sound");
    let bad = small_gain_failures(100, 7_000);
    c.check("100 random stable pairs", bad.is_empty(), || bad.join(", "));
    let (checked, bad) = bound_failures(50);
    c.check("perturbations below 0.95 of each bound", bad.is_empty(), || bad.join(", "));
    c.check("bounds sampled on the stable corpus plants", checked.len() >= 6, || format!("only {checked:?}"));
    c.finish();
}

/// Exit status, JSON report and `(file name, contents)` of every curve.
type SuiteRun = (Option<i32>, Vec<u8>, Vec<(String, Vec<u8>)>);

fn paper_suite_run(dir: &Path) -> SuiteRun {
    let json = dir.join("report.json");
    let curves = dir.join("curves");
    let out = Command::new(env!("CARGO_BIN_EXE_mimostab"))
        .env_remove("MIMOSTAB_TOL_ROOT")
        .args(["paper-suite", "--json", json.to_str().unwrap(), "--curves", curves.to_str().unwrap()])
        .output()
        .unwrap();
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(&curves)
        .map(|d| {
            d.map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect()
        })
        .unwrap_or_default();
    files.sort();
    (out.status.code(), std::fs::read(&json).unwrap_or_default(), files)
}

#[test]
fn criterion_10_corpus_suite() {
    let mut c = Criterion::new(10, "corpus suite from the command line");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (code_a, json_a, curves_a) = paper_suite_run(a.path());
    let (code_b, json_b, curves_b) = paper_suite_run(b.path());
    c.check("exit status 0", code_a == Some(0) && code_b == Some(0), || format!("{code_a:?}, {code_b:?}"));
    let report: serde_json::Value = serde_json::from_slice(&json_a).unwrap_or_default();
    let failed = report["summary"]["failed"].as_u64();
    c.check("every expectation matches", failed == Some(0), || format!("failed {failed:?}"));
    c.check("JSON byte-identical across runs", !json_a.is_empty() && json_a == json_b, String::new);
    let names: Vec<&str> = curves_a.iter().map(|(n, _)| n.as_str()).collect();
    c.check("determinant, loci and merged curves written", names.len() == 3 && names.iter().all(|n| n.ends_with(".csv")), || {
        format!("{names:?}")
    });
    c.check("curves byte-identical across runs", curves_a == curves_b, String::new);
    c.finish();
}
