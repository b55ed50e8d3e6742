//! Built-in corpus: system files plus expectations stored as data.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use super::commands::{emit_curve, merged_csv, RunOptions};
use super::report::{self, as_f64, num, Report};
use super::system::{build_system, SystemDescription, SystemFile};
use crate::error::{Error, Result};
use crate::nyquist::{
    build_grid_with, curve_csv, det_nyquist, generalized_nyquist_on, loci_csv, siso_segment_check, uniform_margins_on,
};
use crate::passivity::{classify_pr, mixed_interconnect, passivity_interconnect, PrTier};
use crate::polyrat::RootSet;
use crate::robustness::{hinf_norm, perturbed_verdict, small_gain_check, uncertainty_bound, UncertaintyKind, DEFAULT_REL_TOL};
use crate::smith_mcmillan::theorem1_check;
use crate::tfmatrix::{direct_stability, Status, TransferMatrix};

macro_rules! corpus_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../corpus/", $name, ".json")))),*]
    };
}

/// `(id, file contents)` for every corpus system.
pub const SYSTEMS: &[(&str, &str)] = corpus_files!(
    "hidden_mode_p1",
    "hidden_mode_p2",
    "det_family_diagonal",
    "det_family_static",
    "det_family_triangular",
    "det_family_full",
    "open_loci_plant",
    "open_loci_inverse",
    "nonuniform_plant",
    "nonuniform_block",
    "coupled_plant",
    "coupled_block",
    "crossing_stable",
    "limit_on_segment",
    "touching_pr",
    "lead_lag",
    "first_order_lag",
);

pub const EXPECTATIONS: &str = include_str!("../../corpus/expectations.json");

/// System whose determinant curve, eigenvalue loci and merged curve are exported.
pub const CURVE_SYSTEM: &str = "open_loci_plant";

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SystemRef {
    Id(String),
    WithParameters { id: String, parameters: BTreeMap<String, f64> },
}

impl SystemRef {
    fn parts(&self) -> (&str, BTreeMap<String, f64>) {
        match self {
            SystemRef::Id(id) => (id, BTreeMap::new()),
            SystemRef::WithParameters { id, parameters } => (id, parameters.clone()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    Stability {
        system: SystemRef,
        #[serde(default)]
        block: Option<SystemRef>,
        status: Status,
        /// Checked only when present.
        #[serde(default)]
        witnesses: Option<Vec<[f64; 2]>>,
        #[serde(default = "default_witness_tol")]
        witness_tol: f64,
    },
    Theorem1 {
        system: SystemRef,
        status: Status,
        hidden_mode: bool,
        plant_unstable_poles: usize,
        det_unstable_poles: usize,
    },
    /// `det(I + P)` with a monic denominator.
    Determinant { system: SystemRef, num: Vec<f64>, den: Vec<f64>, tol: f64 },
    /// `(I + P)⁻¹` equals the `expected` system entrywise.
    Inverse { system: SystemRef, expected: SystemRef, tol: f64 },
    Nyquist { system: SystemRef, status: Status, winding: i64 },
    Gnc { system: SystemRef, status: Status, total_winding: i64, branches_closed: Vec<bool>, merged_curves: usize },
    Margins { system: SystemRef, k1: Value, k2: Value, theta1: Value, tol: f64 },
    Segment { system: SystemRef, crosses_segment: bool, limit_on_segment: bool, status: Status },
    Passivity { system: SystemRef, tier: PrTier },
    PassivityInterconnect {
        g1: SystemRef,
        g2: SystemRef,
        theorem_applies: bool,
        status: Status,
        /// Checked only when present.
        #[serde(default)]
        witnesses: Option<Vec<[f64; 2]>>,
        #[serde(default = "default_witness_tol")]
        witness_tol: f64,
    },
    SmallGain { g1: SystemRef, g2: SystemRef, applies: bool, status: Status },
    Mixed { g1: SystemRef, g2: SystemRef, common_c_found: bool, status: Status },
    Bounds { system: SystemRef, additive: f64, multiplicative: f64, rel_tol: f64 },
    Hinf { system: SystemRef, value: f64, rel_tol: f64 },
}

fn default_witness_tol() -> f64 {
    1e-8
}

#[derive(Clone, Debug, Deserialize)]
pub struct Case {
    pub id: String,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub id: String,
    pub pass: bool,
    pub actual: Value,
    pub note: String,
}

pub fn corpus_file(id: &str) -> Result<SystemFile> {
    let (_, text) = SYSTEMS
        .iter()
        .find(|(name, _)| *name == id)
        .ok_or_else(|| Error::Validation(format!("unknown corpus system `{id}`")))?;
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("corpus/{id}.json:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

/// Instantiates a corpus system with its stored parameters, overridden by `parameters`.
pub fn corpus_system(id: &str, parameters: &BTreeMap<String, f64>, opts: &RunOptions) -> Result<SystemDescription> {
    build_system(&corpus_file(id)?, parameters, &format!("corpus/{id}.json"), &opts.tol)
}

pub fn load_cases() -> Result<Vec<Case>> {
    parse_cases(EXPECTATIONS)
}

pub fn parse_cases(text: &str) -> Result<Vec<Case>> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("corpus/expectations.json:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn resolve(r: &SystemRef, opts: &RunOptions) -> Result<TransferMatrix> {
    let (id, params) = r.parts();
    Ok(corpus_system(id, &params, opts)?.matrix)
}

/// Every expected witness has a distinct actual witness within `tol`, and the counts agree.
fn witnesses_match(actual: &RootSet, expected: &Option<Vec<[f64; 2]>>, tol: f64) -> bool {
    let Some(expected) = expected else {
        return true;
    };
    let points = actual.expanded();
    if points.len() != expected.len() {
        return false;
    }
    let mut used = vec![false; points.len()];
    expected.iter().all(|[re, im]| {
        let hit = points
            .iter()
            .enumerate()
            .find(|(k, z)| !used[*k] && (z.re - re).abs() <= tol && (z.im - im).abs() <= tol);
        hit.map(|(k, _)| used[k] = true).is_some()
    })
}

fn close_value(actual: f64, expected: &Value, tol: f64) -> bool {
    match as_f64(expected) {
        Some(e) if e.is_infinite() => actual == e,
        Some(e) => (actual - e).abs() <= tol,
        None => false,
    }
}

fn close_rel(actual: f64, expected: f64, rel: f64) -> bool {
    (actual - expected).abs() <= rel * expected.abs().max(f64::MIN_POSITIVE)
}

fn coeffs_match(actual: &[f64], expected: &[f64], tol: f64) -> bool {
    actual.len() == expected.len() && actual.iter().zip(expected).all(|(a, e)| (a - e).abs() <= tol)
}

pub fn run_case(case: &Case, opts: &RunOptions) -> Result<CaseOutcome> {
    let tol = &opts.tol;
    let (pass, actual) = match &case.check {
        Check::Stability { system, block, status, witnesses, witness_tol } => {
            let p = resolve(system, opts)?;
            let v = match block {
                Some(b) => perturbed_verdict(&p, &resolve(b, opts)?, tol)?,
                None => direct_stability(&p, None, tol)?,
            };
            let ok = v.status == *status && witnesses_match(&v.witness_poles, witnesses, *witness_tol);
            (ok, report::verdict(&v))
        }
        Check::Theorem1 { system, status, hidden_mode, plant_unstable_poles, det_unstable_poles } => {
            let t = theorem1_check(&resolve(system, opts)?, tol)?;
            let ok = t.verdict.status == *status
                && t.hidden_mode == *hidden_mode
                && t.plant.unstable_pole_count == *plant_unstable_poles
                && t.det_unstable_poles == *det_unstable_poles;
            let actual = json!({
                "status": t.verdict.status.to_string(),
                "hidden_mode": t.hidden_mode,
                "plant_unstable_poles": t.plant.unstable_pole_count,
                "det_unstable_poles": t.det_unstable_poles,
            });
            (ok, actual)
        }
        Check::Determinant { system, num: n, den: d, tol: ctol } => {
            let det = resolve(system, opts)?.plus_identity(tol)?.det(tol)?;
            let ok = coeffs_match(det.num().coeffs(), n, *ctol) && coeffs_match(det.den().coeffs(), d, *ctol);
            (ok, json!({"num": det.num().coeffs(), "den": det.den().coeffs()}))
        }
        Check::Inverse { system, expected, tol: rel } => {
            let inv = resolve(system, opts)?.plus_identity(tol)?.inverse(tol)?;
            let want = resolve(expected, opts)?;
            let ok = inv.approx_eq(&want, *rel);
            let entries: Vec<Value> = inv
                .entries()
                .iter()
                .map(|f| json!({"num": f.num().coeffs(), "den": f.den().coeffs()}))
                .collect();
            (ok, json!({"entries": entries}))
        }
        Check::Nyquist { system, status, winding } => {
            let p = resolve(system, opts)?;
            let d = det_nyquist(&p, &build_grid_with(&p, &opts.grid, tol)?, tol)?;
            let ok = d.verdict.status == *status && d.winding == *winding;
            (ok, json!({"status": d.verdict.status.to_string(), "winding": d.winding}))
        }
        Check::Gnc { system, status, total_winding, branches_closed, merged_curves } => {
            let p = resolve(system, opts)?;
            let g = generalized_nyquist_on(&p, &build_grid_with(&p, &opts.grid, tol)?, tol)?;
            let closed: Vec<bool> = (0..g.loci.len()).map(|i| g.loci.is_closed(i, tol)).collect();
            let ok = g.verdict.status == *status
                && g.total_winding() == *total_winding
                && closed == *branches_closed
                && g.curves.len() == *merged_curves;
            let actual = json!({
                "status": g.verdict.status.to_string(),
                "total_winding": g.total_winding(),
                "branches_closed": closed,
                "merged_curves": g.curves.len(),
            });
            (ok, actual)
        }
        Check::Margins { system, k1, k2, theta1, tol: mtol } => {
            let p = resolve(system, opts)?;
            let m = uniform_margins_on(&p, &build_grid_with(&p, &opts.grid, tol)?, tol)?;
            let ok = close_value(m.k1, k1, *mtol) && close_value(m.k2, k2, *mtol) && close_value(m.theta1, theta1, *mtol);
            (ok, json!({"k1": num(m.k1), "k2": num(m.k2), "theta1": num(m.theta1)}))
        }
        Check::Segment { system, crosses_segment, limit_on_segment, status } => {
            let p = resolve(system, opts)?;
            let s = siso_segment_check(&p, tol)?;
            let v = direct_stability(&p, None, tol)?;
            let ok = s.crosses_segment == *crosses_segment && s.limit_on_segment == *limit_on_segment && v.status == *status;
            let mut actual = report::segment(&s);
            actual["status"] = Value::from(v.status.to_string());
            (ok, actual)
        }
        Check::Passivity { system, tier } => {
            let c = classify_pr(&resolve(system, opts)?, tol)?;
            (c.tier == *tier, report::passivity(&c))
        }
        Check::PassivityInterconnect { g1, g2, theorem_applies, status, witnesses, witness_tol } => {
            let (a, b) = (resolve(g1, opts)?, resolve(g2, opts)?);
            let p = passivity_interconnect(&a, &b, tol)?;
            let direct = direct_stability(&a, Some(&b), tol)?;
            let ok = p.theorem_applies == *theorem_applies
                && direct.status == *status
                && witnesses_match(&direct.witness_poles, witnesses, *witness_tol)
                && (!p.theorem_applies || p.verdict.status == direct.status);
            let actual = json!({
                "theorem_applies": p.theorem_applies,
                "passivity_verdict": p.verdict.status.to_string(),
                "direct": report::verdict(&direct),
            });
            (ok, actual)
        }
        Check::SmallGain { g1, g2, applies, status } => {
            let (a, b) = (resolve(g1, opts)?, resolve(g2, opts)?);
            let s = small_gain_check(&a, &b, tol)?;
            let direct = direct_stability(&a, Some(&b), tol)?;
            let ok = s.applies == *applies && direct.status == *status && (!s.applies || direct.is_stable());
            let actual = json!({
                "applies": s.applies,
                "product_norm": report::opt_num(s.product_norm),
                "direct": direct.status.to_string(),
            });
            (ok, actual)
        }
        Check::Mixed { g1, g2, common_c_found, status } => {
            let (a, b) = (resolve(g1, opts)?, resolve(g2, opts)?);
            let m = mixed_interconnect(&a, &b, tol)?;
            let direct = direct_stability(&a, Some(&b), tol)?;
            let ok = m.common_c.is_some() == *common_c_found
                && direct.status == *status
                && (m.common_c.is_none() || direct.is_stable());
            let actual = json!({
                "common_c": report::opt_num(m.common_c),
                "mixed_verdict": m.verdict.status.to_string(),
                "direct": direct.status.to_string(),
            });
            (ok, actual)
        }
        Check::Bounds { system, additive, multiplicative, rel_tol } => {
            let p = resolve(system, opts)?;
            let a = uncertainty_bound(&p, UncertaintyKind::Additive, tol)?.bound;
            let m = uncertainty_bound(&p, UncertaintyKind::Multiplicative, tol)?.bound;
            let ok = close_rel(a, *additive, *rel_tol) && close_rel(m, *multiplicative, *rel_tol);
            (ok, json!({"additive": num(a), "multiplicative": num(m)}))
        }
        Check::Hinf { system, value, rel_tol } => {
            let h = hinf_norm(&resolve(system, opts)?, DEFAULT_REL_TOL, tol)?;
            (close_rel(h.value, *value, *rel_tol), json!({"value": num(h.value), "peak_frequency": num(h.peak_frequency)}))
        }
    };
    Ok(CaseOutcome { id: case.id.clone(), pass, actual, note: String::new() })
}

/// Runs every case; analysis errors count as failures and are recorded in the note.
pub fn run_corpus(opts: &RunOptions) -> Result<Vec<CaseOutcome>> {
    Ok(run_cases(&load_cases()?, opts))
}

pub fn run_cases(cases: &[Case], opts: &RunOptions) -> Vec<CaseOutcome> {
    cases
        .iter()
        .map(|case| {
            run_case(case, opts).unwrap_or_else(|e| CaseOutcome {
                id: case.id.clone(),
                pass: false,
                actual: Value::Null,
                note: e.to_string(),
            })
        })
        .collect()
}

fn write_curves(r: &mut Report, dir: &Path, opts: &RunOptions) -> Result<()> {
    let p = corpus_system(CURVE_SYSTEM, &BTreeMap::new(), opts)?.matrix;
    let grid = build_grid_with(&p, &opts.grid, &opts.tol)?;
    let det = det_nyquist(&p, &grid, &opts.tol)?;
    let gnc = generalized_nyquist_on(&p, &grid, &opts.tol)?;
    emit_curve(r, dir, &format!("{CURVE_SYSTEM}_det.csv"), &curve_csv(&det.curve, -1))?;
    emit_curve(r, dir, &format!("{CURVE_SYSTEM}_loci.csv"), &loci_csv(&gnc.loci))?;
    emit_curve(r, dir, &format!("{CURVE_SYSTEM}_merged.csv"), &merged_csv(&gnc.curves))?;
    Ok(())
}

/// Runs the built-in corpus and reports every case; `Ok(report, all_passed)`.
pub fn paper_suite(opts: &RunOptions) -> Result<(Report, bool)> {
    paper_suite_with(EXPECTATIONS, opts)
}

/// Same as [`paper_suite`] with the expectations read from `text`.
pub fn paper_suite_with(text: &str, opts: &RunOptions) -> Result<(Report, bool)> {
    let cases = parse_cases(text)?;
    let outcomes = run_cases(&cases, opts);
    let mut r = Report::new("corpus", "paper-suite", &opts.tol);
    let raw: Vec<Value> = serde_json::from_str(text).unwrap_or_default();
    let mut list = Vec::new();
    for (o, c) in outcomes.iter().zip(&cases) {
        let expected = raw.iter().find(|x| x["id"] == c.id.as_str()).cloned().unwrap_or(Value::Null);
        r.line(format!("{} {}{}", if o.pass { "PASS" } else { "FAIL" }, o.id, if o.note.is_empty() { String::new() } else { format!(" ({})", o.note) }));
        let mut entry = json!({"id": o.id, "pass": o.pass, "expected": expected, "actual": o.actual});
        if !o.note.is_empty() {
            entry["error"] = Value::from(o.note.as_str());
        }
        list.push(entry);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    r.line(format!("{passed}/{} corpus cases pass", outcomes.len()));
    r.set("cases", Value::Array(list));
    r.set("summary", json!({"passed": passed, "failed": outcomes.len() - passed, "total": outcomes.len()}));
    if let Some(dir) = &opts.curves {
        write_curves(&mut r, dir, opts)?;
    }
    Ok((r, passed == outcomes.len()))
}
