use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::report::{self, num, opt_num, Report};
use super::system::SystemDescription;
use crate::error::Result;
use crate::nyquist::{
    build_grid_with, curve_csv, det_nyquist, generalized_nyquist_on, loci_csv, siso_segment_check, uniform_margins_on,
    ClosedCurve, GridOptions,
};
use crate::passivity::{classify_pr, mixed_check, mixed_interconnect, passivity_interconnect};
use crate::robustness::{perturbed_verdict, small_gain_check, uncertainty_bound, UncertaintyKind};
use crate::smith_mcmillan::theorem1_check;
use crate::error::Error;
use crate::tfmatrix::{direct_stability, loop_gain};
use crate::Tolerances;

/// Settings shared by every command.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub tol: Tolerances,
    pub grid: GridOptions,
    /// Directory for curve CSVs; curves are not written when `None`.
    pub curves: Option<PathBuf>,
}

impl RunOptions {
    pub fn new(tol: Tolerances) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// Writes `content` as `dir/name` and lists the file name under `curves`.
pub(crate) fn emit_curve(report: &mut Report, dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    report.line(format!("curve written: {}", path.display()));
    let list = report.fields.entry("curves").or_insert_with(|| Value::Array(Vec::new()));
    if let Value::Array(a) = list {
        a.push(Value::from(name));
    }
    Ok(())
}

pub(crate) fn merged_csv(curves: &[ClosedCurve]) -> String {
    let mut out = String::new();
    for (k, c) in curves.iter().enumerate() {
        let csv = curve_csv(c, k as i64);
        out.push_str(if k == 0 { &csv } else { csv.split_once('\n').map_or("", |(_, rows)| rows) });
    }
    out
}

fn label(a: &SystemDescription, b: Option<&SystemDescription>) -> String {
    match b {
        Some(b) => format!("{} | {}", a.name, b.name),
        None => a.name.clone(),
    }
}

/// Direct verdict, cross-checked against the determinant test and both Nyquist tests.
pub fn stability(sys: &SystemDescription, block: Option<&SystemDescription>, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let u = block.map(|b| &b.matrix);
    let mut r = Report::new(&label(sys, block), "stability", tol);
    let direct = match u {
        Some(u) => perturbed_verdict(&sys.matrix, u, tol)?,
        None => direct_stability(&sys.matrix, None, tol)?,
    };
    r.set_verdict(&direct);
    let l = loop_gain(&sys.matrix, u, tol)?;
    match theorem1_check(&l, tol) {
        Ok(t) => {
            r.set(
                "determinant",
                json!({
                    "det_num": t.det.num().coeffs().iter().map(|c| num(*c)).collect::<Vec<_>>(),
                    "det_den": t.det.den().coeffs().iter().map(|c| num(*c)).collect::<Vec<_>>(),
                    "det_unstable_poles": t.det_unstable_poles,
                    "plant_unstable_poles": t.plant.unstable_pole_count,
                    "hidden_mode": t.hidden_mode,
                }),
            );
            r.line(format!(
                "plant unstable poles: {}, det(I+L) unstable poles: {}, hidden mode: {}",
                t.plant.unstable_pole_count, t.det_unstable_poles, t.hidden_mode
            ));
            r.cross_check(&direct, "theorem1", Ok(t.verdict));
        }
        Err(e) => r.cross_check(&direct, "theorem1", Err(e)),
    }
    let grid = build_grid_with(&l, &opts.grid, tol);
    let det = grid.clone().and_then(|g| det_nyquist(&l, &g, tol).map(|d| d.verdict));
    r.cross_check(&direct, "det_nyquist", det);
    let gnc = grid.and_then(|g| generalized_nyquist_on(&l, &g, tol).map(|n| n.verdict));
    r.cross_check(&direct, "generalized_nyquist", gnc);
    Ok(r)
}

pub fn nyquist(sys: &SystemDescription, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let p = &sys.matrix;
    let mut r = Report::new(&sys.name, "nyquist", tol);
    let grid = build_grid_with(p, &opts.grid, tol)?;
    let d = det_nyquist(p, &grid, tol)?;
    r.set_verdict(&d.verdict);
    r.line(format!("winding about 0: {}, unstable open-loop poles: {}", d.winding, d.unstable_pole_count));
    r.set(
        "nyquist",
        json!({"winding": d.winding, "unstable_pole_count": d.unstable_pole_count, "grid_points": grid.len()}),
    );
    r.cross_check(&d.verdict, "direct", direct_stability(p, None, tol));
    if let Some(dir) = &opts.curves {
        emit_curve(&mut r, dir, &format!("{}_det.csv", sys.name), &curve_csv(&d.curve, -1))?;
    }
    Ok(r)
}

pub fn gnc(sys: &SystemDescription, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let p = &sys.matrix;
    let mut r = Report::new(&sys.name, "gnc", tol);
    let grid = build_grid_with(p, &opts.grid, tol)?;
    let g = generalized_nyquist_on(p, &grid, tol)?;
    r.set_verdict(&g.verdict);
    let gaps: Vec<f64> = (0..g.loci.len()).map(|i| g.loci.closure_gap(i)).collect();
    r.line(format!(
        "windings about -1: {:?} (total {}), unstable open-loop poles: {}",
        g.windings,
        g.total_winding(),
        g.unstable_pole_count
    ));
    r.line(format!("branch closure gaps: {gaps:?}"));
    r.set(
        "gnc",
        json!({
            "windings": g.windings,
            "total_winding": g.total_winding(),
            "unstable_pole_count": g.unstable_pole_count,
            "branch_closure_gaps": gaps.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "branches_closed": (0..g.loci.len()).map(|i| g.loci.is_closed(i, tol)).collect::<Vec<_>>(),
            "permutation_at_infinity": g.loci.permutation_at_infinity,
            "merged_curves": g.curves.iter().map(|c| c.member_branches.clone()).collect::<Vec<_>>(),
            "grid_points": grid.len(),
        }),
    );
    r.cross_check(&g.verdict, "direct", direct_stability(p, None, tol));
    if let Some(dir) = &opts.curves {
        emit_curve(&mut r, dir, &format!("{}_loci.csv", sys.name), &loci_csv(&g.loci))?;
        emit_curve(&mut r, dir, &format!("{}_merged.csv", sys.name), &merged_csv(&g.curves))?;
    }
    Ok(r)
}

pub fn margins(sys: &SystemDescription, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let p = &sys.matrix;
    let mut r = Report::new(&sys.name, "margins", tol);
    r.set_verdict(&direct_stability(p, None, tol)?);
    let grid = build_grid_with(p, &opts.grid, tol)?;
    let mut section = match uniform_margins_on(p, &grid, tol) {
        Ok(m) => {
            r.line(format!("k1 = {}, k2 = {}, theta1 = {}", m.k1, m.k2, m.theta1));
            report::margins(&m)
        }
        Err(Error::NominalUnstable) => {
            r.line("margins undefined: nominal loop is not stable");
            json!({"nominal_unstable": true})
        }
        Err(e) => return Err(e),
    };
    if p.rows() == 1 && p.cols() == 1 {
        let s = siso_segment_check(p, tol)?;
        r.line(format!("segment [-inf, -1]: crossed {}, limit on it {}", s.crosses_segment, s.limit_on_segment));
        section["segment"] = report::segment(&s);
    }
    r.set("margins", section);
    Ok(r)
}

pub fn smallgain(g1: &SystemDescription, g2: &SystemDescription, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let mut r = Report::new(&label(g1, Some(g2)), "smallgain", tol);
    let s = small_gain_check(&g1.matrix, &g2.matrix, tol)?;
    r.set_verdict(&s.verdict);
    let norm = s.product_norm.map_or("undefined".to_string(), |n| n.to_string());
    r.line(format!("small gain applies: {}, ||G1 G2|| = {norm}", s.applies));
    r.set("smallgain", json!({"applies": s.applies, "product_norm": opt_num(s.product_norm)}));
    r.cross_check(&s.verdict, "direct", direct_stability(&g1.matrix, Some(&g2.matrix), tol));
    Ok(r)
}

pub fn bounds(sys: &SystemDescription, block: Option<&SystemDescription>, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let p = &sys.matrix;
    let mut r = Report::new(&sys.name, "bounds", tol);
    r.set_verdict(&direct_stability(p, None, tol)?);
    let add = uncertainty_bound(p, UncertaintyKind::Additive, tol)?;
    let mul = uncertainty_bound(p, UncertaintyKind::Multiplicative, tol)?;
    r.line(format!("additive bound: {}, multiplicative bound: {}", add.bound, mul.bound));
    let mut section = json!({"additive": num(add.bound), "multiplicative": num(mul.bound)});
    if let Some(b) = block {
        let v = perturbed_verdict(p, &b.matrix, tol)?;
        r.line(format!("with block {}: {}", b.name, v.status));
        section["perturbed"] = json!({"block": b.name, "verdict": report::verdict(&v)});
    }
    r.set("bounds", section);
    Ok(r)
}

pub fn passivity(g1: &SystemDescription, g2: Option<&SystemDescription>, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let mut r = Report::new(&label(g1, g2), "passivity", tol);
    let Some(g2) = g2 else {
        let c = classify_pr(&g1.matrix, tol)?;
        r.line(format!("tier: {:?}", c.tier));
        r.set("passivity", report::passivity(&c));
        return Ok(r);
    };
    let p = passivity_interconnect(&g1.matrix, &g2.matrix, tol)?;
    r.set_verdict(&p.verdict);
    r.line(format!("tiers: {:?}, {:?}; theorem applies: {}", p.class1.tier, p.class2.tier, p.theorem_applies));
    r.set(
        "passivity",
        json!({
            "g1": report::passivity(&p.class1),
            "g2": report::passivity(&p.class2),
            "theorem_applies": p.theorem_applies,
        }),
    );
    r.cross_check(&p.verdict, "direct", direct_stability(&g1.matrix, Some(&g2.matrix), tol));
    Ok(r)
}

pub fn mixed(g1: &SystemDescription, g2: &SystemDescription, opts: &RunOptions) -> Result<Report> {
    let tol = &opts.tol;
    let mut r = Report::new(&label(g1, Some(g2)), "mixed", tol);
    let m = mixed_interconnect(&g1.matrix, &g2.matrix, tol)?;
    r.set_verdict(&m.verdict);
    let mut section = json!({"common_c": opt_num(m.common_c)});
    if let Some(c) = m.common_c {
        r.line(format!("common crossover c = {c}"));
        for (key, g) in [("g1", g1), ("g2", g2)] {
            let rep = mixed_check(&g.matrix, c, tol)?;
            section[key] = json!({"min_hermitian_eig": num(rep.min_hermitian_eig), "max_gain": num(rep.max_gain)});
        }
    } else {
        r.line("no common crossover frequency found");
    }
    r.set("mixed", section);
    r.cross_check(&m.verdict, "direct", direct_stability(&g1.matrix, Some(&g2.matrix), tol));
    Ok(r)
}
