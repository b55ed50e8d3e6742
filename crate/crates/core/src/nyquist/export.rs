use std::fmt::Write;

use super::{ClosedCurve, LocusSet};

const HEADER: &str = "omega,re,im,branch\n";

fn fmt_omega(w: f64) -> String {
    if w.is_infinite() {
        if w > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        w.to_string()
    }
}

/// One row per grid point and branch.
pub fn loci_csv(loci: &LocusSet) -> String {
    let mut out = String::from(HEADER);
    for (i, branch) in loci.branches.iter().enumerate() {
        for (w, z) in loci.omegas.iter().zip(branch) {
            let _ = writeln!(out, "{},{},{},{}", fmt_omega(*w), z.re, z.im, i);
        }
    }
    out
}

/// Rows of a single curve tagged with `branch` (`-1` for determinant curves).
pub fn curve_csv(curve: &ClosedCurve, branch: i64) -> String {
    let mut out = String::from(HEADER);
    for (w, z) in curve.omegas.iter().zip(&curve.points) {
        let _ = writeln!(out, "{},{},{},{}", fmt_omega(*w), z.re, z.im, branch);
    }
    out
}
