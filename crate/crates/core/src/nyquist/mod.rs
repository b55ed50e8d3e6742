//! Nyquist tests on the indented imaginary axis.
//!
//! Winding numbers are counterclockwise-positive with the contour traversed
//! from `ω = −∞` to `ω = +∞`. For that traversal the counterclockwise
//! encirclements of `0` by `det(I + P)` equal the number of right-half-plane
//! poles minus zeros of `det(I + P)`, so the loop is stable when they match
//! the unstable pole count of `P`.

mod export;
mod grid;
mod loci;
mod margins;

pub use export::{curve_csv, loci_csv};
pub use grid::{build_grid, build_grid_with, default_omega_max, ContourPoint, FrequencyGrid, GridOptions};
pub use loci::{eigen_loci, merge_loci, LocusSet};
pub use margins::{siso_segment_check, uniform_margins, uniform_margins_on, CurveMargins, MarginReport, SegmentCheck};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::smith_mcmillan::{loop_analysis, LoopAnalysis};
use crate::tfmatrix::{direct_stability, Status, TransferMatrix, Verdict};
use crate::Tolerances;
use grid::Sampler;

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    pub points: Vec<Complex64>,
    /// Contour frequency of each point.
    pub omegas: Vec<f64>,
    /// Eigenvalue branches concatenated into this curve; empty for a determinant curve.
    pub member_branches: Vec<usize>,
}

impl ClosedCurve {
    /// Smallest distance from `point` to the closed polygon.
    pub fn distance_to(&self, point: Complex64) -> f64 {
        segments(&self.points).map(|(a, b)| segment_distance(a, b, point)).fold(f64::INFINITY, f64::min)
    }
}

fn segments(points: &[Complex64]) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
    let n = points.len();
    (0..n).map(move |i| (points[i], points[(i + 1) % n]))
}

fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// Counterclockwise encirclements of `point`.
pub fn winding_number(curve: &ClosedCurve, point: Complex64, exclusion: f64) -> Result<i64> {
    let distance = curve.distance_to(point);
    if distance <= exclusion {
        return Err(Error::PointOnCurve { point, distance });
    }
    let total: f64 = segments(&curve.points).map(|(a, b)| ((b - point) / (a - point)).arg()).sum();
    Ok((total / std::f64::consts::TAU).round() as i64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetNyquist {
    pub curve: ClosedCurve,
    pub winding: i64,
    pub unstable_pole_count: usize,
    pub verdict: Verdict,
}

/// Encirclements of `0` by `det(I + P(s))` along the grid.
pub fn det_nyquist(p: &TransferMatrix, grid: &FrequencyGrid, tol: &Tolerances) -> Result<DetNyquist> {
    let sampler = Sampler::new(p, tol)?;
    let points = grid.points().iter().map(|q| sampler.det(*q)).collect::<Result<Vec<_>>>()?;
    let curve = ClosedCurve { points, omegas: grid.omegas(), member_branches: Vec::new() };
    let distance = curve.distance_to(Complex64::new(0.0, 0.0));
    if distance <= tol.exclusion {
        return Err(Error::CurvePassesThroughOrigin { distance });
    }
    let winding = winding_number(&curve, Complex64::new(0.0, 0.0), tol.exclusion)?;
    let analysis = loop_analysis(p, tol)?;
    let count = analysis.plant.unstable_pole_count;
    let verdict = encirclement_verdict(winding == count as i64, &analysis, p, tol, "det_nyquist")?;
    Ok(DetNyquist { curve, winding, unstable_pole_count: count, verdict })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedNyquist {
    pub verdict: Verdict,
    pub loci: LocusSet,
    pub curves: Vec<ClosedCurve>,
    /// Encirclements of `−1` per merged curve; empty when a curve passes through `−1`.
    pub windings: Vec<i64>,
    pub unstable_pole_count: usize,
}

impl GeneralizedNyquist {
    pub fn total_winding(&self) -> i64 {
        self.windings.iter().sum()
    }
}

/// Generalized Nyquist test on a default grid.
pub fn generalized_nyquist(p: &TransferMatrix, tol: &Tolerances) -> Result<GeneralizedNyquist> {
    let grid = build_grid_with(p, &GridOptions::default(), tol)?;
    generalized_nyquist_on(p, &grid, tol)
}

pub fn generalized_nyquist_on(p: &TransferMatrix, grid: &FrequencyGrid, tol: &Tolerances) -> Result<GeneralizedNyquist> {
    let loci = eigen_loci(p, grid, tol)?;
    let curves = merge_loci(&loci, tol)?;
    let analysis = loop_analysis(p, tol)?;
    let count = analysis.plant.unstable_pole_count;
    let minus_one = Complex64::new(-1.0, 0.0);
    let windings: Result<Vec<i64>> = curves.iter().map(|c| winding_number(c, minus_one, tol.exclusion)).collect();
    let (verdict, windings) = match windings {
        Ok(w) => {
            let total: i64 = w.iter().sum();
            (encirclement_verdict(total == count as i64, &analysis, p, tol, "generalized_nyquist")?, w)
        }
        Err(Error::PointOnCurve { .. }) => {
            let witness_poles = analysis.witnesses.filter(|r| r.z.re.abs() <= tol.marginal);
            let verdict = Verdict { status: Status::Marginal, witness_poles, method: "generalized_nyquist".into() };
            (verdict, Vec::new())
        }
        Err(e) => return Err(e),
    };
    Ok(GeneralizedNyquist { verdict, loci, curves, windings, unstable_pole_count: count })
}

/// Verdict of an encirclement test, with witnesses from the closed-loop pole analysis.
fn encirclement_verdict(
    stable: bool,
    analysis: &LoopAnalysis,
    p: &TransferMatrix,
    tol: &Tolerances,
    method: &str,
) -> Result<Verdict> {
    if stable {
        return Ok(Verdict::stable(method));
    }
    let mut verdict = Verdict::from_poles(&analysis.witnesses, tol, method);
    if verdict.is_stable() {
        verdict = direct_stability(p, None, tol)?;
        verdict.method = method.into();
    }
    verdict.status = Status::Unstable;
    Ok(verdict)
}
