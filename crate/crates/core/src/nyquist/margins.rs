//! Uniform gain and phase margins from merged eigenvalue curves, and the
//! scalar segment checks.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::{build_grid_with, ContourPoint, FrequencyGrid, GridOptions, Sampler};
use super::loci::{eigen_loci, merge_loci};
use super::{segments, ClosedCurve};
use crate::error::{Error, Result};
use crate::tfmatrix::{direct_stability, TransferMatrix};
use crate::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveMargins {
    /// Largest critical gain below 1; `0` when there is none.
    pub k1: f64,
    /// Smallest critical gain above 1; `+∞` when there is none.
    pub k2: f64,
    /// Smallest phase rotation that moves a unit-circle point onto `−1`; `π` when there is none.
    pub theta1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginReport {
    pub k1: f64,
    pub k2: f64,
    pub theta1: f64,
    pub per_curve: Vec<CurveMargins>,
}

impl MarginReport {
    /// No critical gain below 1, so the loop tolerates gains down to the zero limit.
    pub fn k1_is_zero_limit(&self) -> bool {
        self.k1 == 0.0
    }
}

pub fn uniform_margins(p: &TransferMatrix, tol: &Tolerances) -> Result<MarginReport> {
    let grid = build_grid_with(p, &GridOptions::default(), tol)?;
    uniform_margins_on(p, &grid, tol)
}

/// Margins for the uniform perturbations `U = kI` and `U = e^{jθ}I`.
pub fn uniform_margins_on(p: &TransferMatrix, grid: &FrequencyGrid, tol: &Tolerances) -> Result<MarginReport> {
    if !direct_stability(p, None, tol)?.is_stable() {
        return Err(Error::NominalUnstable);
    }
    let loci = eigen_loci(p, grid, tol)?;
    let curves = merge_loci(&loci, tol)?;
    let per_curve: Vec<CurveMargins> = curves.iter().map(|c| curve_margins(c, tol)).collect();
    Ok(MarginReport {
        k1: per_curve.iter().map(|m| m.k1).fold(0.0, f64::max),
        k2: per_curve.iter().map(|m| m.k2).fold(f64::INFINITY, f64::min),
        theta1: per_curve.iter().map(|m| m.theta1).fold(PI, f64::min),
        per_curve,
    })
}

fn curve_margins(curve: &ClosedCurve, tol: &Tolerances) -> CurveMargins {
    let mut m = CurveMargins { k1: 0.0, k2: f64::INFINITY, theta1: PI };
    for x in real_axis_crossings(segments(&curve.points)) {
        if x >= -tol.exclusion {
            continue;
        }
        let k = -1.0 / x;
        if k < 1.0 {
            m.k1 = m.k1.max(k);
        } else if k > 1.0 {
            m.k2 = m.k2.min(k);
        }
    }
    for z in unit_circle_crossings(segments(&curve.points)) {
        m.theta1 = m.theta1.min(PI - z.arg().abs());
    }
    m
}

/// Real parts where segments meet the real axis.
fn real_axis_crossings(segs: impl Iterator<Item = (Complex64, Complex64)>) -> Vec<f64> {
    segs.filter(|(a, b)| a.im * b.im <= 0.0)
        .map(|(a, b)| {
            if a.im == b.im {
                a.re.max(b.re)
            } else {
                let t = a.im / (a.im - b.im);
                a.re + t * (b.re - a.re)
            }
        })
        .collect()
}

/// Points where segments meet the unit circle, projected onto it.
fn unit_circle_crossings(segs: impl Iterator<Item = (Complex64, Complex64)>) -> Vec<Complex64> {
    segs.filter(|(a, b)| (a.norm() - 1.0) * (b.norm() - 1.0) <= 0.0)
        .map(|(a, b)| {
            let (ra, rb) = (a.norm(), b.norm());
            let t = if ra == rb { 0.0 } else { (1.0 - ra) / (rb - ra) };
            let z = a + (b - a) * t;
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                z
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentCheck {
    /// The curve meets `(−∞, −1)` at some finite frequency.
    pub crosses_segment: bool,
    /// `lim_{ω→±∞} P(jω)` lies on `(−∞, −1)`.
    pub limit_on_segment: bool,
    /// Real parts of the finite-frequency crossings left of `−1`.
    pub crossings: Vec<f64>,
}

pub fn siso_segment_check(p: &TransferMatrix, tol: &Tolerances) -> Result<SegmentCheck> {
    if p.rows() != 1 || p.cols() != 1 {
        return Err(Error::DimensionMismatch(format!("expected a 1x1 plant, got {}x{}", p.rows(), p.cols())));
    }
    let grid = build_grid_with(p, &GridOptions::default(), tol)?;
    let sampler = Sampler::new(p, tol)?;
    let finite: Vec<ContourPoint> =
        grid.points().iter().copied().filter(|q| !matches!(q, ContourPoint::Infinity { .. })).collect();
    let values = finite.iter().map(|q| sampler.eigenvalues(*q).map(|e| e[0])).collect::<Result<Vec<_>>>()?;
    let crossings: Vec<f64> = real_axis_crossings(values.windows(2).map(|w| (w[0], w[1])))
        .into_iter()
        .filter(|x| *x < -1.0)
        .collect();
    let limit = p.limit_at_infinity()?[(0, 0)];
    Ok(SegmentCheck { crosses_segment: !crossings.is_empty(), limit_on_segment: limit < -1.0, crossings })
}
