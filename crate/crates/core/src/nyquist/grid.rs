//! Frequency grids along the indented imaginary axis.
//!
//! The grid is built on `ω ≥ 0` and mirrored, so it is symmetric by
//! construction. Imaginary-axis poles of the plant are bypassed on a
//! half-circle of radius `indent_radius` into the right half plane.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::complex_det;
use crate::sweep::{frequency_scale, sweep_grid};
use crate::tfmatrix::{CharPoly, TransferMatrix};
use crate::Tolerances;

/// Points per indentation half-circle before refinement.
const ARC_POINTS: usize = 17;
/// Largest finite frequency the sweep extends to while chasing the limit at infinity.
const OMEGA_CEIL: f64 = 1e12;
/// Magnitude floors for the refinement scale of determinant and eigenvalue steps.
const DET_FLOOR: f64 = 1e-6;
const EIG_FLOOR: f64 = 1e-3;

/// A point on the Nyquist contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContourPoint {
    Axis(f64),
    /// `s = j·center + radius·e^{jφ}`, `φ ∈ [−π/2, π/2]`.
    Arc { center: f64, phi: f64, radius: f64 },
    /// `|s| → ∞` along `±j∞`.
    Infinity { positive: bool },
}

impl ContourPoint {
    /// Position along the frequency axis; arcs map to `center + radius·sin φ`.
    pub fn omega(&self) -> f64 {
        match *self {
            ContourPoint::Axis(w) => w,
            ContourPoint::Arc { center, phi, radius } => center + radius * phi.sin(),
            ContourPoint::Infinity { positive: true } => f64::INFINITY,
            ContourPoint::Infinity { positive: false } => f64::NEG_INFINITY,
        }
    }

    /// The Laplace variable, or `None` at infinity.
    pub fn s(&self) -> Option<Complex64> {
        match *self {
            ContourPoint::Axis(w) => Some(Complex64::new(0.0, w)),
            ContourPoint::Arc { center, phi, radius } => {
                Some(Complex64::new(0.0, center) + Complex64::from_polar(radius, phi))
            }
            ContourPoint::Infinity { .. } => None,
        }
    }

    fn mirror(&self) -> Self {
        match *self {
            ContourPoint::Axis(w) => ContourPoint::Axis(-w),
            ContourPoint::Arc { center, phi, radius } => ContourPoint::Arc { center: -center, phi: -phi, radius },
            ContourPoint::Infinity { positive } => ContourPoint::Infinity { positive: !positive },
        }
    }

    fn is_origin(&self) -> bool {
        match *self {
            ContourPoint::Axis(w) => w == 0.0,
            ContourPoint::Arc { center, phi, .. } => center == 0.0 && phi == 0.0,
            ContourPoint::Infinity { .. } => false,
        }
    }
}

/// Contour samples ordered from `ω = −∞` to `ω = +∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    points: Vec<ContourPoint>,
    indent_radius: f64,
}

impl FrequencyGrid {
    pub fn points(&self) -> &[ContourPoint] {
        &self.points
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(ContourPoint::omega).collect()
    }

    pub fn indent_radius(&self) -> f64 {
        self.indent_radius
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    /// Upper end of the log-spaced base grid; `None` picks it from the plant's corner frequencies.
    pub omega_max: Option<f64>,
    pub base_points: usize,
    /// Largest accepted step between neighbors, as a fraction of the local magnitude scale.
    pub step_fraction: f64,
    pub max_points: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { omega_max: None, base_points: 200, step_fraction: 0.1, max_points: 40_000 }
    }
}

pub fn build_grid(p: &TransferMatrix, omega_max: f64, base_points: usize, tol: &Tolerances) -> Result<FrequencyGrid> {
    let opts = GridOptions { omega_max: Some(omega_max), base_points, ..GridOptions::default() };
    build_grid_with(p, &opts, tol)
}

/// `10³` times the largest pole or zero magnitude of any entry (at least `10³`).
pub fn default_omega_max(p: &TransferMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(1e3 * frequency_scale(p, tol)?)
}

pub fn build_grid_with(p: &TransferMatrix, opts: &GridOptions, tol: &Tolerances) -> Result<FrequencyGrid> {
    let omega_max = match opts.omega_max {
        Some(w) => w,
        None => default_omega_max(p, tol)?,
    };
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidArgument(format!("omega_max must be positive, got {omega_max}")));
    }
    if opts.base_points < 16 {
        return Err(Error::InvalidArgument(format!("base_points must be at least 16, got {}", opts.base_points)));
    }
    let sampler = Sampler::new(p, tol)?;
    let centers = axis_pole_frequencies(p, tol)?;
    let radius = indent_radius(&centers, tol.indent_radius);

    let mut half = base_half(p, omega_max, opts.base_points, &centers, radius, tol)?;
    refine(&sampler, &mut half, opts)?;

    let mut points: Vec<ContourPoint> = half.iter().rev().filter(|q| !q.is_origin()).map(ContourPoint::mirror).collect();
    points.extend(half);
    Ok(FrequencyGrid { points, indent_radius: radius })
}

/// Nonnegative frequencies of imaginary-axis poles.
fn axis_pole_frequencies(p: &TransferMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut c: Vec<f64> = p
        .poles(tol)?
        .iter()
        .filter(|r| r.z.re.abs() <= tol.marginal)
        .map(|r| r.z.im.abs())
        .collect();
    c.sort_by(f64::total_cmp);
    c.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    if let Some(first) = c.first_mut() {
        if *first <= tol.marginal {
            *first = 0.0;
        }
    }
    Ok(c)
}

/// Shrinks the radius so neighboring indentations stay disjoint.
fn indent_radius(centers: &[f64], radius: f64) -> f64 {
    centers.windows(2).map(|w| 0.25 * (w[1] - w[0])).fold(radius, f64::min)
}

fn base_half(
    p: &TransferMatrix,
    omega_max: f64,
    base_points: usize,
    centers: &[f64],
    radius: f64,
    tol: &Tolerances,
) -> Result<Vec<ContourPoint>> {
    let omegas = sweep_grid(p, omega_max * 1e-8, omega_max, base_points, tol)?;
    let mut points: Vec<ContourPoint> = omegas
        .into_iter()
        .filter(|w| *w > 0.0)
        .filter(|w| centers.iter().all(|c| (w - c).abs() > radius))
        .map(ContourPoint::Axis)
        .collect();

    for &center in centers {
        let (start, count) = if center == 0.0 { (0.0, ARC_POINTS / 2 + 1) } else { (-FRAC_PI_2, ARC_POINTS) };
        let span = FRAC_PI_2 - start;
        points.extend((0..count).map(|k| ContourPoint::Arc {
            center,
            phi: start + span * k as f64 / (count - 1) as f64,
            radius,
        }));
    }
    if centers.first() != Some(&0.0) {
        points.push(ContourPoint::Axis(0.0));
    }
    points.sort_by(|a, b| a.omega().total_cmp(&b.omega()));
    points.dedup_by(|a, b| a.omega() == b.omega());
    points.push(ContourPoint::Infinity { positive: true });
    Ok(points)
}

/// Bisects neighbor intervals until every step is below the threshold.
fn refine(sampler: &Sampler, half: &mut Vec<ContourPoint>, opts: &GridOptions) -> Result<()> {
    let mut samples: Vec<Sample> = half.iter().map(|q| sampler.sample(*q)).collect::<Result<_>>()?;
    let budget = opts.max_points / 2;
    loop {
        let mut next = Vec::with_capacity(samples.len() * 2);
        let mut added = 0;
        for i in 0..samples.len() {
            next.push(samples[i].clone());
            let Some(b) = samples.get(i + 1) else { break };
            let a = &samples[i];
            if samples.len() + added >= budget || !needs_split(a, b, opts.step_fraction) {
                continue;
            }
            if let Some(mid) = midpoint(&a.point, &b.point) {
                next.push(sampler.sample(mid)?);
                added += 1;
            }
        }
        samples = next;
        if added == 0 {
            break;
        }
    }
    *half = samples.into_iter().map(|s| s.point).collect();
    Ok(())
}

fn midpoint(a: &ContourPoint, b: &ContourPoint) -> Option<ContourPoint> {
    match (*a, *b) {
        (
            ContourPoint::Arc { center: ca, phi: pa, radius },
            ContourPoint::Arc { center: cb, phi: pb, .. },
        ) if ca == cb => ((pb - pa).abs() > 1e-9).then_some(ContourPoint::Arc { center: ca, phi: 0.5 * (pa + pb), radius }),
        (_, ContourPoint::Infinity { .. }) => {
            let w = a.omega();
            if w >= OMEGA_CEIL {
                None
            } else if w > 0.0 {
                Some(ContourPoint::Axis(10.0 * w))
            } else {
                Some(ContourPoint::Axis(1.0))
            }
        }
        _ => {
            let (wa, wb) = (a.omega(), b.omega());
            if wb - wa <= 1e-12 * wb.abs().max(1.0) {
                return None;
            }
            let mid = if wa > 0.0 && wb > 4.0 * wa { (wa * wb).sqrt() } else { 0.5 * (wa + wb) };
            Some(ContourPoint::Axis(mid))
        }
    }
}

fn needs_split(a: &Sample, b: &Sample, fraction: f64) -> bool {
    let det_scale = a.det.norm().min(b.det.norm()).max(DET_FLOOR);
    if (b.det - a.det).norm() > fraction * det_scale {
        return true;
    }
    let perm = super::loci::match_eigenvalues(&a.eig, &b.eig);
    a.eig.iter().zip(&perm).any(|(x, &j)| {
        let y = b.eig[j];
        (y - x).norm() > fraction * eig_scale(*x).min(eig_scale(y))
    })
}

/// Distance scale of an eigenvalue relative to both `0` and `−1`.
fn eig_scale(l: Complex64) -> f64 {
    (l + 1.0).norm().max(DET_FLOOR).min(l.norm().max(EIG_FLOOR))
}

#[derive(Clone, Debug)]
pub(crate) struct Sample {
    pub point: ContourPoint,
    pub eig: Vec<Complex64>,
    /// `det(I + P(s))`.
    pub det: Complex64,
}

/// Evaluates loop quantities of a square proper plant on the contour.
pub(crate) struct Sampler<'a> {
    p: &'a TransferMatrix,
    tol: &'a Tolerances,
    char_poly: CharPoly,
    eig_inf: Vec<Complex64>,
    det_inf: Complex64,
}

impl<'a> Sampler<'a> {
    pub fn new(p: &'a TransferMatrix, tol: &'a Tolerances) -> Result<Self> {
        let n = p.require_square()?;
        let limit = p.limit_at_infinity()? + DMatrix::<f64>::identity(n, n);
        let char_poly = p.char_poly(tol)?;
        let eig_inf = char_poly.eigenvalues_at_infinity()?;
        Ok(Self { p, tol, char_poly, eig_inf, det_inf: Complex64::new(limit.determinant(), 0.0) })
    }

    pub fn eigenvalues(&self, point: ContourPoint) -> Result<Vec<Complex64>> {
        match point.s() {
            None => Ok(self.eig_inf.clone()),
            Some(s) => self.char_poly.eigenvalues_at(s, self.tol).map_err(|e| match e {
                Error::EigenSolveFailure { .. } => Error::EigenSolveFailure { omega: point.omega() },
                other => other,
            }),
        }
    }

    pub fn det(&self, point: ContourPoint) -> Result<Complex64> {
        match point.s() {
            None => Ok(self.det_inf),
            Some(s) => {
                let mut m = self.p.eval(s, self.tol)?;
                for i in 0..m.nrows() {
                    m[(i, i)] += 1.0;
                }
                Ok(complex_det(&m))
            }
        }
    }

    pub fn sample(&self, point: ContourPoint) -> Result<Sample> {
        Ok(Sample { point, eig: self.eigenvalues(point)?, det: self.det(point)? })
    }
}
