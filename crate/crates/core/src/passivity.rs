//! Positive-real classification and passivity-based interconnection tests.
//!
//! Frequency conditions are checked on a log sweep refined around every local
//! minimum of the Hermitian part's smallest eigenvalue. Signs are judged on
//! that eigenvalue relative to `max(‖G + G*‖, 10⁻⁴‖G‖)`, so decaying
//! high-frequency behavior keeps its sign while rounding noise on a
//! lossless response reads as zero. Minimality of the realization is taken
//! to mean coprime entries; it is not verified structurally.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_part_min_eig, real_to_complex, sigma_max};
use crate::polyrat::{close, poly_roots, Polynomial, RationalFunction};
use crate::robustness::is_stable_operand;
use crate::sweep::{frequency_scale, log_grid, maximize, minimize, sweep_grid};
use crate::tfmatrix::{TransferMatrix, Verdict};
use crate::Tolerances;

const SWEEP_POINTS: usize = 400;
const REFINE_TOL: f64 = 1e-10;
/// Noise floor of the Hermitian part, relative to `‖G‖`.
const NOISE_FLOOR: f64 = 1e-4;
/// Smallest certificate the ε-search tries, relative to its upper bound.
const EPS_FLOOR: f64 = 1e-6;
const EPS_BISECTIONS: usize = 30;
/// Relative offset of the gain band's lower end above the crossover.
const GAIN_BAND_OFFSET: f64 = 1e-3;
const CROSSOVER_CANDIDATES: usize = 61;

/// Ordered from weakest to strongest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrTier {
    NotPR,
    PR,
    /// Hermitian part positive definite at every finite frequency, no closed right-half-plane poles.
    StrongQuotedPR,
    StrictlyPR,
    StronglyPR,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrWitnesses {
    /// Pole that rules out the next tier.
    pub failing_pole: Option<Complex64>,
    /// Frequency of the smallest relative Hermitian eigenvalue.
    pub failing_frequency: Option<f64>,
    /// Smallest eigenvalue of `G(jω) + G*(jω)` over the finite sweep.
    pub min_hermitian_eig: f64,
    /// Smallest eigenvalue of `G(∞) + G(∞)ᵀ`.
    pub limit_hermitian_eig: f64,
    /// Largest shift found with `G(s − ε)` positive real.
    pub epsilon: Option<f64>,
    /// Uniform lower bound of the Hermitian part, including `ω → ∞`.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassivityClass {
    pub tier: PrTier,
    pub witnesses: PrWitnesses,
}

/// Smallest eigenvalue of `G(jω) + G*(jω)`.
pub fn hermitian_min_eig(g: &TransferMatrix, omega: f64, tol: &Tolerances) -> Result<f64> {
    g.require_square()?;
    Ok(hermitian_part_min_eig(&g.eval(Complex64::new(0.0, omega), tol)?))
}

/// Smallest Hermitian eigenvalue relative to the local scale; zero at a pole.
fn relative_min_eig(g: &TransferMatrix, s: Complex64, tol: &Tolerances) -> Result<f64> {
    let m = match g.eval(s, tol) {
        Ok(m) => m,
        Err(Error::PoleEvaluation { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    Ok(relative_of(&m))
}

fn relative_of(m: &DMatrix<Complex64>) -> f64 {
    let ev = hermitian_eigenvalues(&(m + m.adjoint()));
    let h = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let denom = h.max(NOISE_FLOOR * sigma_max(m));
    if denom == 0.0 {
        0.0
    } else {
        ev[0] / denom
    }
}

struct Scan {
    min_rel: f64,
    min_rel_omega: f64,
    min_abs: f64,
}

/// Hermitian-part extrema of `G(jω − shift)` over `ω ≥ 0`.
fn scan(g: &TransferMatrix, shift: f64, omegas: &[f64], tol: &Tolerances) -> Result<Scan> {
    let at = |w: f64| Complex64::new(-shift, w);
    let rel = minimize(omegas, REFINE_TOL, |w| relative_min_eig(g, at(w), tol))?;
    let abs = minimize(omegas, REFINE_TOL, |w| match g.eval(at(w), tol) {
        Ok(m) => Ok(hermitian_part_min_eig(&m)),
        Err(Error::PoleEvaluation { .. }) => Ok(0.0),
        Err(e) => Err(e),
    })?;
    Ok(Scan { min_rel: rel.value, min_rel_omega: rel.omega, min_abs: abs.value })
}

/// Residue `lim_{s→p}(s − p)G(s)` at each simple imaginary-axis pole.
fn axis_residues(g: &TransferMatrix, tol: &Tolerances) -> Result<Vec<(Complex64, DMatrix<Complex64>)>> {
    let n = g.rows();
    let mut out = Vec::new();
    for pole in g.poles(tol)?.iter().filter(|r| r.z.re.abs() <= tol.marginal) {
        if pole.multiplicity > 1 {
            return Err(Error::RepeatedAxisPole { pole: pole.z });
        }
        let mut r = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let f = g.get(i, j);
                if f.is_zero() {
                    continue;
                }
                let hit = f.poles(tol)?.iter().find(|q| close(q.z, pole.z, 1e-6)).copied();
                if let Some(q) = hit {
                    r[(i, j)] = f.num().eval_complex(q.z) / f.den().derivative().eval_complex(q.z);
                }
            }
        }
        out.push((pole.z, r));
    }
    Ok(out)
}

fn is_hermitian_psd(r: &DMatrix<Complex64>, tol: &Tolerances) -> bool {
    let scale = r.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let skew = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    skew <= 1e-9 * scale && hermitian_eigenvalues(r)[0] >= -tol.pr_boundary * scale
}

pub fn classify_pr(g: &TransferMatrix, tol: &Tolerances) -> Result<PassivityClass> {
    g.require_square()?;
    let limit = real_to_complex(&g.limit_at_infinity()?);
    let poles = g.poles(tol)?;
    let scale = frequency_scale(g, tol)?;
    let omegas = sweep_grid(g, 1e-4 * scale, 1e6 * scale, SWEEP_POINTS, tol)?;

    let mut w = PrWitnesses {
        limit_hermitian_eig: hermitian_part_min_eig(&limit),
        min_hermitian_eig: f64::NAN,
        ..PrWitnesses::default()
    };
    let done = |tier, w| Ok(PassivityClass { tier, witnesses: w });

    if let Some(p) = poles.iter().find(|r| r.z.re > tol.marginal) {
        w.failing_pole = Some(p.z);
        return done(PrTier::NotPR, w);
    }
    for (p, r) in axis_residues(g, tol)? {
        if !is_hermitian_psd(&r, tol) {
            w.failing_pole = Some(p);
            return done(PrTier::NotPR, w);
        }
    }
    let s0 = scan(g, 0.0, &omegas, tol)?;
    w.min_hermitian_eig = s0.min_abs;
    w.failing_frequency = Some(s0.min_rel_omega);
    if s0.min_rel < -tol.pr_boundary || relative_of(&limit) < -tol.pr_boundary {
        return done(PrTier::NotPR, w);
    }
    if let Some(p) = poles.iter().find(|r| r.z.re >= -tol.marginal) {
        w.failing_pole = Some(p.z);
        return done(PrTier::PR, w);
    }
    if let Some(omega) = definiteness_failure(g, tol)? {
        w.failing_frequency = Some(omega);
        return done(PrTier::PR, w);
    }
    let eps_max = poles.iter().map(|r| 0.5 * r.z.re.abs()).fold(f64::INFINITY, f64::min);
    let eps_max = if eps_max.is_finite() { eps_max } else { 1.0 };
    w.epsilon = epsilon_search(g, eps_max, &omegas, &limit, tol)?;
    if w.epsilon.is_none() {
        return done(PrTier::StrongQuotedPR, w);
    }
    let delta = s0.min_abs.min(w.limit_hermitian_eig);
    if delta > tol.pr_boundary {
        w.delta = Some(delta);
        return done(PrTier::StronglyPR, w);
    }
    done(PrTier::StrictlyPR, w)
}

/// `G(−s)`.
fn reflected(f: &RationalFunction) -> Result<RationalFunction> {
    let flip = |p: &Polynomial| {
        Polynomial::new(p.coeffs().iter().enumerate().map(|(k, c)| if k % 2 == 0 { *c } else { -c }).collect())
    };
    RationalFunction::new(flip(f.num()), flip(f.den()))
}

/// `Re(N(jω)·conj(D(jω)))` as a polynomial in `ω`, which has the sign of
/// `f(jω)` wherever `f` is real on the axis.
fn axis_sign_polynomial(f: &RationalFunction) -> Polynomial {
    let on_axis = |p: &Polynomial, sign: f64| -> Vec<Complex64> {
        let mut jk = Complex64::new(1.0, 0.0);
        p.coeffs()
            .iter()
            .map(|c| {
                let v = jk * *c;
                jk *= Complex64::new(0.0, sign);
                v
            })
            .collect()
    };
    let (n, d) = (on_axis(f.num(), 1.0), on_axis(f.den(), -1.0));
    let mut q = vec![0.0; n.len() + d.len() - 1];
    for (i, a) in n.iter().enumerate() {
        for (k, b) in d.iter().enumerate() {
            q[i + k] += (a * b).re;
        }
    }
    let scale = q.iter().map(|c| c.abs()).fold(0.0, f64::max);
    Polynomial::new(q).chop(scale, 1e-12)
}

/// A frequency where `G(jω) + G*(jω)` fails to be positive definite, if any.
///
/// Decided exactly from the leading principal minors of `G(s) + G(−s)ᵀ`:
/// each is real on the axis with the sign of a polynomial in `ω`, which must
/// have a positive leading coefficient and no real roots.
fn definiteness_failure(g: &TransferMatrix, tol: &Tolerances) -> Result<Option<f64>> {
    let n = g.rows();
    let mut popov = g.clone();
    for i in 0..n {
        for j in 0..n {
            popov.set(i, j, g.get(i, j).add_with(&reflected(g.get(j, i))?, tol)?);
        }
    }
    for k in 1..=n {
        let idx: Vec<usize> = (0..k).collect();
        let q = axis_sign_polynomial(&popov.submatrix(&idx, &idx).det(tol)?);
        if q.is_zero() || q.leading() < 0.0 {
            return Ok(Some(0.0));
        }
        let real_root = poly_roots(&q)?
            .iter()
            .find(|r| r.z.im.abs() <= 1e-6 * r.z.re.abs().max(1.0))
            .map(|r| r.z.re.abs());
        if real_root.is_some() {
            return Ok(real_root);
        }
    }
    Ok(None)
}

/// Largest `ε ≤ eps_max` with `G(s − ε)` positive real, if any above the search floor.
fn epsilon_search(
    g: &TransferMatrix,
    eps_max: f64,
    omegas: &[f64],
    limit: &DMatrix<Complex64>,
    tol: &Tolerances,
) -> Result<Option<f64>> {
    if relative_of(limit) < -tol.pr_boundary {
        return Ok(None);
    }
    let passes = |eps: f64| -> Result<bool> { Ok(scan(g, eps, omegas, tol)?.min_rel >= -tol.pr_boundary) };
    let mut hi = eps_max;
    if passes(hi)? {
        return Ok(Some(hi));
    }
    let mut lo = 0.5 * hi;
    while !passes(lo)? {
        hi = lo;
        lo *= 0.5;
        if lo < EPS_FLOOR * eps_max {
            return Ok(None);
        }
    }
    for _ in 0..EPS_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PassivityInterconnect {
    pub class1: PassivityClass,
    pub class2: PassivityClass,
    /// One operand is positive real and the other at least "strong" positive real.
    pub theorem_applies: bool,
    /// Stable when the theorem applies, otherwise Inconclusive.
    pub verdict: Verdict,
}

/// Passivity test for the negative-feedback loop of `G1` and `G2`.
///
/// Two positive-real operands alone are not enough for stability.
pub fn passivity_interconnect(g1: &TransferMatrix, g2: &TransferMatrix, tol: &Tolerances) -> Result<PassivityInterconnect> {
    if g1.rows() != g2.rows() || g1.cols() != g2.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{} operands",
            g1.rows(),
            g1.cols(),
            g2.rows(),
            g2.cols()
        )));
    }
    let class1 = classify_pr(g1, tol)?;
    let class2 = classify_pr(g2, tol)?;
    let pairs = |a: PrTier, b: PrTier| a >= PrTier::PR && b >= PrTier::StrongQuotedPR;
    let theorem_applies = pairs(class1.tier, class2.tier) || pairs(class2.tier, class1.tier);
    let verdict = if theorem_applies { Verdict::stable("passivity") } else { Verdict::inconclusive("passivity") };
    Ok(PassivityInterconnect { class1, class2, theorem_applies, verdict })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedReport {
    pub c: f64,
    /// Hermitian part positive definite for `|ω| ≤ c`.
    pub pr_band_ok: bool,
    /// `‖G(jω)‖ < 1` for `|ω| > c`, including the limit at infinity.
    pub gain_band_ok: bool,
    pub min_hermitian_eig: f64,
    pub max_gain: f64,
}

impl MixedReport {
    pub fn passes(&self) -> bool {
        self.pr_band_ok && self.gain_band_ok
    }
}

/// Checks the mixed positive-real / small-gain property at crossover `c`.
///
/// The gain band is sampled from `c·(1 + 10⁻³)` upward, so a gain of exactly
/// 1 at the crossover itself does not fail it.
pub fn mixed_check(g: &TransferMatrix, c: f64, tol: &Tolerances) -> Result<MixedReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("crossover must be positive, got {c}")));
    }
    g.require_square()?;
    if !is_stable_operand(g, tol)? {
        return Err(Error::UnstableOperand);
    }
    let low = sweep_grid(g, 1e-6 * c, c, SWEEP_POINTS / 2, tol)?;
    let pr = minimize(&low, REFINE_TOL, |w| relative_min_eig(g, Complex64::new(0.0, w), tol))?;
    let min_hermitian_eig = minimize(&low, REFINE_TOL, |w| hermitian_min_eig(g, w, tol))?.value;

    let high: Vec<f64> = sweep_grid(g, c * (1.0 + GAIN_BAND_OFFSET), 1e6 * c.max(1.0), SWEEP_POINTS / 2, tol)?
        .into_iter()
        .filter(|w| *w > c)
        .collect();
    let peak = maximize(&high, REFINE_TOL, |w| Ok(sigma_max(&g.eval(Complex64::new(0.0, w), tol)?)))?;
    let max_gain = peak.value.max(sigma_max(&real_to_complex(&g.limit_at_infinity()?)));
    Ok(MixedReport {
        c,
        pr_band_ok: pr.value > tol.pr_boundary,
        gain_band_ok: max_gain < 1.0,
        min_hermitian_eig,
        max_gain,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedInterconnect {
    pub common_c: Option<f64>,
    /// Stable when a common crossover exists, otherwise Inconclusive.
    pub verdict: Verdict,
}

/// Searches a log grid of crossovers for one where both operands pass [`mixed_check`].
pub fn mixed_interconnect(g1: &TransferMatrix, g2: &TransferMatrix, tol: &Tolerances) -> Result<MixedInterconnect> {
    if !is_stable_operand(g1, tol)? || !is_stable_operand(g2, tol)? {
        return Err(Error::UnstableOperand);
    }
    let scale = frequency_scale(g1, tol)?.max(frequency_scale(g2, tol)?);
    for c in log_grid(1e-3 * scale, 1e3 * scale, CROSSOVER_CANDIDATES) {
        if mixed_check(g1, c, tol)?.passes() && mixed_check(g2, c, tol)?.passes() {
            return Ok(MixedInterconnect { common_c: Some(c), verdict: Verdict::stable("mixed") });
        }
    }
    Ok(MixedInterconnect { common_c: None, verdict: Verdict::inconclusive("mixed") })
}
