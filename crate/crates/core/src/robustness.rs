//! H∞ norms, the small-gain test, and unstructured uncertainty bounds.
//!
//! The norm is the largest singular value over a log-spaced sweep, refined by
//! golden-section search around every sampled local maximum, together with
//! the limit at `ω → ∞`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_to_complex, sigma_max};
use crate::sweep::{frequency_scale, maximize, sweep_grid};
use crate::tfmatrix::{closed_loop, direct_stability, Status, TransferMatrix, Verdict};
use crate::Tolerances;

pub const DEFAULT_REL_TOL: f64 = 1e-6;
const DEFAULT_SWEEP_POINTS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HinfResult {
    pub value: f64,
    /// `+∞` when the supremum is the high-frequency limit.
    pub peak_frequency: f64,
    pub converged: bool,
}

/// Entry poles all lie strictly left of the marginal band.
pub fn is_stable_operand(g: &TransferMatrix, tol: &Tolerances) -> Result<bool> {
    Ok(g.poles(tol)?.iter().all(|r| r.z.re < -tol.marginal))
}

pub fn hinf_norm(g: &TransferMatrix, rel_tol: f64, tol: &Tolerances) -> Result<HinfResult> {
    hinf_norm_with(g, rel_tol, DEFAULT_SWEEP_POINTS, tol)
}

pub fn hinf_norm_with(g: &TransferMatrix, rel_tol: f64, sweep_points: usize, tol: &Tolerances) -> Result<HinfResult> {
    if !(rel_tol > 0.0 && rel_tol <= 0.1) {
        return Err(Error::InvalidArgument(format!("rel_tol must lie in (0, 0.1], got {rel_tol}")));
    }
    if !is_stable_operand(g, tol)? {
        return Err(Error::UnstableOperand);
    }
    let at_infinity = sigma_max(&real_to_complex(&g.limit_at_infinity()?));
    let scale = frequency_scale(g, tol)?;
    let omegas = sweep_grid(g, 1e-6 * scale, 1e6 * scale, sweep_points.max(16), tol)?;
    let peak = maximize(&omegas, rel_tol, |w| Ok(sigma_max(&g.eval(Complex64::new(0.0, w), tol)?)))?;
    if at_infinity >= peak.value {
        return Ok(HinfResult { value: at_infinity, peak_frequency: f64::INFINITY, converged: true });
    }
    Ok(HinfResult { value: peak.value, peak_frequency: peak.omega, converged: peak.converged })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallGain {
    /// Both operands are stable and `‖G1·G2‖∞ < 1`.
    pub applies: bool,
    /// `None` when an operand is unstable.
    pub product_norm: Option<f64>,
    /// Stable when the test applies, otherwise Inconclusive.
    pub verdict: Verdict,
}

/// Small-gain test for the negative-feedback loop of `G1` and `G2`.
///
/// A failed test decides nothing: it is sufficient, not necessary.
pub fn small_gain_check(g1: &TransferMatrix, g2: &TransferMatrix, tol: &Tolerances) -> Result<SmallGain> {
    let product = g1.mul(g2, tol)?;
    product.require_square()?;
    if !is_stable_operand(g1, tol)? || !is_stable_operand(g2, tol)? {
        return Ok(SmallGain { applies: false, product_norm: None, verdict: Verdict::inconclusive("small_gain") });
    }
    let norm = hinf_norm(&product, DEFAULT_REL_TOL, tol)?.value;
    let applies = norm < 1.0;
    let verdict = if applies { Verdict::stable("small_gain") } else { Verdict::inconclusive("small_gain") };
    Ok(SmallGain { applies, product_norm: Some(norm), verdict })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UncertaintyKind {
    /// Loop `P + Δ`.
    Additive,
    /// Loop `P(I + Δ)`.
    Multiplicative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyModel {
    pub kind: UncertaintyKind,
    /// Stable `Δ` with `‖Δ‖∞` below this keep the loop stable; `+∞` when the weighting map is zero.
    pub bound: f64,
}

pub fn uncertainty_bound(p: &TransferMatrix, kind: UncertaintyKind, tol: &Tolerances) -> Result<UncertaintyModel> {
    if direct_stability(p, None, tol)?.status != Status::Stable {
        return Err(Error::NominalUnstable);
    }
    let (sensitivity, complementary) = closed_loop(p, None, tol)?;
    let weight = match kind {
        UncertaintyKind::Additive => sensitivity,
        UncertaintyKind::Multiplicative => complementary,
    };
    let norm = hinf_norm(&weight, DEFAULT_REL_TOL, tol)?.value;
    let bound = if norm == 0.0 { f64::INFINITY } else { 1.0 / norm };
    Ok(UncertaintyModel { kind, bound })
}

/// Direct verdict for the loop with the block `U` in series with `P`.
pub fn perturbed_verdict(p: &TransferMatrix, u: &TransferMatrix, tol: &Tolerances) -> Result<Verdict> {
    let mut v = direct_stability(p, Some(u), tol)?;
    v.method = "perturbed".into();
    Ok(v)
}
