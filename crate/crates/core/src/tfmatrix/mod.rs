//! Transfer-matrix algebra, the unity-feedback closed loop, and the direct
//! pole-location stability verdict.
//!
//! The loop is `u -> U -> P -> y` with negative unity feedback, so the loop
//! gain is `P·U`, the sensitivity is `(I + PU)^-1` and the complementary map
//! is `PU(I + PU)^-1`.

mod matrix;
mod verdict;

pub use matrix::{tm_det, tm_eval, tm_inverse, CharPoly, TransferMatrix};
pub use verdict::{Status, Verdict};

pub(crate) use matrix::POLE_UNION_TOL;

use crate::error::{Error, Result};
use crate::Tolerances;

/// Loop gain `P·U` (`P` when `u` is `None`).
pub fn loop_gain(p: &TransferMatrix, u: Option<&TransferMatrix>, tol: &Tolerances) -> Result<TransferMatrix> {
    let l = match u {
        Some(u) => p.mul(u, tol)?,
        None => p.clone(),
    };
    l.require_square()?;
    Ok(l)
}

/// Returns `((I + PU)^-1, PU(I + PU)^-1)`.
pub fn closed_loop(
    p: &TransferMatrix,
    u: Option<&TransferMatrix>,
    tol: &Tolerances,
) -> Result<(TransferMatrix, TransferMatrix)> {
    let l = loop_gain(p, u, tol)?;
    let sensitivity = l.plus_identity(tol)?.inverse(tol).map_err(|e| match e {
        Error::SingularMatrix => Error::SingularLoop,
        other => other,
    })?;
    let complementary = l.mul(&sensitivity, tol)?;
    Ok((sensitivity, complementary))
}

/// Ground-truth verdict from the poles of every entry of the sensitivity.
pub fn direct_stability(p: &TransferMatrix, u: Option<&TransferMatrix>, tol: &Tolerances) -> Result<Verdict> {
    let (sensitivity, _) = closed_loop(p, u, tol)?;
    Ok(Verdict::from_poles(&sensitivity.poles(tol)?, tol, "direct"))
}
