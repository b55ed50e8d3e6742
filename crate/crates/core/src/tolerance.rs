//! Numerical tolerances used across the analysis pipeline.

use serde::{Deserialize, Serialize};

/// Environment variable that overrides [`Tolerances::root`].
pub const ROOT_TOL_ENV: &str = "MIMOSTAB_TOL_ROOT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Root matching distance used by GCD and coprime reduction, relative to `max(1, |z|)`.
    pub root: f64,
    /// Roots closer than this (relative) are merged into one multiple root.
    pub cluster: f64,
    /// Half-width of the band around the imaginary axis treated as marginal.
    pub marginal: f64,
    /// `|den(s)|` below this is treated as evaluation at a pole.
    pub pole_guard: f64,
    /// Minimum curve-to-point distance for a winding number to be trusted.
    pub exclusion: f64,
    /// Radius of the right-half-plane detour around imaginary-axis poles.
    pub indent_radius: f64,
    /// Maximum endpoint gap when closing eigenvalue loci.
    pub closure: f64,
    /// Minimum Hermitian-part eigenvalue that counts as strictly positive.
    pub pr_boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root: 1e-9,
            cluster: 1e-7,
            marginal: 1e-7,
            pole_guard: 1e-12,
            exclusion: 1e-6,
            indent_radius: 1e-4,
            closure: 1e-6,
            pr_boundary: 1e-9,
        }
    }
}

impl Tolerances {
    /// Defaults, with the root tolerance taken from `MIMOSTAB_TOL_ROOT` when set.
    pub fn from_env() -> Self {
        let mut tol = Self::default();
        if let Some(v) = std::env::var(ROOT_TOL_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|v| v.is_finite() && *v > 0.0)
        {
            tol.root = v;
        }
        tol
    }
}
