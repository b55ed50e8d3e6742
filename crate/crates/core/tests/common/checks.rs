//! Randomized checks shared by the property and acceptance suites. Each
//! returns human-readable failures; an empty list means the check held.

use mimostab::cli::corpus::{corpus_system, SYSTEMS};
use mimostab::cli::RunOptions;
use mimostab::nyquist::{build_grid_with, det_nyquist, generalized_nyquist_on, GridOptions};
use mimostab::passivity::{hermitian_min_eig, PassivityClass, PrTier};
use mimostab::polyrat::RationalFunction;
use mimostab::robustness::{hinf_norm, is_stable_operand, small_gain_check, uncertainty_bound, UncertaintyKind, DEFAULT_REL_TOL};
use mimostab::smith_mcmillan::theorem1_check;
use mimostab::tfmatrix::{direct_stability, Status, TransferMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::random::{non_marginal, random_matrix, random_system};
use super::{c, lag, tol};

/// Systems on which the determinant test, det-Nyquist or generalized Nyquist disagree with `direct_stability`.
pub fn oracle_disagreements(count: usize, max_n: usize, seed: u64) -> Vec<String> {
    let t = tol();
    (0..count)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + k as u64);
            let p = random_system(&mut rng, max_n, 3);
            let oracle = direct_stability(&p, None, &t).unwrap().status;
            let grid = build_grid_with(&p, &GridOptions::default(), &t).unwrap();
            let got = [
                ("theorem1", theorem1_check(&p, &t).map(|r| r.verdict.status)),
                ("det_nyquist", det_nyquist(&p, &grid, &t).map(|r| r.verdict.status)),
                ("generalized_nyquist", generalized_nyquist_on(&p, &grid, &t).map(|r| r.verdict.status)),
            ];
            let bad: Vec<String> = got
                .iter()
                .filter(|(_, s)| s.as_ref().ok() != Some(&oracle))
                .map(|(m, s)| format!("system {k}: {m} gave {s:?}, oracle {oracle:?}"))
                .collect();
            (!bad.is_empty()).then(|| bad.join("; "))
        })
        .collect()
}

pub fn random_stable(rng: &mut impl Rng, n: usize) -> TransferMatrix {
    loop {
        let p = random_matrix(rng, n, 2);
        if !p.is_zero() && is_stable_operand(&p, &tol()).unwrap() && non_marginal(&p, 1e-3, &tol()) {
            return p;
        }
    }
}

/// Submultiplicativity of the H∞ norm and agreement of every small-gain certificate with the oracle.
pub fn small_gain_failures(count: u64, seed: u64) -> Vec<String> {
    let t = tol();
    (0..count)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed + k);
            let n = rng.random_range(1..=3);
            let g1 = random_stable(&mut rng, n);
            let g2 = random_stable(&mut rng, n).scale(rng.random_range(0.05..1.0));
            let n1 = hinf_norm(&g1, DEFAULT_REL_TOL, &t).unwrap().value;
            let n2 = hinf_norm(&g2, DEFAULT_REL_TOL, &t).unwrap().value;
            let s = small_gain_check(&g1, &g2, &t).unwrap();
            let n12 = s.product_norm.unwrap();
            if n12 > n1 * n2 * (1.0 + 1e-8) {
                return Some(format!("pair {k}: ‖G1 G2‖ = {n12} > {n1} · {n2}"));
            }
            if s.applies {
                match direct_stability(&g1, Some(&g2), &t) {
                    Ok(v) if v.status == Status::Stable => {}
                    other => return Some(format!("pair {k}: certificate but oracle {other:?}")),
                }
            }
            None
        })
        .collect()
}

/// Rotation, or rotation composed with a reflection, of size 1 or 2.
fn orthogonal(n: usize, angle: f64, flip: bool) -> DMatrix<f64> {
    let f = if flip { -1.0 } else { 1.0 };
    if n == 1 {
        return DMatrix::from_element(1, 1, f);
    }
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s * f, s, c * f])
}

/// `Q1 · diag(σᵢ aᵢ/(s + aᵢ)) · Q2` with `max σᵢ = norm`, which is then its exact H∞ norm.
pub fn random_delta(rng: &mut impl Rng, n: usize, norm: f64) -> TransferMatrix {
    let t = tol();
    let q1 = orthogonal(n, rng.random_range(0.0..std::f64::consts::TAU), rng.random_bool(0.5));
    let q2 = orthogonal(n, rng.random_range(0.0..std::f64::consts::TAU), rng.random_bool(0.5));
    let mut sig: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    sig[0] = 1.0;
    let d = TransferMatrix::diag(
        sig.iter()
            .map(|s| {
                let a = 10f64.powf(rng.random_range(-1.0..2.0));
                if rng.random_bool(0.2) { c(s * norm) } else { lag(s * norm * a, a) }
            })
            .collect(),
    );
    TransferMatrix::from_constant(&q1).mul(&d, &t).unwrap().mul(&TransferMatrix::from_constant(&q2), &t).unwrap()
}

/// Samples perturbations below 0.95 of each bound for every stable, nominally
/// stable corpus plant. Returns the plants checked and the failures.
pub fn bound_failures(samples: usize) -> (Vec<String>, Vec<String>) {
    let t = tol();
    let opts = RunOptions::new(t);
    let mut checked = Vec::new();
    let mut failures = Vec::new();
    for (id, _) in SYSTEMS {
        let p = corpus_system(id, &Default::default(), &opts).unwrap().matrix;
        let n = p.rows();
        if !p.is_square() || n > 2 || !is_stable_operand(&p, &t).unwrap() {
            continue;
        }
        if direct_stability(&p, None, &t).map(|v| v.status) != Ok(Status::Stable) {
            continue;
        }
        checked.push(id.to_string());
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [UncertaintyKind::Additive, UncertaintyKind::Multiplicative] {
            let bound = uncertainty_bound(&p, kind, &t).unwrap().bound;
            for k in 0..samples {
                let norm = 0.95 * bound * rng.random_range(0.1..1.0);
                let delta = random_delta(&mut rng, n, norm);
                let v = match kind {
                    UncertaintyKind::Additive => direct_stability(&p.add(&delta, &t).unwrap(), None, &t),
                    UncertaintyKind::Multiplicative => {
                        direct_stability(&p, Some(&TransferMatrix::identity(n).add(&delta, &t).unwrap()), &t)
                    }
                };
                if v.as_ref().map(|v| v.status) != Ok(Status::Stable) {
                    failures.push(format!("{id} {kind:?} sample {k}, ‖Δ‖ = {norm}: {v:?}"));
                }
            }
        }
    }
    (checked, failures)
}

/// `Σ kᵢ/(s + aᵢ) + d` with positive `kᵢ`, `aᵢ` and, half the time, positive `d`.
/// Returns the function, `d` and the smallest `aᵢ`.
pub fn positive_first_order_sum(rng: &mut impl Rng) -> (TransferMatrix, f64, f64) {
    let t = tol();
    let mut f = RationalFunction::zero();
    let mut min_a = f64::INFINITY;
    for _ in 0..rng.random_range(1..=3) {
        let a = rng.random_range(0.1..10.0);
        min_a = min_a.min(a);
        f = f.add_with(&lag(rng.random_range(0.1..5.0), a), &t).unwrap();
    }
    let d = if rng.random_bool(0.5) { rng.random_range(0.1..2.0) } else { 0.0 };
    (TransferMatrix::scalar(f.add_with(&c(d), &t).unwrap()), d, min_a)
}

fn shifted_hermitian_min_eig(g: &TransferMatrix, sigma: f64, omega: f64) -> Option<f64> {
    let m = g.eval(Complex64::new(sigma, omega), &tol()).ok()?;
    let h = &m + m.adjoint();
    Some(h.symmetric_eigenvalues().min())
}

/// Checks the defining condition of every tier at or below the reported one on a frequency sweep.
pub fn chain_violation(g: &TransferMatrix, class: &PassivityClass) -> Option<String> {
    let t = tol();
    let omegas: Vec<f64> = std::iter::once(0.0)
        .chain((0..300).map(|k| 10f64.powf(-3.0 + 7.0 * k as f64 / 299.0)))
        .collect();
    let scale = omegas
        .iter()
        .filter_map(|w| g.eval(Complex64::new(0.0, *w), &t).ok())
        .map(|m| m.iter().map(|x| x.norm()).fold(0.0, f64::max))
        .fold(1.0, f64::max);
    let herm: Vec<(f64, f64)> =
        omegas.iter().filter_map(|w| hermitian_min_eig(g, *w, &t).ok().map(|h| (*w, h))).collect();
    let tier = class.tier;
    if tier >= PrTier::PR {
        if g.poles(&t).ok()?.iter().any(|r| r.z.re > t.marginal) {
            return Some(format!("{tier:?} with a right-half-plane pole"));
        }
        if let Some((w, h)) = herm.iter().find(|(_, h)| *h < -1e-9 * scale) {
            return Some(format!("{tier:?} but Hermitian part {h} at ω = {w}"));
        }
    }
    if tier >= PrTier::StrongQuotedPR {
        if let Some((w, h)) = herm.iter().find(|(_, h)| *h <= 0.0) {
            return Some(format!("{tier:?} but Hermitian part {h} at ω = {w}"));
        }
    }
    if tier >= PrTier::StrictlyPR {
        let Some(eps) = class.witnesses.epsilon.filter(|e| *e > 0.0) else {
            return Some(format!("{tier:?} without a shift certificate"));
        };
        if g.poles(&t).ok()?.iter().any(|r| r.z.re > -eps) {
            return Some(format!("{tier:?} with a pole right of −ε = {}", -eps));
        }
        for w in &omegas {
            if let Some(h) = shifted_hermitian_min_eig(g, -eps, *w) {
                if h < -1e-9 * scale {
                    return Some(format!("{tier:?} but G(s − {eps}) has Hermitian part {h} at ω = {w}"));
                }
            }
        }
    }
    if tier == PrTier::StronglyPR {
        let Some(delta) = class.witnesses.delta.filter(|d| *d > 0.0) else {
            return Some("StronglyPR without a uniform bound".into());
        };
        if let Some((w, h)) = herm.iter().find(|(_, h)| *h < delta * (1.0 - 1e-6)) {
            return Some(format!("StronglyPR with δ = {delta} but Hermitian part {h} at ω = {w}"));
        }
    }
    None
}
