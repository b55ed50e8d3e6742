//! Frequency sweeps with golden-section refinement of extrema.

use crate::error::Result;
use crate::tfmatrix::TransferMatrix;
use crate::Tolerances;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_MAX_ITER: usize = 200;

/// Largest pole or zero magnitude over the entries, at least 1.
pub(crate) fn frequency_scale(g: &TransferMatrix, tol: &Tolerances) -> Result<f64> {
    let mut m: f64 = 1.0;
    for f in g.entries().iter().filter(|f| !f.is_zero()) {
        for r in f.poles(tol)?.iter().chain(f.zeros(tol)?.iter()) {
            m = m.max(r.z.norm());
        }
    }
    Ok(m)
}

/// `0`, `n` log-spaced points on `[lo, hi]`, and the entries' natural frequencies inside that range.
pub(crate) fn sweep_grid(g: &TransferMatrix, lo: f64, hi: f64, n: usize, tol: &Tolerances) -> Result<Vec<f64>> {
    let mut w = log_grid(lo, hi, n);
    for f in g.entries().iter().filter(|f| !f.is_zero()) {
        for r in f.poles(tol)?.iter().chain(f.zeros(tol)?.iter()) {
            w.extend([r.z.norm(), r.z.im.abs()].into_iter().filter(|x| *x > lo && *x < hi));
        }
    }
    w.push(0.0);
    w.sort_by(f64::total_cmp);
    w.dedup();
    Ok(w)
}

pub(crate) fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Extremum {
    pub omega: f64,
    pub value: f64,
    pub converged: bool,
}

/// Maximizes `f` over the sampled `omegas`, refining every local maximum by
/// golden-section search between its neighbors.
pub(crate) fn maximize(omegas: &[f64], rel_tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<Extremum> {
    let values = omegas.iter().map(|w| f(*w)).collect::<Result<Vec<_>>>()?;
    let mut best = Extremum { omega: omegas[0], value: values[0], converged: true };
    for i in 0..omegas.len() {
        let left = if i > 0 { values[i - 1] } else { f64::NEG_INFINITY };
        let right = values.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
        if values[i] < left || values[i] < right {
            continue;
        }
        let mut candidate = Extremum { omega: omegas[i], value: values[i], converged: true };
        if i > 0 && i + 1 < omegas.len() {
            let refined = golden_max(omegas[i - 1], omegas[i + 1], rel_tol, &f)?;
            if refined.value > candidate.value {
                candidate = refined;
            } else {
                candidate.converged = refined.converged;
            }
        }
        if candidate.value > best.value {
            best = candidate;
        }
    }
    Ok(best)
}

pub(crate) fn minimize(omegas: &[f64], rel_tol: f64, f: impl Fn(f64) -> Result<f64>) -> Result<Extremum> {
    let e = maximize(omegas, rel_tol, |w| f(w).map(|v| -v))?;
    Ok(Extremum { value: -e.value, ..e })
}

fn golden_max(mut a: f64, mut b: f64, rel_tol: f64, f: &impl Fn(f64) -> Result<f64>) -> Result<Extremum> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_MAX_ITER {
        if (b - a) <= rel_tol * b.abs().max(a.abs()).max(1e-300) {
            let (omega, value) = if fc > fd { (c, fc) } else { (d, fd) };
            return Ok(Extremum { omega, value, converged: true });
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    let (omega, value) = if fc > fd { (c, fc) } else { (d, fd) };
    Ok(Extremum { omega, value, converged: false })
}
