//! Smith-McMillan form via determinantal divisors, multiplicity-correct pole
//! counting, and the determinant stability test with hidden-mode detection.
//!
//! `P = N(s)/d(s)` with `d` the monic lcm of the entry denominators. With
//! `D_k` the monic gcd of all `k×k` minors of `N` (`D_0 = 1`), the invariant
//! factors are `a_k = D_k / D_{k-1}` and `ε_k/ψ_k` is `a_k/d` in lowest terms.
//! The number of minors grows combinatorially with the size of `P`.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::polyrat::{poly_gcd, poly_lcm, Polynomial, Root, RationalFunction, RootSet};
use crate::tfmatrix::{direct_stability, TransferMatrix, Verdict};
use crate::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct SmithMcMillanForm {
    /// `(ε_k, ψ_k)`, both monic and coprime, for `k = 1..=rank`.
    pub factors: Vec<(Polynomial, Polynomial)>,
    pub rank: usize,
}

impl SmithMcMillanForm {
    pub fn pole_polynomial(&self) -> Polynomial {
        self.factors.iter().fold(Polynomial::one(), |acc, (_, psi)| &acc * psi)
    }

    pub fn zero_polynomial(&self) -> Polynomial {
        self.factors.iter().fold(Polynomial::one(), |acc, (eps, _)| &acc * eps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoleZeroReport {
    pub poles: RootSet,
    pub zeros: RootSet,
    /// Sum of multiplicities of poles with `Re > τ_marg`.
    pub unstable_pole_count: usize,
    /// Poles within the marginal band; never counted as unstable.
    pub marginal_poles: RootSet,
}

pub fn smith_mcmillan(p: &TransferMatrix, tol: &Tolerances) -> Result<SmithMcMillanForm> {
    if p.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let dens: Vec<Polynomial> = p.entries().iter().map(|f| f.den().clone()).collect();
    let d = poly_lcm(&dens, tol.root);
    let n = numerator_matrix(p, &d);

    let mut factors = Vec::new();
    let mut prev = Polynomial::one();
    for k in 1..=p.rows().min(p.cols()) {
        let Some(dk) = determinantal_divisor(&n, p.rows(), p.cols(), k, tol) else {
            break;
        };
        let (a, _) = dk.div_rem(&prev);
        let f = RationalFunction::with_tol(a.monic(), d.clone(), tol)?;
        factors.push((f.num().monic(), f.den().clone()));
        prev = dk;
    }
    let rank = factors.len();
    Ok(SmithMcMillanForm { factors, rank })
}

/// Polynomial matrix `N = P·d`, row-major.
fn numerator_matrix(p: &TransferMatrix, d: &Polynomial) -> Vec<Polynomial> {
    p.entries()
        .iter()
        .map(|f| {
            if f.is_zero() {
                return Polynomial::zero();
            }
            let (q, _) = d.div_rem(f.den());
            f.num() * &q
        })
        .collect()
}

/// Monic gcd of all nonzero `k×k` minors, or `None` if they all vanish.
fn determinantal_divisor(
    n: &[Polynomial],
    rows: usize,
    cols: usize,
    k: usize,
    tol: &Tolerances,
) -> Option<Polynomial> {
    let mut g: Option<Polynomial> = None;
    for ri in (0..rows).combinations(k) {
        for ci in (0..cols).combinations(k) {
            let m = poly_det(n, cols, &ri, &ci);
            let scale = minor_scale(n, cols, &ri, &ci);
            let m = m.chop(scale, 1e-12);
            if m.is_zero() {
                continue;
            }
            g = Some(match g {
                None => m.monic(),
                Some(g) if g.degree() == Some(0) => g,
                Some(g) => poly_gcd(&g, &m, tol.root),
            });
        }
    }
    g
}

fn minor_scale(n: &[Polynomial], cols: usize, ri: &[usize], ci: &[usize]) -> f64 {
    ri.iter()
        .map(|&i| ci.iter().map(|&j| n[i * cols + j].norm_inf()).fold(0.0, f64::max))
        .product::<f64>()
        .max(f64::MIN_POSITIVE)
}

/// Cofactor-expansion determinant of the polynomial submatrix.
fn poly_det(n: &[Polynomial], cols: usize, ri: &[usize], ci: &[usize]) -> Polynomial {
    if ri.len() == 1 {
        return n[ri[0] * cols + ci[0]].clone();
    }
    let mut acc = Polynomial::zero();
    for (pos, &j) in ci.iter().enumerate() {
        let a = &n[ri[0] * cols + j];
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = ci.iter().copied().filter(|&c| c != j).collect();
        let term = a * &poly_det(n, cols, &ri[1..], &rest);
        acc = if pos % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

pub fn unstable_pole_count(p: &TransferMatrix, tol: &Tolerances) -> Result<PoleZeroReport> {
    let sm = smith_mcmillan(p, tol)?;
    let mut poles = RootSet::empty();
    let mut zeros = RootSet::empty();
    for (eps, psi) in &sm.factors {
        if psi.degree().unwrap_or(0) > 0 {
            poles = poles.union_sum(&crate::polyrat::poly_roots_with(psi, tol.cluster)?, tol.root);
        }
        if eps.degree().unwrap_or(0) > 0 {
            zeros = zeros.union_sum(&crate::polyrat::poly_roots_with(eps, tol.cluster)?, tol.root);
        }
    }
    let unstable_pole_count = poles.count_where(|r| r.z.re > tol.marginal);
    let marginal_poles = poles.filter(|r| r.z.re.abs() <= tol.marginal);
    Ok(PoleZeroReport { poles, zeros, unstable_pole_count, marginal_poles })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem1Result {
    pub verdict: Verdict,
    /// The unstable pole multiplicity of `P` differs from that of `det(I + P)`.
    pub hidden_mode: bool,
    pub det: RationalFunction,
    pub det_unstable_poles: usize,
    pub plant: PoleZeroReport,
}

pub fn theorem1_check(p: &TransferMatrix, tol: &Tolerances) -> Result<Theorem1Result> {
    let a = loop_analysis(p, tol)?;
    let mut verdict = Verdict::from_poles(&a.witnesses, tol, "theorem1");
    if a.hidden_mode && verdict.is_stable() {
        verdict = direct_stability(p, None, tol)?;
        verdict.method = "theorem1".into();
    }
    Ok(Theorem1Result {
        verdict,
        hidden_mode: a.hidden_mode,
        det: a.det,
        det_unstable_poles: a.det_unstable_poles,
        plant: a.plant,
    })
}

/// Pole bookkeeping shared by the determinant-based tests.
pub(crate) struct LoopAnalysis {
    pub det: RationalFunction,
    pub plant: PoleZeroReport,
    pub det_unstable_poles: usize,
    pub hidden_mode: bool,
    /// Closed-loop poles with `Re > -τ_marg`: zeros of `det(I + P)` plus hidden plant poles.
    pub witnesses: RootSet,
}

pub(crate) fn loop_analysis(p: &TransferMatrix, tol: &Tolerances) -> Result<LoopAnalysis> {
    let det = p.plus_identity(tol)?.det(tol)?;
    if det.is_zero() {
        return Err(Error::SingularLoop);
    }
    let plant = unstable_pole_count(p, tol)?;
    let det_poles = det.poles(tol)?;
    let det_unstable_poles = det_poles.count_where(|r| r.z.re > tol.marginal);
    let hidden_mode = det_unstable_poles != plant.unstable_pole_count;

    let mut witnesses = det.zeros(tol)?.filter(|r| r.z.re > -tol.marginal);
    if hidden_mode {
        let excess = hidden_poles(&plant.poles, &det_poles, tol);
        witnesses = witnesses.union_sum(&excess, tol.root);
        if excess.is_empty() {
            witnesses = witnesses.union_sum(&direct_stability(p, None, tol)?.witness_poles, tol.root);
        }
    }
    Ok(LoopAnalysis { det, plant, det_unstable_poles, hidden_mode, witnesses })
}

/// Unstable plant poles whose multiplicity exceeds that in `det(I + P)`.
fn hidden_poles(plant: &RootSet, det: &RootSet, tol: &Tolerances) -> RootSet {
    let roots = plant
        .iter()
        .filter(|r| r.z.re > tol.marginal)
        .filter_map(|r| {
            let shown: usize = det
                .iter()
                .filter(|d| crate::polyrat::close(d.z, r.z, crate::tfmatrix::POLE_UNION_TOL))
                .map(|d| d.multiplicity)
                .sum();
            (r.multiplicity > shown).then(|| Root { z: r.z, multiplicity: r.multiplicity - shown })
        })
        .collect();
    RootSet::new(roots)
}
