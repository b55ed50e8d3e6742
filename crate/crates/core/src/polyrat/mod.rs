//! Real-coefficient polynomial and rational-function arithmetic.
//!
//! Common factors are found by matching roots: two polynomials share a factor
//! `(s - z)^m` when both have a root cluster at `z` (within the root tolerance)
//! of multiplicity at least `m`. This is robust at the small degrees used by
//! transfer-matrix analysis and yields exact results for exactly representable
//! inputs.

mod poly;
mod rational;
mod roots;

pub use poly::{poly_arith, PolyOp, Polynomial};
pub use rational::{rat_arith, rat_eval, RatOp, RationalFunction};
pub use roots::{complex_poly_roots, poly_roots, poly_roots_with, Root, RootSet};

pub(crate) use roots::close;

use num_complex::Complex64;

use crate::Tolerances;

/// Result of matching the roots of two polynomials.
#[derive(Debug, Clone, Default)]
pub(crate) struct RootSplit {
    pub common: Vec<Complex64>,
    pub rest_a: Vec<Complex64>,
    pub rest_b: Vec<Complex64>,
}

/// Pairs root clusters of `a` with those of `b` at most `tol * max(1, |z|)` apart.
pub(crate) fn split_common(a: &RootSet, b: &RootSet, tol: f64) -> RootSplit {
    let mut cap_b: Vec<(Complex64, usize)> = b.iter().map(|r| (r.z, r.multiplicity)).collect();
    let mut split = RootSplit::default();
    for ra in a.iter() {
        let mut remaining = ra.multiplicity;
        while remaining > 0 {
            let best = cap_b
                .iter()
                .enumerate()
                .filter(|(_, (z, m))| *m > 0 && close(*z, ra.z, tol))
                .min_by(|(_, (x, _)), (_, (y, _))| (x - ra.z).norm().total_cmp(&(y - ra.z).norm()))
                .map(|(i, _)| i);
            let Some(i) = best else { break };
            let k = remaining.min(cap_b[i].1);
            cap_b[i].1 -= k;
            remaining -= k;
            split.common.extend(std::iter::repeat_n(ra.z, k));
        }
        split.rest_a.extend(std::iter::repeat_n(ra.z, remaining));
    }
    for (z, m) in cap_b {
        split.rest_b.extend(std::iter::repeat_n(z, m));
    }
    split
}

/// Monic approximate greatest common divisor.
///
/// Returns the monic version of the nonzero argument when the other is zero,
/// and `1` when both are zero.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial, tol: f64) -> Polynomial {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => return Polynomial::one(),
        (true, false) => return b.monic(),
        (false, true) => return a.monic(),
        _ => {}
    }
    if a.degree() == Some(0) || b.degree() == Some(0) {
        return Polynomial::one();
    }
    let cluster = Tolerances::default().cluster;
    let (Ok(ra), Ok(rb)) = (poly_roots_with(a, cluster), poly_roots_with(b, cluster)) else {
        return Polynomial::one();
    };
    Polynomial::from_roots(&split_common(&ra, &rb, tol).common)
}

/// Monic least common multiple of nonzero polynomials.
pub fn poly_lcm(polys: &[Polynomial], tol: f64) -> Polynomial {
    Polynomial::from_roots(&lcm_roots(polys, tol))
}

/// Roots of [`poly_lcm`], one entry per multiplicity.
pub(crate) fn lcm_roots(polys: &[Polynomial], tol: f64) -> Vec<Complex64> {
    let cluster = Tolerances::default().cluster;
    let mut acc: Vec<Complex64> = Vec::new();
    for p in polys.iter().filter(|p| !p.is_zero()) {
        let Ok(rp) = poly_roots_with(p, cluster) else { continue };
        let current = RootSet::new(clusters_of(&acc, cluster));
        let split = split_common(&rp, &current, tol);
        acc.extend(split.rest_a);
    }
    acc
}

fn clusters_of(roots: &[Complex64], tol: f64) -> Vec<Root> {
    let mut out: Vec<Root> = Vec::new();
    for &z in roots {
        match out.iter_mut().find(|r| close(r.z, z, tol)) {
            Some(r) => r.multiplicity += 1,
            None => out.push(Root { z, multiplicity: 1 }),
        }
    }
    out
}
