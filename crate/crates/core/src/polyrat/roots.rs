//! Polynomial root finding.
//!
//! Roots are the eigenvalues of the balanced companion matrix, polished by
//! Newton steps on the original polynomial and then clustered into multiple
//! roots. Clustering has two stages: roots closer than the cluster tolerance
//! always merge; roots further apart (but within [`LOOSE_CLUSTER`]) merge only
//! when the polynomial's Taylor coefficients at the merged center vanish up to
//! the merged multiplicity, i.e. when the data really describes a multiple root
//! that floating-point perturbation has split into a ring.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Polynomial;
use crate::error::{Error, Result};

/// Relative distance beyond which split roots are never considered one cluster.
const LOOSE_CLUSTER: f64 = 1e-2;
/// Relative size of the low-order Taylor coefficients accepted as zero.
const TAYLOR_ZERO: f64 = 1e-10;
/// Minimum relative distance a multiple-root center may move during refinement.
const REFINE_RADIUS: f64 = 1e-4;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub z: Complex64,
    pub multiplicity: usize,
}

/// Roots with multiplicities, sorted by real then imaginary part.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.retain(|r| r.multiplicity > 0);
        roots.sort_by(|a, b| {
            a.z.re
                .total_cmp(&b.z.re)
                .then_with(|| a.z.im.total_cmp(&b.z.im))
        });
        Self { roots }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn iter(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Number of distinct roots.
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    /// Sum of multiplicities.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Every root repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.z, r.multiplicity))
            .collect()
    }

    pub fn filter(&self, pred: impl Fn(&Root) -> bool) -> RootSet {
        RootSet::new(self.roots.iter().copied().filter(|r| pred(r)).collect())
    }

    pub fn count_where(&self, pred: impl Fn(&Root) -> bool) -> usize {
        self.roots
            .iter()
            .filter(|r| pred(r))
            .map(|r| r.multiplicity)
            .sum()
    }

    /// Location-wise union keeping the larger multiplicity of matched roots.
    pub fn union_max(&self, other: &RootSet, tol: f64) -> RootSet {
        let mut out = self.roots.clone();
        for r in &other.roots {
            match out.iter_mut().find(|o| close(o.z, r.z, tol)) {
                Some(o) => o.multiplicity = o.multiplicity.max(r.multiplicity),
                None => out.push(*r),
            }
        }
        RootSet::new(out)
    }

    /// Location-wise union summing multiplicities of matched roots.
    pub fn union_sum(&self, other: &RootSet, tol: f64) -> RootSet {
        let mut out = self.roots.clone();
        for r in &other.roots {
            match out.iter_mut().find(|o| close(o.z, r.z, tol)) {
                Some(o) => o.multiplicity += r.multiplicity,
                None => out.push(*r),
            }
        }
        RootSet::new(out)
    }
}

pub(crate) fn rel_scale(a: Complex64, b: Complex64) -> f64 {
    1.0f64.max(a.norm()).max(b.norm())
}

pub(crate) fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * rel_scale(a, b)
}

/// All roots of `p`, with the default clustering tolerance.
pub fn poly_roots(p: &Polynomial) -> Result<RootSet> {
    poly_roots_with(p, crate::Tolerances::default().cluster)
}

pub fn poly_roots_with(p: &Polynomial, cluster_tol: f64) -> Result<RootSet> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let coeffs: Vec<Complex64> = p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let clusters = complex_poly_roots(&coeffs, cluster_tol)?;
    Ok(RootSet::new(conjugate_symmetrize(clusters, cluster_tol)))
}

/// Roots of a complex-coefficient polynomial (ascending coefficients, nonzero leading
/// coefficient) as `(location, multiplicity)` clusters.
pub fn complex_poly_roots(coeffs: &[Complex64], cluster_tol: f64) -> Result<Vec<(Complex64, usize)>> {
    let mut coeffs = coeffs.to_vec();
    while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    let zeros_at_origin = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let reduced = &coeffs[zeros_at_origin..];
    let mut raw = raw_roots(reduced)?;
    for z in raw.iter_mut() {
        *z = polish(reduced, *z);
    }
    raw.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros_at_origin));
    Ok(cluster(&coeffs, raw, cluster_tol))
}

fn raw_roots(c: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = c.len() - 1;
    match deg {
        0 => Ok(Vec::new()),
        1 => Ok(vec![-c[0] / c[1]]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * cc).sqrt();
            // pick the sign that avoids cancellation
            let q = if (b.conj() * disc).re >= 0.0 {
                -0.5 * (b + disc)
            } else {
                -0.5 * (b - disc)
            };
            if q.norm() == 0.0 {
                Ok(vec![Complex64::new(0.0, 0.0); 2])
            } else {
                Ok(vec![q / a, cc / q])
            }
        }
        _ => companion_eigenvalues(c),
    }
}

/// Shifts tried, relative to the root scale, when the plain companion
/// iteration stalls (exactly symmetric root patterns can defeat the shifts of
/// the QR iteration).
const RETRY_SHIFTS: [f64; 3] = [0.331_712_4, -0.577_215_665, 0.141_421_356];

fn companion_eigenvalues(c: &[Complex64]) -> Result<Vec<Complex64>> {
    if let Some(roots) = companion_schur(c) {
        return Ok(roots);
    }
    let n = c.len() - 1;
    let scale = (c[0].norm() / c[n].norm()).powf(1.0 / n as f64).max(1.0);
    for shift in RETRY_SHIFTS {
        let sigma = Complex64::new(shift * scale, 0.5 * shift * scale);
        if let Some(roots) = companion_schur(&taylor_shift(c, sigma)) {
            return Ok(roots.into_iter().map(|z| z + sigma).collect());
        }
    }
    Err(Error::EigenSolveFailure { omega: f64::NAN })
}

fn companion_schur(c: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    balance(&mut m);
    let (_, t) = Schur::try_new(m, f64::EPSILON, SCHUR_MAX_ITER)?.unpack();
    Some((0..n).map(|i| t[(i, i)]).collect())
}

/// Coefficients of `p(z + sigma)`.
fn taylor_shift(c: &[Complex64], sigma: Complex64) -> Vec<Complex64> {
    let mut a = c.to_vec();
    let n = a.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            let next = a[k + 1];
            a[k] += sigma * next;
        }
    }
    a
}

/// Diagonal similarity scaling by powers of two so that row and column norms
/// are comparable.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let l1 = |z: Complex64| z.re.abs() + z.im.abs();
    for _ in 0..100 {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += l1(m[(j, i)]);
                    r += l1(m[(i, j)]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let total = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * total {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn polish(c: &[Complex64], mut z: Complex64) -> Complex64 {
    let (mut pz, _) = horner(c, z);
    for _ in 0..4 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = horner(c, cand);
        if pc.norm().partial_cmp(&pz.norm()) != Some(std::cmp::Ordering::Less) {
            break;
        }
        z = cand;
        pz = pc;
    }
    z
}

/// Taylor coefficients `p^(k)(z) / k!` for `k = 0..=deg` by repeated synthetic division.
fn taylor(c: &[Complex64], z: Complex64) -> Vec<Complex64> {
    let mut work = c.to_vec();
    let mut out = Vec::with_capacity(c.len());
    while !work.is_empty() {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut quotient = vec![Complex64::new(0.0, 0.0); work.len().saturating_sub(1)];
        for k in (0..work.len()).rev() {
            acc = acc * z + work[k];
            if k > 0 {
                quotient[k - 1] = acc;
            }
        }
        out.push(acc);
        work = quotient;
    }
    out
}

fn is_multiple_root(c: &[Complex64], z: Complex64, m: usize) -> bool {
    let t = taylor(c, z);
    let abs_c: Vec<Complex64> = c.iter().map(|a| Complex64::new(a.norm(), 0.0)).collect();
    let s = taylor(&abs_c, Complex64::new(z.norm(), 0.0));
    (0..m.min(t.len())).all(|k| t[k].norm() <= TAYLOR_ZERO * s[k].re)
}

fn derivative(c: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut d = c.to_vec();
    for _ in 0..order {
        d = d
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &a)| a * i as f64)
            .collect();
    }
    d
}

/// Newton on the `(m-1)`-th derivative, where an `m`-fold root is simple.
fn refine_center(c: &[Complex64], z: Complex64, m: usize, radius: f64) -> Complex64 {
    let d = derivative(c, m - 1);
    if d.len() < 2 {
        return z;
    }
    let start = z;
    let mut z = z;
    let (mut pz, _) = horner(&d, z);
    for _ in 0..8 {
        let (p, dp) = horner(&d, z);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = horner(&d, cand);
        if pc.norm().partial_cmp(&pz.norm()) != Some(std::cmp::Ordering::Less) || (cand - start).norm() > radius {
            break;
        }
        z = cand;
        pz = pc;
    }
    z
}

/// Polishing can pull the members of a split multiple root together, so the
/// member spread alone understates how far the true center may be.
fn refine_radius(spread: f64, z: Complex64) -> f64 {
    spread.max(REFINE_RADIUS * rel_scale(z, z))
}

struct Cluster {
    center: Complex64,
    mult: usize,
    members: Vec<Complex64>,
}

fn cluster(coeffs: &[Complex64], raw: Vec<Complex64>, tol: f64) -> Vec<(Complex64, usize)> {
    let mut clusters: Vec<Cluster> = raw
        .into_iter()
        .map(|z| Cluster { center: z, mult: 1, members: vec![z] })
        .collect();
    loop {
        let mut best: Option<(f64, usize, usize, Complex64)> = None;
        for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (a, b) = (&clusters[i], &clusters[j]);
                let rel = (a.center - b.center).norm() / rel_scale(a.center, b.center);
                if best.as_ref().is_some_and(|(r, ..)| *r <= rel) || rel > LOOSE_CLUSTER {
                    continue;
                }
                let m = a.mult + b.mult;
                let mean = (a.center * a.mult as f64 + b.center * b.mult as f64) / m as f64;
                let center = if rel <= tol {
                    Some(mean)
                } else {
                    let radius = refine_radius((a.center - b.center).norm(), mean);
                    let refined = refine_center(coeffs, mean, m, radius);
                    if is_multiple_root(coeffs, refined, m) {
                        Some(refined)
                    } else if is_multiple_root(coeffs, mean, m) {
                        Some(mean)
                    } else {
                        None
                    }
                };
                if let Some(center) = center {
                    best = Some((rel, i, j, center));
                }
            }
        }
        let Some((_, i, j, center)) = best else { break };
        let b = clusters.remove(j);
        let a = &mut clusters[i];
        a.mult += b.mult;
        a.members.extend(b.members);
        a.center = center;
    }
    clusters
        .into_iter()
        .map(|c| {
            if c.mult > 1 {
                let spread = c
                    .members
                    .iter()
                    .fold(0.0f64, |m, z| m.max((z - c.center).norm()));
                (refine_center(coeffs, c.center, c.mult, refine_radius(spread, c.center)), c.mult)
            } else {
                (c.center, 1)
            }
        })
        .collect()
}

/// For real-coefficient polynomials: snap near-real clusters onto the real axis
/// and average conjugate partners.
fn conjugate_symmetrize(clusters: Vec<(Complex64, usize)>, tol: f64) -> Vec<Root> {
    let mut out = Vec::with_capacity(clusters.len());
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (z, m) in clusters {
        if z.im.abs() <= tol * rel_scale(z, z) {
            out.push(Root { z: Complex64::new(z.re, 0.0), multiplicity: m });
        } else if z.im > 0.0 {
            upper.push((z, m));
        } else {
            lower.push((z, m));
        }
    }
    for (z, m) in upper {
        let partner = lower
            .iter()
            .enumerate()
            .filter(|(_, (_, lm))| *lm == m)
            .min_by(|(_, (a, _)), (_, (b, _))| {
                (a.conj() - z).norm().total_cmp(&(b.conj() - z).norm())
            })
            .map(|(i, _)| i);
        match partner {
            Some(i) => {
                let (w, _) = lower.remove(i);
                let avg = (z + w.conj()) / 2.0;
                out.push(Root { z: avg, multiplicity: m });
                out.push(Root { z: avg.conj(), multiplicity: m });
            }
            None => out.push(Root { z, multiplicity: m }),
        }
    }
    out.extend(lower.into_iter().map(|(z, m)| Root { z, multiplicity: m }));
    out
}
