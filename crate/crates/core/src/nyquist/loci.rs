//! Continuously ordered eigenvalue loci and their merging into closed curves.

use itertools::Itertools;
use num_complex::Complex64;

use super::grid::{FrequencyGrid, Sampler};
use super::ClosedCurve;
use crate::error::{Error, Result};
use crate::tfmatrix::TransferMatrix;
use crate::Tolerances;

/// Largest size for which matching tries every pairing.
const EXHAUSTIVE_MAX: usize = 6;

#[derive(Clone, Debug, PartialEq)]
pub struct LocusSet {
    pub omegas: Vec<f64>,
    /// `branches[i][k]` is eigenvalue `i` at grid point `k`.
    pub branches: Vec<Vec<Complex64>>,
    /// The end of branch `i` (at `ω = +∞`) joins the start of branch `permutation_at_infinity[i]`.
    pub permutation_at_infinity: Vec<usize>,
}

impl LocusSet {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    /// Distance between the start and end of branch `i`.
    pub fn closure_gap(&self, i: usize) -> f64 {
        let b = &self.branches[i];
        match (b.first(), b.last()) {
            (Some(a), Some(z)) => (z - a).norm(),
            _ => 0.0,
        }
    }

    pub fn is_closed(&self, i: usize, tol: &Tolerances) -> bool {
        let b = &self.branches[i];
        b.first().is_none_or(|a| self.closure_gap(i) <= tol.closure * a.norm().max(1.0))
    }
}

pub fn eigen_loci(p: &TransferMatrix, grid: &FrequencyGrid, tol: &Tolerances) -> Result<LocusSet> {
    let sampler = Sampler::new(p, tol)?;
    let n = p.rows();
    let mut branches: Vec<Vec<Complex64>> = vec![Vec::with_capacity(grid.len()); n];
    let mut prev: Option<Vec<Complex64>> = None;
    for point in grid.points() {
        let eig = sampler.eigenvalues(*point)?;
        if eig.len() != n {
            return Err(Error::EigenSolveFailure { omega: point.omega() });
        }
        let ordered = match &prev {
            None => eig,
            Some(prev) => match_eigenvalues(prev, &eig).into_iter().map(|j| eig[j]).collect(),
        };
        for (b, v) in branches.iter_mut().zip(&ordered) {
            b.push(*v);
        }
        prev = Some(ordered);
    }
    let ends: Vec<Complex64> = branches.iter().filter_map(|b| b.last().copied()).collect();
    let starts: Vec<Complex64> = branches.iter().filter_map(|b| b.first().copied()).collect();
    let permutation_at_infinity = if n == 0 { Vec::new() } else { match_eigenvalues(&ends, &starts) };
    Ok(LocusSet { omegas: grid.omegas(), branches, permutation_at_infinity })
}

/// Assignment `perm` minimizing `Σ |to[perm[i]] − from[i]|`; ties favor fixed points.
pub(crate) fn match_eigenvalues(from: &[Complex64], to: &[Complex64]) -> Vec<usize> {
    let n = from.len();
    if n > EXHAUSTIVE_MAX {
        return greedy_match(from, to);
    }
    let scale = from.iter().chain(to).map(|z| z.norm()).fold(1.0, f64::max);
    let cost = |perm: &[usize]| -> f64 { perm.iter().enumerate().map(|(i, &j)| (to[j] - from[i]).norm()).sum() };
    let fixed = |perm: &[usize]| perm.iter().enumerate().filter(|(i, j)| i == *j).count();
    let mut best: Vec<usize> = (0..n).collect();
    let mut best_cost = cost(&best);
    for perm in (0..n).permutations(n) {
        let c = cost(&perm);
        let slack = 1e-12 * scale;
        if c < best_cost - slack || (c <= best_cost + slack && fixed(&perm) > fixed(&best)) {
            best_cost = c;
            best = perm;
        }
    }
    best
}

fn greedy_match(from: &[Complex64], to: &[Complex64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = from
        .iter()
        .enumerate()
        .flat_map(|(i, a)| to.iter().enumerate().map(move |(j, b)| ((b - a).norm(), i, j)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut perm = vec![usize::MAX; from.len()];
    let mut taken = vec![false; to.len()];
    for (_, i, j) in pairs {
        if perm[i] == usize::MAX && !taken[j] {
            perm[i] = j;
            taken[j] = true;
        }
    }
    perm
}

/// Follows each cycle of the permutation at infinity, concatenating branches.
pub fn merge_loci(loci: &LocusSet, tol: &Tolerances) -> Result<Vec<ClosedCurve>> {
    let n = loci.len();
    let mut seen = vec![false; n];
    let mut curves = Vec::new();
    for first in 0..n {
        if seen[first] {
            continue;
        }
        let mut members = vec![first];
        seen[first] = true;
        let mut j = loci.permutation_at_infinity[first];
        while j != first {
            if seen[j] {
                return Err(Error::ClosureFailure { gap: f64::INFINITY });
            }
            seen[j] = true;
            members.push(j);
            j = loci.permutation_at_infinity[j];
        }
        let mut points = Vec::new();
        let mut omegas = Vec::new();
        for (k, &m) in members.iter().enumerate() {
            let next = members[(k + 1) % members.len()];
            let (end, start) = (loci.branches[m].last(), loci.branches[next].first());
            if let (Some(end), Some(start)) = (end, start) {
                let gap = (end - start).norm();
                if gap > tol.closure * end.norm().max(1.0) {
                    return Err(Error::ClosureFailure { gap });
                }
            }
            points.extend_from_slice(&loci.branches[m]);
            omegas.extend_from_slice(&loci.omegas);
        }
        curves.push(ClosedCurve { points, omegas, member_branches: members });
    }
    Ok(curves)
}
