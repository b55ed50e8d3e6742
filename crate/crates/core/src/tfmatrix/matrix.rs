use std::fmt;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polyrat::{complex_poly_roots, lcm_roots, Polynomial, Root, RationalFunction, RootSet};
use crate::Tolerances;

/// Entry poles closer than this (relative) are reported as one location.
pub(crate) const POLE_UNION_TOL: f64 = 1e-6;

/// Above this size determinants use elimination instead of cofactor expansion.
const COFACTOR_MAX: usize = 2;

/// Row-major grid of rational functions.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFunction>,
}

impl TransferMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalFunction>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("empty {rows}x{cols} matrix")));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<RationalFunction>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn scalar(f: RationalFunction) -> Self {
        Self { rows: 1, cols: 1, entries: vec![f] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag((0..n).map(|_| RationalFunction::one()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![RationalFunction::zero(); rows * cols] }
    }

    pub fn diag(d: Vec<RationalFunction>) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, f) in d.into_iter().enumerate() {
            m.entries[i * n + i] = f;
        }
        m
    }

    pub fn from_constant(m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| RationalFunction::constant(m[(i, j)]))
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: RationalFunction) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RationalFunction::is_zero)
    }

    pub(crate) fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|f| f.scale(k))
    }

    fn map(&self, f: impl Fn(&RationalFunction) -> RationalFunction) -> Self {
        Self { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&RationalFunction, &RationalFunction) -> Result<RationalFunction>,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| f(a, b))
            .collect::<Result<_>>()?;
        Ok(Self { rows: self.rows, cols: self.cols, entries })
    }

    pub fn add(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.zip_with(other, |a, b| a.add_with(b, tol))
    }

    pub fn sub(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.zip_with(other, |a, b| a.sub_with(b, tol))
    }

    pub fn mul(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = RationalFunction::zero();
                for k in 0..self.cols {
                    let term = self.get(i, k).mul_with(other.get(k, j), tol)?;
                    acc = acc.add_with(&term, tol)?;
                }
                entries.push(acc);
            }
        }
        Ok(Self { rows: self.rows, cols: other.cols, entries })
    }

    /// `I + self`.
    pub fn plus_identity(&self, tol: &Tolerances) -> Result<Self> {
        let n = self.require_square()?;
        Self::identity(n).add(self, tol)
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Self { rows: rows.len(), cols: cols.len(), entries }
    }

    fn minor_matrix(&self, skip_row: usize, skip_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != skip_col).collect();
        self.submatrix(&rows, &cols)
    }

    pub fn det(&self, tol: &Tolerances) -> Result<RationalFunction> {
        let n = self.require_square()?;
        if n <= COFACTOR_MAX {
            self.det_cofactor(tol)
        } else {
            self.det_elimination(tol)
        }
    }

    fn det_cofactor(&self, tol: &Tolerances) -> Result<RationalFunction> {
        match self.rows {
            1 => Ok(self.entries[0].clone()),
            2 => {
                let ad = self.get(0, 0).mul_with(self.get(1, 1), tol)?;
                let bc = self.get(0, 1).mul_with(self.get(1, 0), tol)?;
                ad.sub_with(&bc, tol)
            }
            n => {
                let mut acc = RationalFunction::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let term = a.mul_with(&self.minor_matrix(0, j).det_cofactor(tol)?, tol)?;
                    acc = if j % 2 == 0 { acc.add_with(&term, tol)? } else { acc.sub_with(&term, tol)? };
                }
                Ok(acc)
            }
        }
    }

    /// Fraction-free (Bareiss) elimination on the polynomial matrix obtained by
    /// clearing each row's denominators, followed by a single reduction.
    fn det_elimination(&self, tol: &Tolerances) -> Result<RationalFunction> {
        let n = self.rows;
        let mut row_dens = Vec::with_capacity(n);
        let mut den_roots = Vec::new();
        let mut a: Vec<Vec<Polynomial>> = Vec::with_capacity(n);
        for i in 0..n {
            let dens: Vec<Polynomial> = (0..n).map(|j| self.get(i, j).den().clone()).collect();
            let roots = lcm_roots(&dens, tol.root);
            let d = Polynomial::from_roots(&roots);
            den_roots.extend(roots);
            a.push(
                (0..n)
                    .map(|j| {
                        let f = self.get(i, j);
                        f.num() * &d.div_rem(f.den()).0
                    })
                    .collect(),
            );
            row_dens.push(d);
        }
        let mut sign = 1.0;
        let mut prev = Polynomial::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(RationalFunction::zero());
            };
            if p != k {
                a.swap(p, k);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = v.div_rem(&prev).0;
                }
                a[i][k] = Polynomial::zero();
            }
            prev = a[k][k].clone();
        }
        let den = row_dens.iter().fold(Polynomial::one(), |acc, d| &acc * d);
        let den_roots = den_roots
            .into_iter()
            .fold(RootSet::empty(), |acc, z| acc.union_sum(&RootSet::new(vec![Root { z, multiplicity: 1 }]), 0.0));
        RationalFunction::with_den_roots(a[n - 1][n - 1].scale(sign), den, den_roots, tol)
    }

    /// Adjugate over determinant. Cofactors of size above 2 come from elimination.
    pub fn inverse(&self, tol: &Tolerances) -> Result<Self> {
        let n = self.require_square()?;
        let det = self.det(tol)?;
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        if n == 1 {
            return Ok(Self::scalar(det.recip()?));
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor_matrix(i, j).det(tol)?;
                let c = if (i + j) % 2 == 0 { c } else { c.scale(-1.0) };
                inv.set(j, i, c.div_with(&det, tol)?);
            }
        }
        Ok(inv)
    }

    pub fn eval(&self, s: Complex64, tol: &Tolerances) -> Result<DMatrix<Complex64>> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self.get(i, j).eval(s, tol.pole_guard).map_err(|e| match e {
                    Error::PoleEvaluation { s, .. } => Error::PoleEvaluation { row: i, col: j, s },
                    other => other,
                })?;
            }
        }
        Ok(m)
    }

    /// `lim_{|s|→∞} self(s)`.
    pub fn limit_at_infinity(&self) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self
                    .get(i, j)
                    .limit_at_infinity()
                    .ok_or(Error::NotProper { row: i, col: j })?;
            }
        }
        Ok(m)
    }

    pub fn is_proper(&self) -> bool {
        self.entries.iter().all(RationalFunction::is_proper)
    }

    /// Union of entry pole locations; a location's multiplicity is the
    /// largest it has in any single entry.
    pub fn poles(&self, tol: &Tolerances) -> Result<RootSet> {
        let mut acc = RootSet::empty();
        for f in &self.entries {
            acc = acc.union_max(&f.poles(tol)?, POLE_UNION_TOL);
        }
        Ok(acc)
    }

    /// Coefficients `c_0..c_n` of `det(λI - self) = Σ c_k λ^k`, as rational functions of `s`.
    pub fn char_poly(&self, tol: &Tolerances) -> Result<CharPoly> {
        let n = self.require_square()?;
        let mut coeffs = vec![RationalFunction::zero(); n + 1];
        coeffs[n] = RationalFunction::one();
        for k in 1..=n {
            let mut e = RationalFunction::zero();
            for idx in (0..n).combinations(k) {
                e = e.add_with(&self.submatrix(&idx, &idx).det(tol)?, tol)?;
            }
            coeffs[n - k] = if k % 2 == 0 { e } else { e.scale(-1.0) };
        }
        Ok(CharPoly { coeffs })
    }

    /// Reduced entrywise comparison.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.entries.iter().zip(&other.entries).all(|(a, b)| a.approx_eq(b, rel))
    }
}

/// Characteristic polynomial of a square transfer matrix, in `λ`, with
/// coefficients that are rational functions of `s`.
#[derive(Clone, Debug)]
pub struct CharPoly {
    coeffs: Vec<RationalFunction>,
}

impl CharPoly {
    pub fn coeffs(&self) -> &[RationalFunction] {
        &self.coeffs
    }

    /// Eigenvalues of `P(s)`, each repeated by multiplicity.
    pub fn eigenvalues_at(&self, s: Complex64, tol: &Tolerances) -> Result<Vec<Complex64>> {
        let c = self
            .coeffs
            .iter()
            .map(|f| f.eval(s, tol.pole_guard))
            .collect::<Result<Vec<_>>>()?;
        roots_of(&c, s.im)
    }

    /// Eigenvalues of `lim_{|s|→∞} P(s)`.
    pub fn eigenvalues_at_infinity(&self) -> Result<Vec<Complex64>> {
        let c = self
            .coeffs
            .iter()
            .map(|f| f.limit_at_infinity().map(|v| Complex64::new(v, 0.0)))
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::NotProper { row: 0, col: 0 })?;
        roots_of(&c, f64::INFINITY)
    }
}

fn roots_of(c: &[Complex64], omega: f64) -> Result<Vec<Complex64>> {
    let clusters = complex_poly_roots(c, Tolerances::default().cluster)
        .map_err(|_| Error::EigenSolveFailure { omega })?;
    Ok(clusters
        .into_iter()
        .flat_map(|(z, m)| std::iter::repeat_n(z, m))
        .collect())
}

pub fn tm_eval(p: &TransferMatrix, s: Complex64, tol: &Tolerances) -> Result<DMatrix<Complex64>> {
    p.eval(s, tol)
}

pub fn tm_det(p: &TransferMatrix, tol: &Tolerances) -> Result<RationalFunction> {
    p.det(tol)
}

pub fn tm_inverse(p: &TransferMatrix, tol: &Tolerances) -> Result<TransferMatrix> {
    p.inverse(tol)
}

impl fmt::Display for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row = (0..self.cols).map(|j| self.get(i, j).to_string()).join(", ");
            writeln!(f, "[{row}]")?;
        }
        Ok(())
    }
}
