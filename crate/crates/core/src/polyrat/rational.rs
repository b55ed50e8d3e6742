use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{poly_roots_with, split_common, Polynomial, RootSet};
use crate::error::{Error, Result};
use crate::Tolerances;

/// Coefficients of a sum smaller than this fraction of the summands' size are
/// treated as cancellation residue.
const CHOP_REL: f64 = 1e-12;

/// Reduced rational function `num / den` with a monic denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn rat_arith(
    a: &RationalFunction,
    b: &RationalFunction,
    op: RatOp,
    tol: &Tolerances,
) -> Result<RationalFunction> {
    match op {
        RatOp::Add => a.add_with(b, tol),
        RatOp::Sub => a.sub_with(b, tol),
        RatOp::Mul => a.mul_with(b, tol),
        RatOp::Div => a.div_with(b, tol),
    }
}

pub fn rat_eval(f: &RationalFunction, s: Complex64, tol: &Tolerances) -> Result<Complex64> {
    f.eval(s, tol.pole_guard)
}

impl RationalFunction {
    /// Builds and reduces `num / den` with default tolerances.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        Self::with_tol(num, den, &Tolerances::default())
    }

    pub fn with_tol(num: Polynomial, den: Polynomial, tol: &Tolerances) -> Result<Self> {
        reduce(num, den, None, tol)
    }

    /// Reduces `num / den` given the roots of `den`, which are trusted over
    /// a fresh factorization of the expanded product.
    pub(crate) fn with_den_roots(num: Polynomial, den: Polynomial, den_roots: RootSet, tol: &Tolerances) -> Result<Self> {
        reduce(num, den, Some(den_roots), tol)
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::new(num.to_vec()), Polynomial::new(den.to_vec()))
    }

    pub fn zero() -> Self {
        Self { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self { num: Polynomial::constant(c), den: Polynomial::one() }
    }

    pub fn from_poly(p: Polynomial) -> Self {
        Self { num: p, den: Polynomial::one() }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.den.degree() == Some(0) && self.num.degree().unwrap_or(0) == 0
    }

    pub fn eval(&self, s: Complex64, pole_guard: f64) -> Result<Complex64> {
        let d = self.den.eval_complex(s);
        if d.norm() < pole_guard {
            return Err(Error::PoleEvaluation { row: 0, col: 0, s });
        }
        Ok(self.num.eval_complex(s) / d)
    }

    /// `lim_{|s|→∞}`; `None` when the function is improper.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        let dd = self.den.degree().unwrap_or(0);
        match self.num.degree() {
            None => Some(0.0),
            Some(nd) if nd < dd => Some(0.0),
            Some(nd) if nd == dd => Some(self.num.leading() / self.den.leading()),
            _ => None,
        }
    }

    pub fn is_proper(&self) -> bool {
        self.limit_at_infinity().is_some()
    }

    pub fn poles(&self, tol: &Tolerances) -> Result<RootSet> {
        if self.den.degree() == Some(0) {
            return Ok(RootSet::empty());
        }
        poly_roots_with(&self.den, tol.cluster)
    }

    pub fn zeros(&self, tol: &Tolerances) -> Result<RootSet> {
        if self.num.degree().unwrap_or(0) == 0 {
            return Ok(RootSet::empty());
        }
        poly_roots_with(&self.num, tol.cluster)
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        Self { num: self.num.scale(k), den: self.den.clone() }
    }

    pub fn add_with(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.combine(other, 1.0, tol)
    }

    pub fn sub_with(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        self.combine(other, -1.0, tol)
    }

    pub fn mul_with(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        if self.is_constant() {
            return Ok(other.scale(self.num.leading()));
        }
        if other.is_constant() {
            return Ok(self.scale(other.num.leading()));
        }
        let num_roots = self.zeros(tol)?.union_sum(&other.zeros(tol)?, 0.0);
        let den_roots = self.poles(tol)?.union_sum(&other.poles(tol)?, 0.0);
        assemble(&self.num * &other.num, &self.den * &other.den, &num_roots, &den_roots, tol)
    }

    pub fn div_with(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZeroFunction);
        }
        self.mul_with(&other.recip()?, tol)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZeroFunction);
        }
        let lead = self.num.leading();
        Ok(Self { num: self.den.scale(1.0 / lead), den: self.num.scale(1.0 / lead) })
    }

    fn combine(&self, other: &Self, sign: f64, tol: &Tolerances) -> Result<Self> {
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.scale(sign));
        }
        let rx = self.poles(tol)?;
        let ry = other.poles(tol)?;
        let split = split_common(&rx, &ry, tol.root);
        let (xf, yf, den_roots) = if split.common.is_empty() {
            (other.den.clone(), self.den.clone(), rx.union_sum(&ry, 0.0))
        } else {
            let rest_y = RootSet::new(
                split.rest_b.iter().map(|&z| super::Root { z, multiplicity: 1 }).collect(),
            );
            (
                Polynomial::from_roots(&split.rest_b),
                Polynomial::from_roots(&split.rest_a),
                rx.union_sum(&rest_y, 0.0),
            )
        };
        let t1 = &self.num * &xf;
        let t2 = (&other.num * &yf).scale(sign);
        let scale = t1.norm_inf().max(t2.norm_inf());
        let num = (&t1 + &t2).chop(scale, CHOP_REL);
        let den = &self.den * &xf;
        reduce(num, den, Some(den_roots), tol)
    }

    /// Compares normalized coefficients; `rel` is relative to `1 + max |coeff|`.
    pub fn approx_eq(&self, other: &Self, rel: f64) -> bool {
        self.num.degree() == other.num.degree()
            && self.den.degree() == other.den.degree()
            && self.num.distance(&other.num) <= rel
            && self.den.distance(&other.den) <= rel
    }
}

fn reduce(num: Polynomial, den: Polynomial, den_roots: Option<RootSet>, tol: &Tolerances) -> Result<RationalFunction> {
    if den.is_zero() {
        return Err(Error::DivisionByZeroFunction);
    }
    if num.is_zero() {
        return Ok(RationalFunction::zero());
    }
    if num.degree() == Some(0) || den.degree() == Some(0) {
        return Ok(normalized(num, den));
    }
    let rd = match den_roots {
        Some(r) if r.total_multiplicity() == den.degree().unwrap_or(0) => r,
        _ => poly_roots_with(&den, tol.cluster)?,
    };
    let (num, rd, deflated) = deflate_common(num, &rd, tol);
    let den = if deflated { Polynomial::from_roots(&expand(&rd)).scale(den.leading()) } else { den };
    if num.degree() == Some(0) || den.degree() == Some(0) {
        return Ok(normalized(num, den));
    }
    let rn = poly_roots_with(&num, tol.cluster)?;
    assemble(num, den, &rn, &rd, tol)
}

fn expand(roots: &RootSet) -> Vec<Complex64> {
    roots.iter().flat_map(|r| std::iter::repeat_n(r.z, r.multiplicity)).collect()
}

/// `|p(z)|` relative to the size of its terms at `z`.
fn relative_residual(p: &Polynomial, z: Complex64) -> f64 {
    let size = p.coeffs().iter().rev().fold(0.0, |acc, c| acc * z.norm() + c.abs());
    if size == 0.0 { 0.0 } else { p.eval_complex(z).norm() / size }
}

/// Divides out of `num` every denominator root at which it vanishes.
///
/// Roots of a sum with a repeated common factor scatter by `ε^(1/k)` and no
/// longer match the denominator's, so vanishing is tested by evaluation at the
/// known denominator roots instead. Complex roots are removed in conjugate pairs.
fn deflate_common(mut num: Polynomial, den_roots: &RootSet, tol: &Tolerances) -> (Polynomial, RootSet, bool) {
    let mut rest: Vec<super::Root> = den_roots.iter().copied().collect();
    let mut deflated = false;
    for i in 0..rest.len() {
        let z = rest[i].z;
        if z.im < 0.0 {
            continue;
        }
        let factor = if z.im == 0.0 {
            Polynomial::new(vec![-z.re, 1.0])
        } else {
            Polynomial::new(vec![z.norm_sqr(), -2.0 * z.re, 1.0])
        };
        let partner = (z.im > 0.0).then(|| rest.iter().position(|r| r.z == z.conj())).flatten();
        if z.im > 0.0 && partner.is_none() {
            continue;
        }
        while rest[i].multiplicity > 0
            && partner.is_none_or(|j| rest[j].multiplicity > 0)
            && num.degree() >= factor.degree()
            && relative_residual(&num, z) <= tol.root
        {
            num = num.div_rem(&factor).0;
            rest[i].multiplicity -= 1;
            if let Some(j) = partner {
                rest[j].multiplicity -= 1;
            }
            deflated = true;
        }
    }
    (num, RootSet::new(rest), deflated)
}

/// Cancels the roots shared by `num_roots` and `den_roots` (the roots of
/// `num` and `den`). Products are factored from their operands' roots rather
/// than re-solved, since expanded products of clustered factors are badly
/// conditioned.
fn assemble(
    num: Polynomial,
    den: Polynomial,
    num_roots: &RootSet,
    den_roots: &RootSet,
    tol: &Tolerances,
) -> Result<RationalFunction> {
    let split = split_common(num_roots, den_roots, tol.root);
    if split.common.is_empty() {
        return Ok(normalized(num, den));
    }
    let gain = num.leading() / den.leading();
    Ok(RationalFunction {
        num: Polynomial::from_roots(&split.rest_a).scale(gain),
        den: Polynomial::from_roots(&split.rest_b),
    })
}

fn normalized(num: Polynomial, den: Polynomial) -> RationalFunction {
    let k = 1.0 / den.leading();
    RationalFunction { num: num.scale(k), den: den.monic() }
}

impl From<f64> for RationalFunction {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

macro_rules! default_tol_op {
    ($tr:ident, $m:ident, $with:ident) => {
        impl $tr for &RationalFunction {
            type Output = RationalFunction;
            /// # Panics
            /// On division by the zero function; use the `*_with` methods to handle that case.
            fn $m(self, rhs: &RationalFunction) -> RationalFunction {
                self.$with(rhs, &Tolerances::default())
                    .expect("rational arithmetic failed")
            }
        }
        impl $tr for RationalFunction {
            type Output = RationalFunction;
            fn $m(self, rhs: RationalFunction) -> RationalFunction {
                (&self).$m(&rhs)
            }
        }
    };
}
default_tol_op!(Add, add, add_with);
default_tol_op!(Sub, sub, sub_with);
default_tol_op!(Mul, mul, mul_with);
default_tol_op!(Div, div, div_with);

impl Neg for &RationalFunction {
    type Output = RationalFunction;
    fn neg(self) -> RationalFunction {
        self.scale(-1.0)
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
