#![allow(dead_code)]

use mimostab::polyrat::RationalFunction;
use mimostab::tfmatrix::TransferMatrix;
use mimostab::Tolerances;

pub mod checks;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
    RationalFunction::from_coeffs(num, den).unwrap()
}

pub fn c(v: f64) -> RationalFunction {
    RationalFunction::constant(v)
}

pub fn tm(rows: Vec<Vec<RationalFunction>>) -> TransferMatrix {
    TransferMatrix::from_rows(rows).unwrap()
}

pub fn scalar(num: &[f64], den: &[f64]) -> TransferMatrix {
    TransferMatrix::scalar(rf(num, den))
}

pub fn lag(k: f64, a: f64) -> RationalFunction {
    rf(&[k], &[a, 1.0])
}

pub fn hidden_mode_pair() -> (TransferMatrix, TransferMatrix) {
    let z = RationalFunction::zero;
    let p1 = tm(vec![
        vec![lag(1.0, 1.0), lag(1.0, 2.0), lag(1.0, -1.0)],
        vec![z(), lag(2.0, 2.0), lag(1.0, 1.0)],
        vec![z(), z(), rf(&[2.0, 1.0], &[-1.0, 1.0])],
    ]);
    let p2 = tm(vec![
        vec![lag(1.0, 1.0), lag(1.0, -1.0), lag(1.0, 2.0)],
        vec![z(), lag(2.0, 2.0), lag(1.0, 1.0)],
        vec![z(), z(), rf(&[2.0, 1.0], &[-1.0, 1.0])],
    ]);
    (p1, p2)
}

/// Open-loop stable plant whose eigenvalue loci do not close individually.
pub fn open_loci_plant() -> TransferMatrix {
    tm(vec![
        vec![c(0.0), c(1.0)],
        vec![rf(&[-3.0, 3.0], &[1.0, 1.0]), c(-3.0)],
    ])
}

/// Plant with eigenvalues `1/(s+1)` twice, whatever `b`.
pub fn nonuniform_plant(b: f64) -> TransferMatrix {
    let l = lag(1.0, 1.0);
    let g = lag(b, 2.0);
    tm(vec![
        vec![&l + &g, g.clone()],
        vec![-&g, &l - &g],
    ])
}

/// Triangular plant with a large off-diagonal coupling `b`.
pub fn coupled_plant(b: f64) -> TransferMatrix {
    tm(vec![
        vec![lag(1.0, 1.0), lag(b, 1.0)],
        vec![c(0.0), lag(1.0, 1.0)],
    ])
}

/// `(6s² + s + 3)/(s² + 3s + 2)`: positive real, Hermitian part touches zero.
pub fn touching_pr() -> TransferMatrix {
    scalar(&[3.0, 1.0, 6.0], &[2.0, 3.0, 1.0])
}

/// `(s + 3)/((s + 1)(s + 2))`.
pub fn lead_lag() -> TransferMatrix {
    scalar(&[3.0, 1.0], &[2.0, 3.0, 1.0])
}

/// `5(s + 10)²/(s + 0.3)³`.
pub fn crossing_stable() -> TransferMatrix {
    let num = [500.0, 100.0, 5.0];
    let den = [0.027, 0.27, 0.9, 1.0];
    scalar(&num, &den)
}

/// `(1 - 2s)/(1 + s)`.
pub fn limit_on_segment() -> TransferMatrix {
    scalar(&[1.0, -2.0], &[1.0, 1.0])
}

pub fn diag_lags() -> TransferMatrix {
    TransferMatrix::diag(vec![lag(1.0, 1.0), lag(1.0, 1.0)])
}

pub mod random {
    use mimostab::polyrat::{Polynomial, RationalFunction};
    use mimostab::tfmatrix::{direct_stability, TransferMatrix};
    use mimostab::Tolerances;
    use num_complex::Complex64;
    use rand::Rng;

    /// Denominator factors: a real pole or a complex pair, on a half-unit lattice.
    fn random_factor(rng: &mut impl Rng) -> Polynomial {
        let re = loop {
            let v = rng.random_range(-6i32..=4) as f64 * 0.5;
            if v != 0.0 {
                break v;
            }
        };
        if rng.random_bool(0.3) {
            let im = rng.random_range(1i32..=6) as f64 * 0.5;
            Polynomial::from_roots(&[Complex64::new(re, im), Complex64::new(re, -im)])
        } else {
            Polynomial::from_roots(&[Complex64::new(re, 0.0)])
        }
    }

    fn random_entry(rng: &mut impl Rng, pool: &[Polynomial], max_degree: usize) -> RationalFunction {
        if rng.random_bool(0.2) {
            return RationalFunction::zero();
        }
        let mut den = Polynomial::one();
        for f in pool {
            let deg = den.degree().unwrap_or(0) + f.degree().unwrap_or(0);
            if deg <= max_degree && rng.random_bool(0.5) {
                den = &den * f;
            }
        }
        let nd = den.degree().unwrap_or(0);
        let num_deg = if nd == 0 { 0 } else { rng.random_range(0..=nd) };
        let coeffs: Vec<f64> = (0..=num_deg)
            .map(|_| rng.random_range(-8i32..=8) as f64 * 0.25)
            .collect();
        let num = Polynomial::new(coeffs);
        if num.is_zero() {
            return RationalFunction::zero();
        }
        RationalFunction::new(num, den).unwrap()
    }

    pub fn random_matrix(rng: &mut impl Rng, n: usize, max_degree: usize) -> TransferMatrix {
        let pool: Vec<Polynomial> = (0..3).map(|_| random_factor(rng)).collect();
        let entries = (0..n * n).map(|_| random_entry(rng, &pool, max_degree)).collect();
        TransferMatrix::new(n, n, entries).unwrap()
    }

    /// `det(I + P(∞))` is bounded away from zero, and every open- and
    /// closed-loop pole is further than `margin` from the imaginary axis.
    pub fn non_marginal(p: &TransferMatrix, margin: f64, tol: &Tolerances) -> bool {
        let Ok(limit) = p.limit_at_infinity() else { return false };
        let n = p.rows();
        if (limit + nalgebra::DMatrix::<f64>::identity(n, n)).determinant().abs() < 1e-3 {
            return false;
        }
        let Ok(open) = p.poles(tol) else { return false };
        if open.iter().any(|r| r.z.re.abs() < margin) {
            return false;
        }
        let Ok((s, _)) = mimostab::tfmatrix::closed_loop(p, None, tol) else { return false };
        let Ok(closed) = s.poles(tol) else { return false };
        if closed.iter().any(|r| r.z.re.abs() < margin) {
            return false;
        }
        direct_stability(p, None, tol).is_ok()
    }

    /// Well-posed, non-marginal random square system of size `1..=max_n`.
    pub fn random_system(rng: &mut impl Rng, max_n: usize, max_degree: usize) -> TransferMatrix {
        let tol = Tolerances::default();
        loop {
            let n = rng.random_range(1..=max_n);
            let p = random_matrix(rng, n, max_degree);
            if !p.is_zero() && non_marginal(&p, 1e-4, &tol) {
                return p;
            }
        }
    }
}
