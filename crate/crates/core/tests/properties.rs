mod common;

use common::checks::{chain_violation, positive_first_order_sum};
use common::random::random_system;
use common::*;
use mimostab::nyquist::uniform_margins;
use mimostab::passivity::{classify_pr, PrTier};
use mimostab::polyrat::{complex_poly_roots, poly_gcd, poly_roots, Polynomial, RationalFunction};
use mimostab::tfmatrix::{direct_stability, Status, TransferMatrix};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn lattice_roots() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-8i32..=8).prop_map(|k| k as f64 * 0.5), 1..5)
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..5)
}

fn point() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| Complex64::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn division_identity(a in coeffs(), b in coeffs()) {
        let (a, b) = (Polynomial::new(a), Polynomial::new(b));
        prop_assume!(!b.is_zero() && b.leading().abs() > 1e-2);
        let (q, r) = a.div_rem(&b);
        let back = &(&q * &b) + &r;
        prop_assert!(back.distance(&a) <= 1e-9 * (1.0 + a.norm_inf() + q.norm_inf() * b.norm_inf()));
        prop_assert!(r.is_zero() || r.degree() < b.degree());
    }

    #[test]
    fn roots_recovered_from_products(roots in lattice_roots()) {
        let zs: Vec<Complex64> = roots.iter().map(|r| Complex64::new(*r, 0.0)).collect();
        let p = Polynomial::from_roots(&zs);
        let found = poly_roots(&p).unwrap();
        prop_assert_eq!(found.total_multiplicity(), zs.len());
        for z in &zs {
            prop_assert!(found.iter().any(|r| (r.z - z).norm() < 1e-6));
        }
    }

    #[test]
    fn gcd_of_products_contains_common_factor(common in lattice_roots(), extra in lattice_roots()) {
        let shift = |v: &[f64], d: f64| v.iter().map(|r| Complex64::new(r + d, 0.0)).collect::<Vec<_>>();
        let c = shift(&common, 0.0);
        let a = Polynomial::from_roots(&[c.clone(), shift(&extra, 10.25)].concat());
        let b = Polynomial::from_roots(&[c.clone(), shift(&extra, -10.25)].concat());
        let g = poly_gcd(&a, &b, 1e-9);
        prop_assert_eq!(g.degree(), Some(c.len()));
        prop_assert!(g.distance(&Polynomial::from_roots(&c)) < 1e-6 * (1.0 + g.norm_inf()));
    }

    #[test]
    fn rational_arithmetic_agrees_with_evaluation(
        n1 in coeffs(), d1 in lattice_roots(), n2 in coeffs(), d2 in lattice_roots(), s in point()
    ) {
        let den = |r: &[f64]| Polynomial::from_roots(&r.iter().map(|x| Complex64::new(*x + 0.25, 0.0)).collect::<Vec<_>>());
        let f = RationalFunction::new(Polynomial::new(n1), den(&d1));
        let g = RationalFunction::new(Polynomial::new(n2), den(&d2));
        let (Ok(f), Ok(g)) = (f, g) else { return Ok(()) };
        let t = tol();
        let (Ok(fv), Ok(gv)) = (f.eval(s, 1e-12), g.eval(s, 1e-12)) else { return Ok(()) };
        let scale = 1.0 + fv.norm() * gv.norm() + fv.norm() + gv.norm();
        let check = |h: mimostab::Result<RationalFunction>, want: Complex64| -> bool {
            match h.and_then(|h| h.eval(s, 1e-12)) {
                Ok(v) => (v - want).norm() <= 1e-6 * scale,
                Err(_) => true,
            }
        };
        prop_assert!(check(f.add_with(&g, &t), fv + gv));
        prop_assert!(check(f.sub_with(&g, &t), fv - gv));
        prop_assert!(check(f.mul_with(&g, &t), fv * gv));
        if !g.is_zero() && gv.norm() > 1e-3 {
            prop_assert!(check(f.div_with(&g, &t), fv / gv));
        }
    }

    #[test]
    fn reduced_form_is_coprime_with_monic_denominator(n in lattice_roots(), d in lattice_roots(), k in 0.5f64..4.0) {
        let zs = |v: &[f64]| v.iter().map(|r| Complex64::new(*r, 0.0)).collect::<Vec<_>>();
        let f = RationalFunction::new(Polynomial::from_roots(&zs(&n)).scale(k), Polynomial::from_roots(&zs(&d)).scale(2.0)).unwrap();
        prop_assert!((f.den().leading() - 1.0).abs() < 1e-12);
        let g = poly_gcd(f.num(), f.den(), 1e-9);
        prop_assert_eq!(g.degree(), Some(0));
    }
}

/// Sums of positive first-order terms are strictly positive real, and
/// strongly so with a positive feedthrough.
#[test]
fn tier_hierarchy_on_positive_first_order_sums() {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..200 {
        let (g, d, min_a) = positive_first_order_sum(&mut rng);
        let class = classify_pr(&g, &t).unwrap();
        let expected = if d > 0.0 { PrTier::StronglyPR } else { PrTier::StrictlyPR };
        assert_eq!(class.tier, expected, "sum {k}: {g:?}");
        assert!(class.witnesses.epsilon.unwrap() < min_a);
        assert_eq!(chain_violation(&g, &class), None, "sum {k}: {g:?}");
    }
}

#[test]
fn gains_inside_margin_keep_loops_stable() {
    let t = tol();
    let failures: Vec<String> = (0..60u64)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(90_000 + k);
            let p = random_system(&mut rng, 2, 3);
            if direct_stability(&p, None, &t).unwrap().status != Status::Stable {
                return None;
            }
            let m = uniform_margins(&p, &t).ok()?;
            let hi = if m.k2.is_finite() { m.k2 } else { 1e3 };
            for j in 1..10 {
                let x = j as f64 / 10.0;
                let gain = m.k1 + (hi - m.k1) * x;
                if gain <= 0.0 {
                    continue;
                }
                let v = direct_stability(&p.scale(gain), None, &t).unwrap();
                if v.status != Status::Stable {
                    return Some(format!("system {k}: gain {gain} in ({}, {}) gives {:?}", m.k1, m.k2, v.status));
                }
            }
            None
        })
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

/// Closed-loop roots of `d + e^{jθ} n` for a scalar plant `n/d`.
fn rotated_loop_unstable(p: &TransferMatrix, theta: f64) -> bool {
    let f = p.get(0, 0);
    let rot = Complex64::from_polar(1.0, theta);
    let len = f.num().coeffs().len().max(f.den().coeffs().len());
    let coeffs: Vec<Complex64> = (0..len).map(|i| f.den().coeff(i) + rot * f.num().coeff(i)).collect();
    complex_poly_roots(&coeffs, 1e-7).unwrap().iter().any(|(z, _)| z.re > -1e-9)
}

#[test]
fn phases_inside_margin_keep_scalar_loops_stable() {
    let t = tol();
    let mut checked = 0;
    for k in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + k);
        let p = random_system(&mut rng, 1, 3);
        if direct_stability(&p, None, &t).unwrap().status != Status::Stable {
            continue;
        }
        let Ok(m) = uniform_margins(&p, &t) else { continue };
        checked += 1;
        for j in 0..10 {
            let theta = m.theta1 * (j as f64 / 10.0);
            assert!(!rotated_loop_unstable(&p, theta), "system {k}: θ = {theta} inside margin {}", m.theta1);
            assert!(!rotated_loop_unstable(&p, -theta));
        }
        if m.theta1 < std::f64::consts::PI - 1e-6 {
            // Just past the margin some sign of rotation destabilizes.
            let past = m.theta1 * (1.0 + 1e-3) + 1e-6;
            assert!(rotated_loop_unstable(&p, past) || rotated_loop_unstable(&p, -past), "system {k}");
        }
    }
    assert!(checked > 30);
}
