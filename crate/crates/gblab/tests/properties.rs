use gblab::arithfun::{dedekind_cf_approx, dedekind_exact, quadform_f};
use gblab::birkhoff::m_lambda;
use gblab::costs::{eval_cost, make_builtin, BuiltinKind, CostFunction};
use gblab::oscint::integral_i;
use gblab::rationals::{cf_expand, cf_value, mirror, Rational};
use gblab::transfer::solve_s0;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use std::f64::consts::LN_2;

/// A reduced a/q in (0, 1) with 2 ≤ q ≤ max.
fn reduced(max: u64) -> impl Strategy<Value = Rational> {
    (2..=max).prop_flat_map(|q| (1..q).prop_map(move |a| (a, q))).prop_filter_map("not coprime", |(a, q)| {
        Rational::new(a, q).ok()
    })
}

/// Quotients of Euclid's algorithm on (q, a).
fn euclid_quotients(a: u64, q: u64) -> Vec<u64> {
    let (mut x, mut y) = (q, a);
    let mut out = Vec::new();
    while y != 0 {
        out.push(x / y);
        (x, y) = (y, x % y);
    }
    out
}

fn big(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn dedekind_any(a: u64, q: u64) -> BigRational {
    let a = a % q;
    if a == 0 {
        return big(0, 1);
    }
    dedekind_exact(a, q).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cf_roundtrip_and_depth_bound(x in reduced(1_000_000)) {
        let cf = cf_expand(x);
        prop_assert_eq!(cf_value(&cf).unwrap(), x);
        let depth = cf.depth() as f64;
        prop_assert!(depth <= 2.08 * (x.den() as f64).ln() + 2.0);
    }

    #[test]
    fn digits_are_euclid_quotients(x in reduced(100_000)) {
        let q = euclid_quotients(x.num(), x.den());
        let cf = cf_expand(x);
        prop_assert_eq!(cf.coeffs(), &q[..]);
        let total: u64 = q.iter().sum();
        prop_assert!((m_lambda(x, 1.0).unwrap() - total as f64).abs() < 1e-9);
    }

    #[test]
    fn mirror_involution_and_inverse(x in reduced(100_000)) {
        let m = mirror(x).unwrap();
        prop_assert_eq!(m.den(), x.den());
        // Reversal is an involution on canonical words; above 1/2 the reversed
        // word ends in 1 and renormalises, which sends x to 1 - x instead.
        let back = mirror(m).unwrap();
        if 2 * x.num() <= x.den() {
            prop_assert_eq!(back, x);
        } else {
            prop_assert_eq!(back, Rational::new(x.den() - x.num(), x.den()).unwrap());
        }
        let r = cf_expand(x).depth();
        let prod = (m.num() as u128 * x.num() as u128 % x.den() as u128) as u64;
        let expected = if r % 2 == 1 { 1 % x.den() } else { x.den() - 1 };
        prop_assert_eq!(prod, expected);
    }

    #[test]
    fn dedekind_reciprocity(x in reduced(300)) {
        let (a, q) = (x.num(), x.den());
        let lhs = dedekind_any(a, q) + dedekind_any(q, a);
        let rhs = big(-1, 4) + big((a * a + q * q + 1) as i64, (12 * a * q) as i64);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dedekind_cf_approx_within_five_twelfths(x in reduced(2000)) {
        let exact = dedekind_exact(x.num(), x.den()).unwrap();
        let e = exact.numer().to_string().parse::<f64>().unwrap() / exact.denom().to_string().parse::<f64>().unwrap();
        prop_assert!((dedekind_cf_approx(x.num(), x.den()).unwrap() - e).abs() <= 5.0 / 12.0);
    }

    #[test]
    fn costs_are_periodic(x in 1e-6f64..1.0, j in 1usize..9) {
        let costs = [
            make_builtin(BuiltinKind::Constant(2.5)).unwrap(),
            make_builtin(BuiltinKind::Log).unwrap(),
            make_builtin(BuiltinKind::FloorPower(0.7)).unwrap(),
            make_builtin(BuiltinKind::Dedekind).unwrap(),
        ];
        for c in &costs {
            prop_assert_eq!(eval_cost(c, j, x).unwrap(), eval_cost(c, j + c.m, x).unwrap());
        }
    }

    #[test]
    fn floor_power_is_a_step_function(n in 1u32..=100, u in 0.0f64..1.0, v in 0.0f64..1.0, l in 0.1f64..3.0) {
        let c = make_builtin(BuiltinKind::FloorPower(l)).unwrap();
        let (lo, hi) = (1.0 / (n as f64 + 1.0), 1.0 / n as f64);
        // Points strictly inside (lo, hi] away from the open end.
        let p = |s: f64| hi - s * (hi - lo) * (1.0 - 1e-9);
        prop_assert_eq!(eval_cost(&c, 1, p(u)).unwrap(), eval_cost(&c, 1, p(v)).unwrap());
    }

    #[test]
    fn dedekind_cost_cancels(x in 1e-6f64..1.0) {
        let c = make_builtin(BuiltinKind::Dedekind).unwrap();
        let a = eval_cost(&c, 1, x).unwrap()[0];
        let b = eval_cost(&c, 2, x).unwrap()[0];
        prop_assert_eq!(a + b, 0.0);
    }

    #[test]
    fn quadform_vanishes_in_weight_four(d in 1u64..=40, x in reduced(50)) {
        let r = (d as f64).sqrt() as u64;
        prop_assume!((d % 4 == 0 || d % 4 == 1) && r * r != d);
        prop_assert_eq!(quadform_f(d, 4, x.num() as i64, x.den()).unwrap(), big(0, 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integral_conjugate_symmetry_and_trivial_bound(t in 1e-3f64..2.0) {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        let a = integral_i(&c, &[t]).unwrap();
        let b = integral_i(&c, &[-t]).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
        // ∫ x ξ(x) dx = (1 − log 2)/log 2.
        let bound = t * (1.0 - LN_2) / LN_2;
        prop_assert!(a.norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn s0_conjugate_symmetry(t in 0.01f64..0.3) {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        let a = solve_s0(&[t], &c).unwrap();
        let b = solve_s0(&[-t], &c).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-10);
    }
}
