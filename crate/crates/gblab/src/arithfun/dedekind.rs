//! Dedekind sums s(a/q).

use crate::birkhoff::Observable;
use crate::error::{Error, Result};
use crate::rationals::{cf_expand, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;

/// Exact s(a/q) through the reciprocity recursion
/// s(a,q) + s(q,a) = (a² + q² + 1)/(12aq) − 1/4.
pub fn dedekind_exact(a: u64, q: u64) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::Domain("denominator must be positive".into()));
    }
    if a.gcd(&q) != 1 {
        return Err(Error::Domain(format!("{a}/{q} is not reduced")));
    }
    let mut acc = BigRational::from_integer(BigInt::from(0));
    let quarter = BigRational::new(BigInt::from(1), BigInt::from(4));
    let (mut a, mut q) = (a % q, q);
    let mut sign = 1i32;
    while a != 0 {
        let (ab, qb) = (BigInt::from(a), BigInt::from(q));
        let term = BigRational::new(&ab * &ab + &qb * &qb + 1, BigInt::from(12) * ab * qb)
            - &quarter;
        if sign > 0 {
            acc += term;
        } else {
            acc -= term;
        }
        sign = -sign;
        (a, q) = (q % a, a);
    }
    Ok(acc)
}

/// s(a/q) from the defining sum Σ_{h<q} ((ha/q))((h/q)), in O(q).
pub fn dedekind_sum_direct(a: u64, q: u64) -> Result<BigRational> {
    if q == 0 || a.gcd(&q) != 1 {
        return Err(Error::Domain(format!("{a}/{q} is not reduced")));
    }
    let mut num = BigInt::from(0);
    let qi = q as i128;
    for h in 1..q {
        let r = ((h as u128 * a as u128) % q as u128) as i128;
        num += BigInt::from((2 * r - qi) * (2 * h as i128 - qi));
    }
    Ok(BigRational::new(num, BigInt::from(4) * BigInt::from(q) * BigInt::from(q)))
}

/// (1/12) Σ (−1)^{j−1} a_j over the continued-fraction digits of a/q.
pub fn dedekind_cf_approx(a: u64, q: u64) -> Result<f64> {
    let x = Rational::new(a, q)?;
    let s: f64 = cf_expand(x)
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &d)| if j % 2 == 0 { d as f64 } else { -(d as f64) })
        .sum();
    Ok(s / 12.0)
}

/// Floating-point s(x) carried along the Gauss tree: with y = T(x) and
/// x = a/q, s(x) = −s(y) + (a² + q² + 1)/(12aq) − 1/4.
#[derive(Debug, Clone, Copy, Default)]
pub struct DedekindObservable;

impl Observable for DedekindObservable {
    type State = f64;

    fn dim(&self) -> usize {
        1
    }

    fn root(&self) -> f64 {
        0.0
    }

    fn at_one(&self) -> f64 {
        0.0
    }

    fn step(&self, x: Rational, parent: &f64) -> f64 {
        let (a, q) = (x.num() as f64, x.den() as f64);
        -parent + (a / q + q / a + 1.0 / (a * q)) / 12.0 - 0.25
    }

    fn value(&self, _x: Rational, s: &f64, out: &mut [f64]) {
        out[0] = *s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn small_values() {
        assert_eq!(dedekind_exact(1, 2).unwrap(), BigRational::new(0.into(), 1.into()));
        assert_eq!(dedekind_exact(1, 3).unwrap(), BigRational::new(1.into(), 18.into()));
        assert_eq!(dedekind_exact(1, 1).unwrap(), BigRational::new(0.into(), 1.into()));
        assert!(dedekind_exact(2, 4).is_err());
    }

    #[test]
    fn recursion_matches_definition() {
        for q in 1..=200u64 {
            for a in 1..=q {
                if a.gcd(&q) == 1 {
                    assert_eq!(dedekind_exact(a, q).unwrap(), dedekind_sum_direct(a, q).unwrap());
                }
            }
        }
    }

    #[test]
    fn cf_approx_examples() {
        assert!((dedekind_cf_approx(1, 3).unwrap() - 0.25).abs() < 1e-15);
        assert!((dedekind_cf_approx(1, 2).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn tree_state_matches_exact() {
        let o = DedekindObservable;
        let sy = dedekind_exact(2, 5).unwrap().to_f64().unwrap();
        let x = Rational::new(5, 12).unwrap(); // T(5/12) = 2/5
        let sx = o.step(x, &sy);
        assert!((sx - dedekind_exact(5, 12).unwrap().to_f64().unwrap()).abs() < 1e-13);
    }
}
