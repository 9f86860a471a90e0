//! F_{D,k}(x) = Σ_{Q: a_Q < 0 < Q(x)} (Q^{k−1})^{(k−1)}(x) over integral
//! binary quadratic forms Q = aX² + bX + c of discriminant D.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An integral binary quadratic form aX² + bX + c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn discriminant(&self) -> i128 {
        self.b as i128 * self.b as i128 - 4 * self.a as i128 * self.c as i128
    }
}

fn is_square(d: u64) -> bool {
    let r = (d as f64).sqrt().round() as u64;
    (r.saturating_sub(1)..=r + 1).any(|s| s * s == d)
}

/// Forms with a < 0 < Q(p/q), discriminant D.
pub fn forms_positive_at(d: u64, p: i64, q: u64) -> Result<Vec<QuadForm>> {
    if d == 0 || is_square(d) || d % 4 == 2 || d % 4 == 3 {
        return Err(Error::InvalidParameter(format!(
            "discriminant {d} must be a positive non-square congruent to 0 or 1 mod 4"
        )));
    }
    if q == 0 {
        return Err(Error::Domain("zero denominator".into()));
    }
    let (di, pi, qi) = (d as i128, p as i128, q as i128);
    // q² Q(p/q) is a positive integer at most D q²/(4|a|), so |a| ≤ D q²/4.
    let amax = di * qi * qi / 4;
    let sqrt_d = (d as f64).sqrt();
    let mut out = Vec::new();
    for abs_a in 1..=amax {
        let a = -abs_a;
        // |2a p/q + b| < √D  ⇔  (2ap + bq)² < D q².
        let centre = -2.0 * a as f64 * pi as f64 / qi as f64;
        let lo = (centre - sqrt_d).floor() as i128 - 1;
        let hi = (centre + sqrt_d).ceil() as i128 + 1;
        for b in lo..=hi {
            if (b - di).rem_euclid(2) != 0 {
                continue;
            }
            let v = 2 * a * pi + b * qi;
            if v * v >= di * qi * qi {
                continue;
            }
            let num = b * b - di;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            out.push(QuadForm { a: a as i64, b: b as i64, c: c as i64 });
        }
    }
    Ok(out)
}

/// F_{D,k}(p/q), exact.
pub fn quadform_f(d: u64, k: u32, p: i64, q: u64) -> Result<BigRational> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::InvalidParameter(format!("weight k = {k} must be even and ≥ 2")));
    }
    let forms = forms_positive_at(d, p, q)?;
    let g = (p.unsigned_abs()).gcd(&q);
    let x = BigRational::new(BigInt::from(p / g as i64), BigInt::from(q / g));
    let e = (k - 1) as usize;
    let mut total = BigRational::zero();
    for f in forms {
        // Q^{k−1} as an integer polynomial, then its (k−1)-th derivative at x.
        let quad = [BigInt::from(f.c), BigInt::from(f.b), BigInt::from(f.a)];
        let mut poly = vec![BigInt::one()];
        for _ in 0..e {
            let mut next = vec![BigInt::zero(); poly.len() + 2];
            for (i, v) in poly.iter().enumerate() {
                for (j, w) in quad.iter().enumerate() {
                    next[i + j] += v * w;
                }
            }
            poly = next;
        }
        let mut acc = BigRational::zero();
        for deg in (e..poly.len()).rev() {
            let falling: BigInt = ((deg - e + 1)..=deg).map(BigInt::from).product();
            acc = acc * &x + BigRational::from_integer(&poly[deg] * falling);
        }
        total += acc;
    }
    Ok(total)
}

/// Floating-point convenience wrapper.
pub fn quadform_f_f64(d: u64, k: u32, p: i64, q: u64) -> Result<f64> {
    use num_traits::ToPrimitive;
    let v = quadform_f(d, k, p, q)?;
    Ok(v.to_f64().unwrap_or(if v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_cases() {
        assert!(quadform_f(5, 4, 1, 2).unwrap().is_zero());
        assert!(quadform_f(5, 2, 1, 3).unwrap().is_zero());
    }

    #[test]
    fn weight_six_is_periodic_and_nonzero() {
        let a = quadform_f(5, 6, 2, 5).unwrap();
        assert_eq!(a, BigRational::new(1_741_824.into(), 125.into()));
        assert_eq!(a, quadform_f(5, 6, 7, 5).unwrap());
        // X ↦ 1 − X flips the sign of odd derivatives, so F vanishes at 1/2.
        assert!(quadform_f(5, 6, 1, 2).unwrap().is_zero());
        assert!(quadform_f(5, 6, 3, 2).unwrap().is_zero());
    }

    #[test]
    fn forms_have_the_right_discriminant() {
        for f in forms_positive_at(13, 2, 7).unwrap() {
            assert_eq!(f.discriminant(), 13);
            assert!(f.a < 0);
            let v = f.a as f64 * 4.0 / 49.0 + f.b as f64 * 2.0 / 7.0 + f.c as f64;
            assert!(v > 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(quadform_f(4, 4, 1, 2).is_err());
        assert!(quadform_f(7, 4, 1, 2).is_err());
        assert!(quadform_f(5, 3, 1, 2).is_err());
    }
}
