//! Hurwitz zeta ζ(s, a) by Euler–Maclaurin summation.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

const HEAD: usize = 25;
const TERMS: usize = 24;

/// B_{2j}/(2j)! for j = 1..=TERMS.
fn bernoulli_ratios() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        (1..=TERMS)
            .map(|j| {
                let two_j = 2 * j as i32;
                let zeta = match j {
                    1 => PI * PI / 6.0,
                    2 => PI.powi(4) / 90.0,
                    3 => PI.powi(6) / 945.0,
                    4 => PI.powi(8) / 9450.0,
                    _ => (1..=60).rev().map(|n| (n as f64).powi(-two_j)).sum(),
                };
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta / (2.0 * PI).powi(two_j)
            })
            .collect()
    })
}

/// ζ(s, a) for any a > 0 and s ≠ 1.
pub(crate) fn hurwitz_any(s: Complex64, a: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..HEAD {
        acc += (-s * (n as f64 + a).ln()).exp();
    }
    let big = HEAD as f64 + a;
    let lb = big.ln();
    let pw = (-s * lb).exp(); // big^{-s}
    acc += pw * big / (s - 1.0);
    acc += 0.5 * pw;
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · big^{−s−2j+1}
    let mut rising = s; // s(s+1)…(s+2j−2) for j = 1
    let mut bpow = pw / big;
    let inv2 = 1.0 / (big * big);
    for (j, &b) in bernoulli_ratios().iter().enumerate() {
        let term = rising * bpow * b;
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1e-300) {
            break;
        }
        let jj = (j + 1) as f64;
        rising = rising * (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        bpow *= inv2;
    }
    acc
}

/// ζ(s, a) for a ∈ (0, 1], s ≠ 1.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Domain(format!("Hurwitz parameter a = {a} outside (0,1]")));
    }
    if (s - 1.0).norm() < 1e-14 {
        return Err(Error::Domain("pole of the Hurwitz zeta function at s = 1".into()));
    }
    Ok(hurwitz_any(s, a))
}

/// ζ(s) for real s ≠ 1.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    Ok(hurwitz_zeta(Complex64::new(s, 0.0), 1.0)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn known_values() {
        assert!((hurwitz_zeta(c(2.0), 1.0).unwrap().re - PI * PI / 6.0).abs() < 1e-13);
        assert!((hurwitz_zeta(c(2.0), 0.5).unwrap().re - PI * PI / 2.0).abs() < 1e-12);
        assert!((hurwitz_zeta(c(0.5), 1.0).unwrap().re + 1.460_354_508_809_586_8).abs() < 1e-12);
        // ζ(0, a) = 1/2 − a, ζ(−1, a) = −B_2(a)/2.
        assert!((hurwitz_zeta(c(0.0), 0.3).unwrap().re - 0.2).abs() < 1e-12);
        let a: f64 = 0.7;
        let b2 = a * a - a + 1.0 / 6.0;
        assert!((hurwitz_zeta(c(-1.0), a).unwrap().re + b2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_argument_agrees_with_direct_sum() {
        // Re s = 3: brute force with an integral tail.
        let s = Complex64::new(3.0, 2.0);
        let a = 0.25;
        let n = 20_000;
        let mut direct = Complex64::new(0.0, 0.0);
        for k in 0..n {
            direct += (-s * (k as f64 + a).ln()).exp();
        }
        let big = n as f64 + a;
        direct += (-s * big.ln()).exp() * (big / (s - 1.0) + 0.5);
        assert!((direct - hurwitz_zeta(s, a).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn rejects() {
        assert!(hurwitz_zeta(c(1.0), 0.5).is_err());
        assert!(hurwitz_zeta(c(2.0), 0.0).is_err());
        assert!(hurwitz_zeta(c(2.0), 1.5).is_err());
    }
}
