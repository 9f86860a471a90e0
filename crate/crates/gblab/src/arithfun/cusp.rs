//! Cusp-form data: Fourier coefficients, critical completed L-values and the
//! rational structure of the period polynomial.

use super::cache;
use super::tau::ramanujan_tau;
use crate::error::{Error, Result};
use crate::special::binomial;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A normalized Hecke eigenform of level one.
#[derive(Debug, Clone)]
pub struct CuspFormData {
    pub weight: u32,
    /// a_n as `coeffs[n-1]`.
    pub coeffs: Vec<f64>,
    /// Λ(f, s) as `lambda[s-1]`, s = 1..k−1.
    pub lambda: Vec<f64>,
    /// Coefficients of r_f(z) = Σ_p period_coeffs[p] z^p.
    pub period_coeffs: Vec<Complex64>,
    /// Λ(f, s) = omega[s % 2] · periods_int[s-1], exact integers.
    pub(crate) omega: [f64; 2],
    pub(crate) periods_int: Vec<i128>,
}

/// Number of coefficients needed for the incomplete-gamma series.
pub fn lambda_terms_needed(weight: u32) -> usize {
    let k = weight as f64;
    (1..)
        .find(|&n| {
            let x = 2.0 * PI * n as f64;
            // e^{-x} x^{k-1} n^{(k-1)/2} bounds the n-th term.
            -x + (k - 1.0) * x.ln() + 0.5 * (k - 1.0) * (n as f64).ln() < -40.0
        })
        .unwrap()
}

/// Γ(s, x) for integer s ≥ 1.
fn upper_gamma_int(s: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..s {
        term *= x / j as f64;
        sum += term;
    }
    let fact: f64 = (1..s).map(|j| j as f64).product();
    fact * (-x).exp() * sum
}

/// Λ(f, s) for s = 1..k−1 via the incomplete-gamma series.
pub fn critical_lambda_from(weight: u32, coeffs: &[f64]) -> Result<Vec<f64>> {
    if weight < 12 || weight % 2 == 1 {
        return Err(Error::InvalidParameter(format!("weight {weight} must be even and at least 12")));
    }
    let need = lambda_terms_needed(weight);
    if coeffs.len() < need {
        return Err(Error::Precondition(format!(
            "critical L-values need {need} coefficients, got {}",
            coeffs.len()
        )));
    }
    let eps = if (weight / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let k = weight;
    Ok((1..k)
        .map(|s| {
            let mut acc = 0.0;
            for (i, &a) in coeffs[..need].iter().enumerate() {
                let x = 2.0 * PI * (i + 1) as f64;
                acc += a
                    * (upper_gamma_int(s, x) * x.powi(-(s as i32))
                        + eps * upper_gamma_int(k - s, x) * x.powi(-((k - s) as i32)));
            }
            acc
        })
        .collect())
}

/// Best rational approximation p/q with q ≤ `max_den` of `v`, accepted only
/// when it reproduces `v` to relative accuracy `tol`.
pub(crate) fn rational_reconstruct(v: f64, max_den: i128, tol: f64) -> Option<(i128, i128)> {
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut r = v;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (v - p1 as f64 / q1 as f64).abs() <= tol * v.abs().max(1.0) {
            return Some((p1, q1));
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl CuspFormData {
    /// Build from coefficients a_1..a_N (a_1 = 1).
    pub fn new(weight: u32, coeffs: Vec<f64>) -> Result<Self> {
        let lambda = critical_lambda_from(weight, &coeffs)?;
        Self::assemble(weight, coeffs, lambda)
    }

    /// The discriminant form Δ with `bound` coefficients.
    pub fn delta(bound: usize) -> Result<Self> {
        let bound = bound.max(lambda_terms_needed(12));
        let tau = match cache::load_tau(bound) {
            Some(t) => t,
            None => {
                let t = ramanujan_tau(bound)?;
                cache::store_tau(&t);
                t
            }
        };
        let coeffs: Vec<f64> = tau.iter().map(|&t| t as f64).collect();
        let lambda = match cache::load_lambda(12, lambda_terms_needed(12), "delta") {
            Some(l) => l,
            None => {
                let l = critical_lambda_from(12, &coeffs)?;
                cache::store_lambda(12, lambda_terms_needed(12), "delta", &l);
                l
            }
        };
        Self::assemble(12, coeffs, lambda)
    }

    fn assemble(
        weight: u32,
        coeffs: Vec<f64>,
        lambda: Vec<f64>,
    ) -> Result<Self> {
        if (coeffs[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("eigenform must satisfy a_1 = 1".into()));
        }
        let k = weight as usize;
        // Within each parity class the ratios Λ(s)/Λ(s_ref) are rational.
        let mut omega = [0.0; 2];
        let mut periods_int = vec![0i128; k - 1];
        for parity in 0..2 {
            let class: Vec<usize> = (1..k).filter(|s| s % 2 == parity).collect();
            let s_ref = *class
                .iter()
                .max_by(|&&a, &&b| lambda[a - 1].abs().total_cmp(&lambda[b - 1].abs()))
                .unwrap();
            let base = lambda[s_ref - 1];
            let mut fracs = Vec::new();
            for &s in &class {
                let (p, q) = rational_reconstruct(lambda[s - 1] / base, 1_000_000, 1e-11)
                    .ok_or_else(|| {
                        Error::Precondition(format!(
                            "period ratio Λ({s})/Λ({s_ref}) is not a small rational"
                        ))
                    })?;
                fracs.push((s, p, q));
            }
            let lcm = fracs.iter().fold(1i128, |l, &(_, _, q)| l / gcd_i128(l, q) * q);
            for (s, p, q) in fracs {
                periods_int[s - 1] = p * (lcm / q);
            }
            omega[parity] = base / lcm as f64;
        }
        // r_f(z) = (−i)^{k−1}/(k−1)! Σ_n C(k−2,n) (−z)^{k−2−n} i^{n+1} Λ(n+1).
        let pre = Complex64::new(0.0, -1.0).powu(weight - 1)
            / (1..weight).map(|j| j as f64).product::<f64>();
        let mut period_coeffs = vec![Complex64::new(0.0, 0.0); k - 1];
        for n in 0..=(k - 2) {
            let p = k - 2 - n;
            let sgn = if p % 2 == 0 { 1.0 } else { -1.0 };
            period_coeffs[p] += pre
                * binomial((k - 2) as u64, n as u64)
                * sgn
                * Complex64::new(0.0, 1.0).powu(n as u32 + 1)
                * lambda[n];
        }
        Ok(Self { weight, coeffs, lambda, period_coeffs, omega, periods_int })
    }

    /// r_f^{(d)}(x).
    pub fn period_poly_derivative(&self, d: usize, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in (d..self.period_coeffs.len()).rev() {
            let falling: f64 = ((p - d + 1)..=p).map(|j| j as f64).product();
            acc = acc * x + self.period_coeffs[p] * falling;
        }
        acc
    }
}

/// Λ(f, 1..k−1).
pub fn critical_lambda(f: &CuspFormData) -> Result<Vec<f64>> {
    critical_lambda_from(f.weight, &f.coeffs)
}
