//! Special functions and constants used across modules.

use std::f64::consts::{LN_2, PI};

/// Euler–Mascheroni constant γ₀.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gamma function on the real line (poles at non-positive integers give ±∞/NaN).
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// Gauss density ξ(x) = 1/((1+x) log 2).
#[inline]
pub fn xi(x: f64) -> f64 {
    1.0 / ((1.0 + x) * LN_2)
}

/// Gauss measure of (a, b] ⊂ [0, 1].
#[inline]
pub fn gauss_measure(a: f64, b: f64) -> f64 {
    ((1.0 + b) / (1.0 + a)).ln() / LN_2
}

/// Gauss measure of the cell (1/(n+1), 1/n].
#[inline]
pub fn gauss_cell_measure(n: f64) -> f64 {
    // log((n+1)^2 / (n(n+2))) = log1p(1/(n(n+2)))
    (1.0 / (n * (n + 2.0))).ln_1p() / LN_2
}

/// 𝔡 = m π²/(12 log 2).
pub fn entropy_constant(m: usize) -> f64 {
    m as f64 * PI * PI / (12.0 * LN_2)
}

/// Binomial coefficient as f64.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub fn factorial(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
