//! Reference limit laws: totally skewed stable laws S_α(c_α, 1, 0), the
//! standard Gaussian, the standard Cauchy and a Rayleigh law, with
//! Kolmogorov distances and a Chambers–Mallows–Stuck sampler.
//!
//! Stable densities and distribution functions are computed by Fourier
//! inversion of the characteristic function. The half-line integrals are
//! taken along a ray `u = r e^{-iθ}` in the right half-plane on which both
//! `e^{-iux}` and the characteristic function decay; Cauchy's theorem makes
//! this equal to the real-axis integral and removes most of the oscillation.

use crate::birkhoff::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::numeric::{GaussLegendre, KahanComplex};
use crate::special::{erfc, gamma};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Scale c_α = (Γ(1-α) cos(πα/2) / (π²/12))^{1/α}, with c_1 = 6/π.
pub fn c_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(6.0 / PI);
    }
    // Γ(1-α)cos(πα/2) = Γ(2-α) sin(π(1-α)/2)/(1-α), stable near α = 1.
    let e = 1.0 - alpha;
    let g = gamma(2.0 - alpha) * (FRAC_PI_2 * e).sin() / e;
    Ok((g * 12.0 / (PI * PI)).powf(1.0 / alpha))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::InvalidParameter(format!("stable index must lie in (0,2), got {alpha}")));
    }
    Ok(())
}

/// Standard normal distribution function.
pub fn gaussian_cdf(v: f64) -> f64 {
    0.5 * erfc(-v / std::f64::consts::SQRT_2)
}

/// Standard Cauchy distribution function.
pub fn cauchy_scaled_cdf(v: f64) -> f64 {
    0.5 + v.atan() / PI
}

/// A distribution on ℝ that empirical data can be compared against.
pub trait ReferenceLaw: Sync {
    fn cdf(&self, v: f64) -> f64;
    fn pdf(&self, v: f64) -> f64;
    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian {
    pub fn standard() -> Self {
        Gaussian { mean: 0.0, std: 1.0 }
    }
}

impl ReferenceLaw for Gaussian {
    fn cdf(&self, v: f64) -> f64 {
        gaussian_cdf((v - self.mean) / self.std)
    }
    fn pdf(&self, v: f64) -> f64 {
        let z = (v - self.mean) / self.std;
        (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * self.std)
    }
    fn name(&self) -> String {
        format!("gaussian(mean={}, std={})", self.mean, self.std)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Cauchy {
    pub loc: f64,
    pub scale: f64,
}

impl Cauchy {
    pub fn standard() -> Self {
        Cauchy { loc: 0.0, scale: 1.0 }
    }
}

impl ReferenceLaw for Cauchy {
    fn cdf(&self, v: f64) -> f64 {
        cauchy_scaled_cdf((v - self.loc) / self.scale)
    }
    fn pdf(&self, v: f64) -> f64 {
        let z = (v - self.loc) / self.scale;
        1.0 / (PI * self.scale * (1.0 + z * z))
    }
    fn name(&self) -> String {
        format!("cauchy(loc={}, scale={})", self.loc, self.scale)
    }
}

/// Law of |Z| for a centered isotropic Gaussian Z in ℝ² with per-axis variance σ².
#[derive(Debug, Clone, Copy)]
pub struct Rayleigh {
    pub sigma: f64,
}

impl ReferenceLaw for Rayleigh {
    fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            -(-0.5 * v * v / (self.sigma * self.sigma)).exp_m1()
        }
    }
    fn pdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            0.0
        } else {
            let s2 = self.sigma * self.sigma;
            v / s2 * (-0.5 * v * v / s2).exp()
        }
    }
    fn name(&self) -> String {
        format!("rayleigh(sigma={})", self.sigma)
    }
}

/// log of the characteristic function of S_α(σ, 1, 0), continued
/// analytically to `Re u > 0`.
fn log_charfn(alpha: f64, sigma: f64, u: Complex64) -> Complex64 {
    if alpha == 1.0 {
        -sigma * u * (1.0 + Complex64::new(0.0, 2.0 / PI) * u.ln())
    } else {
        let tan = (FRAC_PI_2 * alpha).tan();
        -(sigma * u).powf(alpha) * Complex64::new(1.0, -tan)
    }
}

/// Admissible ray angles (θ_lo, θ_hi) for which the characteristic
/// function decays along `r e^{-iθ}`.
fn theta_limits(alpha: f64) -> (f64, f64) {
    let phi = FRAC_PI_2 * alpha;
    if alpha == 1.0 {
        (0.0, FRAC_PI_2)
    } else if alpha < 1.0 {
        ((-(FRAC_PI_2 + phi) / alpha).max(-FRAC_PI_2), ((FRAC_PI_2 - phi) / alpha).min(FRAC_PI_2))
    } else {
        (((FRAC_PI_2 - phi) / alpha).max(-FRAC_PI_2), ((3.0 * FRAC_PI_2 - phi) / alpha).min(FRAC_PI_2))
    }
}

fn ray_angle(alpha: f64, sigma: f64, x: f64) -> f64 {
    let (lo, hi) = theta_limits(alpha);
    let w = 0.5 * (x.abs() / sigma).min(1.0);
    if x > 0.0 {
        w * hi
    } else {
        w * lo
    }
}

/// ∫_0^∞ f(r) dr on geometric panels near 0 followed by growing panels,
/// stopping once `r·|f|` stays below `floor`. Returns the integral and the
/// final radius.
fn ray_quadrature<F: Fn(f64) -> (Complex64, f64)>(f: F, h: f64, osc: f64, floor: f64) -> Result<(Complex64, f64)> {
    let gl = GaussLegendre::cached(16);
    let mut acc = KahanComplex::new();
    for k in (0..80).rev() {
        let a = h * 0.5f64.powi(k + 1);
        let b = 2.0 * a;
        acc.add(gl.integrate_c(a, b, |r| f(r).0));
    }
    let mut r = h;
    let mut quiet = 0;
    for _ in 0..200_000 {
        let mut w = (0.25 * r).max(h);
        if osc > 0.0 {
            w = w.min(2.0 / osc);
        }
        let mut peak: f64 = 0.0;
        let v = gl.integrate_c(r, r + w, |s| {
            let (val, size) = f(s);
            peak = peak.max(size * s);
            val
        });
        acc.add(v);
        r += w;
        if peak < floor {
            quiet += 1;
            if quiet >= 3 {
                return Ok((acc.value(), r));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NoConvergence {
        what: "stable Fourier inversion".into(),
        last: format!("r = {r}"),
        achieved: f64::NAN,
    })
}

fn stable_pdf_scaled(alpha: f64, sigma: f64, x: f64) -> Result<f64> {
    if alpha < 1.0 && x <= 0.0 {
        return Ok(0.0);
    }
    let theta = ray_angle(alpha, sigma, x);
    let d = Complex64::from_polar(1.0, -theta);
    let h = 0.5 / (1.0 / sigma + x.abs());
    let osc = x.abs() * theta.cos();
    let f = |r: f64| {
        let u = d * r;
        let v = (Complex64::new(0.0, -x) * u + log_charfn(alpha, sigma, u)).exp() * d;
        (v, v.norm())
    };
    let (val, _) = ray_quadrature(f, h, osc, 1e-18)?;
    Ok((val.re / PI).max(0.0))
}

fn stable_cdf_scaled(alpha: f64, sigma: f64, x: f64) -> Result<f64> {
    if alpha < 1.0 && x <= 0.0 {
        return Ok(0.0);
    }
    let theta = ray_angle(alpha, sigma, x);
    let d = Complex64::from_polar(1.0, -theta);
    let h = 0.5 / (1.0 / sigma + x.abs());
    let osc = x.abs() * theta.cos();
    // Gil-Pelaez with the real-on-ℝ₊ subtraction 1/(u(1+σu)) that removes
    // the 1/u singularity at the origin.
    let f = |r: f64| {
        let u = d * r;
        let g = (Complex64::new(0.0, -x) * u + log_charfn(alpha, sigma, u)).exp() / u;
        let hsub = 1.0 / (u * (1.0 + sigma * u));
        ((g - hsub) * d, g.norm())
    };
    let (val, r_end) = ray_quadrature(f, h, osc, 1e-18)?;
    let w = 1.0 / (sigma * d * r_end);
    let tail = if w.norm() < 1e-4 { w - w * w / 2.0 + w * w * w / 3.0 } else { (1.0 + w).ln() };
    let v = 0.5 - (val - tail).im / PI;
    Ok(v.clamp(0.0, 1.0))
}

/// Density of S_α(c_α, 1, 0) at `v`.
pub fn stable_pdf(alpha: f64, v: f64) -> Result<f64> {
    let s = c_alpha(alpha)?;
    stable_pdf_scaled(alpha, s, v)
}

/// Distribution function G_α(v) of S_α(c_α, 1, 0).
pub fn stable_cdf(alpha: f64, v: f64) -> Result<f64> {
    let s = c_alpha(alpha)?;
    stable_cdf_scaled(alpha, s, v)
}

/// Tabulated S_α(c_α, 1, 0) for fast repeated evaluation. Nodes are
/// `x = c_α sinh(z)` on a uniform z grid; values between nodes use cubic
/// Hermite interpolation with the density as slope.
#[derive(Debug, Clone)]
pub struct StableLaw {
    pub alpha: f64,
    pub sigma: f64,
    x: Vec<f64>,
    cdf: Vec<f64>,
    pdf: Vec<f64>,
    /// ∫ pdf over ℝ, assembled from the table and the two tail masses.
    pub mass: f64,
}

impl StableLaw {
    pub fn new(alpha: f64) -> Result<StableLaw> {
        let sigma = c_alpha(alpha)?;
        let z_hi = 1e8f64.asinh();
        let z_lo = if alpha < 1.0 { 0.0 } else { -(60f64.asinh()) };
        let n = 4001;
        let dz = (z_hi - z_lo) / (n - 1) as f64;
        let zs: Vec<f64> = (0..n).map(|i| z_lo + dz * i as f64).collect();
        let xs: Vec<f64> = zs.iter().map(|z| sigma * z.sinh()).collect();
        let vals: Vec<(f64, f64)> = xs
            .par_iter()
            .map(|&x| -> Result<(f64, f64)> {
                Ok((stable_cdf_scaled(alpha, sigma, x)?, stable_pdf_scaled(alpha, sigma, x)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut cdf: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let pdf: Vec<f64> = vals.iter().map(|v| v.1).collect();
        for i in 1..n {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        // Simpson in z of pdf(x(z)) x'(z).
        let mut inner = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            inner += w * pdf[i] * sigma * zs[i].cosh();
        }
        inner *= dz / 3.0;
        let mass = inner + cdf[0] + (1.0 - cdf[n - 1]);
        Ok(StableLaw { alpha, sigma, x: xs, cdf, pdf, mass })
    }

    fn locate(&self, v: f64) -> Option<usize> {
        if v < self.x[0] || v >= self.x[self.x.len() - 1] {
            return None;
        }
        Some(self.x.partition_point(|&a| a <= v) - 1)
    }
}

impl ReferenceLaw for StableLaw {
    fn cdf(&self, v: f64) -> f64 {
        match self.locate(v) {
            Some(i) => {
                let (x0, x1) = (self.x[i], self.x[i + 1]);
                let h = x1 - x0;
                let t = (v - x0) / h;
                let (t2, t3) = (t * t, t * t * t);
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                let y = h00 * self.cdf[i] + h10 * h * self.pdf[i] + h01 * self.cdf[i + 1] + h11 * h * self.pdf[i + 1];
                y.clamp(self.cdf[i], self.cdf[i + 1])
            }
            None => stable_cdf_scaled(self.alpha, self.sigma, v).unwrap_or(f64::NAN),
        }
    }

    fn pdf(&self, v: f64) -> f64 {
        match self.locate(v) {
            Some(i) => {
                let t = (v - self.x[i]) / (self.x[i + 1] - self.x[i]);
                (1.0 - t) * self.pdf[i] + t * self.pdf[i + 1]
            }
            None => stable_pdf_scaled(self.alpha, self.sigma, v).unwrap_or(f64::NAN),
        }
    }

    fn name(&self) -> String {
        format!("stable(alpha={}, c={})", self.alpha, self.sigma)
    }
}

/// Kolmogorov distance sup_v |F_emp(v) - F(v)|, evaluated on both sides of
/// every jump of the empirical CDF.
pub fn ks_distance(emp: &EmpiricalCdf, law: &dyn ReferenceLaw) -> Result<f64> {
    ks_distance_sorted(emp.sorted(), law)
}

/// Same as [`ks_distance`] for an ascending slice.
pub fn ks_distance_sorted(sorted: &[f64], law: &dyn ReferenceLaw) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty("Kolmogorov distance of an empty sample".into()));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        let f = law.cdf(v);
        d = d.max((f - i as f64 / n).abs()).max((f - j as f64 / n).abs());
        i = j;
    }
    Ok(d)
}

/// `n` samples of S_α(c_α, 1, 0) by the Chambers–Mallows–Stuck transform.
pub fn sample_stable(alpha: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    let sigma = c_alpha(alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    if alpha == 1.0 {
        let shift = 2.0 / PI * sigma * sigma.ln();
        for _ in 0..n {
            let v = PI * (rng.random::<f64>() - 0.5);
            let w = -(1.0 - rng.random::<f64>()).ln();
            let a = FRAC_PI_2 + v;
            let z = 2.0 / PI * (a * v.tan() - (FRAC_PI_2 * w * v.cos() / a).ln());
            out.push(sigma * z + shift);
        }
    } else {
        let t = (FRAC_PI_2 * alpha).tan();
        let b = t.atan() / alpha;
        let s = (1.0 + t * t).powf(0.5 / alpha);
        for _ in 0..n {
            let v = PI * (rng.random::<f64>() - 0.5);
            let w = -(1.0 - rng.random::<f64>()).ln();
            let z = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha)
                * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
            out.push(sigma * z);
        }
    }
    Ok(out)
}
