//! Oscillatory integrals `𝔍_φ(t) = ∫₀¹ (e^{i⟨t, Φ(x)⟩} − 1) ξ(x) dx` for the
//! composite cost `Φ = Σ_j φ_j ∘ T^{j−1}`, their closed-form small-`t`
//! expansions, and error-order fitting between the two.
//!
//! Three evaluation routes are used.
//! * Step costs (constant on each cell `(1/(n+1), 1/n]`) reduce to series
//!   `Σ_n (e^{iΨ(n)} − 1) w(n)`, summed directly and then through a midpoint
//!   Euler–Maclaurin tail whose oscillatory integral is done panel by panel.
//! * Other costs with `m = 1` use adaptive panels with breaks at `1/n` and a
//!   geometric mesh toward 0, closed off by integration by parts once the
//!   phase oscillates fast enough.
//! * For `m = 2` the inner digit is summed first:
//!   `𝔍 = ∫₀¹ [e^{i⟨t,φ₂(y)⟩}(C(y) + ξ(y)) − ξ(y)] dy` with
//!   `C(y) = Σ_n (e^{i⟨t,φ₁(1/(n+y))⟩} − 1) / ((n+y)(n+y+1) log 2)`.
//!   Longer periods go through the discretized transfer operator.

use crate::arithfun::hurwitz::hurwitz_any;
use crate::costs::{CostFunction, CostKind, Point};
use crate::error::{Error, Result};
use crate::numeric::{adaptive_c, adaptive_c_order, linear_fit, ChebSeries, GaussLegendre};
use crate::special::{gamma, gauss_measure, xi, EULER_GAMMA};
use crate::transfer::{build_operator, TransferConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Explicit cell breaks `1/n`, `n ≤ CELL_BREAKS`, in the adaptive route.
pub const CELL_BREAKS: usize = 512;
/// Lower end of the geometric mesh toward 0.
const X_FLOOR: f64 = 1e-15;
/// Phase variation over a panel beyond which the rest of `(0, b]` is closed
/// by integration by parts.
const IBP_PHASE: f64 = 2.0e3;
/// Terms summed explicitly before the Euler–Maclaurin tail.
const DIRECT_TERMS: usize = 1000;
/// Fallback direct length when the phase is too fast for Euler–Maclaurin.
const DIRECT_TERMS_FAST: usize = 4_000_000;

#[inline]
fn expm1_i(theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    Complex64::new(-2.0 * s * s, theta.sin())
}

// ---------------------------------------------------------------------------
// weighted series over the digit

/// Weights `w(u)` with closed-form tails and derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Weight {
    /// Gauss cell measure `log(1 + 1/(u(u+2)))/log 2`.
    Gauss,
    /// `1/((u+y)(u+y+1) log 2)`.
    Shifted(f64),
    /// `1/(u(u+1))`.
    Telescoping,
    /// `½(u^{-2} − (u+1)^{-2})`.
    HalfSquare,
}

impl Weight {
    fn value(&self, u: f64) -> f64 {
        match *self {
            Weight::Gauss => (1.0 / (u * (u + 2.0))).ln_1p() / LN_2,
            Weight::Shifted(y) => 1.0 / ((u + y) * (u + y + 1.0) * LN_2),
            Weight::Telescoping => 1.0 / (u * (u + 1.0)),
            Weight::HalfSquare => 0.5 * (1.0 / (u * u) - 1.0 / ((u + 1.0) * (u + 1.0))),
        }
    }

    /// `Σ_{n > big} w(n)`.
    fn tail(&self, big: usize) -> f64 {
        let b = big as f64;
        match *self {
            Weight::Gauss => (1.0 / (b + 1.0)).ln_1p() / LN_2,
            Weight::Shifted(y) => 1.0 / ((b + 1.0 + y) * LN_2),
            Weight::Telescoping => 1.0 / (b + 1.0),
            Weight::HalfSquare => 0.5 / ((b + 1.0) * (b + 1.0)),
        }
    }
}

/// `Σ_{n≥1} (e^{iΨ(n)} − 1) w(n)` for a phase `Ψ` smooth in real `n` beyond
/// the direct range.
pub(crate) fn weighted_series<P: Fn(f64) -> f64>(psi: &P, w: Weight, direct: usize) -> Result<Complex64> {
    let slope = |u: f64| (psi(u + 0.5) - psi(u - 0.5)).abs();
    let fast = slope(direct as f64 + 0.5) > 0.5;
    let big = if fast { DIRECT_TERMS_FAST.max(direct) } else { direct };
    let mut acc = crate::numeric::KahanComplex::new();
    for n in 1..=big {
        let u = n as f64;
        acc.add(expm1_i(psi(u)) * w.value(u));
    }
    if fast {
        // the oscillating remainder cancels to well below the truncated mass
        acc.add(Complex64::new(-w.tail(big), 0.0));
        return Ok(acc.value());
    }
    let h = |u: f64| Complex64::from_polar(w.value(u), psi(u));
    let a = big as f64 + 0.5;
    let integral = oscillatory_tail(psi, &|u| w.value(u), a)?;
    let (m2, m1, p1, p2) = (h(a - 2.0), h(a - 1.0), h(a + 1.0), h(a + 2.0));
    let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / 12.0;
    let d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / 2.0;
    acc.add(integral + d1 / 24.0 - d3 * (7.0 / 5760.0));
    acc.add(Complex64::new(-w.tail(big), 0.0));
    Ok(acc.value())
}

/// `∫_a^∞ e^{iΨ(u)} g(u) du` by Gauss–Legendre panels of at most half a
/// local period, closed with two integration-by-parts terms.
fn oscillatory_tail<P: Fn(f64) -> f64, G: Fn(f64) -> f64>(psi: &P, g: &G, a: f64) -> Result<Complex64> {
    let gl = GaussLegendre::cached(16);
    let dpsi = |u: f64| {
        let h = 1e-4 * u;
        (psi(u + h) - psi(u - h)) / (2.0 * h)
    };
    let mut acc = crate::numeric::KahanComplex::new();
    let mut u = a;
    for _ in 0..2_000_000 {
        let d = dpsi(u);
        let scale = (u * d).abs();
        // remainder of the two-term closure is of size g/(|Ψ'| (u Ψ')²)
        let remainder = g(u) / d.abs().max(f64::MIN_POSITIVE) / (scale * scale).max(f64::MIN_POSITIVE);
        if u * g(u) < 1e-19 {
            // weights decay at least like u⁻², so the rest is below u·g(u)
            return Ok(acc.value());
        }
        if scale > 4.0 && remainder < 1e-15 {
            // ∫_U^∞ e^{iΨ} g ≈ e^{iΨ(U)} [i g/Ψ' − (g/Ψ')'/Ψ']
            let q = |v: f64| g(v) / dpsi(v);
            let hq = 1e-3 * u;
            let dq = (q(u + hq) - q(u - hq)) / (2.0 * hq);
            let tail = Complex64::from_polar(1.0, psi(u)) * (I * q(u) - dq / d);
            acc.add(tail);
            return Ok(acc.value());
        }
        let len = (PI / d.abs().max(1e-300)).min(0.5 * u);
        let v = gl.integrate_c(u, u + len, |x| Complex64::from_polar(g(x), psi(x)));
        acc.add(v);
        u += len;
    }
    Err(Error::NoConvergence {
        what: "oscillatory tail".into(),
        last: format!("{}", acc.value()),
        achieved: g(u),
    })
}

// ---------------------------------------------------------------------------
// graded adaptive quadrature

/// `∫₀^top [e^{iθ(x)} g(x) − ξ(x)] dx` with explicit `breaks` (descending,
/// starting at `top`), a geometric mesh below the last break and an
/// integration-by-parts closure near 0.
fn graded_integral<F>(f: &F, breaks: &[f64], tol: f64, depth: u32, order: usize) -> Result<(Complex64, f64)>
where
    F: Fn(f64) -> (f64, Complex64),
{
    let mut total = crate::numeric::KahanComplex::new();
    let mut err = 0.0;
    let panel = |lo: f64, hi: f64, total: &mut crate::numeric::KahanComplex| -> f64 {
        let mut integrand = |x: f64| {
            let (th, g) = f(x);
            Complex64::from_polar(1.0, th) * g - xi(x)
        };
        let (v, e) = adaptive_c_order(&mut integrand, lo, hi, tol, depth, order);
        total.add(v);
        e
    };
    for w in breaks.windows(2) {
        err += panel(w[1], w[0], &mut total);
    }
    let mut b = *breaks.last().expect("at least one break");
    while b > X_FLOOR {
        let lo = 0.5 * b;
        let mut var = 0.0;
        let mut prev = f(lo).0;
        for k in 1..=16 {
            let th = f(lo + (b - lo) * k as f64 / 16.0).0;
            var += (th - prev).abs();
            prev = th;
        }
        if var > IBP_PHASE {
            // ∫₀^b e^{iθ} g ≈ [e^{iθ} g/(iθ')]_b − [e^{iθ}(g/(iθ'))'/(iθ')]_b
            let dth = |x: f64| {
                let h = 1e-7 * x;
                (f(x + h).0 - f(x - h).0) / (2.0 * h)
            };
            let q = |x: f64| f(x).1 / (I * dth(x));
            let h = 1e-3 * b;
            let dq = (q(b + h) - q(b - h)) / (2.0 * h);
            let (th, _) = f(b);
            let e = Complex64::from_polar(1.0, th);
            let ibp = e * q(b) - e * dq / (I * dth(b));
            total.add(ibp);
            total.add(Complex64::new(-gauss_measure(0.0, b), 0.0));
            err += (dq / dth(b)).norm();
            return Ok((total.value(), err));
        }
        err += panel(lo, b, &mut total);
        b = lo;
    }
    // remaining (0, X_FLOOR] is bounded by twice its Gauss measure
    err += 2.0 * gauss_measure(0.0, b);
    Ok((total.value(), err))
}

fn cell_breaks() -> Vec<f64> {
    (1..=CELL_BREAKS + 1).map(|n| 1.0 / n as f64).collect()
}

fn dot(t: &[f64], v: &[f64]) -> f64 {
    t.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// `⟨t, φ_j(p)⟩`.
#[inline]
fn phase(cost: &CostFunction, j: usize, p: &Point, t: &[f64]) -> f64 {
    let mut buf = [0.0; 4];
    if cost.d <= buf.len() {
        cost.eval_into(j, p, &mut buf[..cost.d]);
        dot(t, &buf[..cost.d])
    } else {
        let mut v = vec![0.0; cost.d];
        cost.eval_into(j, p, &mut v);
        dot(t, &v)
    }
}

/// Real moment `∫₀¹ f(x) ξ(x) dx` of an integrable function with possible
/// singularity at 0.
pub(crate) fn xi_moment<F: Fn(f64) -> f64>(f: &F) -> f64 {
    xi_moment_with(f, &[])
}

/// [`xi_moment`] with extra panel breaks where `f` is not smooth.
pub(crate) fn xi_moment_with<F: Fn(f64) -> f64>(f: &F, extra: &[f64]) -> f64 {
    let mut breaks = cell_breaks();
    breaks.extend(extra.iter().filter(|b| **b > 0.0 && **b < 1.0));
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup();
    let mut acc = crate::numeric::KahanSum::new();
    let mut g = |x: f64| Complex64::new(f(x) * xi(x), 0.0);
    for w in breaks.windows(2) {
        acc.add(adaptive_c(&mut g, w[1], w[0], 1e-16, 40).0.re);
    }
    let gl = GaussLegendre::cached(16);
    let mut b = *breaks.last().unwrap();
    while b > 1e-300 {
        let rough = gl.integrate_c(0.5 * b, b, &mut g).norm();
        let v = adaptive_c(&mut g, 0.5 * b, b, (1e-15 * rough).max(1e-20), 30).0.re;
        acc.add(v);
        if b < 1e-15 && v.abs() < 1e-19 {
            break;
        }
        b *= 0.5;
    }
    acc.value()
}

// ---------------------------------------------------------------------------
// the integral

/// `𝔍_φ(t)` together with an absolute error estimate.
pub fn integral_i_detailed(cost: &CostFunction, t: &[f64]) -> Result<(Complex64, f64)> {
    if t.len() != cost.d {
        return Err(Error::InvalidParameter(format!(
            "frequency has dimension {}, cost has {}",
            t.len(),
            cost.d
        )));
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite frequency".into()));
    }
    if t.iter().all(|v| *v == 0.0) {
        return Ok((ZERO, 0.0));
    }
    let (value, err) = match (cost.m, &cost.kind) {
        (_, CostKind::Constant(c)) => (expm1_i(t[0] * c * cost.m as f64), 0.0),
        (1, _) if cost.step => (step_integral(cost, 1, t)?, 1e-15),
        (1, CostKind::Custom) => cellwise_integral(cost, t)?,
        (1, _) => {
            let f = |x: f64| {
                let th = phase(cost, 1, &Point::from_real(x), t);
                (th, Complex64::new(xi(x), 0.0))
            };
            graded_integral(&f, &cell_breaks(), 1e-15, 48, 16)?
        }
        (2, _) if cost.step => (two_step_integral(cost, t)?, 1e-14),
        (2, _) => two_smooth_integral(cost, t)?,
        _ => operator_integral(cost, t)?,
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite integral for cost {}", cost.label)));
    }
    if err > 1e-10 {
        return Err(Error::NoConvergence {
            what: format!("oscillatory integral for cost {}", cost.label),
            last: format!("{value}"),
            achieved: err,
        });
    }
    Ok((value, err))
}

/// `𝔍_φ(t) = ∫₀¹ (e^{i⟨t, Φ(x)⟩} − 1) ξ(x) dx`.
pub fn integral_i(cost: &CostFunction, t: &[f64]) -> Result<Complex64> {
    Ok(integral_i_detailed(cost, t)?.0)
}

/// Phase of a step cost along the real digit variable.
fn step_phase<'a>(cost: &'a CostFunction, j: usize, t: &'a [f64]) -> impl Fn(f64) -> f64 + 'a {
    move |u: f64| {
        phase(cost, j, &Point::from_branch(u, 0.0), t)
    }
}

fn step_integral(cost: &CostFunction, j: usize, t: &[f64]) -> Result<Complex64> {
    weighted_series(&step_phase(cost, j, t), Weight::Gauss, DIRECT_TERMS)
}

/// `∫₀¹ Σ_n (e^{iθ(n, y)} − 1) w_y(n) dy` for costs given through the digit
/// and the remainder, where the phase need not be regular in `x` near 0.
fn cellwise_integral(cost: &CostFunction, t: &[f64]) -> Result<(Complex64, f64)> {
    let failed = std::sync::Mutex::new(None);
    let mut c = |y: f64| {
        let psi = |u: f64| {
            phase(cost, 1, &Point::from_branch(u, y), t)
        };
        weighted_series(&psi, Weight::Shifted(y), CELL_BREAKS).unwrap_or_else(|e| {
            *failed.lock().unwrap() = Some(e);
            ZERO
        })
    };
    let mut total = ZERO;
    let mut err = 0.0;
    let mut hi = 1.0;
    for _ in 0..8 {
        let (v, e) = adaptive_c(&mut c, 0.5 * hi, hi, 1e-14, 20);
        total += v;
        err += e;
        hi *= 0.5;
    }
    let (v, e) = adaptive_c(&mut c, 0.0, hi, 1e-14, 20);
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    Ok((total + v, err + e))
}

/// Both costs constant on cells: `C(y)` is analytic and `∫ e^{iΨ₂} C` over
/// the cells of `y` becomes a weighted series.
fn two_step_integral(cost: &CostFunction, t: &[f64]) -> Result<Complex64> {
    let psi1 = step_phase(cost, 1, t);
    let psi2 = step_phase(cost, 2, t);
    let mut failure = None;
    let c = ChebSeries::from_fn(48, |y| match weighted_series(&psi1, Weight::Shifted(y), DIRECT_TERMS) {
        Ok(v) => v,
        Err(e) => {
            failure = Some(e);
            ZERO
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let c0 = c.eval(0.0);
    let c1 = c.derivative().eval(0.0);
    let resid = ChebSeries::from_fn(48, |y| c.eval(y) - c0 - c1 * y).antiderivative();
    const K: usize = 20_000;
    let mut acc = crate::numeric::KahanComplex::new();
    let mut upper = resid.eval(1.0);
    for k in 1..=K {
        let lower = resid.eval(1.0 / (k + 1) as f64);
        acc.add(Complex64::from_polar(1.0, psi2(k as f64)) * (upper - lower));
        upper = lower;
    }
    let sa = weighted_series(&psi2, Weight::Telescoping, DIRECT_TERMS)? + 1.0;
    let sb = weighted_series(&psi2, Weight::HalfSquare, DIRECT_TERMS)? + 0.5;
    let outer = acc.value() + c0 * sa + c1 * sb;
    Ok(step_integral(cost, 2, t)? + outer)
}

/// Period 2 with a general second cost: adaptive in `y` around the inner
/// digit series, with `C` interpolated close to 0 where `φ₂` oscillates.
fn two_smooth_integral(cost: &CostFunction, t: &[f64]) -> Result<(Complex64, f64)> {
    // C(y) inherits the kinks x = k of φ₁ at y = frac(1/k); beyond the last
    // of them in n the digit series is smooth.
    let first_kink = cost.kinks.first().copied().unwrap_or(1.0);
    let direct = 64.max((1.0 / first_kink).ceil() as usize + 8);
    let inner = |y: f64| -> Result<Complex64> {
        let psi = |u: f64| {
            phase(cost, 1, &Point::from_branch(u, y), t)
        };
        weighted_series(&psi, Weight::Shifted(y), direct)
    };
    let mut breaks: Vec<f64> = (0..=6).map(|k| 0.5f64.powi(k)).collect();
    if cost.kind == CostKind::Custom {
        breaks.extend(cell_breaks());
    }
    for &k in &cost.kinks {
        breaks.push(k);
        breaks.push((1.0 / k).fract());
    }
    breaks.retain(|b| *b > 0.0 && *b <= 1.0);
    breaks.sort_by(|a, b| b.total_cmp(a));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    // C is interpolated below the smallest break, where φ₂ may oscillate fast
    let near_top = *breaks.last().expect("1 is a break");
    let mut failure = None;
    let near = ChebSeries::from_fn(64, |s| match inner(s * near_top) {
        Ok(v) => v,
        Err(e) => {
            failure = Some(e);
            ZERO
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let failed = std::sync::Mutex::new(None);
    let f = |y: f64| {
        let th = phase(cost, 2, &Point::from_real(y), t);
        let c = if y <= near_top {
            near.eval(y / near_top)
        } else {
            inner(y).unwrap_or_else(|e| {
                *failed.lock().unwrap() = Some(e);
                ZERO
            })
        };
        (th, c + xi(y))
    };
    let out = graded_integral(&f, &breaks, 1e-14, 30, 8)?;
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e);
    }
    Ok(out)
}

/// Longer periods: `∫ Π_{2,t}[ξ] dx − 1` on the collocation grid, with the
/// change between two grid sizes as error estimate.
fn operator_integral(cost: &CostFunction, t: &[f64]) -> Result<(Complex64, f64)> {
    let nb = TransferConfig::default().nb;
    let at = |n: usize| -> Result<Complex64> {
        let disc = build_operator(Complex64::new(2.0, 0.0), t, cost, n, nb)?;
        let f: Vec<Complex64> = disc.nodes.iter().map(|x| Complex64::new(xi(*x), 0.0)).collect();
        let w = disc.quadrature_weights();
        Ok(disc.apply(&f).iter().zip(&w).map(|(a, b)| *a * *b).sum::<Complex64>() - 1.0)
    };
    let fine = at(48)?;
    let coarse = at(32)?;
    Ok((fine, (fine - coarse).norm()))
}

// ---------------------------------------------------------------------------
// μ_λ

/// `μ_λ = (12/π²) Σ_n n^λ log((n+1)²/(n(n+2)))` for `0 ≤ λ < 1`.
pub fn mu_lambda(lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("μ_λ diverges or is undefined for λ = {lambda}")));
    }
    Ok(12.0 * LN_2 / (PI * PI) * gauss_power_moment(lambda))
}

/// `Σ_n n^λ ν(n)` with `ν(n)` the Gauss cell measure, `λ < 1`.
pub(crate) fn gauss_power_moment(lambda: f64) -> f64 {
    const N: usize = 1000;
    let mut acc = crate::numeric::KahanSum::new();
    for n in 1..=N {
        let u = n as f64;
        acc.add(u.powf(lambda) * Weight::Gauss.value(u));
    }
    // ν(u) = Σ_{k≥2} a_k u^{-k} with a_k = (−1)^{k+1}(2 − 2^k)/(k log 2)
    for k in 2..60 {
        let kf = k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let ak = sign * (2.0 - 2f64.powi(k)) / (kf * LN_2);
        let z = hurwitz_any(Complex64::new(kf - lambda, 0.0), (N + 1) as f64).re;
        let term = ak * z;
        acc.add(term);
        if term.abs() < 1e-20 {
            break;
        }
    }
    acc.value()
}

// ---------------------------------------------------------------------------
// expansions

/// Closed-form expansion families.
#[derive(Clone, Debug)]
pub enum ExpansionKind {
    /// Taylor expansion for a cost with `∫|φ|^α < ∞`, `α ∈ (0, 3]`.
    Taylor { cost: CostFunction, alpha: f64 },
    /// `φ(x) = a x^{−β} |log x|^λ`.
    PowerLog { a: f64, beta: f64, lambda: f64 },
    /// `φ(x) = ⌊1/x⌋`.
    Floor1x,
    /// `φ(x) = ⌊1/x⌋^λ`, `λ ≥ 1/2`, `λ ≠ 1`.
    LargeMoment { lambda: f64 },
    /// Composite `⌊1/x⌋ − ⌊1/Tx⌋`.
    Dedekind,
    /// Estermann pair cost along `t = τ·direction`.
    Estermann { cost: CostFunction, direction: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum Form {
    Standard,
    /// `Σ_j ⟨t,u_j⟩² |log|⟨t,u_j⟩||³` along the direction, with the
    /// projections `a_j = ⟨direction, u_j⟩`.
    LogCube { a: [f64; 2] },
}

/// `1 + c₁t + c₂t² + c_* t^α |log t|^μ + O(t^{order} |log t|^{log_power})`,
/// stored as the prediction for `𝔍(t)` (the leading 1 removed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticExpansion {
    pub label: String,
    pub alpha: f64,
    pub mu: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub c_star: Complex64,
    pub rho: f64,
    /// Exponent of the stated error term.
    pub error_order: f64,
    /// Log power of the stated error term.
    pub error_log_power: f64,
    /// Unit direction of the frequency (length `d`).
    pub direction: Vec<f64>,
    form: Form,
}

impl AsymptoticExpansion {
    /// Predicted `𝔍(t·direction)` for `t > 0`.
    pub fn predict(&self, t: f64) -> Complex64 {
        let l = t.ln().abs();
        let base = self.c1 * t + self.c2 * t * t;
        match self.form {
            Form::Standard => {
                let star = if self.c_star == ZERO { ZERO } else { self.c_star * t.powf(self.alpha) * l.powf(self.mu) };
                base + star
            }
            Form::LogCube { a } => {
                let s: f64 = a
                    .iter()
                    .filter(|v| **v != 0.0)
                    .map(|v| {
                        let p = t * v.abs();
                        p * p * p.ln().abs().powi(3)
                    })
                    .sum();
                base + self.c_star * s
            }
        }
    }
}

fn expansion(label: &str, alpha: f64, mu: f64, c1: Complex64, c2: Complex64, c_star: Complex64) -> AsymptoticExpansion {
    AsymptoticExpansion {
        label: label.into(),
        alpha,
        mu,
        c1,
        c2,
        c_star,
        rho: 0.0,
        error_order: alpha,
        error_log_power: 0.0,
        direction: vec![1.0],
        form: Form::Standard,
    }
}

/// `e(x) = e^{2πix}`.
fn e_turn(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// Build the expansion of the given kind with all coefficients evaluated.
pub fn asymptotic(kind: &ExpansionKind) -> Result<AsymptoticExpansion> {
    match kind {
        ExpansionKind::Taylor { cost, alpha } => {
            let alpha = *alpha;
            if !(alpha > 0.0 && alpha <= 3.0) {
                return Err(Error::InvalidParameter(format!("taylor order α = {alpha} outside (0, 3]")));
            }
            if cost.m != 1 || cost.d != 1 {
                return Err(Error::InvalidParameter("taylor expansion needs a scalar m = 1 cost".into()));
            }
            let phi = |x: f64| cost.eval_scalar(1, &Point::from_real(x));
            let c1 = if alpha >= 1.0 { I * xi_moment(&phi) } else { ZERO };
            let c2 = if alpha >= 2.0 { Complex64::new(-0.5 * xi_moment(&|x| phi(x).powi(2)), 0.0) } else { ZERO };
            let mut e = expansion("taylor", alpha, 0.0, c1, c2, ZERO);
            e.error_order = alpha;
            Ok(e)
        }
        ExpansionKind::PowerLog { a, beta, lambda } => {
            let (a, beta, lambda) = (*a, *beta, *lambda);
            if a == 0.0 || !(beta > 0.0) || !(lambda > -beta) {
                return Err(Error::InvalidParameter(format!(
                    "power_log needs a ≠ 0, β > 0, λ > −β; got a = {a}, β = {beta}, λ = {lambda}"
                )));
            }
            let alpha = 1.0 / beta;
            let mu_g = lambda / beta + 1.0;
            let varrho = a.abs().powf(alpha) * e_turn(-a.signum() / (4.0 * beta)) * gamma(mu_g)
                / (beta.powf(mu_g) * LN_2);
            let phi = move |x: f64| a * x.powf(-beta) * x.ln().abs().powf(lambda);
            let c1 = if alpha > 1.0 { I * xi_moment(&phi) } else { ZERO };
            let c2 = if alpha > 2.0 { Complex64::new(-0.5 * xi_moment(&|x| phi(x).powi(2)), 0.0) } else { ZERO };
            let rho = 0.5;
            let (mu, c_star) = if (alpha - 1.0).abs() < 1e-12 {
                (mu_g, -varrho / gamma(mu_g + 1.0))
            } else if (alpha - 2.0).abs() < 1e-12 {
                (mu_g, 0.5 * varrho / gamma(mu_g + 1.0))
            } else {
                (mu_g - 1.0, varrho * gamma(-alpha) / gamma(mu_g))
            };
            let mut e = expansion("power_log", alpha, mu, c1, c2, c_star);
            e.rho = rho;
            e.error_log_power = mu - rho;
            Ok(e)
        }
        ExpansionKind::Floor1x => {
            // −(it/log 2)(log t + γ₀ − πi/2)
            let c1 = -I / LN_2 * Complex64::new(EULER_GAMMA, -0.5 * PI);
            let mut e = expansion("floor1x", 1.0, 1.0, c1, ZERO, I / LN_2);
            // next pole is double, at s = 2
            e.error_order = 2.0;
            e.error_log_power = 1.0;
            Ok(e)
        }
        ExpansionKind::LargeMoment { lambda } => {
            let lambda = *lambda;
            if (lambda - 0.5).abs() < 1e-15 {
                let c1 = I * gauss_power_moment(0.5);
                let mut e = expansion("largemom", 2.0, 1.0, c1, ZERO, Complex64::new(-1.0 / LN_2, 0.0));
                e.error_order = 2.0;
                Ok(e)
            } else if lambda > 0.5 && (lambda - 1.0).abs() > 1e-12 && lambda.is_finite() {
                let c1 = if lambda < 1.0 { I * gauss_power_moment(lambda) } else { ZERO };
                let c_star = -e_turn(-1.0 / (4.0 * lambda)) * gamma(1.0 - 1.0 / lambda) / LN_2;
                let mut e = expansion("largemom", 1.0 / lambda, 0.0, c1, ZERO, c_star);
                e.rho = 1.0;
                e.error_log_power = -1.0;
                Ok(e)
            } else {
                Err(Error::InvalidParameter(format!(
                    "largemom needs λ = 1/2 or λ > 1/2 with λ ≠ 1 (use floor1x); got λ = {lambda}"
                )))
            }
        }
        ExpansionKind::Dedekind => {
            let mut e = expansion("dedekind", 1.0, 0.0, Complex64::new(-PI / LN_2, 0.0), ZERO, ZERO);
            // the cross term is a product of two O(t|log t|) factors
            e.error_order = 2.0;
            e.error_log_power = 2.0;
            Ok(e)
        }
        ExpansionKind::Estermann { cost, direction } => {
            if cost.kind != CostKind::Estermann {
                return Err(Error::InvalidParameter("estermann expansion needs the estermann cost".into()));
            }
            let nrm = (direction[0].powi(2) + direction[1].powi(2)).sqrt();
            if !(nrm > 0.0) {
                return Err(Error::InvalidParameter("direction must be nonzero".into()));
            }
            let dir = [direction[0] / nrm, direction[1] / nrm];
            let mut mu = [0.0; 2];
            for j in 1..=2 {
                for (c, m) in mu.iter_mut().enumerate() {
                    *m += xi_moment_with(
                        &|x: f64| {
                            let mut v = [0.0; 2];
                            cost.eval_into(j, &Point::from_real(x), &mut v);
                            v[c]
                        },
                        &cost.kinks,
                    );
                }
            }
            let c1 = I * (dir[0] * mu[0] + dir[1] * mu[1]);
            let a = [dir[0] + dir[1], dir[0] - dir[1]];
            let mut e = expansion("estermann", 2.0, 3.0, c1, ZERO, Complex64::new(-1.0 / (3.0 * LN_2), 0.0));
            e.direction = dir.to_vec();
            e.form = Form::LogCube { a };
            e.error_order = 2.0;
            e.error_log_power = 2.0;
            Ok(e)
        }
    }
}

// ---------------------------------------------------------------------------
// error-order fits

/// Outcome of [`fit_error_order`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ErrorFit {
    /// Least-squares slope of `log(|error| / |log t|^b)` against `log t`.
    Slope(f64),
    /// Too few residuals above the quadrature noise floor.
    Saturated,
}

/// One row of a comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub t: f64,
    pub integral: Complex64,
    pub predicted: Complex64,
    pub error: f64,
    /// Quadrature error estimate of `integral`.
    pub quad_error: f64,
}

/// Absolute floor below which residuals are treated as noise.
pub const NOISE_FLOOR: f64 = 1e-13;

/// Evaluate the integral and the prediction along the expansion's direction.
pub fn comparison_table(cost: &CostFunction, exp: &AsymptoticExpansion, t_grid: &[f64]) -> Result<Vec<TableRow>> {
    if exp.direction.len() != cost.d {
        return Err(Error::InvalidParameter(format!(
            "expansion direction has dimension {}, cost has {}",
            exp.direction.len(),
            cost.d
        )));
    }
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidParameter(format!("t = {t} outside (0, 1)")));
            }
            let tv: Vec<f64> = exp.direction.iter().map(|d| d * t).collect();
            let (integral, quad_error) = integral_i_detailed(cost, &tv)?;
            let predicted = exp.predict(t);
            Ok(TableRow { t, integral, predicted, error: (integral - predicted).norm(), quad_error })
        })
        .collect()
}

/// Fit the order of `integral_I − prediction` over `rows`, dividing out the
/// expansion's stated log power.
pub fn fit_rows(rows: &[TableRow], log_power: f64) -> ErrorFit {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for r in rows {
        let floor = NOISE_FLOOR.max(100.0 * r.quad_error);
        if r.error > floor {
            xs.push(r.t.ln());
            ys.push(r.error.ln() - log_power * r.t.ln().abs().ln());
        }
    }
    if xs.len() < 3 {
        return ErrorFit::Saturated;
    }
    ErrorFit::Slope(linear_fit(&xs, &ys).0)
}

/// Least-squares order of the expansion error on `t_grid`.
pub fn fit_error_order(cost: &CostFunction, exp: &AsymptoticExpansion, t_grid: &[f64]) -> Result<ErrorFit> {
    let rows = comparison_table(cost, exp, t_grid)?;
    Ok(fit_rows(&rows, exp.error_log_power))
}

/// `n` geometric points spanning `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (r * k as f64).exp()).collect()
}

/// CSV with columns `t,re_I,im_I,re_pred,im_pred,abs_err`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("t,re_I,im_I,re_pred,im_pred,abs_err\n");
    for r in rows {
        s.push_str(&format!(
            "{:.6e},{:.16e},{:.16e},{:.16e},{:.16e},{:.6e}\n",
            r.t, r.integral.re, r.integral.im, r.predicted.re, r.predicted.im, r.error
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{make_builtin, BuiltinKind};

    fn floor() -> CostFunction {
        make_builtin(BuiltinKind::FloorPower(1.0)).unwrap()
    }

    #[test]
    fn trivial_values() {
        let c = floor();
        assert_eq!(integral_i(&c, &[0.0]).unwrap(), ZERO);
        let k = make_builtin(BuiltinKind::Constant(2.5)).unwrap();
        let v = integral_i(&k, &[0.3]).unwrap();
        assert!((v - (Complex64::from_polar(1.0, 0.75) - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn floor_matches_clausen_form() {
        // Σ_n (e^{itn} − 1) ν(n) against an independent direct sum of 10^7 terms
        let t = 0.05;
        let c = floor();
        let v = integral_i(&c, &[t]).unwrap();
        let mut acc = crate::numeric::KahanComplex::new();
        let big = 10_000_000;
        for n in 1..=big {
            let u = n as f64;
            acc.add(expm1_i(t * u) * Weight::Gauss.value(u));
        }
        // the remaining oscillatory mass is O(1/(t N²)); the −1 part is exact
        acc.add(Complex64::new(-Weight::Gauss.tail(big), 0.0));
        assert!((v - acc.value()).norm() < 1e-12, "{v} vs {}", acc.value());
    }

    #[test]
    fn floor_example_from_expansion() {
        let t = 1e-3;
        let v = integral_i(&floor(), &[t]).unwrap();
        let pred = asymptotic(&ExpansionKind::Floor1x).unwrap().predict(t);
        assert!((v - pred).norm() < 5.0 * t.powf(1.8), "{v} vs {pred}");
    }

    #[test]
    fn smooth_cost_against_direct_quadrature() {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        let t = 0.7;
        let v = integral_i(&c, &[t]).unwrap();
        let gl = GaussLegendre::new(40);
        let want = gl.integrate_c(0.0, 1.0, |x| (Complex64::from_polar(1.0, t * x) - 1.0) * xi(x));
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn invariance_under_gauss_map() {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        let shifted = CostFunction::custom("x∘T", 1, 1, f64::INFINITY, |_, p, out| out[0] = p.y).unwrap();
        for t in [0.01, 0.5, 3.0] {
            let a = integral_i(&c, &[t]).unwrap();
            let b = integral_i(&shifted, &[t]).unwrap();
            assert!((a - b).norm() < 1e-12, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn floor_invariance_through_second_digit() {
        // period 2 with φ₁ = 0, φ₂ = ⌊1/x⌋ has composite ⌊1/Tx⌋
        let mut shifted = CostFunction::custom("0,floor", 2, 1, 1.0, |j, p, out| {
            out[0] = if j == 2 { p.n } else { 0.0 };
        })
        .unwrap();
        shifted.step = true;
        for t in [0.01, 0.05] {
            let a = integral_i(&floor(), &[t]).unwrap();
            let b = integral_i(&shifted, &[t]).unwrap();
            assert!((a - b).norm() < 1e-8, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let c = CostFunction::scalar_fn("sqrt", 2.0, |x| x.powf(-0.5));
        let a = integral_i(&c, &[0.02]).unwrap();
        let b = integral_i(&c, &[-0.02]).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn taylor_coefficient_for_identity() {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        let e = asymptotic(&ExpansionKind::Taylor { cost: c, alpha: 3.0 }).unwrap();
        assert!((e.c1.im - (1.0 / LN_2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn largemom_constants() {
        let e = asymptotic(&ExpansionKind::LargeMoment { lambda: 2.0 }).unwrap();
        let want = -PI.sqrt() * Complex64::from_polar(1.0, -PI / 4.0) / LN_2;
        assert!((e.c_star - want).norm() < 1e-12);
        assert!(asymptotic(&ExpansionKind::LargeMoment { lambda: 0.4 }).is_err());
        assert!(asymptotic(&ExpansionKind::LargeMoment { lambda: 1.0 }).is_err());
    }

    #[test]
    fn dedekind_prediction() {
        let e = asymptotic(&ExpansionKind::Dedekind).unwrap();
        assert!((e.predict(0.01) - Complex64::new(-PI * 0.01 / LN_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mu_lambda_values() {
        assert!((mu_lambda(0.0).unwrap() - 12.0 * LN_2 / (PI * PI)).abs() < 1e-12);
        // 10^6-term partial sum plus the bound ν(n) ≤ 1/(n² log 2) on the tail
        let half = mu_lambda(0.5).unwrap();
        let partial: f64 = (1..=1_000_000u64)
            .map(|n| (n as f64).sqrt() * Weight::Gauss.value(n as f64))
            .sum::<f64>()
            * 12.0
            * LN_2
            / (PI * PI);
        let tail_bound = 12.0 / (PI * PI) * 2.0 / 1000.0;
        assert!(half > partial && half - partial < tail_bound);
        let (a, b, c) = (mu_lambda(0.9).unwrap(), mu_lambda(0.95).unwrap(), mu_lambda(0.99).unwrap());
        assert!(a < b && b < c);
        assert!(mu_lambda(1.0).is_err());
    }

    #[test]
    fn csv_header() {
        let rows = [TableRow { t: 0.1, integral: ZERO, predicted: ZERO, error: 0.0, quad_error: 0.0 }];
        assert!(table_csv(&rows).starts_with("t,re_I,im_I,re_pred,im_pred,abs_err\n"));
    }
}
