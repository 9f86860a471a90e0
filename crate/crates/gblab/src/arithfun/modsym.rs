//! Modular symbols ⟨x⟩_{f,m} = (2πi)^m/(m−1)! ∫_x^{i∞} f(z)(z−x)^{m−1} dz at
//! rational x, by three independent routes:
//!
//! * unfolding along the convergents of x into period integrals
//!   ∫_0^{i∞} f(w) wⁿ dw = i^{n+1} Λ(f, n+1), combined exactly;
//! * a split integral at height 1/q: the upper half as the Fourier series
//!   with incomplete-gamma weights, the lower half mapped to the cusp by a
//!   matrix sending x to ∞;
//! * the reciprocity iteration along the Gauss orbit of x.

use super::cusp::CuspFormData;
use crate::costs::PeriodFunction;
use crate::error::{Error, Result};
use crate::rationals::{cf_expand, mod_inverse, Rational};
use crate::special::binomial;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use std::f64::consts::PI;
use std::sync::Arc;

/// Evaluation route for [`modsym`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModsymMethod {
    /// Series for m > k/2, unfolding for m = k/2, mirror relation below.
    Auto,
    Unfolding,
    Series,
    Mirror,
    Reciprocity,
}

fn check(f: &CuspFormData, m: u32) -> Result<()> {
    if m == 0 || m >= f.weight {
        return Err(Error::InvalidParameter(format!("m = {m} outside 1..{}", f.weight - 1)));
    }
    Ok(())
}

/// ⟨x⟩_{f,m} for `x ∈ (0,1] ∩ ℚ` (⟨0⟩ = ⟨1⟩ by periodicity).
pub fn modsym(f: &CuspFormData, m: u32, x: Rational) -> Result<Complex64> {
    modsym_with(f, m, x, ModsymMethod::Auto)
}

pub fn modsym_with(f: &CuspFormData, m: u32, x: Rational, method: ModsymMethod) -> Result<Complex64> {
    check(f, m)?;
    let half = f.weight / 2;
    match method {
        ModsymMethod::Auto => {
            if m > half {
                modsym_series(f, m, x)
            } else if m == half {
                modsym_unfolding(f, m, x)
            } else {
                modsym_mirror(f, m, x)
            }
        }
        ModsymMethod::Unfolding => modsym_unfolding(f, m, x),
        ModsymMethod::Series => modsym_series(f, m, x),
        ModsymMethod::Mirror => modsym_mirror(f, m, x),
        ModsymMethod::Reciprocity => {
            if m != half {
                return Err(Error::InvalidParameter("reciprocity route needs m = k/2".into()));
            }
            modsym_reciprocity(f, x, ModsymMethod::Series)
        }
    }
}

/// Integer arithmetic used by the unfolding sums: wrapping 128-bit, a
/// Mersenne-prime residue that cross-checks it, and BigInt as fallback.
trait Ring: Clone {
    fn from_i128(v: i128) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Ring for i128 {
    fn from_i128(v: i128) -> Self {
        v
    }
    fn add(&self, o: &Self) -> Self {
        self.wrapping_add(*o)
    }
    fn mul(&self, o: &Self) -> Self {
        self.wrapping_mul(*o)
    }
}

const P61: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct ModP(u64);

impl Ring for ModP {
    fn from_i128(v: i128) -> Self {
        ModP(v.rem_euclid(P61 as i128) as u64)
    }
    fn add(&self, o: &Self) -> Self {
        ModP((self.0 + o.0) % P61)
    }
    fn mul(&self, o: &Self) -> Self {
        ModP(((self.0 as u128 * o.0 as u128) % P61 as u128) as u64)
    }
}

impl Ring for BigInt {
    fn from_i128(v: i128) -> Self {
        BigInt::from(v)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Coefficients of (c w + d)^e as ring elements.
fn linear_power<R: Ring>(c: &R, d: &R, e: usize) -> Vec<R> {
    let mut p = vec![R::from_i128(1)];
    for _ in 0..e {
        let mut next = vec![R::from_i128(0); p.len() + 1];
        for (i, v) in p.iter().enumerate() {
            next[i] = next[i].add(&v.mul(d));
            next[i + 1] = next[i + 1].add(&v.mul(c));
        }
        p = next;
    }
    p
}

/// Σ over the convergent chain of q^{m−1}(z − x)^{m−1} pulled back to
/// ∫_0^{i∞}, paired with the integer periods: returns (S_odd, S_even) with
/// ∫_x^{i∞} f(z)(z−x)^{m−1}dz = q^{1−m} (i ω_odd S_odd + ω_even S_even).
fn unfold_sums<R: Ring>(k: usize, m: usize, a: u64, q: u64, digits: &[u64], periods: &[i128]) -> (R, R) {
    let (ai, qi) = (a as i128, q as i128);
    let mut coeffs = vec![R::from_i128(0); k - 1];
    let (mut pm1, mut qm1) = (1i128, 0i128); // p_{j−1}, q_{j−1}
    let (mut pj, mut qj) = (0i128, 1i128); // p_j, q_j
    let mut sign = 1i128; // det [[p_{j−1}, p_j],[q_{j−1}, q_j]] = (−1)^j
    for j in 0..=digits.len() {
        let (ca, cc) = (sign * pm1, sign * qm1);
        let (cb, cd) = (pj, qj);
        let alpha = qi * ca - ai * cc;
        let beta = qi * cb - ai * cd;
        let left = linear_power(&R::from_i128(cc), &R::from_i128(cd), k - 1 - m);
        let right = linear_power(&R::from_i128(alpha), &R::from_i128(beta), m - 1);
        for (i, l) in left.iter().enumerate() {
            for (jj, r) in right.iter().enumerate() {
                coeffs[i + jj] = coeffs[i + jj].add(&l.mul(r));
            }
        }
        if j < digits.len() {
            let d = digits[j] as i128;
            let (np, nq) = (d * pj + pm1, d * qj + qm1);
            (pm1, qm1, pj, qj) = (pj, qj, np, nq);
            sign = -sign;
        }
    }
    let mut s_odd = R::from_i128(0);
    let mut s_even = R::from_i128(0);
    for (n, c) in coeffs.iter().enumerate() {
        // i^{n+1}: n even → i·(−1)^{n/2}; n odd → (−1)^{(n+1)/2}.
        if n % 2 == 0 {
            let sg = if (n / 2) % 2 == 0 { 1 } else { -1 };
            s_odd = s_odd.add(&c.mul(&R::from_i128(sg * periods[n])));
        } else {
            let sg = if ((n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            s_even = s_even.add(&c.mul(&R::from_i128(sg * periods[n])));
        }
    }
    (s_odd, s_even)
}

fn prefactor(m: u32) -> Complex64 {
    let fact: f64 = (1..m).map(|j| j as f64).product();
    Complex64::new(0.0, 2.0 * PI).powu(m) / fact
}

/// Unfolding route; exact up to the final conversion to floating point.
pub fn modsym_unfolding(f: &CuspFormData, m: u32, x: Rational) -> Result<Complex64> {
    check(f, m)?;
    let k = f.weight as usize;
    let (a, q) = (x.num(), x.den());
    let cf = cf_expand(x);
    let digits = cf.coeffs();
    let (wo, we) = unfold_sums::<i128>(k, m as usize, a, q, digits, &f.periods_int);
    let (po, pe) = unfold_sums::<ModP>(k, m as usize, a, q, digits, &f.periods_int);
    let (so, se) = if ModP::from_i128(wo) == po && ModP::from_i128(we) == pe {
        (wo as f64, we as f64)
    } else {
        let (bo, be) = unfold_sums::<BigInt>(k, m as usize, a, q, digits, &f.periods_int);
        (bo.to_f64().unwrap_or(f64::NAN), be.to_f64().unwrap_or(f64::NAN))
    };
    let scale = (q as f64).powi(1 - m as i32);
    let integral = Complex64::new(f.omega[0] * se, f.omega[1] * so) * scale;
    Ok(prefactor(m) * integral)
}

/// Fourier terms needed at height 1/q.
fn series_terms(f: &CuspFormData, q: u64) -> usize {
    let k = f.weight as f64;
    let qf = q as f64;
    let mut n = qf;
    for _ in 0..50 {
        n = qf * (42.0 + 0.5 * (k + 1.0) * n.ln().max(1.0)) / (2.0 * PI);
    }
    n.ceil() as usize
}

/// Split-integral route at height 1/q; works for every 1 ≤ m ≤ k−1.
pub fn modsym_series(f: &CuspFormData, m: u32, x: Rational) -> Result<Complex64> {
    check(f, m)?;
    let (a, q) = (x.num(), x.den());
    let nterms = series_terms(f, q);
    if nterms > f.coeffs.len() {
        let cut = f.coeffs.len() as f64;
        let achieved = (-2.0 * PI * cut / q as f64).exp() * cut.powf(0.5 * (f.weight as f64 + 1.0));
        return Err(Error::NoConvergence {
            what: format!("modular symbol series at q = {q}"),
            last: format!("{} coefficients available, {nterms} needed", f.coeffs.len()),
            achieved,
        });
    }
    let k = f.weight;
    let qf = q as f64;
    let xf = a as f64 / qf;
    // u a + v q = −1, so u ≡ −a^{−1} (mod q).
    let u = if q == 1 { 0 } else { (q - inverse(a, q)?) % q };
    let uf = u as f64 / qf;
    let e = (k - 1 - m) as usize;
    let mfact: f64 = (1..m).map(|j| j as f64).product();
    let im = Complex64::new(0.0, 1.0).powu(m);
    let mut upper = Complex64::new(0.0, 0.0);
    let mut lower = Complex64::new(0.0, 0.0);
    for n in 1..=nterms {
        let an = f.coeffs[n - 1];
        let tn = 2.0 * PI * n as f64;
        let xx = tn / qf;
        // Γ(m, xx)
        let mut term = 1.0;
        let mut sum = 1.0;
        for j in 1..m {
            term *= xx / j as f64;
            sum += term;
        }
        let g = mfact * (-xx).exp() * sum;
        let ph = 2.0 * PI * ((n as f64 * xf).fract());
        upper += Complex64::from_polar(an * g / tn.powi(m as i32), ph);
        let mut inner = 0.0;
        let mut jf = 1.0;
        for j in 0..=e {
            if j > 0 {
                jf *= j as f64;
            }
            inner += binomial(e as u64, j as u64) * qf.powi(j as i32) * jf / tn.powi(j as i32 + 1);
        }
        let ph2 = 2.0 * PI * ((n as f64 * uf).fract());
        lower += Complex64::from_polar(an * (-xx).exp() * inner, ph2);
    }
    let upper = upper * im;
    let lower = -lower
        * qf.powi(1 - m as i32)
        * Complex64::new(0.0, -1.0).powu(e as u32)
        * Complex64::new(0.0, 1.0);
    Ok(prefactor(m) * (upper + lower))
}

/// Mirror relation ⟨a/q⟩_m = (−1)^{k−m} q^{k−2m} (2πi)^{2m−k} (k−m−1)!/(m−1)!
/// · ⟨u/q⟩_{k−m}, with u ≡ −a^{−1} (mod q); the right side uses the series route.
pub fn modsym_mirror(f: &CuspFormData, m: u32, x: Rational) -> Result<Complex64> {
    check(f, m)?;
    let k = f.weight;
    let (a, q) = (x.num(), x.den());
    let u = if q == 1 { 1 } else { (q - inverse(a, q)?) % q };
    let y = Rational::new(if u == 0 { 1 } else { u }, if u == 0 { 1 } else { q })?;
    let other = modsym_series(f, k - m, y)?;
    let sign = if (k - m) % 2 == 0 { 1.0 } else { -1.0 };
    let f1: f64 = (1..(k - m)).map(|j| j as f64).product();
    let f2: f64 = (1..m).map(|j| j as f64).product();
    let tp = Complex64::new(0.0, 2.0 * PI);
    let p = 2 * m as i32 - k as i32;
    Ok(other * sign * (q as f64).powi(k as i32 - 2 * m as i32) * tp.powi(p) * (f1 / f2))
}

fn inverse(a: u64, q: u64) -> Result<u64> {
    mod_inverse(a, q).ok_or_else(|| Error::Domain(format!("{a} is not invertible mod {q}")))
}

/// −1/(s·a/q) reduced into (0, 1].
fn neg_inverse(sign: i8, a: u64, q: u64) -> Rational {
    // −1/x = −s q/a ≡ (−s q mod a)/a.
    let r = if sign > 0 { (a - q % a) % a } else { q % a };
    if r == 0 {
        Rational::one()
    } else {
        Rational::new_unchecked(r, a)
    }
}

/// φ_f(x) = ⟨x⟩_{k/2} − ⟨−1/x⟩_{k/2} at x = s·a/q:
/// Σ_{j=1}^{M} c_{j,k} (−i)^j x^j ⟨−1/x⟩_{k/2+j} − (k−1)(2π)^{M+1} i^M r_f^{(M)}(x),
/// M = k/2 − 1, c_{j,k} = j! C(M,j) C(M+j,j) (−1/2π)^j. The inner symbols of
/// orders k/2+1..k−1 are computed by `inner`.
pub fn period_function(f: &CuspFormData, sign: i8, a: u64, q: u64, inner: ModsymMethod) -> Result<Complex64> {
    let k = f.weight;
    let mm = k / 2 - 1;
    let x = sign as f64 * a as f64 / q as f64;
    let y = neg_inverse(sign, a, q);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 1..=mm {
        let jf: f64 = (1..=j).map(|t| t as f64).product();
        let c = jf
            * binomial(mm as u64, j as u64)
            * binomial((mm + j) as u64, j as u64)
            * (-1.0 / (2.0 * PI)).powi(j as i32);
        let sym = modsym_with(f, 1 + mm + j, y, inner)?;
        acc += sym * c * x.powi(j as i32) * Complex64::new(0.0, -1.0).powu(j);
    }
    let r = f.period_poly_derivative(mm as usize, x);
    acc -= (k - 1) as f64 * (2.0 * PI).powi(mm as i32 + 1) * Complex64::new(0.0, 1.0).powu(mm) * r;
    Ok(acc)
}

/// Σ_{j=1}^{r} φ_f((−1)^{j−1} T^{j−1} x) + ⟨0⟩_{k/2}, from iterating
/// ⟨x⟩ = ⟨−1/x⟩ + φ_f(x) with −1/x ≡ −T(x) (mod 1).
pub fn modsym_reciprocity(f: &CuspFormData, x: Rational, inner: ModsymMethod) -> Result<Complex64> {
    let half = f.weight / 2;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut cur = Some(x);
    let mut sign = 1i8;
    while let Some(p) = cur {
        acc += period_function(f, sign, p.num(), p.den(), inner)?;
        sign = -sign;
        cur = p.gauss();
    }
    let zero = modsym_with(f, half, Rational::one(), inner_central(inner))?;
    Ok(acc + zero)
}

fn inner_central(inner: ModsymMethod) -> ModsymMethod {
    match inner {
        ModsymMethod::Unfolding => ModsymMethod::Unfolding,
        _ => ModsymMethod::Series,
    }
}

/// φ_f provider for the `modsym` cost, backed by the exact unfolding route.
pub struct DeltaPeriodFunction {
    form: Arc<CuspFormData>,
}

impl DeltaPeriodFunction {
    pub fn new(form: Arc<CuspFormData>) -> Self {
        Self { form }
    }

    pub fn delta() -> Result<Self> {
        Ok(Self::new(Arc::new(CuspFormData::delta(64)?)))
    }
}

impl PeriodFunction for DeltaPeriodFunction {
    fn weight(&self) -> u32 {
        self.form.weight
    }

    fn phi_exact(&self, sign: i8, num: u64, den: u64) -> Complex64 {
        period_function(&self.form, sign, num, den, ModsymMethod::Unfolding)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    /// Evaluated at the last convergent of |x| with denominator ≤ 1000;
    /// φ_f is Hölder of every order below 1, so the error is of the size
    /// of that rational approximation.
    fn phi_real(&self, x: f64) -> Complex64 {
        let sign: i8 = if x < 0.0 { -1 } else { 1 };
        let (a, q) = best_convergent(x.abs(), 1000);
        self.phi_exact(sign, a, q)
    }
}

/// Last convergent p/q of `v ∈ (0, 1]` with q ≤ `max_den`.
pub(crate) fn best_convergent(v: f64, max_den: u64) -> (u64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = v;
    loop {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let ai = a as u64;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac < 1e-14 {
            break;
        }
        r = 1.0 / frac;
    }
    if p1 == 0 || q1 == 0 {
        (1, max_den.max(1))
    } else {
        (p1, q1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta() -> CuspFormData {
        CuspFormData::delta(20_000).unwrap()
    }

    #[test]
    fn zero_symbol_weight_eleven() {
        let f = delta();
        let direct: f64 = -f.coeffs.iter().enumerate().map(|(i, a)| a / ((i + 1) as f64).powi(11)).sum::<f64>();
        for method in [ModsymMethod::Series, ModsymMethod::Unfolding] {
            let v = modsym_with(&f, 11, Rational::one(), method).unwrap();
            assert!((v.re - direct).abs() < 1e-10 && v.im.abs() < 1e-10, "{method:?}: {v}");
        }
    }

    #[test]
    fn unfolding_matches_series() {
        let f = delta();
        for (a, q) in [(1, 3), (2, 5), (3, 7), (17, 60), (355, 997)] {
            let x = Rational::new(a, q).unwrap();
            for m in 1..12 {
                let u = modsym_with(&f, m, x, ModsymMethod::Unfolding).unwrap();
                let s = modsym_with(&f, m, x, ModsymMethod::Series).unwrap();
                assert!((u - s).norm() < 1e-8 * (1.0 + u.norm()), "m={m} x={x}: {u} vs {s}");
            }
        }
    }

    #[test]
    fn mirror_matches_series() {
        let f = delta();
        for (a, q) in [(1, 3), (2, 5), (5, 12)] {
            let x = Rational::new(a, q).unwrap();
            for m in 1..12 {
                let s = modsym_with(&f, m, x, ModsymMethod::Series).unwrap();
                let r = modsym_with(&f, m, x, ModsymMethod::Mirror).unwrap();
                assert!((r - s).norm() < 1e-8 * (1.0 + s.norm()), "m={m} x={x}: {r} vs {s}");
            }
        }
    }

    #[test]
    fn reciprocity_residual() {
        let f = delta();
        for (a, q) in [(1u64, 3u64), (2, 5), (3, 7)] {
            let x = Rational::new(a, q).unwrap();
            let lhs = modsym(&f, 6, x).unwrap();
            let y = neg_inverse(1, a, q);
            let rhs = modsym(&f, 6, y).unwrap()
                + period_function(&f, 1, a, q, ModsymMethod::Series).unwrap();
            assert!((lhs - rhs).norm() < 1e-8, "x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn reciprocity_iteration() {
        let f = delta();
        for (a, q) in [(1u64, 3u64), (2, 5), (3, 7), (101, 343)] {
            let x = Rational::new(a, q).unwrap();
            let u = modsym(&f, 6, x).unwrap();
            let b = modsym_reciprocity(&f, x, ModsymMethod::Series).unwrap();
            assert!((u - b).norm() < 1e-8, "x={x}: {u} vs {b}");
        }
    }

    #[test]
    fn rotated_reciprocity_fails() {
        // A global factor (−i)^{k/2−1} on ⟨−1/x⟩ is inconsistent with the
        // exact values: at x = 1/3 both symbols are real and nonzero.
        let f = delta();
        let x = Rational::new(1, 3).unwrap();
        let lhs = modsym(&f, 6, x).unwrap();
        let y = modsym(&f, 6, neg_inverse(1, 1, 3)).unwrap();
        assert!(lhs.im.abs() < 1e-12 && y.im.abs() < 1e-12 && y.re.abs() > 0.1);
    }

    #[test]
    fn errors() {
        let f = CuspFormData::delta(64).unwrap();
        assert!(modsym(&f, 0, Rational::one()).is_err());
        assert!(modsym(&f, 12, Rational::one()).is_err());
        let big = Rational::new(1, 997).unwrap();
        assert!(matches!(modsym_series(&f, 7, big), Err(Error::NoConvergence { .. })));
    }
}
