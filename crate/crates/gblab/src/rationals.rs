//! Reduced rationals in (0, 1], their Gauss-map continued fractions, orbits,
//! mirror elements and the enumeration of Ω_Q.

use crate::error::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

/// A reduced fraction `num/den` with `0 < num <= den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    /// Build a reduced rational in (0, 1]; the fraction must already be reduced.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num > den {
            return Err(Error::Domain(format!("{num}/{den} is not in (0,1]")));
        }
        if num.gcd(&den) != 1 {
            return Err(Error::Domain(format!("{num}/{den} is not reduced")));
        }
        Ok(Self { num, den })
    }

    /// Reduce `num/den` and build the rational.
    pub fn reduced(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 {
            return Err(Error::Domain(format!("{num}/{den} is not in (0,1]")));
        }
        let g = num.gcd(&den);
        Self::new(num / g, den / g)
    }

    /// Trusted constructor for callers that already know the invariant holds.
    #[inline]
    pub(crate) fn new_unchecked(num: u64, den: u64) -> Self {
        debug_assert!(num >= 1 && num <= den && num.gcd(&den) == 1);
        Self { num, den }
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    #[inline]
    pub fn num(&self) -> u64 {
        self.num
    }

    #[inline]
    pub fn den(&self) -> u64 {
        self.den
    }

    #[inline]
    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Gauss map T(a/q) = (q mod a)/a; `None` when the image is 0.
    #[inline]
    pub fn gauss(&self) -> Option<Rational> {
        let r = self.den % self.num;
        if r == 0 {
            None
        } else {
            Some(Rational { num: r, den: self.num })
        }
    }

    /// First continued-fraction digit ⌊1/x⌋.
    #[inline]
    pub fn digit(&self) -> u64 {
        self.den / self.num
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Continued-fraction digits `[0; a_1, …, a_r]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    coeffs: Vec<u64>,
}

impl ContinuedFraction {
    /// Validates digits: all ≥ 1, last ≥ 2 unless the expansion is `[0;1]`.
    pub fn new(coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("empty continued fraction".into()));
        }
        if coeffs.iter().any(|&a| a == 0) {
            return Err(Error::InvalidParameter("zero partial quotient".into()));
        }
        if coeffs.len() > 1 && *coeffs.last().unwrap() < 2 {
            return Err(Error::InvalidParameter(
                "last partial quotient must be at least 2".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn depth(&self) -> usize {
        self.coeffs.len()
    }
}

/// Continued-fraction digits of `x` through the Gauss map.
pub fn cf_expand(x: Rational) -> ContinuedFraction {
    let mut coeffs = Vec::new();
    let (mut a, mut q) = (x.num, x.den);
    while a != 0 {
        coeffs.push(q / a);
        let r = q % a;
        q = a;
        a = r;
    }
    ContinuedFraction { coeffs }
}

/// Value of `[0; a_1, …, a_r]` without the canonical-form check.
fn cf_value_raw(coeffs: &[u64]) -> Result<(u64, u64)> {
    if coeffs.is_empty() {
        return Err(Error::InvalidParameter("empty continued fraction".into()));
    }
    // Evaluate from the tail: value = 1/(a_1 + 1/(a_2 + …)).
    let (mut num, mut den) = (0u64, 1u64);
    for &a in coeffs.iter().rev() {
        let nd = a
            .checked_mul(den)
            .and_then(|v| v.checked_add(num))
            .ok_or_else(|| Error::Domain("continued fraction overflows u64".into()))?;
        num = den;
        den = nd;
    }
    Ok((num, den))
}

/// Exact value of a continued fraction.
pub fn cf_value(cf: &ContinuedFraction) -> Result<Rational> {
    let (num, den) = cf_value_raw(&cf.coeffs)?;
    Rational::new(num, den)
}

/// Exact Gauss orbit `x, T x, …, T^{r-1} x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub points: Vec<Rational>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn gauss_orbit(x: Rational) -> Orbit {
    let mut points = vec![x];
    let mut cur = x;
    while let Some(next) = cur.gauss() {
        points.push(next);
        cur = next;
    }
    Orbit { points }
}

/// Mirror element `[0; a_r, …, a_1] mod 1`.
pub fn mirror(x: Rational) -> Result<Rational> {
    if x.num == x.den {
        return Err(Error::Domain("mirror is undefined at x = 1".into()));
    }
    let mut digits = cf_expand(x).coeffs;
    digits.reverse();
    let (num, den) = cf_value_raw(&digits)?;
    // num < den always holds here since a_r >= 2.
    Rational::new(num % den, den)
}

/// Modular inverse of `a` modulo `q` (q ≥ 1, gcd(a, q) = 1).
pub fn mod_inverse(a: u64, q: u64) -> Option<u64> {
    if q == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(q as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(q as i128) as u64)
}

/// Euler totient table φ(0..=n) (φ(0) = 0) via a linear sieve.
pub fn totient_table(n: usize) -> Vec<u64> {
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            let mut k = p;
            while k <= n {
                phi[k] -= phi[k] / p as u64;
                k += p;
            }
        }
    }
    phi
}

/// |Ω_Q| = Σ_{q ≤ Q} φ(q).
pub fn omega_size(q_max: u64) -> u64 {
    totient_table(q_max as usize).iter().skip(1).sum()
}

/// Smallest-prime-factor table for 0..=n.
pub fn spf_table(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut k = i;
            while k <= n {
                if spf[k] == 0 {
                    spf[k] = i as u32;
                }
                k += i;
            }
        }
    }
    spf
}

/// Enumerates reduced `a/q` with `q_lo <= q <= q_hi`, by denominator then
/// numerator, using a sieve of the prime factors of each `q`.
pub struct OmegaIter {
    spf: std::sync::Arc<Vec<u32>>,
    q: u64,
    q_hi: u64,
    a: u64,
    mask: Vec<bool>,
}

impl OmegaIter {
    fn load_denominator(&mut self) {
        let q = self.q as usize;
        self.mask.clear();
        self.mask.resize(q + 1, true);
        let mut m = q;
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut k = p;
            while k <= q {
                self.mask[k] = false;
                k += p;
            }
            while m % p == 0 {
                m /= p;
            }
        }
        self.a = 0;
    }
}

impl Iterator for OmegaIter {
    type Item = Rational;

    fn next(&mut self) -> Option<Rational> {
        loop {
            if self.q > self.q_hi {
                return None;
            }
            self.a += 1;
            if self.a > self.q {
                self.q += 1;
                if self.q > self.q_hi {
                    return None;
                }
                self.load_denominator();
                continue;
            }
            if self.q == 1 || self.mask[self.a as usize] {
                return Some(Rational::new_unchecked(self.a, self.q));
            }
        }
    }
}

/// Rationals of Ω_Q with denominators in `[q_lo, q_hi]`.
pub fn enumerate_range(q_lo: u64, q_hi: u64) -> OmegaIter {
    let q_lo = q_lo.max(1);
    let spf = std::sync::Arc::new(spf_table(q_hi.max(1) as usize));
    let mut it = OmegaIter {
        spf,
        q: q_lo,
        q_hi,
        a: 0,
        mask: Vec::new(),
    };
    if q_lo <= q_hi {
        it.load_denominator();
    }
    it
}

/// Every reduced `a/q ∈ (0,1]` with `q <= Q`, exactly once.
pub fn enumerate_omega(q_max: u64) -> Result<OmegaIter> {
    if q_max == 0 {
        return Err(Error::InvalidParameter("Q must be at least 1".into()));
    }
    Ok(enumerate_range(1, q_max))
}

/// Split `[1, Q]` into contiguous denominator blocks of roughly equal
/// cardinality (|Ω| grows like q², so blocks shrink towards large q).
pub fn denominator_blocks(q_max: u64, blocks: usize) -> Vec<(u64, u64)> {
    let blocks = blocks.max(1) as u64;
    let total = (q_max as f64).powi(2);
    let mut out = Vec::new();
    let mut lo = 1u64;
    for b in 1..=blocks {
        let hi = if b == blocks {
            q_max
        } else {
            ((total * b as f64 / blocks as f64).sqrt().round() as u64).clamp(lo, q_max)
        };
        if hi >= lo {
            out.push((lo, hi));
            lo = hi + 1;
        }
        if lo > q_max {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: u64, q: u64) -> Rational {
        Rational::new(a, q).unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(cf_expand(r(3, 7)).coeffs(), &[2, 3]);
        assert_eq!(cf_expand(r(1, 1)).coeffs(), &[1]);
        let cf = cf_expand(r(355, 452));
        assert!(*cf.coeffs().last().unwrap() >= 2);
        assert_eq!(cf_value(&cf).unwrap(), r(355, 452));
    }

    #[test]
    fn value_examples() {
        assert_eq!(cf_value(&ContinuedFraction::new(vec![2, 3]).unwrap()).unwrap(), r(3, 7));
        assert_eq!(cf_value(&ContinuedFraction::new(vec![1]).unwrap()).unwrap(), r(1, 1));
        assert!(ContinuedFraction::new(vec![]).is_err());
        assert!(ContinuedFraction::new(vec![2, 1]).is_err());
    }

    #[test]
    fn orbit_examples() {
        assert_eq!(gauss_orbit(r(3, 7)).points, vec![r(3, 7), r(1, 3)]);
        assert_eq!(gauss_orbit(r(1, 5)).points, vec![r(1, 5)]);
        assert_eq!(gauss_orbit(r(89, 144)).len(), 10);
    }

    #[test]
    fn mirror_examples() {
        assert_eq!(mirror(r(2, 7)).unwrap(), r(3, 7));
        assert!(mirror(r(1, 1)).is_err());
        let m = mirror(r(3, 11)).unwrap();
        assert_eq!(cf_expand(r(3, 11)).depth() % 2, 1);
        assert_eq!(m.num() * 3 % 11, 1);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_omega(1).unwrap().collect::<Vec<_>>(), vec![r(1, 1)]);
        assert_eq!(enumerate_omega(5).unwrap().count(), 10);
        assert_eq!(omega_size(1000), 304_192);
        assert!(enumerate_omega(0).is_err());
    }

    #[test]
    fn blocks_cover_range() {
        let b = denominator_blocks(1000, 7);
        assert_eq!(b.first().unwrap().0, 1);
        assert_eq!(b.last().unwrap().1, 1000);
        for w in b.windows(2) {
            assert_eq!(w[0].1 + 1, w[1].0);
        }
    }

    #[test]
    fn modular_inverse() {
        assert_eq!(mod_inverse(3, 11), Some(4));
        assert_eq!(mod_inverse(2, 4), None);
    }
}
