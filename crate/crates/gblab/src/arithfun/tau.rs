//! Ramanujan's τ(n) and the divisor function.

use crate::error::{Error, Result};

/// Largest supported table size.
pub const TAU_MAX: usize = 100_000;

/// τ(1..=n) as `out[n-1]`, from Δ = q·Π(1−qⁿ)²⁴ = q·J⁸ with Jacobi's
/// J = Π(1−qⁿ)³ = Σ (−1)^k (2k+1) q^{k(k+1)/2}. Each multiplication by the
/// sparse J costs O(n^{3/2}); every intermediate is checked for overflow.
pub fn ramanujan_tau(n: usize) -> Result<Vec<i128>> {
    if n > TAU_MAX {
        return Err(Error::InvalidParameter(format!("tau table limited to {TAU_MAX} terms")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut jac: Vec<(usize, i128)> = Vec::new();
    let mut k = 0usize;
    while k * (k + 1) / 2 < n {
        let c = (2 * k + 1) as i128;
        jac.push((k * (k + 1) / 2, if k % 2 == 0 { c } else { -c }));
        k += 1;
    }
    let overflow = || Error::Domain("tau coefficient overflow".into());
    let mut cur = vec![0i128; n];
    cur[0] = 1;
    for _ in 0..8 {
        let mut next = vec![0i128; n];
        for (i, &v) in cur.iter().enumerate() {
            if v == 0 {
                continue;
            }
            for &(e, c) in &jac {
                let idx = i + e;
                if idx >= n {
                    break;
                }
                let p = v.checked_mul(c).ok_or_else(overflow)?;
                next[idx] = next[idx].checked_add(p).ok_or_else(overflow)?;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// Number of divisors d(1..=n) as `out[n-1]`.
pub fn divisor_counts(n: usize) -> Vec<u32> {
    let mut d = vec![0u32; n];
    for i in 1..=n {
        let mut j = i;
        while j <= n {
            d[j - 1] += 1;
            j += i;
        }
    }
    d
}
