//! Estermann function D(s, a/q) = Σ d(n) e(na/q) n^{−s} through the finite
//! Hurwitz decomposition q^{−2s} Σ_{b,c} e(abc/q) ζ(s, b/q) ζ(s, c/q).

use super::hurwitz::hurwitz_any;
use crate::costs::EstermannRemainder;
use crate::error::{Error, Result};
use crate::rationals::Rational;
use crate::special::EULER_GAMMA;
use num_complex::Complex64;
use num_integer::Integer;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest denominator accepted (the row setup is O(q²)).
pub const ESTERMANN_MAX_Q: u64 = 4000;

/// Precomputed data for one denominator: D(s, a/q) for any a costs O(q).
#[derive(Debug, Clone)]
pub struct EstermannRow {
    pub q: u64,
    s: Complex64,
    zeta: Vec<Complex64>,
    twisted: Vec<Complex64>,
    scale: Complex64,
}

impl EstermannRow {
    pub fn new(s: Complex64, q: u64) -> Result<Self> {
        if q == 0 || q > ESTERMANN_MAX_Q {
            return Err(Error::InvalidParameter(format!(
                "denominator {q} outside 1..={ESTERMANN_MAX_Q}"
            )));
        }
        if (s - 1.0).norm() < 1e-14 {
            return Err(Error::Domain("D(s, x) has a pole at s = 1".into()));
        }
        let qu = q as usize;
        let qf = q as f64;
        // zeta[b mod q] = ζ(s, b/q), b = 1..q.
        let mut zeta = vec![Complex64::new(0.0, 0.0); qu];
        for b in 1..=qu {
            zeta[b % qu] = hurwitz_any(s, b as f64 / qf);
        }
        let roots: Vec<Complex64> =
            (0..qu).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / qf)).collect();
        // twisted[k] = Σ_c e(kc/q) ζ(s, c/q).
        let twisted: Vec<Complex64> = (0..qu)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = 0usize;
                for z in zeta.iter() {
                    acc += roots[idx] * z;
                    idx += k;
                    if idx >= qu {
                        idx -= qu;
                    }
                }
                acc
            })
            .collect();
        let scale = (-2.0 * s * qf.ln()).exp();
        Ok(Self { q, s, zeta, twisted, scale })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    /// D(s, a/q); `a` need not be reduced modulo q.
    pub fn value(&self, a: u64) -> Complex64 {
        let qu = self.q as usize;
        let a = (a % self.q) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut idx = 0usize;
        for z in self.zeta.iter() {
            acc += z * self.twisted[idx];
            idx += a;
            if idx >= qu {
                idx -= qu;
            }
        }
        acc * self.scale
    }
}

/// D(s, a/q) for coprime a, q.
pub fn estermann_d(s: Complex64, a: u64, q: u64) -> Result<Complex64> {
    if q == 0 || a.gcd(&q) != 1 {
        return Err(Error::Domain(format!("{a}/{q} is not reduced")));
    }
    Ok(EstermannRow::new(s, q)?.value(a))
}

/// D(½, a/q).
pub fn estermann_central(a: u64, q: u64) -> Result<Complex64> {
    estermann_d(Complex64::new(0.5, 0.0), a, q)
}

/// ζ(½)².
pub fn zeta_half_squared() -> f64 {
    let z = hurwitz_any(Complex64::new(0.5, 0.0), 1.0).re;
    z * z
}

/// Main part of the period function h(x) = D(½,x) − D(½,−1/x) at x > 0.
pub fn estermann_main(x: f64) -> Complex64 {
    let c0 = EULER_GAMMA - (8.0 * PI).ln();
    let l = -x.ln();
    let s = 0.5 / x.sqrt();
    Complex64::new(s * (l + c0 - 0.5 * PI), s * (l + c0 + 0.5 * PI))
}

/// Remainder ℰ, exact at rationals and interpolated elsewhere.
pub struct EstermannTable {
    nodes: usize,
    /// ℰ(−j/nodes), j = 1..=nodes.
    values: Vec<Complex64>,
    z2: f64,
    rows: Mutex<HashMap<u64, Arc<EstermannRow>>>,
}

impl EstermannTable {
    /// Tabulate ℰ(−j/nodes) exactly; `nodes` ≤ 1000.
    pub fn new(nodes: usize) -> Result<Self> {
        if nodes == 0 || nodes > 1000 {
            return Err(Error::InvalidParameter("interpolation nodes must lie in 1..=1000".into()));
        }
        let mut t = Self {
            nodes,
            values: Vec::new(),
            z2: zeta_half_squared(),
            rows: Mutex::new(HashMap::new()),
        };
        let values = (1..=nodes as u64)
            .map(|j| {
                let g = j.gcd(&(nodes as u64));
                t.exact_neg(j / g, nodes as u64 / g)
            })
            .collect::<Result<Vec<_>>>()?;
        t.values = values;
        Ok(t)
    }

    /// Default table with 256 nodes, shared process-wide.
    pub fn shared() -> Result<Arc<Self>> {
        static CELL: OnceLock<Arc<EstermannTable>> = OnceLock::new();
        if let Some(t) = CELL.get() {
            return Ok(t.clone());
        }
        let t = Arc::new(Self::new(256)?);
        Ok(CELL.get_or_init(|| t).clone())
    }

    fn row(&self, q: u64) -> Result<Arc<EstermannRow>> {
        if let Some(r) = self.rows.lock().unwrap().get(&q) {
            return Ok(r.clone());
        }
        let r = Arc::new(EstermannRow::new(Complex64::new(0.5, 0.0), q)?);
        self.rows.lock().unwrap().insert(q, r.clone());
        Ok(r)
    }

    /// h(a/q) = D(½, a/q) − conj D(½, T(a/q)).
    pub fn period_value(&self, a: u64, q: u64) -> Result<Complex64> {
        let x = Rational::new(a, q)?;
        let d = self.row(q)?.value(a);
        let dt = match x.gauss() {
            Some(y) => self.row(y.den())?.value(y.num()),
            None => Complex64::new(self.z2, 0.0),
        };
        Ok(d - dt.conj())
    }

    /// ℰ(−a/q).
    fn exact_neg(&self, a: u64, q: u64) -> Result<Complex64> {
        let h = self.period_value(a, q)?;
        Ok(h - estermann_main(a as f64 / q as f64) - self.z2)
    }

    fn interp_neg(&self, x: f64) -> Complex64 {
        let n = self.nodes as f64;
        let pos = (x * n).clamp(1.0, n);
        let i = (pos.floor() as usize).min(self.nodes - 1).max(1);
        let w = pos - i as f64;
        self.values[i - 1] * (1.0 - w) + self.values[i.min(self.nodes - 1)] * w
    }
}

impl EstermannRemainder for EstermannTable {
    fn remainder(&self, x: f64) -> Complex64 {
        if x < 0.0 {
            self.interp_neg(-x)
        } else {
            self.interp_neg(x).conj()
        }
    }

    fn remainder_exact(&self, sign: i8, num: u64, den: u64) -> Complex64 {
        let v = if den <= ESTERMANN_MAX_Q {
            self.exact_neg(num, den).unwrap_or_else(|_| self.interp_neg(num as f64 / den as f64))
        } else {
            self.interp_neg(num as f64 / den as f64)
        };
        if sign < 0 {
            v
        } else {
            v.conj()
        }
    }

    fn zeta_half_sq(&self) -> f64 {
        self.z2
    }

    fn interpolation_nodes(&self) -> Vec<f64> {
        (1..self.nodes).map(|j| j as f64 / self.nodes as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithfun::tau::divisor_counts;

    #[test]
    fn trivial_point() {
        let v = estermann_d(Complex64::new(2.0, 0.0), 1, 1).unwrap();
        assert!((v.re - PI.powi(4) / 36.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    /// Partial sums of Σ d(n) e(na/q)/n² with the main-term tail
    /// (log N + 1 + 2γ − 2 log q)/(qN).
    fn direct(a: u64, q: u64, n: usize, d: &[u32]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            let ph = 2.0 * PI * ((k as u64 * a) % q) as f64 / q as f64;
            acc += Complex64::from_polar(d[k - 1] as f64 / (k as f64 * k as f64), ph);
        }
        let nf = n as f64;
        let qf = q as f64;
        acc + (nf.ln() + 1.0 + 2.0 * EULER_GAMMA - 2.0 * qf.ln()) / (qf * nf)
    }

    #[test]
    fn decomposition_matches_series_at_two() {
        let n = 1_000_000;
        let d = divisor_counts(n);
        for q in 1..=20u64 {
            for a in 1..=q {
                if a.gcd(&q) != 1 {
                    continue;
                }
                let v = estermann_d(Complex64::new(2.0, 0.0), a, q).unwrap();
                let w = direct(a, q, n, &d);
                assert!((v - w).norm() < 1e-6, "{a}/{q}: {v} vs {w}");
            }
        }
    }

    #[test]
    fn conjugation_symmetry() {
        let v = estermann_central(3, 10).unwrap();
        let w = estermann_central(7, 10).unwrap();
        assert!((v - w.conj()).norm() < 1e-10);
    }

    #[test]
    fn remainder_consistency() {
        let t = EstermannTable::new(16).unwrap();
        // Exact values at the nodes reproduce the table.
        let e = t.remainder_exact(-1, 1, 4);
        assert!((e - t.remainder(-0.25)).norm() < 1e-12);
        assert!((t.remainder(0.25) - e.conj()).norm() < 1e-12);
        assert!((t.zeta_half_sq() - 2.132_635_291_400_49).abs() < 1e-9);
    }

    #[test]
    fn caps() {
        assert!(estermann_central(1, ESTERMANN_MAX_Q + 1).is_err());
        assert!(estermann_central(2, 4).is_err());
    }
}
