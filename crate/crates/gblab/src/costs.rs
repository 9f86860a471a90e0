//! m-periodic, ℝ^d-valued cost families φ_1, …, φ_m on (0, 1].
//!
//! Costs are evaluated at a [`Point`], which carries the real value `x`
//! together with its Gauss-map decomposition `x = 1/(n + y)`. Step costs
//! read only the digit `n`; smooth costs read `x` (or `n + y`). Tail
//! summations in the transfer and oscint modules evaluate costs at real,
//! non-integer `n`, so every built-in is written as a smooth function of `n`.

use crate::error::{Error, Result};
use crate::rationals::Rational;
use crate::special::EULER_GAMMA;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Evaluation point `x = 1/(n + y)` with `n ≥ 1`, `y ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub n: f64,
    pub y: f64,
    /// Exact value `num/den` when the point is rational.
    pub exact: Option<(u64, u64)>,
}

impl Point {
    pub fn from_real(x: f64) -> Point {
        let inv = 1.0 / x;
        let mut n = inv.floor();
        if n < 1.0 {
            n = 1.0;
        }
        let y = (inv - n).clamp(0.0, 1.0);
        Point { x, n, y, exact: None }
    }

    pub fn from_rational(r: Rational) -> Point {
        let (a, q) = (r.num(), r.den());
        let n = q / a;
        let rem = q % a;
        Point {
            x: a as f64 / q as f64,
            n: n as f64,
            y: rem as f64 / a as f64,
            exact: Some((a, q)),
        }
    }

    /// Point on the inverse branch `x = 1/(n + y)`; `n` may be non-integer
    /// when a cost is probed through its smooth extension.
    pub fn from_branch(n: f64, y: f64) -> Point {
        Point {
            x: 1.0 / (n + y),
            n,
            y,
            exact: None,
        }
    }

    /// `1/x` computed from the branch data.
    #[inline]
    pub fn inv(&self) -> f64 {
        self.n + self.y
    }
}

/// Remainder ℰ of the Estermann period function, supplied by `arithfun`.
pub trait EstermannRemainder: Send + Sync {
    /// ℰ(x) for real `x ∈ [-1, 1] \ {0}`.
    fn remainder(&self, x: f64) -> Complex64;
    /// ℰ(s·num/den) for a rational point, `s = ±1`.
    fn remainder_exact(&self, sign: i8, num: u64, den: u64) -> Complex64;
    /// ζ(1/2)².
    fn zeta_half_sq(&self) -> f64;
    /// Points of (0, 1) where the real-point values of ℰ(±x) are not smooth.
    fn interpolation_nodes(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Period function φ_f of a cusp form, supplied by `arithfun`.
pub trait PeriodFunction: Send + Sync {
    fn weight(&self) -> u32;
    /// φ_f(s·num/den) for a nonzero rational, `s = ±1`.
    fn phi_exact(&self, sign: i8, num: u64, den: u64) -> Complex64;
    /// φ_f(x) at a real point (approximate).
    fn phi_real(&self, x: f64) -> Complex64;
    /// Factor ω with ⟨x⟩ = ω⟨−1/x⟩ + φ_f(x); the j-th cost is ω^{j−1}φ_f(±x).
    fn rotation(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

pub type EvalFn = Arc<dyn Fn(usize, &Point, &mut [f64]) + Send + Sync>;

/// Which built-in produced a cost; consumers use it for metadata-driven
/// shortcuts (exact cell integrals for step costs).
#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    Constant(f64),
    Log,
    FloorPower(f64),
    Dedekind,
    Estermann,
    ModSym,
    Custom,
}

/// Requested built-in with its parameters.
#[derive(Clone)]
pub enum BuiltinKind {
    Constant(f64),
    Log,
    FloorPower(f64),
    Dedekind,
    Estermann(Arc<dyn EstermannRemainder>),
    ModSym(Option<Arc<dyn PeriodFunction>>),
}

/// An m-periodic ℝ^d-valued cost family with declared moment metadata.
#[derive(Clone)]
pub struct CostFunction {
    pub m: usize,
    pub d: usize,
    eval: EvalFn,
    /// Supremum of admissible moment exponents (∞ for bounded-type costs).
    pub alpha0: f64,
    pub kappa0: f64,
    pub lambda0: f64,
    pub label: String,
    pub kind: CostKind,
    /// True when every φ_j is constant on each cell (1/(n+1), 1/n].
    pub step: bool,
    /// Points of (0, 1] where some φ_j, evaluated at real points, is not
    /// smooth (besides the cell ends 1/n), in increasing order.
    pub kinks: Vec<f64>,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("label", &self.label)
            .field("m", &self.m)
            .field("d", &self.d)
            .field("alpha0", &self.alpha0)
            .field("step", &self.step)
            .finish()
    }
}

impl CostFunction {
    /// A user-supplied pure closure `(j, point, out)` with `j ∈ 1..=m`.
    pub fn custom<F>(label: &str, m: usize, d: usize, alpha0: f64, f: F) -> Result<CostFunction>
    where
        F: Fn(usize, &Point, &mut [f64]) + Send + Sync + 'static,
    {
        if m == 0 || d == 0 {
            return Err(Error::InvalidParameter("period and dimension must be positive".into()));
        }
        Ok(CostFunction {
            m,
            d,
            eval: Arc::new(f),
            alpha0,
            kappa0: 1.0,
            lambda0: 1.0,
            label: label.to_string(),
            kind: CostKind::Custom,
            step: false,
            kinks: Vec::new(),
        })
    }

    /// Scalar m = 1 cost from a function of `x`.
    pub fn scalar_fn<F>(label: &str, alpha0: f64, f: F) -> CostFunction
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CostFunction::custom(label, 1, 1, alpha0, move |_, p, out| out[0] = f(p.x))
            .expect("m = d = 1 is valid")
    }

    /// Multiply every value by `s`.
    pub fn scaled(&self, s: f64) -> CostFunction {
        let inner = self.eval.clone();
        let mut c = self.clone();
        c.eval = Arc::new(move |j, p, out| {
            inner(j, p, out);
            out.iter_mut().for_each(|v| *v *= s);
        });
        c.label = format!("{}*{}", s, self.label);
        if let CostKind::Constant(v) = self.kind {
            c.kind = CostKind::Constant(v * s);
        } else if self.kind != CostKind::Custom {
            c.kind = CostKind::Custom;
        }
        c
    }

    /// Raw evaluation; `j` is 1-based and reduced modulo m. No finiteness check.
    #[inline]
    pub fn eval_into(&self, j: usize, p: &Point, out: &mut [f64]) {
        let jj = ((j + self.m - 1) % self.m) + 1;
        (self.eval)(jj, p, out)
    }

    /// Scalar shortcut for d = 1.
    #[inline]
    pub fn eval_scalar(&self, j: usize, p: &Point) -> f64 {
        let mut out = [0.0];
        self.eval_into(j, p, &mut out);
        out[0]
    }
}

/// Build one of the built-in costs.
pub fn make_builtin(kind: BuiltinKind) -> Result<CostFunction> {
    let c = match kind {
        BuiltinKind::Constant(v) => CostFunction {
            m: 1,
            d: 1,
            eval: Arc::new(move |_, _, out| out[0] = v),
            alpha0: f64::INFINITY,
            kappa0: 1.0,
            lambda0: 1.0,
            label: format!("constant({v})"),
            kind: CostKind::Constant(v),
            step: true,
            kinks: Vec::new(),
        },
        BuiltinKind::Log => CostFunction {
            m: 1,
            d: 1,
            eval: Arc::new(|_, p, out| out[0] = p.inv().ln()),
            alpha0: f64::INFINITY,
            kappa0: 1.0,
            lambda0: 1.0,
            label: "log".into(),
            kind: CostKind::Log,
            step: false,
            kinks: Vec::new(),
        },
        BuiltinKind::FloorPower(lambda) => {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "floor_power needs lambda > 0, got {lambda}"
                )));
            }
            CostFunction {
                m: 1,
                d: 1,
                eval: Arc::new(move |_, p, out| out[0] = p.n.powf(lambda)),
                alpha0: 1.0 / lambda,
                kappa0: 1.0,
                lambda0: 1.0,
                label: format!("floor_power({lambda})"),
                kind: CostKind::FloorPower(lambda),
                step: true,
                kinks: Vec::new(),
            }
        }
        BuiltinKind::Dedekind => CostFunction {
            m: 2,
            d: 1,
            eval: Arc::new(|j, p, out| out[0] = if j % 2 == 1 { p.n } else { -p.n }),
            alpha0: 1.0,
            kappa0: 1.0,
            lambda0: 1.0,
            label: "dedekind".into(),
            kind: CostKind::Dedekind,
            step: true,
            kinks: Vec::new(),
        },
        BuiltinKind::Estermann(provider) => {
            let z2 = provider.zeta_half_sq();
            let c0 = EULER_GAMMA - (8.0 * PI).ln();
            let kinks = provider.interpolation_nodes();
            CostFunction {
                m: 2,
                d: 2,
                eval: Arc::new(move |j, p, out| {
                    let inv = p.inv();
                    let s = inv.sqrt();
                    let l = inv.ln();
                    let sign: i8 = if j % 2 == 1 { -1 } else { 1 };
                    let e = match p.exact {
                        Some((a, q)) => provider.remainder_exact(sign, a, q),
                        None => provider.remainder(sign as f64 * p.x),
                    };
                    out[0] = 0.5 * s * (l + c0 - 0.5 * PI) + z2 + e.re;
                    out[1] = -(sign as f64) * 0.5 * s * (l + c0 + 0.5 * PI) + e.im;
                }),
                alpha0: 2.0,
                kappa0: 0.5,
                lambda0: 1.0,
                label: "estermann".into(),
                kind: CostKind::Estermann,
                step: false,
                kinks,
            }
        }
        BuiltinKind::ModSym(provider) => {
            let provider = provider.ok_or_else(|| {
                Error::InvalidParameter("modsym cost needs a period-function provider".into())
            })?;
            let k = provider.weight();
            let omega = provider.rotation();
            CostFunction {
                m: 4,
                d: 2,
                eval: Arc::new(move |j, p, out| {
                    let w = omega.powu((j - 1) as u32);
                    let sign: i8 = if j % 2 == 1 { 1 } else { -1 };
                    let v = match p.exact {
                        Some((a, q)) => provider.phi_exact(sign, a, q),
                        None => provider.phi_real(sign as f64 * p.x),
                    };
                    let z = w * v;
                    out[0] = z.re;
                    out[1] = z.im;
                }),
                alpha0: 4.0,
                kappa0: 1.0,
                lambda0: 0.5,
                label: format!("modsym(k={k})"),
                kind: CostKind::ModSym,
                step: false,
                kinks: Vec::new(),
            }
        }
    };
    Ok(c)
}

/// φ_j(x) for real `x ∈ (0, 1]`, any `j ≥ 1`.
pub fn eval_cost(c: &CostFunction, j: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("cost evaluated outside (0,1]: x = {x}")));
    }
    if j == 0 {
        return Err(Error::Domain("cost index j is 1-based".into()));
    }
    let p = Point::from_real(x);
    let mut out = vec![0.0; c.d];
    c.eval_into(j, &p, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite cost value at x = {x}")));
    }
    Ok(out)
}

/// φ_j at an exact rational point.
pub fn eval_cost_rational(c: &CostFunction, j: usize, x: Rational) -> Result<Vec<f64>> {
    let p = Point::from_rational(x);
    let mut out = vec![0.0; c.d];
    c.eval_into(j, &p, &mut out);
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite cost value at x = {x}")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_examples() {
        let fp = make_builtin(BuiltinKind::FloorPower(2.0)).unwrap();
        assert_eq!(eval_cost(&fp, 1, 0.3).unwrap(), vec![9.0]);
        let dd = make_builtin(BuiltinKind::Dedekind).unwrap();
        assert_eq!(eval_cost(&dd, 2, 0.3).unwrap(), vec![-3.0]);
        let c = make_builtin(BuiltinKind::Constant(5.0)).unwrap();
        assert_eq!(eval_cost(&c, 7, 0.123).unwrap(), vec![5.0]);
        let l = make_builtin(BuiltinKind::Log).unwrap();
        assert!((eval_cost(&l, 1, (-1.0f64).exp()).unwrap()[0] - 1.0).abs() < 1e-14);
        let h = make_builtin(BuiltinKind::FloorPower(0.5)).unwrap();
        assert!((eval_cost(&h, 1, 1.0 / 7.0).unwrap()[0] - 7f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn builtin_errors() {
        assert!(make_builtin(BuiltinKind::FloorPower(0.0)).is_err());
        assert!(make_builtin(BuiltinKind::FloorPower(-1.0)).is_err());
        assert!(make_builtin(BuiltinKind::ModSym(None)).is_err());
        let c = make_builtin(BuiltinKind::Log).unwrap();
        assert!(eval_cost(&c, 1, 0.0).is_err());
        assert!(eval_cost(&c, 1, 1.5).is_err());
    }

    #[test]
    fn metadata() {
        assert_eq!(make_builtin(BuiltinKind::FloorPower(2.0)).unwrap().alpha0, 0.5);
        let d = make_builtin(BuiltinKind::Dedekind).unwrap();
        assert_eq!((d.m, d.d), (2, 1));
    }
}
