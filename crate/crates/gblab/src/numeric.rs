//! Small numerical building blocks: compensated summation, Gauss–Legendre
//! rules, Chebyshev interpolation and adaptive panel quadrature.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex sum (independent real and imaginary accumulators).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanComplex {
    re: KahanSum,
    im: KahanSum,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &KahanComplex) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared cached rule of order `n`.
    pub fn cached(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
            .clone()
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    pub fn integrate_c<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += f(c + h * x) * *w;
        }
        s * h
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive complex integration on [a, b]: compares an `n`-point rule on the
/// whole panel with the sum over its halves and bisects until they agree.
/// Returns the value and an error estimate.
pub fn adaptive_c<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (Complex64, f64) {
    adaptive_c_order(f, a, b, tol, max_depth, 16)
}

/// [`adaptive_c`] with a Gauss–Legendre rule of the given order per panel.
pub fn adaptive_c_order<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
    order: usize,
) -> (Complex64, f64) {
    let gl = GaussLegendre::cached(order);
    let whole = gl.integrate_c(a, b, &mut *f);
    adaptive_c_rec(f, &gl, a, b, whole, tol, max_depth)
}

fn adaptive_c_rec<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    gl: &GaussLegendre,
    a: f64,
    b: f64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> (Complex64, f64) {
    let m = 0.5 * (a + b);
    let left = gl.integrate_c(a, m, &mut *f);
    let right = gl.integrate_c(m, b, &mut *f);
    let err = (left + right - whole).norm();
    if err <= tol || depth == 0 {
        return (left + right, err);
    }
    let (l, el) = adaptive_c_rec(f, gl, a, m, left, 0.5 * tol, depth - 1);
    let (r, er) = adaptive_c_rec(f, gl, m, b, right, 0.5 * tol, depth - 1);
    (l + r, el + er)
}

/// Real-valued counterpart of [`adaptive_c`].
pub fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, max_depth: u32) -> (f64, f64) {
    let mut g = |x: f64| Complex64::new(f(x), 0.0);
    let (v, e) = adaptive_c(&mut g, a, b, tol, max_depth);
    (v.re, e)
}

/// Chebyshev points of the second kind mapped to [0, 1], in increasing order.
pub fn chebyshev_nodes01(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect()
}

/// Barycentric weights for [`chebyshev_nodes01`].
pub fn chebyshev_bary_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            if k == 0 || k == n {
                0.5 * s
            } else {
                s
            }
        })
        .collect()
}

/// Lagrange basis values at `x` for the given nodes and barycentric weights.
pub fn lagrange_basis(nodes: &[f64], weights: &[f64], x: f64, out: &mut [f64]) {
    for (k, &xk) in nodes.iter().enumerate() {
        if x == xk {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
    }
    let mut denom = 0.0;
    for k in 0..nodes.len() {
        let c = weights[k] / (x - nodes[k]);
        out[k] = c;
        denom += c;
    }
    for v in out.iter_mut() {
        *v /= denom;
    }
}

/// Barycentric evaluation of a complex interpolant.
pub fn bary_eval_c(nodes: &[f64], weights: &[f64], values: &[Complex64], x: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for k in 0..nodes.len() {
        let d = x - nodes[k];
        if d == 0.0 {
            return values[k];
        }
        let c = weights[k] / d;
        num += values[k] * c;
        den += c;
    }
    num / den
}

/// Clenshaw–Curtis weights on [0, 1] for [`chebyshev_nodes01`] (n even or odd).
pub fn clenshaw_curtis_weights01(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    for (k, wk) in w.iter_mut().enumerate() {
        let theta = std::f64::consts::PI * k as f64 / nf;
        let mut s = 1.0;
        for j in 1..=(n / 2) {
            let b = if 2 * j == n { 1.0 } else { 2.0 };
            s -= b * (2.0 * j as f64 * theta).cos() / (4.0 * (j * j) as f64 - 1.0);
        }
        let c = if k == 0 || k == n { 1.0 } else { 2.0 };
        *wk = c * s / nf;
    }
    // weights above integrate over [-1,1]; rescale to [0,1]
    w.iter_mut().for_each(|v| *v *= 0.5);
    w
}

/// Complex Chebyshev expansion `f(x) = Σ_j a_j T_j(2x − 1)` on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    coeffs: Vec<Complex64>,
}

impl ChebSeries {
    /// Interpolate values given at [`chebyshev_nodes01`]`(n)`.
    pub fn from_values(values: &[Complex64]) -> Self {
        let n = values.len() - 1;
        assert!(n >= 1, "need at least two nodes");
        let nf = n as f64;
        let coeffs = (0..=n)
            .map(|j| {
                let mut s = Complex64::new(0.0, 0.0);
                for (k, v) in values.iter().enumerate() {
                    // node k sits at angle π(n − k)/n in the [-1, 1] variable
                    let c = (std::f64::consts::PI * (j * (n - k)) as f64 / nf).cos();
                    let half = if k == 0 || k == n { 0.5 } else { 1.0 };
                    s += *v * (c * half);
                }
                let scale = if j == 0 || j == n { 1.0 / nf } else { 2.0 / nf };
                s * scale
            })
            .collect();
        ChebSeries { coeffs }
    }

    /// Sample `f` at the nodes and interpolate.
    pub fn from_fn<F: FnMut(f64) -> Complex64>(n: usize, mut f: F) -> Self {
        let vals: Vec<Complex64> = chebyshev_nodes01(n).into_iter().map(&mut f).collect();
        Self::from_values(&vals)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Clenshaw evaluation at `x ∈ [0, 1]`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let tau = 2.0 * x - 1.0;
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut b2 = Complex64::new(0.0, 0.0);
        for a in self.coeffs.iter().skip(1).rev() {
            let b0 = *a + b1 * (2.0 * tau) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * tau - b2
    }

    /// Antiderivative in `x` vanishing at `x = 0`.
    pub fn antiderivative(&self) -> ChebSeries {
        let a = &self.coeffs;
        let n = a.len();
        let get = |j: usize| if j < n { a[j] } else { Complex64::new(0.0, 0.0) };
        let mut b = vec![Complex64::new(0.0, 0.0); n + 1];
        for (k, bk) in b.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { get(0) * 2.0 } else { get(k - 1) };
            // dx = dτ/2
            *bk = (prev - get(k + 1)) / (4.0 * k as f64);
        }
        let mut out = ChebSeries { coeffs: b };
        let c0 = out.eval(0.0);
        out.coeffs[0] -= c0;
        out
    }

    /// Derivative in `x`.
    pub fn derivative(&self) -> ChebSeries {
        let a = &self.coeffs;
        let n = a.len();
        if n <= 1 {
            return ChebSeries { coeffs: vec![Complex64::new(0.0, 0.0)] };
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in (0..n - 1).rev() {
            d[k] = d[k + 2] + a[k + 1] * (2.0 * (k + 1) as f64);
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        // dτ/dx = 2
        ChebSeries { coeffs: d.into_iter().map(|v| v * 2.0).collect() }
    }
}

/// Ordinary least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clenshaw_curtis_matches_integral() {
        let n = 24;
        let x = chebyshev_nodes01(n);
        let w = clenshaw_curtis_weights01(n);
        let v: f64 = x.iter().zip(&w).map(|(a, b)| b * a.exp()).sum();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn barycentric_reproduces_function() {
        let n = 20;
        let x = chebyshev_nodes01(n);
        let w = chebyshev_bary_weights(n);
        let vals: Vec<Complex64> = x.iter().map(|t| Complex64::new(t.sin(), 0.0)).collect();
        let v = bary_eval_c(&x, &w, &vals, 0.3217);
        assert!((v.re - 0.3217f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn chebyshev_series_calculus() {
        let f = ChebSeries::from_fn(24, |x| Complex64::new(x.exp(), (2.0 * x).sin()));
        let x = 0.3712;
        assert!((f.eval(x) - Complex64::new(x.exp(), (2.0 * x).sin())).norm() < 1e-14);
        let big = f.antiderivative();
        let want = Complex64::new(x.exp() - 1.0, (1.0 - (2.0 * x).cos()) / 2.0);
        assert!((big.eval(x) - want).norm() < 1e-14);
        let d = f.derivative();
        assert!((d.eval(x) - Complex64::new(x.exp(), 2.0 * (2.0 * x).cos())).norm() < 1e-12);
    }

    #[test]
    fn kahan_sum_compensates() {
        let mut s = KahanSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-15).abs() < 1e-28);
    }

    #[test]
    fn adaptive_handles_kink() {
        let mut f = |x: f64| (x - 0.3).abs();
        let (v, _) = adaptive(&mut f, 0.0, 1.0, 1e-12, 30);
        assert!((v - (0.045 + 0.245)).abs() < 1e-11);
    }
}
