//! Twisted Gauss–Kuzmin–Wirsing operators
//! `H^{(j)}_{s,t}[f](x) = Σ_n e^{i⟨t, φ_j(1/(n+x))⟩} (n+x)^{-s} f(1/(n+x))`
//! discretized by collocation at Chebyshev nodes on [0, 1].
//!
//! A function is represented by its values at the nodes. Branches `n ≤ Nb`
//! are summed explicitly and the remaining ones through a midpoint
//! Euler–Maclaurin tail in `n`, which treats every cost through its smooth
//! extension in the digit.

use crate::costs::{CostFunction, Point};
use crate::error::{Error, Result};
use crate::numeric::{
    bary_eval_c, chebyshev_bary_weights, chebyshev_nodes01, clenshaw_curtis_weights01,
    lagrange_basis, GaussLegendre,
};
use crate::special::{entropy_constant, xi};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Number of Euler–Maclaurin correction orders used by the branch tail
/// (integral, first and third derivative terms).
pub const TAIL_ORDER: usize = 4;

/// Resolution parameters shared by the spectral routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferConfig {
    /// Polynomial degree of the interpolant.
    pub n: usize,
    /// Explicitly summed branches.
    pub nb: usize,
}

impl Default for TransferConfig {
    fn default() -> Self {
        TransferConfig { n: 32, nb: 64 }
    }
}

/// Collocation matrix of `Π_{s,t} = H^{(m)}_{s,t} ⋯ H^{(1)}_{s,t}` acting on
/// node values.
#[derive(Clone)]
pub struct OperatorDiscretization {
    pub n: usize,
    pub nb: usize,
    pub tail_order: usize,
    pub s: Complex64,
    pub t: Vec<f64>,
    pub cost: CostFunction,
    pub nodes: Vec<f64>,
    pub matrix: DMatrix<Complex64>,
}

impl std::fmt::Debug for OperatorDiscretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorDiscretization")
            .field("n", &self.n)
            .field("nb", &self.nb)
            .field("s", &self.s)
            .field("t", &self.t)
            .field("cost", &self.cost.label)
            .finish()
    }
}

impl OperatorDiscretization {
    /// Apply the discretized operator to node values.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_column_slice(f);
        (&self.matrix * v).iter().copied().collect()
    }

    /// Clenshaw–Curtis weights matching [`Self::nodes`].
    pub fn quadrature_weights(&self) -> Vec<f64> {
        clenshaw_curtis_weights01(self.n)
    }

    /// Evaluate the interpolant of node values `f` at `x ∈ [0, 1]`.
    pub fn interpolate(&self, f: &[Complex64], x: f64) -> Complex64 {
        bary_eval_c(&self.nodes, &chebyshev_bary_weights(self.n), f, x)
    }
}

/// Dominant eigenpair of a discretized operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda: Complex64,
    /// Eigenfunction values at [`Self::nodes`], normalized to unit integral.
    pub eigfn: Vec<Complex64>,
    pub nodes: Vec<f64>,
    pub subdominant_modulus: f64,
    /// `|λ_N − λ_{N/2}|`, floored at a few ulps.
    pub resolution_error: f64,
}

/// Σ_{n ≥ 1} g(n) for a vector-valued `g` smooth in real `n > nb`.
///
/// The terms `n ≤ nb` are summed directly. The tail uses
/// `Σ_{n>N} g(n) = ∫_{N+½}^∞ g + g'(N+½)/24 − 7 g'''(N+½)/5760`, with the
/// integral mapped to `(0, 1]` by `u = a/w²` and the derivatives taken by
/// central differences of unit step. `gl_points` sets the per-panel rule.
pub(crate) fn branch_sum_into<G>(nb: usize, gl_points: usize, acc: &mut [Complex64], mut g: G)
where
    G: FnMut(f64, &mut [Complex64]),
{
    let len = acc.len();
    let mut buf = vec![ZERO; len];
    for n in 1..=nb {
        g(n as f64, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += *b;
        }
    }
    let a = nb as f64 + 0.5;
    let gl = GaussLegendre::cached(gl_points);
    // graded panels toward w = 0 absorb log-type growth of g in n
    const EDGES: [f64; 7] = [0.0, 1.0 / 4096.0, 1.0 / 256.0, 1.0 / 16.0, 0.25, 0.5, 1.0];
    for win in EDGES.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        for (z, wt) in gl.nodes.iter().zip(&gl.weights) {
            let w: f64 = c + h * z;
            let u = a / (w * w);
            let jac = 2.0 * a / (w * w * w) * wt * h;
            g(u, &mut buf);
            for (acc_v, b) in acc.iter_mut().zip(&buf) {
                *acc_v += *b * jac;
            }
        }
    }
    let mut vals = [vec![ZERO; len], vec![ZERO; len], vec![ZERO; len], vec![ZERO; len]];
    for (slot, off) in vals.iter_mut().zip([-2.0, -1.0, 1.0, 2.0]) {
        g(a + off, slot);
    }
    for i in 0..len {
        let (m2, m1, p1, p2) = (vals[0][i], vals[1][i], vals[2][i], vals[3][i]);
        let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / 12.0;
        let d3 = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / 2.0;
        acc[i] += d1 / 24.0 - d3 * (7.0 / 5760.0);
    }
}

/// Scalar convenience wrapper around [`branch_sum_into`].
pub(crate) fn branch_sum<G>(nb: usize, gl_points: usize, mut g: G) -> Complex64
where
    G: FnMut(f64) -> Complex64,
{
    let mut acc = [ZERO];
    branch_sum_into(nb, gl_points, &mut acc, |n, out| out[0] = g(n));
    acc[0]
}

fn tail_points(n: usize) -> usize {
    (n + 8).max(24)
}

#[inline]
fn cpow_neg(base: f64, s: Complex64) -> Complex64 {
    (-s * base.ln()).exp()
}

/// Phase factor `e^{i⟨t, φ_j(p)⟩}`.
fn twist(cost: &CostFunction, j: usize, t: &[f64], p: &Point, scratch: &mut [f64]) -> Complex64 {
    if t.iter().all(|v| *v == 0.0) {
        return ONE;
    }
    cost.eval_into(j, p, scratch);
    let th: f64 = t.iter().zip(scratch.iter()).map(|(a, b)| a * b).sum();
    Complex64::from_polar(1.0, th)
}

/// Collocation matrix of the single-step operator `H^{(j)}_{s,t}`.
fn single_step_matrix(
    s: Complex64,
    t: &[f64],
    cost: &CostFunction,
    j: usize,
    n: usize,
    nb: usize,
) -> DMatrix<Complex64> {
    let nodes = chebyshev_nodes01(n);
    let bw = chebyshev_bary_weights(n);
    let gl_points = tail_points(n);
    let rows: Vec<Vec<Complex64>> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let x = nodes[k];
            let mut row = vec![ZERO; n + 1];
            let mut basis = vec![0.0; n + 1];
            let mut scratch = vec![0.0; cost.d];
            branch_sum_into(nb, gl_points, &mut row, |m, out| {
                let p = Point::from_branch(m, x);
                let w = cpow_neg(m + x, s) * twist(cost, j, t, &p, &mut scratch);
                lagrange_basis(&nodes, &bw, p.x, &mut basis);
                for (o, b) in out.iter_mut().zip(&basis) {
                    *o = w * *b;
                }
            });
            row
        })
        .collect();
    DMatrix::from_fn(n + 1, n + 1, |r, c| rows[r][c])
}

/// Build the collocation matrix of `Π_{s,t}` for `cost` at degree `n` with
/// `nb` explicit branches.
pub fn build_operator(
    s: Complex64,
    t: &[f64],
    cost: &CostFunction,
    n: usize,
    nb: usize,
) -> Result<OperatorDiscretization> {
    if !(s.re > 1.0) || !s.im.is_finite() {
        return Err(Error::Domain(format!("branch sum diverges for Re(s) = {} ≤ 1", s.re)));
    }
    if n < 8 {
        return Err(Error::InvalidParameter(format!("degree N = {n} below 8")));
    }
    if nb < 10 {
        return Err(Error::InvalidParameter(format!("Nb = {nb} below 10")));
    }
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
    let untwisted = t.iter().all(|v| *v == 0.0);
    let mut matrix = single_step_matrix(s, t, cost, 1, n, nb);
    if untwisted {
        let h = matrix.clone();
        for _ in 1..cost.m {
            matrix = &h * &matrix;
        }
    } else {
        for j in 2..=cost.m {
            let h = single_step_matrix(s, t, cost, j, n, nb);
            matrix = &h * &matrix;
        }
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite operator entries for cost {} at s = {s}",
            cost.label
        )));
    }
    Ok(OperatorDiscretization {
        n,
        nb,
        tail_order: TAIL_ORDER,
        s,
        t: t.to_vec(),
        cost: cost.clone(),
        nodes: chebyshev_nodes01(n),
        matrix,
    })
}

/// Eigenvalues of `m` sorted by decreasing modulus.
fn sorted_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 20_000).ok_or_else(|| {
        Error::NoConvergence {
            what: "Schur decomposition".into(),
            last: "n/a".into(),
            achieved: f64::NAN,
        }
    })?;
    let (_, tri) = schur.unpack();
    let mut ev: Vec<Complex64> = tri.diagonal().iter().copied().collect();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(ev)
}

/// The `k` eigenvalues of largest modulus.
pub fn spectrum(disc: &OperatorDiscretization, k: usize) -> Result<Vec<Complex64>> {
    let mut ev = sorted_eigenvalues(&disc.matrix)?;
    ev.truncate(k);
    Ok(ev)
}

fn dominant(m: &DMatrix<Complex64>) -> Result<(Complex64, f64)> {
    let ev = sorted_eigenvalues(m)?;
    let sub = ev.get(1).map(|z| z.norm()).unwrap_or(0.0);
    Ok((ev[0], sub))
}

/// Dominant eigenvalue of `Π_{s,t}` at the given resolution.
pub fn eigenvalue_at(s: Complex64, t: &[f64], cost: &CostFunction, cfg: &TransferConfig) -> Result<Complex64> {
    let disc = build_operator(s, t, cost, cfg.n, cfg.nb)?;
    Ok(dominant(&disc.matrix)?.0)
}

/// Dominant eigenpair, subdominant modulus and a two-grid error estimate.
pub fn leading_eigen(disc: &OperatorDiscretization) -> Result<SpectralResult> {
    let (lambda, sub) = dominant(&disc.matrix)?;
    let size = disc.n + 1;
    let shift = lambda + Complex64::new(1e-11, 1e-11) * lambda.norm().max(1.0);
    let a = &disc.matrix - DMatrix::from_diagonal_element(size, size, shift);
    let lu = a.lu();
    let mut v = DVector::from_element(size, ONE);
    for _ in 0..4 {
        v = lu.solve(&v).ok_or_else(|| Error::NoConvergence {
            what: "inverse iteration".into(),
            last: format!("{lambda}"),
            achieved: f64::NAN,
        })?;
        let nrm = v.norm();
        v /= Complex64::new(nrm, 0.0);
    }
    let w = clenshaw_curtis_weights01(disc.n);
    let integral: Complex64 = v.iter().zip(&w).map(|(a, b)| *a * *b).sum();
    if integral.norm() < 1e-300 {
        return Err(Error::Domain("dominant eigenfunction has zero integral".into()));
    }
    let eigfn: Vec<Complex64> = v.iter().map(|z| *z / integral).collect();

    let coarse_n = (disc.n / 2).max(8);
    let coarse = build_operator(disc.s, &disc.t, &disc.cost, coarse_n, disc.nb)?;
    let (lambda_c, _) = dominant(&coarse.matrix)?;
    let resolution_error = (lambda - lambda_c).norm().max(64.0 * f64::EPSILON);
    Ok(SpectralResult {
        lambda,
        eigfn,
        nodes: disc.nodes.clone(),
        subdominant_modulus: sub,
        resolution_error,
    })
}

/// Root `s₀(t)` of `λ(s, t) = 1` near 2, with the default resolution.
pub fn solve_s0(t: &[f64], cost: &CostFunction) -> Result<Complex64> {
    solve_s0_with(t, cost, &TransferConfig::default())
}

/// Secant iteration on `λ(s, t) − 1` started from `s = 2` with slope `−𝔡`.
pub fn solve_s0_with(t: &[f64], cost: &CostFunction, cfg: &TransferConfig) -> Result<Complex64> {
    const TOL: f64 = 1e-10;
    let f = |s: Complex64| -> Result<Complex64> { Ok(eigenvalue_at(s, t, cost, cfg)? - ONE) };
    let mut s_prev = Complex64::new(2.0, 0.0);
    let mut f_prev = f(s_prev)?;
    if f_prev.norm() <= TOL {
        return Ok(s_prev);
    }
    let mut s = s_prev - f_prev / (-entropy_constant(cost.m));
    for _ in 0..60 {
        if !(s.re > 1.0) || (s - 2.0).norm() > 1.0 {
            break;
        }
        let fs = f(s)?;
        if fs.norm() <= TOL {
            return Ok(s);
        }
        let slope = (fs - f_prev) / (s - s_prev);
        if slope.norm() == 0.0 || !slope.re.is_finite() {
            break;
        }
        s_prev = s;
        f_prev = fs;
        s -= fs / slope;
    }
    Err(Error::NoConvergence {
        what: "s0(t) secant iteration".into(),
        last: format!("{s}"),
        achieved: f_prev.norm(),
    })
}

/// Asymptotic drift and covariance of a cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticMoments {
    /// `μ_φ = (1/𝔡) ∫ Σ_j φ_j ξ`.
    pub mu: Vec<f64>,
    /// Symmetric `d × d` matrix `Σ_φ`, row-major.
    pub sigma: Vec<Vec<f64>>,
    /// Relative residual of the resolvent solve.
    pub residual: f64,
}

/// `μ_φ` and `Σ_φ` with the default resolution.
pub fn asymptotic_variance(cost: &CostFunction) -> Result<AsymptoticMoments> {
    asymptotic_variance_with(cost, &TransferConfig::default())
}

/// Drift and covariance through the resolvent of the untwisted operator.
///
/// With `ψ_j = φ_j + μ log x`, the composite `ψ = Σ_j ψ_j ∘ T^{j−1}` and
/// `χξ = (Id − H^m + P)^{-1} H^m[ψξ]`, returns
/// `Σ = (1/𝔡)(∫ψψᵀξ + ∫ψχᵀξ + ∫χψᵀξ)`. Every integral of a non-smooth
/// function is pushed through one branch sum, `∫F = ∫H[F]`, so quadrature
/// only ever sees analytic integrands.
pub fn asymptotic_variance_with(cost: &CostFunction, cfg: &TransferConfig) -> Result<AsymptoticMoments> {
    if !(cost.alpha0 > 2.0) {
        return Err(Error::Precondition(format!(
            "cost {} declares moment exponent {} ≤ 2; variance is undefined",
            cost.label, cost.alpha0
        )));
    }
    let (m, d, n, nb) = (cost.m, cost.d, cfg.n, cfg.nb);
    let disc = build_operator(Complex64::new(2.0, 0.0), &vec![0.0; d], cost, n, nb)?;
    let size = n + 1;
    let h1 = single_step_matrix(Complex64::new(2.0, 0.0), &vec![0.0; d], cost, 1, n, nb).map(|z| z.re);
    let g_m = disc.matrix.map(|z| z.re);
    let nodes = disc.nodes.clone();
    let bw = chebyshev_bary_weights(n);
    let cc = clenshaw_curtis_weights01(n);
    let gl_points = tail_points(n);
    let frak_d = entropy_constant(m);

    // node values of H[F] for F given pointwise at branch points, `len` outputs
    let push = |len: usize, f: &(dyn Fn(&Point, &mut [f64]) + Sync)| -> Vec<Vec<f64>> {
        (0..size)
            .into_par_iter()
            .map(|k| {
                let x = nodes[k];
                let mut acc = vec![ZERO; len];
                let mut tmp = vec![0.0; len];
                branch_sum_into(nb, gl_points, &mut acc, |u, out| {
                    let p = Point::from_branch(u, x);
                    f(&p, &mut tmp);
                    let w = 1.0 / ((u + x) * (u + x));
                    for (o, v) in out.iter_mut().zip(&tmp) {
                        *o = Complex64::new(v * w, 0.0);
                    }
                });
                acc.iter().map(|z| z.re).collect()
            })
            .collect()
    };
    let integrate = |vals: &[Vec<f64>]| -> Vec<f64> {
        let len = vals[0].len();
        (0..len).map(|c| vals.iter().zip(&cc).map(|(v, w)| v[c] * w).sum()).collect()
    };

    let mut mu = vec![0.0; d];
    for j in 1..=m {
        let ints = integrate(&push(d, &|p, out| {
            cost.eval_into(j, p, out);
            let w = xi(p.x);
            out.iter_mut().for_each(|v| *v *= w);
        }));
        for (a, b) in mu.iter_mut().zip(ints) {
            *a += b / frak_d;
        }
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite mean for cost {}", cost.label)));
    }

    let psi = |j: usize, p: &Point, out: &mut [f64]| {
        cost.eval_into(j, p, out);
        let l = p.x.ln();
        for (o, mu_c) in out.iter_mut().zip(&mu) {
            *o += mu_c * l;
        }
    };
    let to_matrix = |vals: Vec<Vec<f64>>| DMatrix::from_fn(size, d, |r, c| vals[r][c]);

    // V_j = H[ψ_j ξ] at the nodes, one column per coordinate
    let v: Vec<DMatrix<f64>> = (1..=m)
        .map(|j| {
            to_matrix(push(d, &|p, out| {
                psi(j, p, out);
                let w = xi(p.x);
                out.iter_mut().for_each(|x| *x *= w);
            }))
        })
        .collect();
    let pow = |k: usize, x: &DMatrix<f64>| -> DMatrix<f64> {
        let mut y = x.clone();
        for _ in 0..k {
            y = &h1 * y;
        }
        y
    };

    let mut rhs = DMatrix::zeros(size, d);
    for (idx, vj) in v.iter().enumerate() {
        rhs += pow(m - idx - 1, vj);
    }
    let xi_nodes = DVector::from_iterator(size, nodes.iter().map(|x| xi(*x)));
    let cc_row = nalgebra::RowDVector::from_row_slice(&cc);
    let a = DMatrix::identity(size, size) - &g_m + &xi_nodes * &cc_row;
    let u = a.clone().lu().solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
    let residual = (&a * &u - &rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    if !(residual <= 1e-8) {
        return Err(Error::IllConditioned(residual));
    }

    // ∫ W ψ_kᵀ for an interpolated W (columns) pushed through one branch sum
    let cross = |w: &DMatrix<f64>, k: usize| -> DMatrix<f64> {
        let cols: Vec<Vec<Complex64>> = (0..d)
            .map(|c| w.column(c).iter().map(|x| Complex64::new(*x, 0.0)).collect())
            .collect();
        let vals = push(d * d, &|p, out| {
            let mut ps = vec![0.0; d];
            psi(k, p, &mut ps);
            for (r, col) in cols.iter().enumerate() {
                let wr = bary_eval_c(&nodes, &bw, col, p.x).re;
                for c in 0..d {
                    out[r * d + c] = wr * ps[c];
                }
            }
        });
        let ints = integrate(&vals);
        DMatrix::from_fn(d, d, |r, c| ints[r * d + c])
    };

    let mut aa = DMatrix::zeros(d, d);
    for j in 1..=m {
        let ints = integrate(&push(d * d, &|p, out| {
            let mut ps = vec![0.0; d];
            psi(j, p, &mut ps);
            let w = xi(p.x);
            for r in 0..d {
                for c in 0..d {
                    out[r * d + c] = ps[r] * ps[c] * w;
                }
            }
        }));
        aa += DMatrix::from_fn(d, d, |r, c| ints[r * d + c]);
        for k in (j + 1)..=m {
            let c = cross(&pow(k - j - 1, &v[j - 1]), k);
            aa += &c + c.transpose();
        }
    }
    let mut bb = DMatrix::zeros(d, d);
    for k in 1..=m {
        bb += cross(&pow(k - 1, &u), k);
    }
    let total = (aa + &bb + bb.transpose()) / frak_d;
    let sigma = (0..d)
        .map(|r| (0..d).map(|c| 0.5 * (total[(r, c)] + total[(c, r)])).collect())
        .collect();
    Ok(AsymptoticMoments { mu, sigma, residual })
}

/// Witness family for [`spectral_gap_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeGrid {
    /// Random piecewise-linear phase witnesses (besides the zero phase).
    pub witnesses: usize,
    pub knots: usize,
    /// Evaluation points in [0, 1].
    pub samples: usize,
    pub nb: usize,
    pub seed: u64,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid { witnesses: 48, knots: 8, samples: 65, nb: 64, seed: 0x5eed }
    }
}

/// Both sides of the `‖·‖₀` probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapProbe {
    /// `max_f sup_x |H_s[f]/ξ|` over the witnesses `f = ξ e^{iθ}`.
    pub witness_sup: f64,
    /// `sup_x Σ_n |(n+x)^{-s}| ξ(1/(n+x)) / ξ(x)`.
    pub row_sum_bound: f64,
}

/// Witness estimate of `‖H_{σ+iτ}‖₀`.
pub fn spectral_gap_probe(tau: f64, sigma: f64, grid: &ProbeGrid) -> Result<f64> {
    Ok(spectral_gap_probe_detailed(tau, sigma, grid)?.witness_sup)
}

pub fn spectral_gap_probe_detailed(tau: f64, sigma: f64, grid: &ProbeGrid) -> Result<GapProbe> {
    if !(sigma > 1.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("probe needs σ > 1, got σ = {sigma}, τ = {tau}")));
    }
    if grid.samples < 2 || grid.knots < 2 || grid.nb < 10 {
        return Err(Error::InvalidParameter("probe grid too coarse".into()));
    }
    let s = Complex64::new(sigma, tau);
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let mut phases: Vec<Vec<f64>> = vec![vec![0.0; grid.knots]];
    for _ in 0..grid.witnesses {
        phases.push((0..grid.knots).map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)).collect());
    }
    let theta = |knots: &[f64], y: f64| -> f64 {
        let pos = y.clamp(0.0, 1.0) * (knots.len() - 1) as f64;
        let i = (pos.floor() as usize).min(knots.len() - 2);
        let fr = pos - i as f64;
        knots[i] * (1.0 - fr) + knots[i + 1] * fr
    };
    let xs: Vec<f64> = (0..grid.samples).map(|i| i as f64 / (grid.samples - 1) as f64).collect();
    let gl_points = 24;
    let witness_sup = phases
        .par_iter()
        .map(|knots| {
            xs.iter()
                .map(|&x| {
                    let v = branch_sum(grid.nb, gl_points, |u| {
                        let y = 1.0 / (u + x);
                        cpow_neg(u + x, s) * xi(y) * Complex64::from_polar(1.0, theta(knots, y))
                    });
                    v.norm() / xi(x)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let row_sum_bound = xs
        .iter()
        .map(|&x| {
            branch_sum(grid.nb, gl_points, |u| {
                Complex64::new((u + x).powf(-sigma) * xi(1.0 / (u + x)), 0.0)
            })
            .re / xi(x)
        })
        .fold(0.0, f64::max);
    Ok(GapProbe { witness_sup, row_sum_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{make_builtin, BuiltinKind};
    use std::f64::consts::{LN_2, PI};

    fn constant() -> CostFunction {
        make_builtin(BuiltinKind::Constant(1.0)).unwrap()
    }

    #[test]
    fn reproduces_gauss_density() {
        let c = constant();
        let disc = build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, 24, 64).unwrap();
        let f: Vec<Complex64> = disc.nodes.iter().map(|x| Complex64::new(xi(*x), 0.0)).collect();
        let hf = disc.apply(&f);
        let err = hf.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
    }

    #[test]
    fn preserves_lebesgue_integral() {
        let c = constant();
        let disc = build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, 24, 64).unwrap();
        let hf = disc.apply(&vec![ONE; 25]);
        let w = disc.quadrature_weights();
        let total: Complex64 = hf.iter().zip(&w).map(|(a, b)| *a * *b).sum();
        assert!((total - 1.0).norm() < 1e-8);
    }

    #[test]
    fn unit_eigenvalue_at_central_point() {
        let c = constant();
        for n in [16, 24, 32, 48] {
            let disc = build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, n, 64).unwrap();
            let r = leading_eigen(&disc).unwrap();
            assert!((r.lambda - 1.0).norm() < 1e-10, "N={n}: {}", r.lambda);
            let err = r
                .eigfn
                .iter()
                .zip(&r.nodes)
                .map(|(f, x)| (f - xi(*x)).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "N={n}: eigenfunction error {err}");
            assert!(r.lambda.norm() >= r.subdominant_modulus);
        }
    }

    #[test]
    fn wirsing_constant_is_resolution_stable() {
        let c = constant();
        let sub = |n| {
            let disc = build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, n, 64).unwrap();
            leading_eigen(&disc).unwrap().subdominant_modulus
        };
        let (a, b) = (sub(30), sub(50));
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        assert!((a - 0.30366).abs() < 1e-5, "{a}");
    }

    #[test]
    fn eigenvalue_decreases_in_sigma() {
        let c = constant();
        let cfg = TransferConfig { n: 24, nb: 64 };
        let vals: Vec<Complex64> = [2.0, 2.25, 2.5, 2.75, 3.0]
            .iter()
            .map(|s| eigenvalue_at(Complex64::new(*s, 0.0), &[0.0], &c, &cfg).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[0].im.abs() < 1e-12 && w[1].re < w[0].re);
        }
        assert!(vals[2].re < 1.0);
    }

    #[test]
    fn off_axis_eigenvalues_inside_unit_disc() {
        let c = constant();
        let cfg = TransferConfig::default();
        for tau in [0.5, 1.0, 5.0] {
            let l = eigenvalue_at(Complex64::new(2.0, tau), &[0.0], &c, &cfg).unwrap();
            assert!(l.norm() < 1.0, "tau={tau}: {l}");
        }
    }

    #[test]
    fn derivative_in_s_matches_entropy() {
        let c = constant();
        let cfg = TransferConfig::default();
        let h = 1e-4;
        let lp = eigenvalue_at(Complex64::new(2.0 + h, 0.0), &[0.0], &c, &cfg).unwrap();
        let lm = eigenvalue_at(Complex64::new(2.0 - h, 0.0), &[0.0], &c, &cfg).unwrap();
        let d = (lp - lm).re / (2.0 * h);
        assert!((d + PI * PI / (12.0 * LN_2)).abs() < 1e-6, "{d}");
    }

    #[test]
    fn s0_at_zero_and_conjugate_symmetry() {
        let c = CostFunction::scalar_fn("x", f64::INFINITY, |x| x);
        assert!((solve_s0(&[0.0], &c).unwrap() - 2.0).norm() < 1e-12);
        let a = solve_s0(&[0.05], &c).unwrap();
        let b = solve_s0(&[-0.05], &c).unwrap();
        assert!((a - b.conj()).norm() < 1e-10);
        assert!(a.im > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let c = constant();
        assert!(matches!(
            build_operator(Complex64::new(1.0, 0.0), &[0.0], &c, 16, 64),
            Err(Error::Domain(_))
        ));
        assert!(build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, 4, 64).is_err());
        assert!(build_operator(Complex64::new(2.0, 0.0), &[0.0], &c, 16, 5).is_err());
        assert!(build_operator(Complex64::new(2.0, 0.0), &[0.0, 1.0], &c, 16, 64).is_err());
    }

    #[test]
    fn constant_cost_moments() {
        let r = asymptotic_variance(&constant()).unwrap();
        assert!((r.mu[0] - 12.0 * LN_2 / (PI * PI)).abs() < 1e-10, "{}", r.mu[0]);
        assert!(r.sigma[0][0] > 0.0);
    }

    #[test]
    fn log_cost_is_degenerate() {
        let c = make_builtin(BuiltinKind::Log).unwrap();
        let r = asymptotic_variance(&c).unwrap();
        assert!((r.mu[0] - 1.0).abs() < 1e-10);
        assert!(r.sigma[0][0].abs() < 1e-9, "{}", r.sigma[0][0]);
    }

    #[test]
    fn dedekind_variance_refused() {
        let c = make_builtin(BuiltinKind::Dedekind).unwrap();
        assert!(matches!(asymptotic_variance(&c), Err(Error::Precondition(_))));
    }

    #[test]
    fn gap_probe() {
        let g = ProbeGrid::default();
        let p0 = spectral_gap_probe(0.0, 2.0, &g).unwrap();
        assert!(p0 >= 1.0 - 1e-6, "{p0}");
        let p1 = spectral_gap_probe(1.0, 2.0, &g).unwrap();
        let p5 = spectral_gap_probe(5.0, 2.0, &g).unwrap();
        assert!(p1 < 1.0 && p5 < 1.0 && p5 <= p1 + 0.2, "{p1} {p5}");
        let full = spectral_gap_probe_detailed(1.0, 2.0, &g).unwrap();
        assert!((full.row_sum_bound - 1.0).abs() < 1e-8);
    }
}
