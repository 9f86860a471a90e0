//! Birkhoff sums along Gauss orbits and streaming sweeps over Ω_Q.
//!
//! Sweeps walk Ω_Q as a tree: the children of `y = b/a` (with `y = 0` the
//! root) are the points `x = a/(na + b) = 1/(n + y)` whose Gauss image is `y`.
//! A sum along the orbit of `x` is then one cost evaluation plus the parent's
//! sum, so every rational costs O(1). The root's subtrees (points whose last
//! digit is `n`) are grouped into a fixed list of chunks; each chunk owns a
//! private accumulator and chunks are merged in list order, which makes the
//! result independent of the worker count.

use crate::costs::{CostFunction, Point};
use crate::error::{Error, Result};
use crate::numeric::{KahanComplex, KahanSum};
use crate::rationals::{cf_expand, Rational};
use crate::special::EULER_GAMMA;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Maximal `m·d` supported by tree sweeps of Birkhoff observables.
pub const MAX_STATE: usize = 8;

/// S_φ(x) = Σ_{j=1}^{r(x)} φ_j(T^{j-1} x), with S(1) = 0.
pub fn birkhoff_sum(c: &CostFunction, x: Rational) -> Result<Vec<f64>> {
    let mut total = vec![KahanSum::new(); c.d];
    if x.num() == x.den() {
        return Ok(vec![0.0; c.d]);
    }
    let mut buf = vec![0.0; c.d];
    let mut cur = Some(x);
    let mut j = 1;
    while let Some(p) = cur {
        c.eval_into(j, &Point::from_rational(p), &mut buf);
        for (t, v) in total.iter_mut().zip(&buf) {
            t.add(*v);
        }
        cur = p.gauss();
        j += 1;
    }
    let out: Vec<f64> = total.iter().map(|t| t.value()).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite Birkhoff sum at {x}")));
    }
    Ok(out)
}

/// M_λ(x) = a_1^λ + … + a_r^λ.
pub fn m_lambda(x: Rational, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(cf_expand(x).coeffs().iter().map(|&a| (a as f64).powf(lambda)).sum())
}

/// Number of subtraction steps of the subtractive GCD algorithm on (a, q).
pub fn gcd_subtractive_steps(a: u64, q: u64) -> Result<u64> {
    if a == 0 || a > q {
        return Err(Error::Domain(format!("need 1 <= a <= q, got ({a}, {q})")));
    }
    if a.gcd(&q) != 1 {
        return Err(Error::Domain(format!("({a}, {q}) are not coprime")));
    }
    let x = Rational::new(a, q)?;
    Ok(cf_expand(x).coeffs().iter().sum())
}

/// Literal repeated subtraction, for cross-checking on small inputs.
pub fn gcd_subtractive_literal(a: u64, q: u64) -> u64 {
    let (mut u, mut v) = (a, q);
    let mut steps = 0;
    while u != 0 && v != 0 {
        if u <= v {
            v -= u;
        } else {
            u -= v;
        }
        steps += 1;
    }
    steps
}

/// A quantity computed at every point of Ω_Q by walking the Gauss tree.
pub trait Observable: Sync {
    type State: Copy + Send;
    fn dim(&self) -> usize;
    /// State attached to the root `y = 0`.
    fn root(&self) -> Self::State;
    /// State at `x = 1`.
    fn at_one(&self) -> Self::State;
    /// State at `x` (≠ 1) from the state of `T x`.
    fn step(&self, x: Rational, parent: &Self::State) -> Self::State;
    fn value(&self, x: Rational, s: &Self::State, out: &mut [f64]);
}

/// Birkhoff sums of an m-periodic cost. The state holds, for each shift
/// `k = 0..m`, the shifted sum Σ_j φ_{j+k}(T^{j-1} x).
pub struct BirkhoffObservable<'a> {
    cost: &'a CostFunction,
}

impl<'a> BirkhoffObservable<'a> {
    pub fn new(cost: &'a CostFunction) -> Result<Self> {
        if cost.m * cost.d > MAX_STATE {
            return Err(Error::InvalidParameter(format!(
                "m*d = {} exceeds the sweep limit {MAX_STATE}",
                cost.m * cost.d
            )));
        }
        Ok(Self { cost })
    }
}

impl Observable for BirkhoffObservable<'_> {
    type State = [f64; MAX_STATE];

    fn dim(&self) -> usize {
        self.cost.d
    }

    fn root(&self) -> Self::State {
        [0.0; MAX_STATE]
    }

    fn at_one(&self) -> Self::State {
        [0.0; MAX_STATE]
    }

    #[inline]
    fn step(&self, x: Rational, parent: &Self::State) -> Self::State {
        let (m, d) = (self.cost.m, self.cost.d);
        let p = Point::from_rational(x);
        let mut out = [0.0; MAX_STATE];
        let mut buf = [0.0; MAX_STATE];
        for k in 0..m {
            self.cost.eval_into(k + 1, &p, &mut buf[..d]);
            let next = (k + 1) % m;
            for i in 0..d {
                out[k * d + i] = buf[i] + parent[next * d + i];
            }
        }
        out
    }

    #[inline]
    fn value(&self, _x: Rational, s: &Self::State, out: &mut [f64]) {
        out.copy_from_slice(&s[..self.cost.d]);
    }
}

/// Any per-point function (no reuse of the parent state).
pub struct PointwiseObservable<F: Fn(Rational, &mut [f64]) + Sync> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(Rational, &mut [f64]) + Sync> Observable for PointwiseObservable<F> {
    type State = ();

    fn dim(&self) -> usize {
        self.dim
    }
    fn root(&self) {}
    fn at_one(&self) {}
    fn step(&self, _x: Rational, _p: &()) {}
    fn value(&self, x: Rational, _s: &(), out: &mut [f64]) {
        (self.f)(x, out)
    }
}

/// Scalar statistic fed to the histogram and the retained sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Statistic {
    /// `(S[coord] - shift) / scale`.
    Affine { coord: usize, shift: f64, scale: f64 },
    /// `|S[0..2] - center| / scale`.
    Radial { center: [f64; 2], scale: f64 },
}

impl Statistic {
    #[inline]
    pub fn apply(&self, s: &[f64]) -> f64 {
        match self {
            Statistic::Affine { coord, shift, scale } => (s[*coord] - shift) / scale,
            Statistic::Radial { center, scale } => {
                ((s[0] - center[0]).powi(2) + (s[1] - center[1]).powi(2)).sqrt() / scale
            }
        }
    }

    /// `(S - μ log Q)/(σ √log Q)`.
    pub fn clt(mu: f64, sigma: f64, q: u64) -> Statistic {
        let l = (q as f64).ln();
        Statistic::Affine { coord: 0, shift: mu * l, scale: sigma * l.sqrt() }
    }

    /// `(M_{1/2} - μ_{1/2} log Q)/(σ √(log Q log log Q))`.
    pub fn moment_half(mu: f64, sigma: f64, q: u64) -> Statistic {
        let l = (q as f64).ln();
        Statistic::Affine { coord: 0, shift: mu * l, scale: sigma * (l * l.ln()).sqrt() }
    }

    /// `(M_λ - μ_λ log Q)/(log Q)^λ` for 1/2 < λ < 1.
    pub fn moment_mid(mu: f64, lambda: f64, q: u64) -> Statistic {
        let l = (q as f64).ln();
        Statistic::Affine { coord: 0, shift: mu * l, scale: l.powf(lambda) }
    }

    /// `M_1/log Q - (log log Q - γ₀)/(π²/12)`.
    pub fn heinrich(q: u64) -> Statistic {
        let l = (q as f64).ln();
        let c = (l.ln() - EULER_GAMMA) / (PI * PI / 12.0);
        Statistic::Affine { coord: 0, shift: c * l, scale: l }
    }

    /// `M_λ/(log Q)^λ` for λ > 1.
    pub fn moment_large(lambda: f64, q: u64) -> Statistic {
        let l = (q as f64).ln();
        Statistic::Affine { coord: 0, shift: 0.0, scale: l.powf(lambda) }
    }

    /// `2π s(x)/log Q`, compared with the standard Cauchy law.
    pub fn dedekind(q: u64) -> Statistic {
        Statistic::Affine { coord: 0, shift: 0.0, scale: (q as f64).ln() / (2.0 * PI) }
    }

    /// One coordinate divided by `σ √log Q`.
    pub fn modsym(coord: usize, sigma: f64, q: u64) -> Statistic {
        Statistic::Affine { coord, shift: 0.0, scale: sigma * (q as f64).ln().sqrt() }
    }

    /// Real part of `D(1/2, x)/(σ (log Q)^{1/2} (log log Q)^{3/2})`, σ = 1/π.
    pub fn estermann(coord: usize, q: u64) -> Statistic {
        let l = (q as f64).ln();
        Statistic::Affine { coord, shift: 0.0, scale: l.sqrt() * l.ln().powf(1.5) / PI }
    }
}

/// What a sweep records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPlan {
    /// Frequencies `t ∈ ℝ^d` for E_Q(e^{i⟨t,S⟩}).
    pub grid: Vec<Vec<f64>>,
    pub statistic: Option<Statistic>,
    /// Histogram bin edges (strictly increasing).
    pub bins: Option<Vec<f64>>,
    /// Target size of the retained sample (0 disables it).
    pub reservoir: usize,
    pub seed: u64,
    /// Number of rayon workers (0 = rayon default).
    pub workers: usize,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            grid: vec![vec![0.0]],
            statistic: None,
            bins: None,
            reservoir: 0,
            seed: 0x5eed,
            workers: 1,
        }
    }
}

impl SweepPlan {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("empty frequency grid".into()));
        }
        if let Some(t) = self.grid.iter().find(|t| t.len() != d) {
            return Err(Error::InvalidParameter(format!(
                "frequency {t:?} has dimension {} but the observable has {d}",
                t.len()
            )));
        }
        if let Some(b) = &self.bins {
            if b.len() < 2 || b.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidParameter("histogram edges must be strictly increasing".into()));
            }
            if self.statistic.is_none() {
                return Err(Error::InvalidParameter("histogram requested without a statistic".into()));
            }
        }
        if self.reservoir > 0 && self.statistic.is_none() {
            return Err(Error::InvalidParameter("sample requested without a statistic".into()));
        }
        if let Some(Statistic::Affine { coord, scale, .. }) = &self.statistic {
            if *coord >= d || *scale == 0.0 {
                return Err(Error::InvalidParameter("invalid affine statistic".into()));
            }
        }
        if let Some(Statistic::Radial { scale, .. }) = &self.statistic {
            if d < 2 || *scale == 0.0 {
                return Err(Error::InvalidParameter("radial statistic needs d >= 2".into()));
            }
        }
        Ok(())
    }
}

/// Fixed-bin histogram with under/overflow counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    fn new(edges: Vec<f64>) -> Self {
        let n = edges.len() - 1;
        Histogram { edges, counts: vec![0; n], underflow: 0, overflow: 0 }
    }

    #[inline]
    fn add(&mut self, v: f64) {
        let e = &self.edges;
        if !(v >= e[0]) {
            self.underflow += 1;
            return;
        }
        if v >= e[e.len() - 1] {
            self.overflow += 1;
            return;
        }
        let i = e.partition_point(|&b| b <= v) - 1;
        self.counts[i] += 1;
    }

    fn merge(&mut self, o: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&o.counts) {
            *a += b;
        }
        self.underflow += o.underflow;
        self.overflow += o.overflow;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// CSV with columns bin_left, bin_right, count, density.
    pub fn to_csv(&self) -> String {
        let total = self.total().max(1) as f64;
        let mut s = String::from("bin_left,bin_right,count,density\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (l, r) = (self.edges[i], self.edges[i + 1]);
            s.push_str(&format!("{l},{r},{c},{}\n", *c as f64 / (total * (r - l))));
        }
        s
    }
}

/// Result of a sweep over Ω_Q.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub count: u64,
    pub grid: Vec<Vec<f64>>,
    pub charfn: Vec<Complex64>,
    /// `moments[k][p]` = E_Q(S_k^{p+1}), p = 0..4.
    pub moments: Vec<[f64; 4]>,
    pub histogram: Option<Histogram>,
    /// Retained statistic values, sorted ascending.
    pub samples: Vec<f64>,
}

impl EmpiricalSummary {
    pub fn mean(&self, coord: usize) -> f64 {
        self.moments[coord][0]
    }

    pub fn variance(&self, coord: usize) -> f64 {
        let m = &self.moments[coord];
        m[1] - m[0] * m[0]
    }
}

struct Accumulator {
    count: u64,
    grid: Vec<Vec<f64>>,
    zero: Vec<bool>,
    charfn: Vec<KahanComplex>,
    moments: Vec<[KahanSum; 4]>,
    histogram: Option<Histogram>,
    statistic: Option<Statistic>,
    keep_below: u64,
    seed: u64,
    samples: Vec<(u64, f64)>,
}

impl Accumulator {
    fn new(plan: &SweepPlan, d: usize, keep_below: u64) -> Self {
        Accumulator {
            count: 0,
            zero: plan.grid.iter().map(|t| t.iter().all(|v| *v == 0.0)).collect(),
            grid: plan.grid.clone(),
            charfn: vec![KahanComplex::new(); plan.grid.len()],
            moments: vec![[KahanSum::new(); 4]; d],
            histogram: plan.bins.clone().map(Histogram::new),
            statistic: plan.statistic.clone(),
            keep_below,
            seed: plan.seed,
            samples: Vec::new(),
        }
    }

    #[inline]
    fn push(&mut self, x: Rational, s: &[f64]) {
        self.count += 1;
        for (i, t) in self.grid.iter().enumerate() {
            if self.zero[i] {
                self.charfn[i].add(Complex64::new(1.0, 0.0));
                continue;
            }
            let phase: f64 = t.iter().zip(s).map(|(a, b)| a * b).sum();
            let (sn, cs) = phase.sin_cos();
            self.charfn[i].add(Complex64::new(cs, sn));
        }
        for (k, v) in s.iter().enumerate() {
            let m = &mut self.moments[k];
            let v2 = v * v;
            m[0].add(*v);
            m[1].add(v2);
            m[2].add(v2 * v);
            m[3].add(v2 * v2);
        }
        if let Some(st) = &self.statistic {
            let v = st.apply(s);
            if let Some(h) = &mut self.histogram {
                h.add(v);
            }
            if self.keep_below > 0 {
                let key = sample_key(self.seed, x);
                if key < self.keep_below {
                    self.samples.push((key, v));
                }
            }
        }
    }

    fn merge(&mut self, o: Accumulator) {
        self.count += o.count;
        for (a, b) in self.charfn.iter_mut().zip(&o.charfn) {
            a.merge(b);
        }
        for (a, b) in self.moments.iter_mut().zip(&o.moments) {
            for p in 0..4 {
                a[p].merge(&b[p]);
            }
        }
        if let (Some(a), Some(b)) = (&mut self.histogram, &o.histogram) {
            a.merge(b);
        }
        self.samples.extend(o.samples);
    }

    fn finish(mut self, reservoir: usize) -> EmpiricalSummary {
        let n = self.count.max(1) as f64;
        let charfn = self.charfn.iter().map(|c| c.value() / n).collect();
        let moments = self
            .moments
            .iter()
            .map(|m| [m[0].value() / n, m[1].value() / n, m[2].value() / n, m[3].value() / n])
            .collect();
        // Deterministic cap: the smallest keys form a uniform sample.
        self.samples.sort_by(|a, b| a.0.cmp(&b.0));
        self.samples.truncate(reservoir);
        let mut samples: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        samples.sort_by(|a, b| a.total_cmp(b));
        EmpiricalSummary {
            count: self.count,
            grid: self.grid,
            charfn,
            moments,
            histogram: self.histogram,
            samples,
        }
    }
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn sample_key(seed: u64, x: Rational) -> u64 {
    splitmix64(splitmix64(seed ^ x.den()) ^ x.num().rotate_left(32))
}

/// Chunks of last digits `n ∈ [lo, hi]`; the subtree of `1/n` holds about
/// 1/n² of Ω_Q, so early digits get their own chunk.
fn root_chunks(q: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut lo = 1;
    while lo <= q {
        let width = (lo * lo / 16).max(1);
        let hi = (lo + width - 1).min(q);
        out.push((lo, hi));
        lo = hi + 1;
    }
    out
}

fn walk<O: Observable>(
    obs: &O,
    q_max: u64,
    a: u64,
    b: u64,
    state: &O::State,
    acc: &mut Accumulator,
    buf: &mut [f64],
) {
    // children of y = b/a are x = a/(n a + b)
    let mut q = a + b;
    while q <= q_max {
        let x = Rational::new_unchecked(a, q);
        let s = obs.step(x, state);
        obs.value(x, &s, buf);
        acc.push(x, buf);
        walk(obs, q_max, q, a, &s, acc, buf);
        q += a;
    }
}

fn sweep_chunk<O: Observable>(obs: &O, q_max: u64, lo: u64, hi: u64, plan: &SweepPlan, keep: u64) -> Accumulator {
    let d = obs.dim();
    let mut acc = Accumulator::new(plan, d, keep);
    let mut buf = vec![0.0; d];
    let root = obs.root();
    for n in lo..=hi {
        let x = Rational::new_unchecked(1, n);
        let s = if n == 1 { obs.at_one() } else { obs.step(x, &root) };
        obs.value(x, &s, &mut buf);
        acc.push(x, &buf);
        if n > 1 {
            walk(obs, q_max, n, 1, &s, &mut acc, &mut buf);
        }
    }
    acc
}

/// Sweep an observable over Ω_Q.
pub fn sweep_observable<O: Observable>(obs: &O, q_max: u64, plan: &SweepPlan) -> Result<EmpiricalSummary> {
    if q_max == 0 {
        return Err(Error::InvalidParameter("Q must be at least 1".into()));
    }
    plan.validate(obs.dim())?;
    let total = crate::rationals::omega_size(q_max) as f64;
    let keep = if plan.reservoir == 0 {
        0
    } else {
        // Sampling rate with headroom so that the cap rarely binds.
        let target = plan.reservoir as f64 + 6.0 * (plan.reservoir as f64).sqrt() + 10.0;
        let rate = (target / total).min(1.0);
        if rate >= 1.0 {
            u64::MAX
        } else {
            (rate * u64::MAX as f64) as u64
        }
    };
    let chunks = root_chunks(q_max);
    let run = || -> Vec<Accumulator> {
        chunks
            .par_iter()
            .map(|&(lo, hi)| sweep_chunk(obs, q_max, lo, hi, plan, keep))
            .collect()
    };
    let parts = if plan.workers == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?
            .install(run)
    };
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chunk");
    for p in it {
        acc.merge(p);
    }
    Ok(acc.finish(plan.reservoir))
}

/// Sweep the Birkhoff sums of `c` over Ω_Q.
pub fn sweep(c: &CostFunction, q_max: u64, plan: &SweepPlan) -> Result<EmpiricalSummary> {
    let obs = BirkhoffObservable::new(c)?;
    sweep_observable(&obs, q_max, plan)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("empirical CDF needs at least one sample".into()));
        }
        samples.sort_by(|a, b| a.total_cmp(b));
        Ok(EmpiricalCdf { sorted: samples })
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= v) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

/// Empirical CDF of a summary: the retained sample when present, otherwise
/// the histogram (bin masses placed at right edges).
pub fn empirical_cdf(summary: &EmpiricalSummary) -> Result<EmpiricalCdf> {
    if !summary.samples.is_empty() {
        return EmpiricalCdf::from_samples(summary.samples.clone());
    }
    let h = summary
        .histogram
        .as_ref()
        .ok_or_else(|| Error::Empty("summary has neither samples nor histogram".into()))?;
    if h.total() == 0 {
        return Err(Error::Empty("histogram is empty".into()));
    }
    let scale = (h.total() as f64 / 200_000.0).max(1.0);
    let mut v = Vec::new();
    let push = |v: &mut Vec<f64>, x: f64, c: u64| {
        let k = (c as f64 / scale).round() as usize;
        v.extend(std::iter::repeat_n(x, k));
    };
    push(&mut v, h.edges[0] - 1.0, h.underflow);
    for (i, c) in h.counts.iter().enumerate() {
        push(&mut v, h.edges[i + 1], *c);
    }
    push(&mut v, h.edges[h.edges.len() - 1] + 1.0, h.overflow);
    EmpiricalCdf::from_samples(v)
}
