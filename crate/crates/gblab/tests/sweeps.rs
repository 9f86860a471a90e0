use gblab::arithfun::estermann_d;
use gblab::birkhoff::{sweep, SweepPlan};
use gblab::costs::{make_builtin, BuiltinKind, CostFunction};
use gblab::rationals::{cf_expand, cf_value, enumerate_omega, mirror, mod_inverse, omega_size, Rational};
use gblab::special::EULER_GAMMA;
use gblab::stablelaws::{c_alpha, ks_distance_sorted, sample_stable, stable_cdf, StableLaw};
use gblab::transfer::{asymptotic_variance, eigenvalue_at, TransferConfig};
use gblab::Complex64;
use std::f64::consts::PI;

/// Σ_{q ≤ Q} φ(q) by trial factorisation, independent of the library sieve.
fn totient_sum(q_max: u64) -> u64 {
    (1..=q_max)
        .map(|q| {
            let (mut n, mut phi, mut p) = (q, q, 2);
            while p * p <= n {
                if n % p == 0 {
                    phi -= phi / p;
                    while n % p == 0 {
                        n /= p;
                    }
                }
                p += 1;
            }
            if n > 1 {
                phi -= phi / n;
            }
            phi
        })
        .sum()
}

#[test]
fn omega_size_matches_totient_sum() {
    for q in [10, 100, 1000] {
        let expected = totient_sum(q);
        assert_eq!(omega_size(q), expected);
        assert_eq!(enumerate_omega(q).unwrap().count() as u64, expected);
    }
}

#[test]
fn exhaustive_exact_arithmetic_up_to_500() {
    for x in enumerate_omega(500).unwrap() {
        let cf = cf_expand(x);
        assert_eq!(cf_value(&cf).unwrap(), x);
        if x == Rational::one() {
            continue;
        }
        let m = mirror(x).unwrap();
        assert_eq!(m.den(), x.den());
        let a = x.num();
        let q = x.den();
        if cf.depth() % 2 == 1 {
            assert_eq!(Some(m.num() % q), mod_inverse(a, q).map(|v| v % q), "{x:?}");
        } else {
            assert_eq!((m.num() + mod_inverse(a, q).unwrap()) % q, 0, "{x:?}");
        }
    }
}

fn identity() -> CostFunction {
    CostFunction::scalar_fn("x", f64::INFINITY, |x| x)
}

#[test]
fn sweeps_do_not_depend_on_worker_count() {
    let cost = identity();
    let base = SweepPlan {
        grid: vec![vec![0.3], vec![-1.2]],
        statistic: Some(gblab::birkhoff::Statistic::clt(0.4, 0.5, 3000)),
        bins: Some((0..=40).map(|i| -5.0 + 0.25 * i as f64).collect()),
        reservoir: 5000,
        ..SweepPlan::default()
    };
    let run = |w: usize| sweep(&cost, 3000, &SweepPlan { workers: w, ..base.clone() }).unwrap();
    let one = run(1);
    for w in [4, 8] {
        let other = run(w);
        assert_eq!(other.count, one.count);
        for (a, b) in one.charfn.iter().zip(&other.charfn) {
            assert!((a - b).norm() <= 1e-12);
        }
        for (a, b) in one.moments[0].iter().zip(&other.moments[0]) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        assert_eq!(one.histogram.as_ref().unwrap().counts, other.histogram.as_ref().unwrap().counts);
        assert_eq!(one.samples, other.samples);
    }
}

/// Mean of a_1 + … + a_r over Ω_Q by plain Euclid, with S(1) = 0.
fn mean_m1_direct(q_max: u64) -> f64 {
    let (mut total, mut n) = (0u64, 1u64);
    for q in 2..=q_max {
        for a in 1..=q {
            if num_integer::gcd(a, q) != 1 {
                continue;
            }
            let (mut x, mut y) = (q, a);
            while y != 0 {
                total += x / y;
                (x, y) = (y, x % y);
            }
            n += 1;
        }
    }
    total as f64 / n as f64
}

#[test]
fn mean_partial_quotient_sum_grows_like_log_squared() {
    let cost = make_builtin(BuiltinKind::FloorPower(1.0)).unwrap();
    let mean = |q: u64| sweep(&cost, q, &SweepPlan::default()).unwrap().mean(0);
    let (lib, direct) = (mean(1000), mean_m1_direct(1000));
    assert!((lib - direct).abs() < 1e-9, "{lib} vs {direct}");
    // E M_1 = (6/π²)(log Q)²(1 + c/log Q + …) with c ≈ 1.6, so the relative
    // excess times log Q should settle while the excess itself shrinks.
    let excess = |q: u64| mean(q) / (6.0 / (PI * PI) * (q as f64).ln().powi(2)) - 1.0;
    let (e3, e4) = (excess(1000), excess(10_000));
    assert!(e4 > 0.0 && e4 < e3, "excess {e3} -> {e4}");
    let (c3, c4) = (e3 * 1000f64.ln(), e4 * 10_000f64.ln());
    assert!((c3 - c4).abs() < 0.1 * c3, "c = {c3} vs {c4}");
}

#[test]
fn small_t_bound_constant_is_stable() {
    let cost = make_builtin(BuiltinKind::FloorPower(1.0)).unwrap();
    let ts: Vec<f64> = [1e-3, 3e-3, 1e-2, 3e-2].into_iter().collect();
    let plan = SweepPlan { grid: ts.iter().map(|&t| vec![t]).collect(), ..SweepPlan::default() };
    let constant = |q: u64| {
        let s = sweep(&cost, q, &plan).unwrap();
        ts.iter()
            .zip(&s.charfn)
            .map(|(t, e)| (e - 1.0).norm() / (t.cbrt() * (q as f64).ln()))
            .fold(0.0, f64::max)
    };
    let cs: Vec<f64> = [1000, 3000, 10_000].into_iter().map(constant).collect();
    let (lo, hi) = cs.iter().fold((f64::MAX, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    assert!(hi / lo <= 2.0, "C = {cs:?}");
}

#[test]
fn depth_variance_matches_transfer_operator() {
    let q = 10_000u64;
    let cost = make_builtin(BuiltinKind::Constant(1.0)).unwrap();
    let am = asymptotic_variance(&cost).unwrap();
    let s = sweep(&cost, q, &SweepPlan::default()).unwrap();
    let log_q = (q as f64).ln();
    let mean_rel = (s.mean(0) / log_q - am.mu[0]).abs() / am.mu[0];
    let var_rel = (s.variance(0) / log_q - am.sigma[0][0]).abs() / am.sigma[0][0];
    assert!(mean_rel <= 0.10, "mean/logQ = {}, mu = {}", s.mean(0) / log_q, am.mu[0]);
    assert!(var_rel <= 0.10, "var/logQ = {}, sigma = {}", s.variance(0) / log_q, am.sigma[0][0]);
}

#[test]
fn eigenvalues_agree_across_resolutions() {
    let cost = identity();
    let coarse = TransferConfig { n: 32, nb: 64 };
    let fine = TransferConfig { n: 48, nb: 96 };
    for (s, t) in [(Complex64::new(2.0, 0.0), 0.0), (Complex64::new(1.9, 0.0), 0.2), (Complex64::new(2.0, 1.0), 0.5)] {
        let a = eigenvalue_at(s, &[t], &cost, &coarse).unwrap();
        let b = eigenvalue_at(s, &[t], &cost, &fine).unwrap();
        assert!((a - b).norm() <= 1e-10, "s = {s}, t = {t}: {a} vs {b}");
    }
}

#[test]
fn stable_sampler_matches_inverted_cdf() {
    for (i, alpha) in [0.6, 0.8, 1.0, 1.25, 1.5].into_iter().enumerate() {
        let mut xs = sample_stable(alpha, 200_000, 17 + i as u64).unwrap();
        xs.sort_by(f64::total_cmp);
        let law = StableLaw::new(alpha).unwrap();
        let ks = ks_distance_sorted(&xs, &law).unwrap();
        // 1.95/√n is the 0.1% Kolmogorov quantile.
        assert!(ks <= 1.95 / (xs.len() as f64).sqrt(), "alpha = {alpha}: ks = {ks}");
    }
}

#[test]
fn stable_cdf_is_monotone() {
    for alpha in [0.6, 1.0, 1.5] {
        let mut prev = 0.0;
        for i in 0..=400 {
            let v = -20.0 + 0.1 * i as f64;
            let f = stable_cdf(alpha, v).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f + 1e-12 >= prev, "alpha = {alpha}, v = {v}");
            prev = f;
        }
    }
}

#[test]
fn scale_is_continuous_at_one() {
    let c1 = c_alpha(1.0).unwrap();
    for e in [1e-4, 1e-6, 1e-9] {
        assert!((c_alpha(1.0 + e).unwrap() - c1).abs() < 10.0 * e);
        assert!((c_alpha(1.0 - e).unwrap() - c1).abs() < 10.0 * e);
    }
}

/// Σ τ(n) e(na/q) n^{-2} summed directly up to N, plus the mean-value tail
/// ∫_N^∞ (ln x + 2γ − 2 ln q)/(q x²) dx.
fn estermann_direct(q: u64, divisors: &[u16], n_max: usize) -> Vec<Complex64> {
    let mut by_residue = vec![0.0f64; q as usize];
    for n in (1..=n_max).rev() {
        by_residue[n % q as usize] += divisors[n] as f64 / (n as f64 * n as f64);
    }
    let tail = ((n_max as f64).ln() + 1.0 + 2.0 * EULER_GAMMA - 2.0 * (q as f64).ln()) / (q as f64 * n_max as f64);
    (0..q)
        .map(|a| {
            let mut acc = Complex64::new(tail, 0.0);
            for (r, w) in by_residue.iter().enumerate() {
                let th = 2.0 * PI * ((a * r as u64) % q) as f64 / q as f64;
                acc += Complex64::from_polar(*w, th);
            }
            acc
        })
        .collect()
}

#[test]
fn estermann_matches_direct_series_at_two() {
    let n_max = 2_000_000;
    let mut divisors = vec![0u16; n_max + 1];
    for d in 1..=n_max {
        for m in (d..=n_max).step_by(d) {
            divisors[m] += 1;
        }
    }
    let s = Complex64::new(2.0, 0.0);
    for q in 1..=20u64 {
        let direct = estermann_direct(q, &divisors, n_max);
        for a in 1..=q {
            if num_integer::gcd(a, q) != 1 {
                continue;
            }
            let v = estermann_d(s, a, q).unwrap();
            let d = direct[(a % q) as usize];
            assert!((v - d).norm() <= 1e-6, "{a}/{q}: {v} vs {d}");
        }
    }
}
