//! Reference computations that share no code with the library.
//!
//! Included by the core integration tests and by the acceptance suite.
#![allow(dead_code)]

/// KL projection onto the truncated simplex by bisection on the
/// multiplier. The optimality conditions give `x(i) = max(eps/N, C y(i))`
/// for the one `C > 0` that makes the entries sum to one; the sum is
/// monotone in `C`, so bisection finds it.
pub fn projection_by_bisection(y: &[f64], eps: f64) -> Vec<f64> {
    let n = y.len() as f64;
    let floor = eps / n;
    let total = |c: f64| y.iter().map(|&v| (v * c).max(floor)).sum::<f64>();
    let ymax = y.iter().copied().fold(0.0, f64::max);
    // At lo every entry is clipped (sum = eps < 1); at hi the largest entry alone is 2.
    let (mut lo, mut hi) = (floor / ymax * 0.5, 2.0 / ymax);
    debug_assert!(total(lo) <= 1.0 && total(hi) >= 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    y.iter().map(|&v| (v * c).max(floor)).collect()
}

/// Minimizes `x log(x/y1) + (1-x) log((1-x)/y2)` over `x in [eps/2, 1 - eps/2]` on a fine grid
/// followed by golden-section refinement.
pub fn projection_two_users_grid(y: [f64; 2], eps: f64) -> [f64; 2] {
    let lo = eps / 2.0;
    let hi = 1.0 - eps / 2.0;
    let f = |x: f64| x * (x / y[0]).ln() + (1.0 - x) * ((1.0 - x) / y[1]).ln();
    let steps = 10_000;
    let mut best = lo;
    for k in 0..=steps {
        let x = lo + (hi - lo) * k as f64 / steps as f64;
        if f(x) < f(best) {
            best = x;
        }
    }
    let width = (hi - lo) / steps as f64;
    let (mut a, mut b) = ((best - width).max(lo), (best + width).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    [x, 1.0 - x]
}

pub fn kl(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum()
}

/// Offline optimum by an explicit per-step water level: serve as much of
/// the pending work as the capacity allows, in any order. Loads are
/// row-major `T x N`.
pub fn offline_by_simulation(loads: &[Vec<f64>], capacity: f64) -> f64 {
    let mut backlog = 0.0;
    let mut done = 0.0;
    for row in loads {
        let pending = backlog + row.iter().sum::<f64>();
        let w = pending.min(capacity);
        done += w;
        backlog = pending - w;
    }
    done
}

/// Closed form: minimum over switch points `t` of the load through `t`
/// plus the capacity of the remaining steps.
pub fn offline_by_min_cut(loads: &[Vec<f64>], capacity: f64) -> f64 {
    let steps = loads.len();
    (0..=steps)
        .map(|t| {
            let prefix: f64 = loads[..t].iter().flatten().sum();
            prefix + capacity * (steps - t) as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Mean and variance of the total load of the three-user synthetic
/// schedule, from the Gamma moments `k theta` and `k theta^2`.
pub fn synthetic_total_moments(beta: [f64; 3], steps: usize, shape: f64) -> (f64, f64) {
    let len = (steps / 6) as f64;
    let mut mean = 0.0;
    let mut var = 0.0;
    for (b, s) in [(1usize, 2usize), (0, 1), (0, 2)] {
        let pb = beta[b] / (beta[b] + beta[s]);
        let ps = beta[s] / (beta[b] + beta[s]);
        // bulk job: len * Gamma(k, pb/k)
        mean += len * pb;
        var += len * len * pb * pb / shape;
        // steady: len - 1 draws of Gamma(k, ps/k)
        mean += (len - 1.0) * ps;
        var += (len - 1.0) * ps * ps / shape;
    }
    // uniform periods: two users, each Gamma(k, 0.5/k) every step
    mean += 3.0 * len * 2.0 * 0.5;
    var += 3.0 * len * 2.0 * 0.25 / shape;
    (mean, var)
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let f = cdf(x);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}
