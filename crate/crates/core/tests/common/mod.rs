//! Oracles shared by integration tests. Only closed forms and plain
//! iteration live here; nothing calls back into the code under test
//! except to pull points back along branches.

#![allow(dead_code)]

use renorm_lab::partition::MarkovPartition;

/// `f_c(x) = c - (1 + c)|x|^t`.
pub fn affine(t: f64, c: f64, x: f64) -> f64 {
    c - (1.0 + c) * x.abs().powf(t)
}

/// `f_c'(x)`.
pub fn affine_deriv(t: f64, c: f64, x: f64) -> f64 {
    -t * (1.0 + c) * x.abs().powf(t - 1.0) * x.signum()
}

/// `log |g_w'(y)|` from derivative products along the pulled-back orbit.
pub fn log_branch_derivative(p: &MarkovPartition, t: f64, c: f64, ids: &[usize], y: f64) -> f64 {
    let mut point = y;
    let mut log = 0.0;
    for &id in ids.iter().rev() {
        let x = p.branch_inverse(id, point).unwrap();
        let mut z = x;
        for _ in 0..p.element(id).iterate {
            log -= affine_deriv(t, c, z).abs().ln();
            z = affine(t, c, z);
        }
        point = x;
    }
    log
}

/// Central difference of `log |g_w'|` with step `h`.
pub fn fd_nonlinearity(p: &MarkovPartition, t: f64, c: f64, ids: &[usize], y: f64, h: f64) -> f64 {
    (log_branch_derivative(p, t, c, ids, y + h) - log_branch_derivative(p, t, c, ids, y - h)) / (2.0 * h)
}

/// Superstable parameter of `1 - μx²` with period `n`, by bisection on
/// `[lo, hi]` of `μ ↦ g_μ^n(0)`.
pub fn quadratic_superstable(n: usize, lo: f64, hi: f64) -> f64 {
    let g = |mu: f64| {
        let mut x = 0.0;
        for _ in 0..n {
            x = 1.0 - mu * x * x;
        }
        x
    };
    let (mut a, mut b) = (lo, hi);
    let ga = g(a);
    assert!(ga.signum() != g(b).signum(), "no sign change for n = {n} on [{lo}, {hi}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m).signum() == ga.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Feigenbaum accumulation of `1 - μx²`: superstable parameters of periods
/// `2^k` by nested bracketing, then Aitken extrapolation of the last three.
pub fn quadratic_accumulation(levels: usize) -> f64 {
    // period 1: μ = 0; period 2: μ = 1 (0 → 1 → 0)
    let mut mus = vec![0.0, 1.0];
    for k in 2..=levels {
        let (prev, last) = (mus[k - 2], mus[k - 1]);
        let gap = last - prev;
        // next superstable value lies beyond `last`, closer than `gap`
        let lo = last + gap / 20.0;
        let hi = last + gap / 2.0;
        mus.push(quadratic_superstable(1 << k, lo, hi));
    }
    let n = mus.len();
    let (a, b, c) = (mus[n - 3], mus[n - 2], mus[n - 1]);
    c - (c - b) * (c - b) / ((c - b) - (b - a))
}
