//! Bracketing root finders used for periodic points and parameter tuning.

use crate::error::{Error, Result};
use crate::map::Unimodal;
use crate::tolerances::Tolerances;

/// Bisection on a sign-changing bracket.
///
/// Halves until the midpoint coincides with an endpoint (adjacent floats)
/// or `budget` halvings are spent, so the result is deterministic.
pub fn bisect<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, budget: usize) -> Result<f64> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() || g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::NoSignChange { a: lo, b: hi });
    }
    for _ in 0..budget {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    // Return the endpoint with the smaller residual.
    let (r_lo, r_hi) = (g(lo).abs(), g(hi).abs());
    Ok(if r_lo <= r_hi { lo } else { hi })
}

/// All sign changes of `g` on an equispaced grid of `samples` intervals
/// over `[a, b]`, each refined by bisection. Roots come back ascending.
pub fn scan_roots<F: Fn(f64) -> f64>(g: F, a: f64, b: f64, samples: usize, budget: usize) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (b - a) / samples as f64;
    let mut x_prev = a;
    let mut g_prev = g(a);
    for i in 1..=samples {
        let x = if i == samples { b } else { a + step * i as f64 };
        let gx = g(x);
        if g_prev == 0.0 {
            roots.push(x_prev);
        } else if gx != 0.0 && g_prev.signum() != gx.signum() {
            if let Ok(r) = bisect(&g, x_prev, x, budget) {
                roots.push(r);
            }
        }
        x_prev = x;
        g_prev = gx;
    }
    if g_prev == 0.0 {
        roots.push(b);
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= f64::EPSILON * 4.0);
    roots
}

/// `f^n(x)` for any map.
pub fn iterate<M: Unimodal + ?Sized>(map: &M, x: f64, n: usize) -> f64 {
    let mut z = x;
    for _ in 0..n {
        z = map.value(z);
    }
    z
}

/// A point `p` in `bracket` with `f^period(p) = p`.
pub fn find_periodic_point<M: Unimodal + ?Sized>(
    map: &M,
    period: usize,
    bracket: (f64, f64),
    tol: &Tolerances,
) -> Result<f64> {
    let g = |x: f64| iterate(map, x, period) - x;
    let p = bisect(g, bracket.0, bracket.1, tol.bisection_budget)?;
    let residual = g(p).abs();
    if residual > tol.root {
        return Err(Error::NonConvergence { residual });
    }
    Ok(p)
}
