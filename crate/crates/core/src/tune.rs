//! Parameter tuning in the affine family `f_c(x) = c - (1 + c)|x|^t`.
//!
//! For a target type `(n_1, …, n_K)` we locate the superstable parameters
//! `c_k` (`f_c^{m_k}(0) = 0`) level by level. `c_k` lies in the half of the
//! level-`(k-1)` renormalization window where `f_{k-1}(0) > 0`; that half is
//! found by stepping away from `c_{k-1}`, and `c_k` is the root of
//! `c ↦ f_c^{m_k}(0)` closest to `c_{k-1}` whose tower has the target type.

use crate::error::{Error, Result};
use crate::map::UnimodalMap;
use crate::renorm::build_tower;
use crate::roots::{bisect, iterate, scan_roots};
use crate::tolerances::Tolerances;

const FIRST_LEVEL_GRID: usize = 4000;
const WINDOW_GRID: usize = 2000;
const WINDOW_BISECTIONS: usize = 60;
const EXTRAPOLATION_RETRIES: usize = 40;

fn affine(t: f64, c: f64) -> Option<UnimodalMap> {
    UnimodalMap::affine(t, c).ok()
}

/// `true` when `f_c` renormalizes `prefix.len()` times with the given
/// return times and, unless `allow_boundary`, no level collapses.
fn has_type(t: f64, c: f64, prefix: &[usize], max_n: usize, allow_boundary: bool, tol: &Tolerances) -> bool {
    let Some(map) = affine(t, c) else {
        return false;
    };
    match build_tower(&map, prefix.len(), max_n, tol) {
        Ok(tower) => {
            tower.return_times() == prefix
                && (allow_boundary || tower.levels().iter().all(|l| !l.boundary))
        }
        Err(_) => false,
    }
}

fn critical_iterate(t: f64, c: f64, n: u64) -> f64 {
    match affine(t, c) {
        Some(map) => iterate(&map, 0.0, n as usize),
        None => f64::NAN,
    }
}

fn validate(t: f64, target: &[usize]) -> Result<()> {
    if !(t > 1.0) {
        return Err(Error::ParameterOutOfRange(format!("critical exponent must exceed 1, got {t}")));
    }
    if target.is_empty() || target.iter().any(|&n| n < 2) {
        return Err(Error::ParameterOutOfRange(format!("return times must all be >= 2, got {target:?}")));
    }
    Ok(())
}

/// Superstable parameters `c_1, …, c_K` for the target type.
pub fn superstable_parameters(t: f64, target: &[usize], tol: &Tolerances) -> Result<Vec<f64>> {
    validate(t, target)?;
    let max_n = *target.iter().max().unwrap_or(&2);
    let budget = tol.bisection_budget;
    let mut params: Vec<f64> = Vec::with_capacity(target.len());

    // Level 1: the whole family is the window.
    let n1 = target[0] as u64;
    let roots = scan_roots(|c| critical_iterate(t, c, n1), 1e-9, 1.0, FIRST_LEVEL_GRID, budget);
    let first = roots
        .into_iter()
        .find(|&c| has_type(t, c, &target[..1], max_n, true, tol))
        .ok_or(Error::TuningFailure { deepest: 0 })?;
    params.push(first);

    for k in 2..=target.len() {
        let prev = params[k - 2];
        let prefix = &target[..k - 1];
        let h = if k == 2 { 1e-6 } else { 1e-3 * (prev - params[k - 3]).abs() };
        let inside = |c: f64| c > 0.0 && c <= 1.0 && has_type(t, c, prefix, max_n, false, tol);

        let dir = if inside(prev + h) {
            1.0
        } else if inside(prev - h) {
            -1.0
        } else {
            return Err(Error::TuningFailure { deepest: k - 1 });
        };

        // Walk out to the far edge of the window, then bisect onto it.
        let mut good = prev + dir * h;
        let mut step = h;
        let mut bad = None;
        for _ in 0..64 {
            step *= 2.0;
            let cand = prev + dir * step;
            if !(cand > 0.0 && cand <= 1.0) {
                bad = Some(cand.clamp(0.0, 1.0));
                if inside(1.0) && dir > 0.0 {
                    good = 1.0;
                    bad = None;
                }
                break;
            }
            if inside(cand) {
                good = cand;
            } else {
                bad = Some(cand);
                break;
            }
        }
        if let Some(mut b) = bad {
            for _ in 0..WINDOW_BISECTIONS {
                let mid = 0.5 * (good + b);
                if inside(mid) {
                    good = mid;
                } else {
                    b = mid;
                }
            }
        }

        let m_k: u64 = target[..k].iter().map(|&n| n as u64).product();
        let start = prev + dir * 0.5 * h;
        let (lo, hi) = if dir > 0.0 { (start, good) } else { (good, start) };
        let mut roots = scan_roots(|c| critical_iterate(t, c, m_k), lo, hi, WINDOW_GRID, budget);
        roots.sort_by(|a, b| (a - prev).abs().total_cmp(&(b - prev).abs()));
        let next = roots
            .into_iter()
            .find(|&c| has_type(t, c, &target[..k], max_n, true, tol))
            .ok_or(Error::TuningFailure { deepest: k - 1 })?;
        params.push(next);
    }
    Ok(params)
}

/// Aitken Δ² limit of three terms of a geometrically converging sequence.
pub fn aitken(a: f64, b: f64, c: f64) -> Option<f64> {
    let d1 = b - a;
    let d2 = c - b;
    let denom = d2 - d1;
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    Some(c - d2 * d2 / denom)
}

/// A parameter `c` whose tower has the target return times.
///
/// For depth 1 or 2, or mixed types, the deepest superstable parameter
/// `c_K` is returned. For constant types of depth `K >= 3` the result lies
/// between `c_K` and the Aitken extrapolation of `c_{K-2}, c_{K-1}, c_K`:
/// the extrapolated limit itself when its tower reaches depth `K` without
/// collapsing, otherwise the first such point found by halving towards `c_K`.
pub fn tune_parameter(t: f64, target: &[usize], tol: &Tolerances) -> Result<f64> {
    let params = superstable_parameters(t, target, tol)?;
    let depth = target.len();
    let last = params[depth - 1];
    let constant = target.iter().all(|&n| n == target[0]);
    if depth < 3 || !constant {
        return Ok(last);
    }
    let max_n = target[0];
    let Some(mut c) = aitken(params[depth - 3], params[depth - 2], last) else {
        return Ok(last);
    };
    for _ in 0..EXTRAPOLATION_RETRIES {
        if c > 0.0 && c <= 1.0 && has_type(t, c, target, max_n, false, tol) {
            return Ok(c);
        }
        c = 0.5 * (c + last);
    }
    Err(Error::TuningFailure { deepest: depth - 1 })
}

/// Superstable parameter of the plain family `1 - μx²` with `f^n(0) = 0`
/// nearest to `guess`, bracketed by `[lo, hi]`. Used for cross-checks.
pub fn quadratic_superstable(n: usize, lo: f64, hi: f64, budget: usize) -> Result<f64> {
    let g = |mu: f64| {
        let mut x = 0.0;
        for _ in 0..n {
            x = 1.0 - mu * x * x;
        }
        x
    };
    bisect(g, lo, hi, budget)
}
