//! Renormalization: restricted intervals, the rescaled first-return map and
//! the tower of successive renormalizations.
//!
//! Every restricted interval is symmetric, `J = [-p, p]`, because the maps
//! are even, so each rescale `α_k` is linear through the origin. A level map
//! is stored as composition data `f_k(x) = σ_k f^{m_k}(x / σ_k)` where
//! `σ_k = α_1' ⋯ α_k'`, and is never refit.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::{Jet, Unimodal, UnimodalMap};
use crate::roots::{iterate, scan_roots};
use crate::tolerances::Tolerances;

/// Grid used to locate candidate periodic endpoints in `(0, 1]`.
pub const DETECTION_GRID: usize = 2048;

/// `x ↦ scale · f^iterate(x / scale)` for a base map `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormalizedMap {
    base: Arc<UnimodalMap>,
    iterate: u64,
    scale: f64,
}

impl RenormalizedMap {
    pub fn identity_level(base: Arc<UnimodalMap>) -> Self {
        RenormalizedMap { base, iterate: 1, scale: 1.0 }
    }

    pub fn base(&self) -> &Arc<UnimodalMap> {
        &self.base
    }

    /// Number of base iterates, `m_k`.
    pub fn period(&self) -> u64 {
        self.iterate
    }

    /// Signed slope of the composed rescale `α_k ∘ ⋯ ∘ α_1`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Base-coordinate image of a level coordinate.
    pub fn to_base(&self, x: f64) -> f64 {
        x / self.scale
    }

    pub fn from_base(&self, x: f64) -> f64 {
        x * self.scale
    }
}

impl Unimodal for RenormalizedMap {
    fn exponent(&self) -> f64 {
        self.base.exponent()
    }

    fn value(&self, x: f64) -> f64 {
        self.scale * self.base.iterate(x / self.scale, self.iterate)
    }

    fn jet(&self, x: f64) -> Jet {
        let inner = self.base.iterate_jet(x / self.scale, self.iterate);
        Jet { value: self.scale * inner.value, d1: inner.d1, d2: inner.d2 / self.scale }
    }
}

impl From<UnimodalMap> for RenormalizedMap {
    fn from(map: UnimodalMap) -> Self {
        RenormalizedMap::identity_level(Arc::new(map))
    }
}

/// Shape of the first-return map on the restricted interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `f^n|J` has its minimum at 0; the rescale flips it.
    MinimumAtZero,
    MaximumAtZero,
}

/// Output of [`detect_renormalization`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Restriction {
    pub return_time: usize,
    /// Positive endpoint `p` of `J = [-p, p]`, fixed by `f^n`.
    pub endpoint: f64,
    pub orientation: Orientation,
}

impl Restriction {
    pub fn interval(&self) -> Interval {
        Interval::symmetric(self.endpoint)
    }
}

/// Image of an interval under a unimodal map with its extremum at 0.
pub fn image_interval<M: Unimodal + ?Sized>(map: &M, i: Interval) -> Interval {
    let (a, b) = (map.value(i.lo), map.value(i.hi));
    let span = Interval::spanning(a, b);
    if i.lo < 0.0 && 0.0 < i.hi {
        span.hull(&Interval::spanning(map.value(0.0), map.value(0.0)))
    } else {
        span
    }
}

/// Forward images `J, f(J), …, f^{count-1}(J)`.
pub fn cycle_intervals<M: Unimodal + ?Sized>(map: &M, j: Interval, count: usize) -> Vec<Interval> {
    let mut out = Vec::with_capacity(count);
    let mut cur = j;
    for _ in 0..count {
        out.push(cur);
        cur = image_interval(map, cur);
    }
    out
}

/// Ordering of the cycle intervals by position: entry `r` is the index `j`
/// of the `r`-th interval from the left.
pub fn shuffle_permutation(cycle: &[Interval]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..cycle.len()).collect();
    order.sort_by(|&a, &b| cycle[a].mid().total_cmp(&cycle[b].mid()));
    order
}

fn restriction_for<M: Unimodal + ?Sized>(map: &M, n: usize, p: f64, tol: &Tolerances) -> Option<Restriction> {
    if !(p > tol.renorm) {
        return None;
    }
    let j = Interval::symmetric(p);
    let cycle = cycle_intervals(map, j, n + 1);
    let slack = tol.renorm;
    if !cycle[n].within(&j, slack) {
        return None;
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if cycle[a].overlap(&cycle[b]) > slack {
                return None;
            }
        }
    }
    let at_zero = iterate(map, 0.0, n);
    let at_end = iterate(map, p, n);
    let orientation = if at_zero < at_end { Orientation::MinimumAtZero } else { Orientation::MaximumAtZero };
    // The rescaled map sends ±1 to -1 and needs a non-negative critical value.
    if orientation != Orientation::MinimumAtZero || at_zero > slack * p.max(1.0) {
        return None;
    }
    Some(Restriction { return_time: n, endpoint: p, orientation })
}

/// Smallest `n ∈ 2..=max_n` admitting a restricted interval `[-p, p]`;
/// among several endpoints for that `n` the largest valid `p` wins.
pub fn detect_renormalization<M: Unimodal + ?Sized>(
    map: &M,
    max_n: usize,
    tol: &Tolerances,
) -> Result<Option<Restriction>> {
    if max_n < 2 {
        return Err(Error::ParameterOutOfRange(format!("maxN must be at least 2, got {max_n}")));
    }
    for n in 2..=max_n {
        let g = |x: f64| iterate(map, x, n) - x;
        let mut candidates = scan_roots(g, 0.0, 1.0, DETECTION_GRID, tol.bisection_budget);
        candidates.reverse();
        for p in candidates {
            if g(p).abs() > tol.root {
                continue;
            }
            if let Some(r) = restriction_for(map, n, p, tol) {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

/// Result of one renormalization step.
#[derive(Debug, Clone, PartialEq)]
pub struct Renormalization {
    pub map: RenormalizedMap,
    /// Signed slope of `α`, always `-1/p` for an even map.
    pub alpha_slope: f64,
    pub critical_value: f64,
}

/// `α ∘ f^n ∘ α^{-1}` with `α(J) = [-1, 1]`, oriented so the maximum sits at 0.
pub fn renormalize(map: &RenormalizedMap, restriction: &Restriction, tol: &Tolerances) -> Result<Renormalization> {
    let p = restriction.endpoint;
    let slope = -1.0 / p;
    let next = RenormalizedMap {
        base: map.base.clone(),
        iterate: map.iterate * restriction.return_time as u64,
        scale: map.scale * slope,
    };
    let critical_value = next.value(0.0);
    let ends = [next.value(1.0), next.value(-1.0)];
    if critical_value <= tol.renorm || critical_value > 1.0 + tol.renorm {
        return Err(Error::NormalizationFailure {
            critical_value,
            boundary: critical_value.abs() <= tol.renorm,
        });
    }
    if ends.iter().any(|e| (e + 1.0).abs() > tol.renorm.max(tol.root)) {
        return Err(Error::NormalizationFailure { critical_value, boundary: false });
    }
    Ok(Renormalization { map: next, alpha_slope: slope, critical_value })
}

/// One level of the tower.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormLevel {
    pub k: usize,
    pub return_time: usize,
    /// `m_k = n_1 ⋯ n_k`.
    pub period: u64,
    /// `J_k` in the coordinates of `f_{k-1}`.
    pub restricted: Interval,
    pub alpha_slope: f64,
    pub map: RenormalizedMap,
    pub critical_value: f64,
    pub shuffle: Vec<usize>,
    /// Set when `f_k(0)` collapsed to 0 (superstable parameter).
    pub boundary: bool,
}

/// Why a tower stopped before the requested depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Truncation {
    /// The last recorded level has `f_k(0) = 0` and cannot be renormalized again.
    Boundary,
    /// `|I_k|` fell below the conditioning floor or periodicity degraded.
    Conditioning,
}

/// The renormalization tower `f_0, f_1, …, f_K` with its nested intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormTower {
    base: Arc<UnimodalMap>,
    levels: Vec<RenormLevel>,
    nested: Vec<Interval>,
    periodic_endpoints: Vec<f64>,
    truncation: Option<Truncation>,
}

impl RenormTower {
    pub fn base(&self) -> &Arc<UnimodalMap> {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[RenormLevel] {
        &self.levels
    }

    /// Level `k >= 1`.
    pub fn level(&self, k: usize) -> &RenormLevel {
        &self.levels[k - 1]
    }

    /// `I_k` in base coordinates, `k = 0..=depth`.
    pub fn nested(&self, k: usize) -> Interval {
        self.nested[k]
    }

    pub fn nested_intervals(&self) -> &[Interval] {
        &self.nested
    }

    /// `p_k` for `k = 1..=depth`; `p_0 = -1`.
    pub fn periodic_endpoint(&self, k: usize) -> f64 {
        if k == 0 {
            -1.0
        } else {
            self.periodic_endpoints[k - 1]
        }
    }

    /// `m_k`, with `m_0 = 1`.
    pub fn period(&self, k: usize) -> u64 {
        if k == 0 {
            1
        } else {
            self.levels[k - 1].period
        }
    }

    /// `f_k` for `k = 0..=depth`.
    pub fn level_map(&self, k: usize) -> RenormalizedMap {
        if k == 0 {
            RenormalizedMap::identity_level(self.base.clone())
        } else {
            self.levels[k - 1].map.clone()
        }
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn return_times(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.return_time).collect()
    }

    /// `|f^{m_k}(p_k) - p_k|`.
    pub fn periodic_residual(&self, k: usize) -> f64 {
        let p = self.periodic_endpoint(k);
        (self.base.iterate(p, self.period(k)) - p).abs()
    }

    /// Fails unless at least `depth` levels were built.
    pub fn require_depth(&self, depth: usize) -> Result<()> {
        if self.depth() < depth {
            return Err(Error::InsufficientDepth { requested: depth, available: self.depth() });
        }
        Ok(())
    }
}

/// Renormalizes up to `depth` times.
///
/// Detection failure or a non-boundary normalization failure at level `k`
/// is an error carrying `k`. A superstable collapse (`f_k(0) = 0`) records
/// the level and stops with [`Truncation::Boundary`]; loss of conditioning
/// stops without recording the level.
pub fn build_tower(map: &UnimodalMap, depth: usize, max_n: usize, tol: &Tolerances) -> Result<RenormTower> {
    if depth < 1 {
        return Err(Error::ParameterOutOfRange("tower depth must be at least 1".into()));
    }
    let base = Arc::new(map.clone());
    let mut current = RenormalizedMap::identity_level(base.clone());
    let mut tower = RenormTower {
        base: base.clone(),
        levels: Vec::new(),
        nested: vec![Interval::symmetric(1.0)],
        periodic_endpoints: Vec::new(),
        truncation: None,
    };

    for k in 1..=depth {
        let Some(restriction) = detect_renormalization(&current, max_n, tol)? else {
            return Err(Error::NotRenormalizable { level: k });
        };
        let (next, boundary) = match renormalize(&current, &restriction, tol) {
            Ok(r) => (r, false),
            Err(Error::NormalizationFailure { critical_value, boundary: true }) => {
                let slope = -1.0 / restriction.endpoint;
                let map = RenormalizedMap {
                    base: base.clone(),
                    iterate: current.iterate * restriction.return_time as u64,
                    scale: current.scale * slope,
                };
                (Renormalization { map, alpha_slope: slope, critical_value }, true)
            }
            Err(Error::NormalizationFailure { .. }) => return Err(Error::NotRenormalizable { level: k }),
            Err(e) => return Err(e),
        };

        let radius = tower.nested[k - 1].hi * restriction.endpoint;
        let endpoint_base = current.to_base(restriction.endpoint);
        let nested = Interval::symmetric(radius);
        let period = next.map.iterate;
        let residual = (base.iterate(endpoint_base, period) - endpoint_base).abs();
        // |I_k| below the floor, or |I_k|·|(α_1⋯α_k)'| dominated by rounding.
        let ill_conditioned = nested.len() < tol.conditioning
            || nested.len() < 1e3 * f64::EPSILON * next.map.scale.abs()
            || residual > tol.periodic;
        if ill_conditioned {
            tower.truncation = Some(Truncation::Conditioning);
            break;
        }

        let cycle = cycle_intervals(&current, restriction.interval(), restriction.return_time);
        tower.levels.push(RenormLevel {
            k,
            return_time: restriction.return_time,
            period,
            restricted: restriction.interval(),
            alpha_slope: next.alpha_slope,
            map: next.map.clone(),
            critical_value: next.critical_value,
            shuffle: shuffle_permutation(&cycle),
            boundary,
        });
        tower.nested.push(nested);
        tower.periodic_endpoints.push(endpoint_base);
        current = next.map;
        if boundary {
            if k < depth {
                tower.truncation = Some(Truncation::Boundary);
            }
            break;
        }
    }
    Ok(tower)
}
