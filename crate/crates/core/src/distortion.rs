//! Empirical bounded-distortion certification.
//!
//! Everything here measures; nothing asserts that a constant is universal.
//! The per-level quantities track the landmark ratios of the tower and the
//! nonlinearity of the renormalized factors; the report maximizes the three
//! bounded-distortion ratios over the partition and over admissible words.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::map::Unimodal;
use crate::partition::{level_gaps, BranchWord, MarkovPartition};
use crate::renorm::{image_interval, RenormTower, RenormalizedMap};
use crate::tolerances::Tolerances;

/// Grid points for `sup |N(h_k)|`.
pub const NONLINEARITY_GRID: usize = 512;
/// Margin kept away from both ends of `[-1, 0]` in that grid.
pub const NONLINEARITY_MARGIN: f64 = 1e-4;

/// Landmark ratios and factor nonlinearity at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaQuantities {
    pub k: usize,
    /// `c_{m_k} = f^{m_k}(0)`.
    pub critical_iterate: f64,
    /// `L_k = f^{m_k}(I_k)`.
    pub image: Interval,
    /// `T_k`, bounded by `p_k` and `p_{k+1}`; absent at the last level.
    pub t_interval: Option<Interval>,
    /// `M_k = L_k \ T_k`, bounded by `p_{k+1}` and `c_{m_k}`.
    pub m_interval: Option<Interval>,
    /// `|M_k| / |I_k|`.
    pub ratio_core: Option<f64>,
    /// `|I_k| / |I_{k-1}|`, absent at `k = 0`.
    pub ratio_nested: Option<f64>,
    /// `c₁(f_k) = f_k(0)`.
    pub critical_value: f64,
    /// `sup |N(h_k)|` over the sample grid.
    pub nonlinearity_sup: f64,
}

fn nonlinearity_sup(map: &RenormalizedMap, exact: bool, tol: &Tolerances) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for i in 0..NONLINEARITY_GRID {
        let s = i as f64 / (NONLINEARITY_GRID - 1) as f64;
        let y = -1.0 + NONLINEARITY_MARGIN + s * (1.0 - 2.0 * NONLINEARITY_MARGIN);
        let n = if exact {
            map.base().factor_nonlinearity_exact(y, tol)?
        } else {
            map.factor_nonlinearity(y, tol)?
        };
        sup = sup.max(n.abs());
    }
    Ok(sup)
}

fn level_quantities(tower: &RenormTower, tol: &Tolerances) -> Result<Vec<LemmaQuantities>> {
    let base = tower.base();
    let depth = tower.depth();
    let mut out = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let period = tower.period(k);
        let nested = tower.nested(k);
        let critical_iterate = base.iterate(0.0, period);
        let mut image = nested;
        for _ in 0..period {
            image = image_interval(base.as_ref(), image);
        }
        let (t_interval, m_interval) = if k < depth {
            let next = tower.periodic_endpoint(k + 1);
            (
                Some(Interval::spanning(tower.periodic_endpoint(k), next)),
                Some(Interval::spanning(next, critical_iterate)),
            )
        } else {
            (None, None)
        };
        let map = tower.level_map(k);
        out.push(LemmaQuantities {
            k,
            critical_iterate,
            image,
            t_interval,
            m_interval,
            ratio_core: m_interval.map(|m| m.len() / nested.len()),
            ratio_nested: (k > 0).then(|| nested.len() / tower.nested(k - 1).len()),
            critical_value: map.critical_value(),
            nonlinearity_sup: nonlinearity_sup(&map, k == 0, tol)?,
        });
    }
    Ok(out)
}

/// Quantities for `k = 0..=K`; needs at least two levels.
pub fn lemma_quantities(tower: &RenormTower, tol: &Tolerances) -> Result<Vec<LemmaQuantities>> {
    tower.require_depth(2)?;
    level_quantities(tower, tol)
}

/// Value, derivative and nonlinearity of a composed inverse branch at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchJet {
    pub point: f64,
    pub derivative: f64,
    pub nonlinearity: f64,
}

/// `g_w(y)`, `g_w'(y)` and `N(g_w)(y)` via the chain rule.
///
/// Each branch inverts `F = f^m`; along `z_j = f^j(x)`,
/// `N(F)(x) = Σ_j N(f)(z_j) (f^j)'(x)` and `N(g)(y) = -N(F)(x) g'(y)`.
/// Compositions add as `N(φ∘ψ) = N(φ)∘ψ · ψ' + N(ψ)`.
pub fn composed_branch(partition: &MarkovPartition, ids: &[usize], y: f64) -> Result<BranchJet> {
    let tol = partition.tolerances();
    let base = partition.tower().base();
    let mut point = y;
    let mut derivative = 1.0;
    let mut nonlinearity = 0.0;
    for &id in ids.iter().rev() {
        let x = partition.branch_inverse(id, point)?;
        let m = partition.element(id).iterate;
        let mut z = x;
        let mut d = 1.0;
        let mut n_f = 0.0;
        for _ in 0..m {
            if z.abs() < tol.critical {
                return Err(Error::CriticalProximity { distance: z.abs() });
            }
            let jet = base.jet(z);
            n_f += jet.d2 / jet.d1 * d;
            d *= jet.d1;
            z = jet.value;
        }
        if d.abs() < tol.derivative {
            return Err(Error::DegenerateDerivative { x, derivative: d });
        }
        let g_prime = 1.0 / d;
        let n_g = -n_f * g_prime;
        nonlinearity += n_g * derivative;
        derivative *= g_prime;
        point = x;
    }
    Ok(BranchJet { point, derivative, nonlinearity })
}

/// `N(g_w)(y)`; zero for the empty word.
pub fn composed_nonlinearity(partition: &MarkovPartition, word: &BranchWord, y: f64) -> Result<f64> {
    Ok(composed_branch(partition, &word.ids, y)?.nonlinearity)
}

/// Pass/fail thresholds for the three bounded-distortion constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub adjacent: f64,
    pub core: f64,
    pub nonlinearity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { adjacent: 100.0, core: 100.0, nonlinearity: 1000.0 }
    }
}

impl Thresholds {
    pub fn vacuous() -> Self {
        Thresholds { adjacent: f64::INFINITY, core: f64::INFINITY, nonlinearity: f64::INFINITY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementRatio {
    pub k: usize,
    pub i: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordDistortion {
    pub word: String,
    pub domain: Interval,
    /// `sup_y |N(g_w)(y)| · |D(g_w)|` over sampled points, if any survived.
    pub scaled_sup: Option<f64>,
    pub samples: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRatios {
    pub k: usize,
    /// `max max(r, 1/r)` over `|I_{k,j}|/|I_{k,j'}|`.
    pub cycle: f64,
    /// Same over `|G_{k,i}|/|G_{k,i'}|`.
    pub gap: f64,
    /// Same over `|G_{k,i}|/|I_{k,j}|`.
    pub mixed: f64,
    pub cycle_count: usize,
    pub gap_count: usize,
}

/// Empirical bounded-distortion constants for one partition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistortionReport {
    pub depth: usize,
    pub word_length: usize,
    pub grid: usize,
    /// Adjacent-element ratio bound.
    pub a: f64,
    /// Element-to-core ratio bound.
    pub b: f64,
    /// Scaled nonlinearity bound over admissible words.
    pub c: f64,
    /// Bound on the cycle/gap ratios.
    pub c6: f64,
    pub pass: bool,
    pub thresholds: Thresholds,
    pub lemma: Vec<LemmaQuantities>,
    pub adjacent: Vec<ElementRatio>,
    pub core: Vec<ElementRatio>,
    pub words: Vec<WordDistortion>,
    pub gaps: Vec<GapRatios>,
    pub skipped_words: Vec<String>,
}

fn spread(values: &[f64]) -> f64 {
    let mut worst: f64 = 1.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            let r = a / b;
            worst = worst.max(r).max(1.0 / r);
        }
    }
    worst
}

fn sample_word(partition: &MarkovPartition, word: &BranchWord, label: String, grid: usize) -> WordDistortion {
    let domain = word.domain;
    let mut sup: Option<f64> = None;
    let mut skipped = 0;
    for s in 0..grid {
        let y = domain.lo + (s as f64 + 0.5) / grid as f64 * domain.len();
        match composed_branch(partition, &word.ids, y) {
            Ok(b) => {
                let v = b.nonlinearity.abs() * domain.len();
                sup = Some(sup.map_or(v, |m: f64| m.max(v)));
            }
            Err(_) => skipped += 1,
        }
    }
    WordDistortion { word: label, domain, scaled_sup: sup, samples: grid - skipped, skipped }
}

/// Certifies the bounded-distortion ratios on `partition` for words up to
/// length `word_length`, sampling `grid` points per word domain.
pub fn certify(
    partition: &MarkovPartition,
    word_length: usize,
    grid: usize,
    thresholds: Thresholds,
) -> Result<DistortionReport> {
    if word_length == 0 || grid == 0 {
        return Err(Error::ParameterOutOfRange("word length and grid must be positive".into()));
    }
    let tol = partition.tolerances();
    let tower = partition.tower();
    let depth = partition.depth();

    let mut lemma = level_quantities(tower, tol)?;
    lemma.truncate(depth + 1);

    let mut adjacent = Vec::new();
    let mut core = Vec::new();
    for k in 1..=depth {
        let level: Vec<_> = partition.level_elements(k).map(|(_, e)| e.clone()).collect();
        for pair in level.windows(2) {
            adjacent.push(ElementRatio { k, i: pair[0].index, ratio: pair[0].interval.len() / pair[1].interval.len() });
        }
        let core_len = tower.nested(k).len();
        for e in &level {
            core.push(ElementRatio { k, i: e.index, ratio: e.interval.len() / core_len });
        }
    }
    let bound = |rs: &[ElementRatio]| rs.iter().fold(1.0f64, |m, r| m.max(r.ratio).max(1.0 / r.ratio));
    let a = bound(&adjacent);
    let b = bound(&core);

    let words = partition.admissible_words(word_length)?;
    let distortions: Vec<WordDistortion> = words
        .par_iter()
        .map(|w| sample_word(partition, w, partition.word_label(&w.ids), grid))
        .collect();
    let c = distortions.iter().filter_map(|w| w.scaled_sup).fold(0.0f64, f64::max);
    let skipped_words: Vec<String> =
        distortions.iter().filter(|w| w.scaled_sup.is_none()).map(|w| w.word.clone()).collect();

    let mut gaps = Vec::with_capacity(depth);
    for k in 1..=depth {
        let g = level_gaps(tower, k, tol)?;
        let cycle_lens: Vec<f64> = g.cycle.iter().map(Interval::len).collect();
        let gap_lens: Vec<f64> = g.gaps.iter().map(Interval::len).collect();
        let mut mixed: f64 = 1.0;
        for gl in &gap_lens {
            for cl in &cycle_lens {
                let r = gl / cl;
                mixed = mixed.max(r).max(1.0 / r);
            }
        }
        gaps.push(GapRatios {
            k,
            cycle: spread(&cycle_lens),
            gap: spread(&gap_lens),
            mixed,
            cycle_count: cycle_lens.len(),
            gap_count: gap_lens.len(),
        });
    }
    let c6 = gaps.iter().fold(1.0f64, |m, g| m.max(g.cycle).max(g.gap).max(g.mixed));

    let pass = a <= thresholds.adjacent && b <= thresholds.core && c <= thresholds.nonlinearity;
    Ok(DistortionReport {
        depth,
        word_length,
        grid,
        a,
        b,
        c,
        c6,
        pass,
        thresholds,
        lemma,
        adjacent,
        core,
        words: distortions,
        gaps,
        skipped_words,
    })
}
