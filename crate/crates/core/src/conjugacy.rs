//! The conjugacy `H` between two maps of the same combinatorics, realized on
//! matched landmarks, and its empirical quasisymmetric modulus.
//!
//! Landmarks are `±1`, the endpoints of the nested intervals, the cut points
//! and the endpoints of every admissible cylinder up to a word length.
//! Between landmarks `H` is linear; inside the core `I_K` it is unresolved.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::partition::MarkovPartition;
use crate::renorm::RenormTower;

/// Landmarks closer than this in the source coordinate are merged.
const MERGE_GAP: f64 = 1e-13;

/// Result of [`match_towers`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchCertificate {
    pub depth: usize,
    pub return_times: Vec<usize>,
}

/// Compares return times and shuffle permutations level by level up to the
/// common depth.
pub fn match_towers(f: &RenormTower, g: &RenormTower) -> Result<MatchCertificate> {
    let depth = f.depth().min(g.depth());
    if depth == 0 {
        return Err(Error::InsufficientDepth { requested: 1, available: 0 });
    }
    for k in 1..=depth {
        let (a, b) = (f.level(k), g.level(k));
        if a.return_time != b.return_time || a.shuffle != b.shuffle {
            return Err(Error::CombinatoricsMismatch { level: k });
        }
    }
    Ok(MatchCertificate { depth, return_times: f.return_times()[..depth].to_vec() })
}

/// `H` on matched landmarks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyMesh {
    /// `(x_f, x_g)`, strictly increasing in both coordinates.
    pairs: Vec<(f64, f64)>,
    core_f: Option<Interval>,
    core_g: Option<Interval>,
    word_length: usize,
}

/// Value of `H` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// `x` lies inside the core, where `H` is only interpolated.
    pub unresolved: bool,
}

/// Builds the mesh for word length `word_length`.
pub fn build_mesh(pf: &MarkovPartition, pg: &MarkovPartition, word_length: usize) -> Result<ConjugacyMesh> {
    if word_length == 0 {
        return Err(Error::ParameterOutOfRange("word length must be positive".into()));
    }
    match_towers(pf.tower(), pg.tower())?;
    if pf.depth() != pg.depth() {
        return Err(Error::InsufficientDepth {
            requested: pf.depth().max(pg.depth()),
            available: pf.depth().min(pg.depth()),
        });
    }
    let depth = pf.depth();
    for k in 1..=depth {
        let ef: Vec<_> = pf.level_elements(k).map(|(_, e)| e.kind).collect();
        let eg: Vec<_> = pg.level_elements(k).map(|(_, e)| e.kind).collect();
        if ef != eg || pf.cut_points(k).len() != pg.cut_points(k).len() {
            return Err(Error::CombinatoricsMismatch { level: k });
        }
    }

    let mut pairs = vec![(-1.0, -1.0), (1.0, 1.0)];
    for k in 1..=depth {
        let (a, b) = (pf.tower().nested(k), pg.tower().nested(k));
        pairs.push((a.lo, b.lo));
        pairs.push((a.hi, b.hi));
        pairs.extend(pf.cut_points(k).iter().copied().zip(pg.cut_points(k).iter().copied()));
    }

    let words_f = pf.admissible_words(word_length)?;
    let words_g = pg.admissible_words(word_length)?;
    if words_f.len() != words_g.len() {
        // Some word of g has no partner in f; name the first one.
        let word = words_g
            .iter()
            .find(|w| !words_f.iter().any(|v| v.ids == w.ids))
            .map(|w| pg.word_label(&w.ids))
            .unwrap_or_default();
        return Err(Error::AdmissibilityTransfer { word });
    }
    for wf in &words_f {
        let Some(wg) = pg.word(&wf.ids)? else {
            return Err(Error::AdmissibilityTransfer { word: pf.word_label(&wf.ids) });
        };
        pairs.push((wf.cylinder.lo, wg.cylinder.lo));
        pairs.push((wf.cylinder.hi, wg.cylinder.hi));
    }

    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.dedup_by(|next, kept| next.0 - kept.0 <= MERGE_GAP);
    // dedup keeps the first of a run; pin the right end explicitly
    if let Some(last) = pairs.last_mut() {
        if last.0 >= 1.0 - MERGE_GAP {
            *last = (1.0, 1.0);
        }
    }
    for w in pairs.windows(2) {
        if !(w[1].1 > w[0].1) {
            return Err(Error::OrderViolation { x: w[1].0 });
        }
    }
    Ok(ConjugacyMesh { pairs, core_f: Some(pf.core()), core_g: Some(pg.core()), word_length })
}

impl ConjugacyMesh {
    /// A mesh from explicit pairs, with an empty core. Pairs are sorted
    /// by `x_f` and must then increase in `x_g` as well.
    pub fn from_pairs(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.len() < 2 {
            return Err(Error::ParameterOutOfRange("a mesh needs at least two pairs".into()));
        }
        for w in pairs.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) {
                return Err(Error::OrderViolation { x: w[1].0 });
            }
        }
        Ok(ConjugacyMesh {
            pairs,
            core_f: None,
            core_g: None,
            word_length: 0,
        })
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn core(&self) -> Option<Interval> {
        self.core_f
    }

    /// `H^{-1}` on the same landmarks.
    pub fn inverse(&self) -> ConjugacyMesh {
        ConjugacyMesh {
            pairs: self.pairs.iter().map(|&(a, b)| (b, a)).collect(),
            core_f: self.core_g,
            core_g: self.core_f,
            word_length: self.word_length,
        }
    }

    /// Largest gap between consecutive source landmarks outside the core.
    pub fn width(&self) -> f64 {
        self.pairs
            .windows(2)
            .filter(|w| !self.core_f.is_some_and(|c| c.lo <= w[0].0 && w[1].0 <= c.hi))
            .map(|w| w[1].0 - w[0].0)
            .fold(0.0, f64::max)
    }

    /// First and last source landmark.
    pub fn range(&self) -> (f64, f64) {
        (self.pairs[0].0, self.pairs[self.pairs.len() - 1].0)
    }

    /// `true` when `x` lies in the open core.
    pub fn is_unresolved(&self, x: f64) -> bool {
        self.core_f.is_some_and(|c| c.lo < x && x < c.hi)
    }

    /// `true` when `[a, b]` meets the open core.
    pub fn touches_core(&self, a: f64, b: f64) -> bool {
        self.core_f.is_some_and(|c| a < c.hi && c.lo < b)
    }

    /// `H(x)`; `x` outside the mesh range is clamped to it.
    pub fn eval(&self, x: f64) -> Evaluation {
        let p = &self.pairs;
        let first = p[0];
        let last = p[p.len() - 1];
        let unresolved = self.is_unresolved(x);
        if x <= first.0 {
            return Evaluation { value: first.1, unresolved };
        }
        if x >= last.0 {
            return Evaluation { value: last.1, unresolved };
        }
        let i = p.partition_point(|q| q.0 <= x);
        let (a, b) = (p[i - 1], p[i]);
        if a.0 == x {
            return Evaluation { value: a.1, unresolved };
        }
        let s = (x - a.0) / (b.0 - a.0);
        Evaluation { value: a.1 + s * (b.1 - a.1), unresolved }
    }
}

/// `H(x)` for the mesh.
pub fn conjugacy_at(mesh: &ConjugacyMesh, x: f64) -> Evaluation {
    mesh.eval(x)
}

/// Statistics of `ρ(x, τ)` at one dyadic scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsRow {
    pub j: u32,
    pub tau: f64,
    /// `None` when every triple at this scale was excluded.
    pub max_rho: Option<f64>,
    pub mean_rho: Option<f64>,
    pub samples: usize,
    pub excluded: usize,
    /// `τ` is at least twice the mesh width.
    pub resolved: bool,
}

/// Quasisymmetry profile of `H` and `H^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsModulusTable {
    pub grid: usize,
    pub forward: Vec<QsRow>,
    pub inverse: Vec<QsRow>,
    pub mesh_width: f64,
    pub inverse_mesh_width: f64,
    pub excluded_measure: f64,
    pub inverse_excluded_measure: f64,
    pub warnings: Vec<String>,
}

impl QsModulusTable {
    /// Largest `max_rho` over the forward and inverse tables.
    pub fn overall_max(&self) -> Option<f64> {
        self.forward.iter().chain(&self.inverse).filter_map(|r| r.max_rho).reduce(f64::max)
    }
}

fn scale_row(mesh: &ConjugacyMesh, j: u32, grid: usize, width: f64) -> QsRow {
    let (lo, hi) = mesh.range();
    let half = 0.5 * (hi - lo);
    let tau = half * 0.5f64.powi(j as i32);
    let h = (hi - lo) / grid as f64;
    let rhos: Vec<Option<f64>> = (0..=grid)
        .into_par_iter()
        .map(|i| {
            let x = lo + h * i as f64;
            let (l, r) = (x - tau, x + tau);
            if l < lo || r > hi {
                return None;
            }
            if mesh.touches_core(l, r) {
                return Some(f64::NAN);
            }
            let (hl, hm, hr) = (mesh.eval(l).value, mesh.eval(x).value, mesh.eval(r).value);
            Some((hr - hm).abs() / (hm - hl).abs())
        })
        .collect();
    let mut samples = 0;
    let mut excluded = 0;
    let mut max: Option<f64> = None;
    let mut sum = 0.0;
    for rho in rhos.into_iter().flatten() {
        if rho.is_nan() {
            excluded += 1;
            continue;
        }
        samples += 1;
        sum += rho;
        max = Some(max.map_or(rho, |m| m.max(rho)));
    }
    QsRow {
        j,
        tau,
        max_rho: max,
        mean_rho: (samples > 0).then(|| sum / samples as f64),
        samples,
        excluded,
        resolved: tau >= 2.0 * width,
    }
}

/// `ρ(x, τ) = |H(x+τ) - H(x)| / |H(x) - H(x-τ)|` on `x = -1 + 2i/grid`,
/// `τ = 2^{-j}` for `j = j0..=j1`, for `H` and `H^{-1}`. A mesh whose
/// range is not `[-1, 1]` uses the same grid and scales mapped affinely
/// onto its range.
///
/// Triples whose span `[x - τ, x + τ]` meets the core are excluded. Scales below
/// twice the mesh width are still computed but flagged and warned about.
pub fn qs_modulus(mesh: &ConjugacyMesh, j0: u32, j1: u32, grid: usize) -> Result<QsModulusTable> {
    if j0 > j1 || grid < 2 {
        return Err(Error::ParameterOutOfRange(format!("bad scale range {j0}..={j1} or grid {grid}")));
    }
    let inverse = mesh.inverse();
    let (w_f, w_g) = (mesh.width(), inverse.width());
    let forward: Vec<QsRow> = (j0..=j1).map(|j| scale_row(mesh, j, grid, w_f)).collect();
    let backward: Vec<QsRow> = (j0..=j1).map(|j| scale_row(&inverse, j, grid, w_g)).collect();
    let mut warnings = Vec::new();
    for (name, rows, w) in [("H", &forward, w_f), ("H^-1", &backward, w_g)] {
        let coarse: Vec<String> = rows.iter().filter(|r| !r.resolved).map(|r| r.j.to_string()).collect();
        if !coarse.is_empty() {
            warnings.push(format!(
                "{name}: mesh width {w:.3e} does not resolve scales j = {}",
                coarse.join(",")
            ));
        }
        let empty: Vec<String> = rows.iter().filter(|r| r.samples == 0).map(|r| r.j.to_string()).collect();
        if !empty.is_empty() {
            warnings.push(format!("{name}: no admissible triples at j = {}", empty.join(",")));
        }
    }
    Ok(QsModulusTable {
        grid,
        forward,
        inverse: backward,
        mesh_width: w_f,
        inverse_mesh_width: w_g,
        excluded_measure: mesh.core_f.map_or(0.0, |c| c.len()),
        inverse_excluded_measure: inverse.core_f.map_or(0.0, |c| c.len()),
        warnings,
    })
}

/// `|H(F_f(x)) - F_g(H(x))|` at a point interior to a source element.
///
/// Both induced maps use the branch of the element containing `x`.
pub fn equivariance_defect(
    mesh: &ConjugacyMesh,
    pf: &MarkovPartition,
    pg: &MarkovPartition,
    x: f64,
) -> Result<f64> {
    let id = pf.locate(x)?;
    let fx = pf.apply(id, x);
    let hx = mesh.eval(x).value;
    Ok((mesh.eval(fx).value - pg.apply(id, hx)).abs())
}
