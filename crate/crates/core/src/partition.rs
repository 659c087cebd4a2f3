//! The partition `η₀` of `[-1, 1]` cut out by the nested intervals and the
//! periodic orbits of their endpoints, the induced Markov map `F`, its
//! inverse branches and admissible words.
//!
//! Level-`k` elements tile `I_{k-1} \ I_k` and carry `F = f^{m_{k-1}}`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{complement, Interval};
use crate::map::{Jet, Unimodal};
use crate::renorm::{image_interval, RenormTower};
use crate::tolerances::Tolerances;

/// Whether an element is a bare gap or contains a cycle interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    GapOnly,
    CyclePlusGap,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::GapOnly => "gap-only",
            ElementKind::CyclePlusGap => "cycle-plus-gap",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionElement {
    pub level: usize,
    /// 1-based, left to right within the level.
    pub index: usize,
    pub interval: Interval,
    /// Power of `f` applied by `F` on this element, `m_{k-1}`.
    pub iterate: u64,
    pub kind: ElementKind,
}

/// Cycle intervals `I_{k,j}` and the gaps `G_{k,i}` they leave in `I_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelGaps {
    pub level: usize,
    /// `I_{k,j} = (f^{m_{k-1}}|I_{k-1})^j (I_k)`, `j = 0..=n_k`.
    pub cycle: Vec<Interval>,
    pub gaps: Vec<Interval>,
}

/// Computes `I_{k,j}` by pushing `I_k` forward under `f^{m_{k-1}}`.
pub fn level_gaps(tower: &RenormTower, k: usize, tol: &Tolerances) -> Result<LevelGaps> {
    tower.require_depth(k)?;
    if k == 0 {
        return Err(Error::ParameterOutOfRange("level gaps start at k = 1".into()));
    }
    let outer = tower.nested(k - 1);
    let step = InducedBranch { base: tower.base(), iterate: tower.period(k - 1) };
    let n = tower.level(k).return_time;
    let mut cycle = Vec::with_capacity(n + 1);
    let mut cur = tower.nested(k);
    for _ in 0..=n {
        if !cur.within(&outer, tol.renorm.max(tol.markov)) {
            return Err(Error::Escape { iterate: cycle.len(), value: cur.lo.min(cur.hi) });
        }
        cycle.push(cur);
        cur = image_interval(&step, cur);
    }
    let gaps = complement(outer, &cycle, tol.renorm);
    Ok(LevelGaps { level: k, cycle, gaps })
}

/// `f^m` viewed as a map of the base coordinate.
struct InducedBranch<'a> {
    base: &'a crate::map::UnimodalMap,
    iterate: u64,
}

impl Unimodal for InducedBranch<'_> {
    fn exponent(&self) -> f64 {
        self.base.exponent()
    }
    fn value(&self, x: f64) -> f64 {
        self.base.iterate(x, self.iterate)
    }
    fn jet(&self, x: f64) -> Jet {
        self.base.iterate_jet(x, self.iterate)
    }
}

/// `η₀` restricted to levels `1..=K` together with `F`.
#[derive(Debug, Clone)]
pub struct MarkovPartition {
    tower: RenormTower,
    depth: usize,
    elements: Vec<PartitionElement>,
    /// `O(p_k) ∩ I_{k-1}`, sorted, for `k = 1..=K`.
    cut_points: Vec<Vec<f64>>,
    images: Vec<Interval>,
    successors: Vec<Vec<usize>>,
    tol: Tolerances,
}

/// Builds the partition of `[-1, 1]` down to level `depth`.
pub fn build_partition(tower: &RenormTower, depth: usize, tol: &Tolerances) -> Result<MarkovPartition> {
    if depth == 0 {
        return Err(Error::ParameterOutOfRange("partition depth must be at least 1".into()));
    }
    tower.require_depth(depth)?;
    let base = tower.base();
    let mut elements = Vec::new();
    let mut cut_points = Vec::with_capacity(depth);

    for k in 1..=depth {
        let outer = tower.nested(k - 1);
        let inner = tower.nested(k);
        let p = tower.periodic_endpoint(k);
        let slack = tol.renorm.max(tol.markov * 1e-2);
        let orbit = base.orbit(p, tower.period(k) as usize, tol)?;
        let mut cuts: Vec<f64> = orbit[..orbit.len() - 1]
            .iter()
            .copied()
            .filter(|z| Interval::spanning(*z, *z).within(&outer, slack))
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= slack);

        let gaps = level_gaps(tower, k, tol)?;
        let mut index = 0;
        for side in [Interval::spanning(outer.lo, inner.lo), Interval::spanning(inner.hi, outer.hi)] {
            let mut bounds = vec![side.lo];
            bounds.extend(cuts.iter().copied().filter(|&z| z > side.lo + slack && z < side.hi - slack));
            bounds.push(side.hi);
            for w in bounds.windows(2) {
                let interval = Interval::spanning(w[0], w[1]);
                if interval.len() < tol.conditioning {
                    return Err(Error::DegenerateComponent { level: k, length: interval.len() });
                }
                let kind = if gaps.cycle[1..].iter().any(|c| c.overlap(&interval) > tol.renorm) {
                    ElementKind::CyclePlusGap
                } else {
                    ElementKind::GapOnly
                };
                index += 1;
                elements.push(PartitionElement { level: k, index, interval, iterate: tower.period(k - 1), kind });
            }
        }
        cut_points.push(cuts);
    }

    let mut partition = MarkovPartition {
        tower: tower.clone(),
        depth,
        elements,
        cut_points,
        images: Vec::new(),
        successors: Vec::new(),
        tol: *tol,
    };
    partition.images = (0..partition.elements.len()).map(|id| partition.compute_image(id)).collect();
    partition.successors = (0..partition.elements.len())
        .map(|id| {
            let image = partition.images[id];
            (0..partition.elements.len())
                .filter(|&j| partition.elements[j].interval.within(&image, tol.markov))
                .collect()
        })
        .collect();
    Ok(partition)
}

/// An admissible word `i_0 … i_{l-1}` over element ids.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchWord {
    pub ids: Vec<usize>,
    /// `g_{i_0} ∘ ⋯ ∘ g_{i_{l-2}}(M_{i_{l-1}})`: points with this itinerary.
    pub cylinder: Interval,
    /// `F(M_{i_{l-1}})`, the domain of `g_w`.
    pub domain: Interval,
}

impl BranchWord {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

impl MarkovPartition {
    pub fn tower(&self) -> &RenormTower {
        &self.tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn elements(&self) -> &[PartitionElement] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &PartitionElement {
        &self.elements[id]
    }

    pub fn level_elements(&self, k: usize) -> impl Iterator<Item = (usize, &PartitionElement)> {
        self.elements.iter().enumerate().filter(move |(_, e)| e.level == k)
    }

    pub fn cut_points(&self, k: usize) -> &[f64] {
        &self.cut_points[k - 1]
    }

    /// `I_K`, the part of `[-1, 1]` left unresolved.
    pub fn core(&self) -> Interval {
        self.tower.nested(self.depth)
    }

    /// `F(M)` for element `id`.
    pub fn image(&self, id: usize) -> Interval {
        self.images[id]
    }

    /// Elements admissible after `id`.
    pub fn successors(&self, id: usize) -> &[usize] {
        &self.successors[id]
    }

    fn compute_image(&self, id: usize) -> Interval {
        let e = &self.elements[id];
        let base = self.tower.base();
        Interval::spanning(base.iterate(e.interval.lo, e.iterate), base.iterate(e.interval.hi, e.iterate))
    }

    /// `F^{}` restricted to element `id` (no membership check).
    pub fn apply(&self, id: usize, x: f64) -> f64 {
        self.tower.base().iterate(x, self.elements[id].iterate)
    }

    /// Jet of `F` on element `id`.
    pub fn apply_jet(&self, id: usize, x: f64) -> Jet {
        self.tower.base().iterate_jet(x, self.elements[id].iterate)
    }

    /// Cut points, endpoints of every `I_j` and `±1`, sorted.
    pub fn landmarks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = vec![-1.0, 1.0];
        for k in 1..=self.depth {
            let i = self.tower.nested(k);
            out.push(i.lo);
            out.push(i.hi);
            out.extend_from_slice(&self.cut_points[k - 1]);
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Element whose open interior contains `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        let tol = &self.tol;
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain { x });
        }
        if self.core().contains(x) {
            return Err(Error::UnresolvedPoint { x });
        }
        for (id, e) in self.elements.iter().enumerate() {
            let i = e.interval;
            if i.lo + tol.conditioning < x && x < i.hi - tol.conditioning {
                return Ok(id);
            }
        }
        Err(Error::UnresolvedPoint { x })
    }

    /// `F(x)` and the element containing `x`.
    pub fn induced_eval(&self, x: f64) -> Result<(f64, usize)> {
        let id = self.locate(x)?;
        Ok((self.apply(id, x), id))
    }

    /// `g(y)` for the inverse branch `(F|M)^{-1}` of element `id`.
    ///
    /// Safeguarded Newton iteration inside the element; falls back to
    /// bisection whenever the Newton step leaves the bracket.
    pub fn branch_inverse(&self, id: usize, y: f64) -> Result<f64> {
        let e = &self.elements[id];
        let (a, b) = (e.interval.lo, e.interval.hi);
        let (fa, fb) = (self.apply(id, a), self.apply(id, b));
        let range = Interval::spanning(fa, fb);
        if !(range.lo - self.tol.markov <= y && y <= range.hi + self.tol.markov) {
            return Err(Error::OutOfRange { y, lo: range.lo, hi: range.hi });
        }
        if fa == fb {
            return Err(Error::DegenerateDerivative { x: a, derivative: 0.0 });
        }
        let increasing = fb > fa;
        if y <= range.lo {
            return Ok(if increasing { a } else { b });
        }
        if y >= range.hi {
            return Ok(if increasing { b } else { a });
        }
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * (y - fa) / (fb - fa);
        for _ in 0..self.tol.bisection_budget {
            let jet = self.apply_jet(id, x);
            let r = jet.value - y;
            if r == 0.0 {
                return Ok(x);
            }
            // Shrink the bracket using monotonicity.
            if (r > 0.0) == increasing {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / jet.d1;
            let next = if newton > lo && newton < hi && jet.d1.is_finite() && jet.d1 != 0.0 {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) || hi <= lo {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// Derivative sign of `F` on element `id` (+1 increasing).
    pub fn orientation(&self, id: usize) -> f64 {
        let e = &self.elements[id];
        (self.apply(id, e.interval.hi) - self.apply(id, e.interval.lo)).signum()
    }

    /// Pulls `interval` back through the branches `ids` (applied last to first).
    pub fn pull_back(&self, ids: &[usize], interval: Interval) -> Result<Interval> {
        let mut cur = interval;
        for &id in ids.iter().rev() {
            let a = self.branch_inverse(id, cur.lo)?;
            let b = self.branch_inverse(id, cur.hi)?;
            cur = Interval::spanning(a, b);
        }
        Ok(cur)
    }

    /// Builds the word for `ids`, checking admissibility.
    pub fn word(&self, ids: &[usize]) -> Result<Option<BranchWord>> {
        let Some((&last, prefix)) = ids.split_last() else {
            return Ok(Some(BranchWord {
                ids: Vec::new(),
                cylinder: Interval::symmetric(1.0),
                domain: Interval::symmetric(1.0),
            }));
        };
        for w in ids.windows(2) {
            if !self.successors[w[0]].contains(&w[1]) {
                return Ok(None);
            }
        }
        let cylinder = self.pull_back(prefix, self.elements[last].interval)?;
        Ok(Some(BranchWord { ids: ids.to_vec(), cylinder, domain: self.images[last] }))
    }

    /// Every admissible word of length `1..=max_len`, depth first with
    /// element ids in increasing order (prefixes precede extensions).
    pub fn admissible_words(&self, max_len: usize) -> Result<Vec<BranchWord>> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        for id in 0..self.elements.len() {
            stack.clear();
            stack.push(id);
            self.extend_words(&mut stack, max_len, &mut out)?;
        }
        Ok(out)
    }

    fn extend_words(&self, stack: &mut Vec<usize>, max_len: usize, out: &mut Vec<BranchWord>) -> Result<()> {
        let last = *stack.last().expect("non-empty word");
        let cylinder = self.pull_back(&stack[..stack.len() - 1], self.elements[last].interval)?;
        out.push(BranchWord { ids: stack.clone(), cylinder, domain: self.images[last] });
        if stack.len() == max_len {
            return Ok(());
        }
        for &next in &self.successors[last] {
            stack.push(next);
            self.extend_words(stack, max_len, out)?;
            stack.pop();
        }
        Ok(())
    }

    /// `(k,i)(k,i)…` label for a word.
    pub fn word_label(&self, ids: &[usize]) -> String {
        ids.iter()
            .map(|&id| {
                let e = &self.elements[id];
                format!("({},{})", e.level, e.index)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::UnimodalMap;
    use crate::renorm::build_tower;

    const C_STAR: f64 = 0.7849728402613959;

    fn doubling(depth: usize) -> (RenormTower, MarkovPartition) {
        let tol = Tolerances::default();
        let f = UnimodalMap::affine(2.0, C_STAR).unwrap();
        let tower = build_tower(&f, depth, 2, &tol).unwrap();
        let partition = build_partition(&tower, depth, &tol).unwrap();
        (tower, partition)
    }

    #[test]
    fn first_level_of_doubling() {
        let (_, p) = doubling(2);
        let q = C_STAR / (1.0 + C_STAR);
        let level1: Vec<_> = p.level_elements(1).map(|(_, e)| e.clone()).collect();
        assert_eq!(level1.len(), 2);
        assert!((level1[0].interval.lo + 1.0).abs() < 1e-15);
        assert!((level1[0].interval.hi + q).abs() < 1e-12);
        assert!((level1[1].interval.lo - q).abs() < 1e-12);
        assert_eq!(level1[1].interval.hi, 1.0);
        assert_eq!(level1[0].kind, ElementKind::GapOnly);
        assert_eq!(level1[1].kind, ElementKind::CyclePlusGap);
        assert_eq!(p.cut_points(1).len(), 1);
        assert!((p.cut_points(1)[0] - q).abs() < 1e-12);
    }

    #[test]
    fn doubling_level_gaps() {
        let (tower, _) = doubling(2);
        let tol = Tolerances::default();
        let q = C_STAR / (1.0 + C_STAR);
        let g = level_gaps(&tower, 1, &tol).unwrap();
        assert_eq!(g.cycle[0], tower.nested(1));
        assert!((g.cycle[1].lo - q).abs() < 1e-12 && (g.cycle[1].hi - C_STAR).abs() < 1e-15);
        assert!(g.cycle[2].within(&g.cycle[0], 1e-12));
        assert_eq!(g.gaps.len(), 2);
        assert!((g.gaps[0].lo + 1.0).abs() < 1e-15 && (g.gaps[0].hi + q).abs() < 1e-12);
        assert!((g.gaps[1].lo - C_STAR).abs() < 1e-15 && g.gaps[1].hi == 1.0);
    }

    #[test]
    fn induced_map_on_levels() {
        let (_, p) = doubling(3);
        let f = p.tower().base().clone();
        let (y, id) = p.induced_eval(0.7).unwrap();
        assert_eq!(p.element(id).level, 1);
        assert_eq!(y, f.value(0.7));
        let x = 0.5 * (p.tower().nested(1).hi + p.tower().nested(2).hi);
        let (y, id) = p.induced_eval(x).unwrap();
        assert_eq!(p.element(id).level, 2);
        assert_eq!(y, f.value(f.value(x)));
        assert!(matches!(p.induced_eval(0.0), Err(Error::UnresolvedPoint { .. })));
        let q = p.cut_points(1)[0];
        assert!(matches!(p.induced_eval(q), Err(Error::UnresolvedPoint { .. })));
    }

    #[test]
    fn branch_inverse_round_trip() {
        let (_, p) = doubling(3);
        for (id, e) in p.elements().iter().enumerate() {
            for s in 1..20 {
                let x = e.interval.lo + e.interval.len() * s as f64 / 20.0;
                let back = p.branch_inverse(id, p.apply(id, x)).unwrap();
                assert!((back - x).abs() < 1e-9, "element {id}: {x} -> {back}");
            }
        }
        // the right level-1 branch fixes q and sends 1 to -1
        let q = p.cut_points(1)[0];
        assert!((p.branch_inverse(1, q).unwrap() - q).abs() < 1e-12);
        assert!(matches!(p.branch_inverse(1, 0.9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn words_of_length_one_are_elements() {
        let (_, p) = doubling(2);
        let words = p.admissible_words(1).unwrap();
        assert_eq!(words.len(), p.elements().len());
        for (w, e) in words.iter().zip(p.elements()) {
            assert_eq!(w.cylinder, e.interval);
        }
    }

    #[test]
    fn second_level_words_follow_containment() {
        let (_, p) = doubling(2);
        let image = p.image(1);
        let q = p.cut_points(1)[0];
        assert!((image.lo + 1.0).abs() < 1e-12 && (image.hi - q).abs() < 1e-12);
        for (j, e) in p.level_elements(2) {
            let admissible = p.word(&[1, j]).unwrap().is_some();
            assert_eq!(admissible, e.interval.within(&image, 1e-7));
            assert!(admissible);
        }
        assert!(p.word(&[1, 1]).unwrap().is_none());
    }

    #[test]
    fn labels_are_level_index_pairs() {
        let (_, p) = doubling(2);
        assert_eq!(p.word_label(&[1, 2]), "(1,2)(2,1)");
    }
}
