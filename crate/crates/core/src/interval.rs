use serde::{Deserialize, Serialize};
use std::fmt;

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    /// Builds the interval spanned by two points in either order.
    pub fn spanning(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn symmetric(radius: f64) -> Self {
        Interval::spanning(-radius, radius)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// `self ⊆ other` allowing `tol` of slack at either end.
    pub fn within(&self, other: &Interval, tol: f64) -> bool {
        self.lo >= other.lo - tol && self.hi <= other.hi + tol
    }

    /// Length of the intersection (zero when disjoint).
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.lo, self.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Closure of `outer` minus the union of `pieces`, dropping components no
/// longer than `tol`. Components come back sorted left to right.
pub fn complement(outer: Interval, pieces: &[Interval], tol: f64) -> Vec<Interval> {
    let mut sorted: Vec<Interval> = pieces.to_vec();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out = Vec::new();
    let mut cursor = outer.lo;
    for piece in sorted {
        if piece.lo > cursor {
            let hi = piece.lo.min(outer.hi);
            if hi - cursor > tol {
                out.push(Interval { lo: cursor, hi });
            }
        }
        cursor = cursor.max(piece.hi);
        if cursor >= outer.hi {
            break;
        }
    }
    if outer.hi - cursor > tol {
        out.push(Interval { lo: cursor, hi: outer.hi });
    }
    out
}
