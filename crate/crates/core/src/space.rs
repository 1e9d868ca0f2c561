//! Space descriptors and set descriptors on the real line.
//!
//! Contours live on a [`SpaceDescriptor`]; queries such as possibility or
//! necessity of an assertion take a [`SetDescriptor`], which is either a union
//! of intervals or a finite set of points. Interval endpoints may be infinite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The space a contour or distribution is defined on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SpaceDescriptor {
    /// A 1-D interval, endpoints possibly infinite.
    Interval(Interval),
    /// Product of 1-D intervals.
    Product(Vec<Interval>),
    /// A finite set of labels; points are addressed by index.
    Finite(Vec<String>),
}

impl SpaceDescriptor {
    pub fn real_line() -> Self {
        SpaceDescriptor::Interval(Interval::real_line())
    }

    pub fn unit_interval() -> Self {
        SpaceDescriptor::Interval(Interval::closed(0.0, 1.0))
    }

    pub fn positive_half_line() -> Self {
        SpaceDescriptor::Interval(Interval::open(0.0, f64::INFINITY))
    }

    pub fn dim(&self) -> usize {
        match self {
            SpaceDescriptor::Interval(_) | SpaceDescriptor::Finite(_) => 1,
            SpaceDescriptor::Product(v) => v.len(),
        }
    }

    /// The 1-D interval, if this is one.
    pub fn as_interval(&self) -> Option<Interval> {
        match self {
            SpaceDescriptor::Interval(i) => Some(*i),
            _ => None,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        match self {
            SpaceDescriptor::Interval(i) => point.len() == 1 && i.contains(point[0]),
            SpaceDescriptor::Product(v) => {
                point.len() == v.len() && v.iter().zip(point).all(|(i, &x)| i.contains(x))
            }
            SpaceDescriptor::Finite(labels) => {
                point.len() == 1
                    && point[0] >= 0.0
                    && point[0].fract() == 0.0
                    && (point[0] as usize) < labels.len()
            }
        }
    }
}

/// A real interval. Closedness flags only matter for membership and for
/// complements; suprema of continuous contours are taken over the closure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `[x, +inf)`
    pub fn at_least(x: f64) -> Self {
        Self::new(x, f64::INFINITY, true, false)
    }

    /// `(x, +inf)`
    pub fn above(x: f64) -> Self {
        Self::new(x, f64::INFINITY, false, false)
    }

    /// `(-inf, x]`
    pub fn at_most(x: f64) -> Self {
        Self::new(f64::NEG_INFINITY, x, false, true)
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn length(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// `self ⊆ other`, up to closedness at shared endpoints.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        if self.is_empty() {
            return true;
        }
        let lo_ok = self.lo > other.lo
            || (self.lo == other.lo && (other.lo_closed || !self.lo_closed));
        let hi_ok = self.hi < other.hi
            || (self.hi == other.hi && (other.hi_closed || !self.hi_closed));
        lo_ok && hi_ok
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        Interval::new(lo, hi, lo_closed, hi_closed)
    }
}

/// A subset of a 1-D space: a union of intervals or a finite point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SetDescriptor {
    Empty,
    Intervals(Vec<Interval>),
    Points(Vec<f64>),
}

impl SetDescriptor {
    pub fn interval(i: Interval) -> Self {
        SetDescriptor::Intervals(vec![i])
    }

    pub fn point(x: f64) -> Self {
        SetDescriptor::Points(vec![x])
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetDescriptor::Empty => true,
            SetDescriptor::Intervals(v) => v.iter().all(Interval::is_empty),
            SetDescriptor::Points(p) => p.is_empty(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match self {
            SetDescriptor::Empty => false,
            SetDescriptor::Intervals(v) => v.iter().any(|i| i.contains(x)),
            SetDescriptor::Points(p) => p.contains(&x),
        }
    }

    pub fn union(&self, other: &SetDescriptor) -> SetDescriptor {
        match (self, other) {
            (SetDescriptor::Empty, x) | (x, SetDescriptor::Empty) => x.clone(),
            (SetDescriptor::Intervals(a), SetDescriptor::Intervals(b)) => {
                SetDescriptor::Intervals(a.iter().chain(b).copied().collect())
            }
            (SetDescriptor::Points(a), SetDescriptor::Points(b)) => {
                SetDescriptor::Points(a.iter().chain(b).copied().collect())
            }
            (SetDescriptor::Intervals(a), SetDescriptor::Points(p))
            | (SetDescriptor::Points(p), SetDescriptor::Intervals(a)) => SetDescriptor::Intervals(
                a.iter().copied().chain(p.iter().map(|&x| Interval::point(x))).collect(),
            ),
        }
    }

    /// Clip to a domain interval; errors if any part lies outside it.
    pub fn check_within(&self, domain: &Interval) -> Result<()> {
        let ok = match self {
            SetDescriptor::Empty => true,
            SetDescriptor::Intervals(v) => v.iter().all(|i| i.is_subset_of(domain)),
            SetDescriptor::Points(p) => p.iter().all(|&x| domain.contains(x)),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("set {self:?} is not contained in domain {domain:?}")))
        }
    }

    /// Sorted, merged, non-empty intervals covering the set (points become
    /// degenerate intervals).
    pub fn normalized(&self) -> Vec<Interval> {
        let mut v: Vec<Interval> = match self {
            SetDescriptor::Empty => Vec::new(),
            SetDescriptor::Intervals(v) => v.iter().copied().filter(|i| !i.is_empty()).collect(),
            SetDescriptor::Points(p) => p.iter().map(|&x| Interval::point(x)).collect(),
        };
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            if let Some(last) = out.last_mut() {
                let touches = i.lo < last.hi || (i.lo == last.hi && (i.lo_closed || last.hi_closed));
                if touches {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                        last.hi_closed = i.hi_closed;
                    } else if i.hi == last.hi {
                        last.hi_closed |= i.hi_closed;
                    }
                    continue;
                }
            }
            out.push(i);
        }
        out
    }

    /// Intersection with a domain interval.
    pub fn clip_to(&self, domain: &Interval) -> SetDescriptor {
        let out = match self {
            SetDescriptor::Empty => return SetDescriptor::Empty,
            SetDescriptor::Intervals(v) => SetDescriptor::Intervals(
                v.iter().map(|i| i.intersect(domain)).filter(|i| !i.is_empty()).collect(),
            ),
            SetDescriptor::Points(p) => SetDescriptor::Points(p.iter().copied().filter(|&x| domain.contains(x)).collect()),
        };
        if out.is_empty() {
            SetDescriptor::Empty
        } else {
            out
        }
    }

    /// Complement within `domain`, as an interval union.
    pub fn complement_within(&self, domain: &Interval) -> SetDescriptor {
        let parts = self.normalized();
        let mut out = Vec::new();
        let mut cursor = domain.lo;
        let mut cursor_closed = domain.lo_closed;
        for i in parts.iter().map(|i| i.intersect(domain)).filter(|i| !i.is_empty()) {
            let gap = Interval::new(cursor, i.lo, cursor_closed, !i.lo_closed);
            if !gap.is_empty() {
                out.push(gap);
            }
            cursor = i.hi;
            cursor_closed = !i.hi_closed;
        }
        let tail = Interval::new(cursor, domain.hi, cursor_closed, domain.hi_closed);
        if !tail.is_empty() {
            out.push(tail);
        }
        if out.is_empty() {
            SetDescriptor::Empty
        } else {
            SetDescriptor::Intervals(out)
        }
    }
}

/// Parse `lo:hi:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Argument(format!("grid '{spec}' must be lo:hi:step")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Argument(format!("grid '{spec}': {e}")))?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
        return Err(Error::Argument(format!("grid '{spec}' needs finite lo <= hi and step > 0")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_inner_interval() {
        let dom = Interval::closed(0.0, 1.0);
        let k = SetDescriptor::interval(Interval::closed(0.25, 0.75));
        let c = k.complement_within(&dom);
        assert_eq!(
            c,
            SetDescriptor::Intervals(vec![
                Interval::new(0.0, 0.25, true, false),
                Interval::new(0.75, 1.0, false, true)
            ])
        );
    }

    #[test]
    fn complement_of_full_domain_is_empty() {
        let dom = Interval::closed(0.0, 1.0);
        assert!(SetDescriptor::interval(dom).complement_within(&dom).is_empty());
        let line = Interval::real_line();
        let c = SetDescriptor::interval(Interval::at_most(9.0)).complement_within(&line);
        assert_eq!(c, SetDescriptor::interval(Interval::above(9.0)));
    }

    #[test]
    fn points_complement_keeps_everything_else() {
        let line = Interval::real_line();
        let c = SetDescriptor::point(0.0).complement_within(&line);
        assert!(c.contains(1e-9) && c.contains(-1e-9) && !c.contains(0.0));
    }

    #[test]
    fn normalization_merges_overlaps() {
        let s = SetDescriptor::Intervals(vec![
            Interval::closed(2.0, 3.0),
            Interval::closed(0.0, 1.0),
            Interval::closed(0.5, 2.0),
        ]);
        assert_eq!(s.normalized(), vec![Interval::closed(0.0, 3.0)]);
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-20:20:0.05").unwrap();
        assert_eq!(g.len(), 801);
        assert!((g[800] - 20.0).abs() < 1e-9);
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("a:b").is_err());
    }
}
