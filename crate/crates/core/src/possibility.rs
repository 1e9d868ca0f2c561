//! Possibility contours and the possibility/necessity measures they induce.
//!
//! A contour is an evaluable map into `[0, 1]` with supremum 1, plus hints
//! (mode, shape, tail limits) that let set queries be answered exactly where
//! the shape allows. Tabulation is an explicit adapter ([`TabulatedContour`]).

use std::fmt;
use std::sync::Arc;

use crate::auxiliary::AuxiliaryDistribution;
use crate::error::{Error, Result};
use crate::numerics::{bisect, bisect_boundary, golden_max, integrate_mapped};
use crate::rng::substream;
use crate::space::{Interval, SetDescriptor, SpaceDescriptor};

/// Distance beyond the last finite feature at which tail limits are probed.
pub const DEFAULT_HORIZON: f64 = 1e6;
/// Absolute tolerance on α-cut endpoints.
pub const ENDPOINT_TOL: f64 = 1e-8;
/// Tolerance for "the supremum is 1".
pub const SUP_TOL: f64 = 1e-9;

pub type ContourFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Shape {
    /// Nondecreasing up to the mode, nonincreasing after.
    Unimodal,
    Monotone,
    General,
}

/// Limits of the contour at the lower and upper end of a 1-D domain.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TailLimits {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloMeta {
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone)]
pub struct PossibilityContour {
    domain: SpaceDescriptor,
    eval: ContourFn,
    mode: Option<Vec<f64>>,
    shape: Shape,
    tails: TailLimits,
    horizon: f64,
    monte_carlo: Option<MonteCarloMeta>,
    sup_deficit: Option<f64>,
}

impl fmt::Debug for PossibilityContour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PossibilityContour")
            .field("domain", &self.domain)
            .field("mode", &self.mode)
            .field("shape", &self.shape)
            .field("tails", &self.tails)
            .field("monte_carlo", &self.monte_carlo)
            .field("sup_deficit", &self.sup_deficit)
            .finish()
    }
}

impl PossibilityContour {
    pub fn new(domain: SpaceDescriptor, eval: ContourFn) -> Self {
        PossibilityContour {
            domain,
            eval,
            mode: None,
            shape: Shape::General,
            tails: TailLimits::default(),
            horizon: DEFAULT_HORIZON,
            monte_carlo: None,
            sup_deficit: None,
        }
    }

    /// Convenience constructor for 1-D contours.
    pub fn from_fn<F>(domain: SpaceDescriptor, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(domain, Arc::new(move |u: &[f64]| f(u[0])))
    }

    pub fn with_mode(mut self, mode: f64) -> Self {
        self.mode = Some(vec![mode]);
        self
    }

    pub fn with_mode_point(mut self, mode: Vec<f64>) -> Self {
        self.mode = Some(mode);
        self
    }

    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shape = shape;
        self
    }

    pub fn with_tails(mut self, tails: TailLimits) -> Self {
        self.tails = tails;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub(crate) fn with_monte_carlo(mut self, meta: MonteCarloMeta) -> Self {
        self.monte_carlo = Some(meta);
        self
    }

    pub(crate) fn with_sup_deficit(mut self, deficit: Option<f64>) -> Self {
        self.sup_deficit = deficit;
        self
    }

    pub fn domain(&self) -> &SpaceDescriptor {
        &self.domain
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn mode(&self) -> Option<f64> {
        self.mode.as_ref().map(|m| m[0])
    }

    pub fn mode_point(&self) -> Option<&[f64]> {
        self.mode.as_deref()
    }

    pub fn tails(&self) -> TailLimits {
        self.tails
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn monte_carlo(&self) -> Option<MonteCarloMeta> {
        self.monte_carlo
    }

    /// `Some(1 - sup)` when construction detected that the contour does not reach 1.
    pub fn sup_deficit(&self) -> Option<f64> {
        self.sup_deficit
    }

    pub fn eval(&self, u: &[f64]) -> f64 {
        (self.eval)(u)
    }

    pub fn at(&self, x: f64) -> f64 {
        (self.eval)(&[x])
    }

    /// Binomial standard error of a Monte Carlo contour value; 0 for exact contours.
    pub fn mc_standard_error(&self, u: &[f64]) -> f64 {
        match self.monte_carlo {
            Some(meta) => {
                let p = self.eval(u);
                (p * (1.0 - p) / meta.budget as f64).sqrt()
            }
            None => 0.0,
        }
    }

    pub(crate) fn interval_domain(&self) -> Result<Interval> {
        self.domain
            .as_interval()
            .ok_or_else(|| Error::Unsupported("operation needs a 1-D interval domain".into()))
    }

    /// Value at (or limit towards) an interval end point. Infinite points use the
    /// registered tail limit, or the value at `anchor ± horizon`.
    pub fn limit_at(&self, x: f64) -> f64 {
        if x.is_finite() {
            return self.at(x);
        }
        let side = if x > 0.0 { Side::Upper } else { Side::Lower };
        self.tail_limit(side)
    }

    pub fn tail_limit(&self, side: Side) -> f64 {
        let registered = match side {
            Side::Lower => self.tails.lower,
            Side::Upper => self.tails.upper,
        };
        if let Some(v) = registered {
            return v;
        }
        let dom = self.domain.as_interval().unwrap_or_else(Interval::real_line);
        match side {
            Side::Lower if dom.lo.is_finite() => self.at(dom.lo),
            Side::Upper if dom.hi.is_finite() => self.at(dom.hi),
            Side::Lower => {
                let anchor = self.mode().unwrap_or(0.0).min(dom.hi.min(0.0));
                self.at(anchor - self.horizon)
            }
            Side::Upper => {
                let anchor = self.mode().unwrap_or(0.0).max(dom.lo.max(0.0));
                self.at(anchor + self.horizon)
            }
        }
    }

    /// Check the range, normalization and (for unimodal contours) shape
    /// invariants on a grid of 1-D points.
    pub fn check_invariants(&self, grid: &[f64]) -> Result<()> {
        for &x in grid {
            let v = self.at(x);
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Numeric(format!("contour value {v} at {x} is outside [0,1]")));
            }
        }
        let sup = match self.mode() {
            Some(m) => self.at(m),
            None => grid.iter().map(|&x| self.at(x)).fold(0.0, f64::max),
        };
        if (1.0 - sup).abs() > SUP_TOL {
            return Err(Error::Numeric(format!("contour supremum {sup} differs from 1")));
        }
        if self.shape == Shape::Unimodal {
            let m = self
                .mode()
                .ok_or_else(|| Error::Configuration("unimodal contour without mode hint".into()))?;
            let mut sorted = grid.to_vec();
            sorted.sort_by(f64::total_cmp);
            for w in sorted.windows(2) {
                let (a, b) = (self.at(w[0]), self.at(w[1]));
                let bad = if w[1] <= m { b < a - 1e-12 } else if w[0] >= m { b > a + 1e-12 } else { false };
                if bad {
                    return Err(Error::Numeric(format!(
                        "unimodal shape violated between {} and {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The triangular contour `1 - |2u - 1|` on `[0, 1]`.
pub fn build_triangular() -> PossibilityContour {
    PossibilityContour::from_fn(SpaceDescriptor::unit_interval(), |u| {
        if (0.0..=1.0).contains(&u) {
            1.0 - (2.0 * u - 1.0).abs()
        } else {
            0.0
        }
    })
    .with_mode(0.5)
    .with_shape(Shape::Unimodal)
    .with_tails(TailLimits { lower: Some(0.0), upper: Some(0.0) })
}

/// Possibility measure of `set`: the supremum of the contour over it (0 for the empty set).
pub fn eval_possibility(contour: &PossibilityContour, set: &SetDescriptor) -> Result<f64> {
    if set.is_empty() {
        return Ok(0.0);
    }
    match contour.domain() {
        SpaceDescriptor::Finite(labels) => match set {
            SetDescriptor::Points(pts) => {
                let mut best: f64 = 0.0;
                for &p in pts {
                    if !contour.domain().contains(&[p]) {
                        return Err(Error::Domain(format!("label index {p} outside 0..{}", labels.len())));
                    }
                    best = best.max(contour.at(p));
                }
                Ok(best)
            }
            _ => Err(Error::Domain("finite domains take point sets".into())),
        },
        SpaceDescriptor::Product(_) => Err(Error::Unsupported(
            "set queries on product spaces are not supported".into(),
        )),
        SpaceDescriptor::Interval(dom) => {
            set.check_within(dom)?;
            let mut best: f64 = 0.0;
            for piece in set.normalized() {
                best = best.max(sup_on_interval(contour, &piece));
                if best >= 1.0 {
                    break;
                }
            }
            Ok(best.clamp(0.0, 1.0))
        }
    }
}

/// Necessity measure: `1 - Π(K^c)`.
pub fn necessity_of(contour: &PossibilityContour, set: &SetDescriptor) -> Result<f64> {
    let complement = complement_in_domain(contour.domain(), set)?;
    Ok(1.0 - eval_possibility(contour, &complement)?)
}

pub(crate) fn complement_in_domain(domain: &SpaceDescriptor, set: &SetDescriptor) -> Result<SetDescriptor> {
    match domain {
        SpaceDescriptor::Interval(dom) => {
            set.check_within(dom)?;
            Ok(set.complement_within(dom))
        }
        SpaceDescriptor::Finite(labels) => match set {
            SetDescriptor::Empty => Ok(SetDescriptor::Points((0..labels.len()).map(|i| i as f64).collect())),
            SetDescriptor::Points(pts) => {
                let rest: Vec<f64> =
                    (0..labels.len()).map(|i| i as f64).filter(|i| !pts.contains(i)).collect();
                Ok(if rest.is_empty() { SetDescriptor::Empty } else { SetDescriptor::Points(rest) })
            }
            SetDescriptor::Intervals(_) => Err(Error::Domain("finite domains take point sets".into())),
        },
        SpaceDescriptor::Product(_) => Err(Error::Unsupported("complements on product spaces".into())),
    }
}

/// Supremum over the closure of a 1-D interval.
pub(crate) fn sup_on_interval(contour: &PossibilityContour, piece: &Interval) -> f64 {
    if piece.lo == piece.hi {
        return contour.at(piece.lo);
    }
    let lo_val = contour.limit_at(piece.lo);
    let hi_val = contour.limit_at(piece.hi);
    match (contour.shape(), contour.mode()) {
        (Shape::Unimodal, Some(m)) => {
            if m >= piece.lo && m <= piece.hi {
                contour.at(m)
            } else if m < piece.lo {
                lo_val
            } else {
                hi_val
            }
        }
        (Shape::Monotone, _) => lo_val.max(hi_val),
        _ => grid_sup(contour, piece).max(lo_val).max(hi_val),
    }
}

/// Map `t ∈ [0, 1]` onto an interval, stretching infinite ends.
fn interval_map(piece: &Interval, scale: f64) -> impl Fn(f64) -> f64 + '_ {
    move |t: f64| match (piece.lo.is_finite(), piece.hi.is_finite()) {
        (true, true) => piece.lo + t * (piece.hi - piece.lo),
        (true, false) => piece.lo + scale * t / (1.0 - t),
        (false, true) => piece.hi - scale * (1.0 - t) / t,
        (false, false) => scale * (std::f64::consts::PI * (t - 0.5)).tan(),
    }
}

const SCAN_POINTS: usize = 2048;

fn grid_sup(contour: &PossibilityContour, piece: &Interval) -> f64 {
    let scale = [piece.lo, piece.hi, contour.mode().unwrap_or(0.0)]
        .iter()
        .filter(|x| x.is_finite())
        .fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let map = interval_map(piece, scale);
    let n = SCAN_POINTS;
    let ts: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| contour.at(map(t))).collect();
    let mut best = vals.iter().copied().fold(0.0, f64::max);
    // refine every local maximum that is close to the best grid value
    for k in 0..vals.len() {
        let left = if k == 0 { f64::NEG_INFINITY } else { vals[k - 1] };
        let right = if k + 1 == vals.len() { f64::NEG_INFINITY } else { vals[k + 1] };
        if vals[k] >= left && vals[k] >= right && vals[k] >= best - 0.05 {
            let a = k as f64 / n as f64;
            let b = (k + 2) as f64 / n as f64;
            let (_, v) = golden_max(|t| contour.at(map(t)), a, b.min(1.0 - 1e-15), 1e-13);
            best = best.max(v);
        }
    }
    best
}

/// The upper level set `{u : π(u) >= alpha}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCut {
    pub alpha: f64,
    pub set: CutSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CutSet {
    Intervals(Vec<Interval>),
    Labels(Vec<usize>),
}

impl AlphaCut {
    pub fn intervals(&self) -> &[Interval] {
        match &self.set {
            CutSet::Intervals(v) => v,
            CutSet::Labels(_) => &[],
        }
    }
}

pub fn alpha_cut(contour: &PossibilityContour, alpha: f64) -> Result<AlphaCut> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(Error::Argument(format!("alpha {alpha} outside [0,1]")));
    }
    if let SpaceDescriptor::Finite(labels) = contour.domain() {
        let keep = (0..labels.len()).filter(|&i| contour.at(i as f64) >= alpha).collect();
        return Ok(AlphaCut { alpha, set: CutSet::Labels(keep) });
    }
    let dom = contour.interval_domain()?;
    if alpha == 0.0 {
        return Ok(AlphaCut { alpha, set: CutSet::Intervals(vec![dom]) });
    }
    let set = match contour.shape() {
        Shape::Unimodal => {
            let m = contour.mode().ok_or_else(|| {
                Error::Configuration("unimodal α-cut needs a mode hint".into())
            })?;
            unimodal_level_set(contour, &dom, m, |v| v >= alpha)
        }
        Shape::Monotone => monotone_level_set(contour, &dom, |v| v >= alpha),
        Shape::General => {
            return Err(Error::Unsupported(
                "α-cuts of general-shape contours on continuous domains; scan with eval_possibility".into(),
            ))
        }
    };
    Ok(AlphaCut { alpha, set: CutSet::Intervals(set) })
}

/// Find where a side of a unimodal contour leaves the level set defined by `keep`.
fn unimodal_side<P: Fn(f64) -> bool>(
    contour: &PossibilityContour,
    dom: &Interval,
    mode: f64,
    side: Side,
    keep: &P,
) -> (f64, bool) {
    let (bound, bound_closed, dir) = match side {
        Side::Lower => (dom.lo, dom.lo_closed, -1.0),
        Side::Upper => (dom.hi, dom.hi_closed, 1.0),
    };
    let limit = if bound.is_finite() { contour.at(bound) } else { contour.tail_limit(side) };
    if keep(limit) {
        return (bound, bound_closed);
    }
    let mut step = mode.abs().max(1.0) * 1e-3;
    let mut inside = mode;
    let outside;
    loop {
        let probe = mode + dir * step;
        let beyond = if dir > 0.0 { probe >= bound } else { probe <= bound };
        if beyond {
            outside = bound;
            break;
        }
        if !keep(contour.at(probe)) {
            outside = probe;
            break;
        }
        inside = probe;
        if step > 4.0 * contour.horizon() {
            // limit says it drops eventually but the contour is still inside here
            return (if dir > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }, false);
        }
        step *= 2.0;
    }
    let x = bisect_boundary(|x| keep(contour.at(x)), inside, outside, ENDPOINT_TOL);
    (x, true)
}

pub(crate) fn unimodal_level_set<P: Fn(f64) -> bool>(
    contour: &PossibilityContour,
    dom: &Interval,
    mode: f64,
    keep: P,
) -> Vec<Interval> {
    if !keep(contour.at(mode)) {
        return Vec::new();
    }
    let (lo, lo_closed) = unimodal_side(contour, dom, mode, Side::Lower, &keep);
    let (hi, hi_closed) = unimodal_side(contour, dom, mode, Side::Upper, &keep);
    vec![Interval::new(lo, hi, lo_closed, hi_closed)]
}

pub(crate) fn monotone_level_set<P: Fn(f64) -> bool>(
    contour: &PossibilityContour,
    dom: &Interval,
    keep: P,
) -> Vec<Interval> {
    let lower = contour.limit_at(dom.lo);
    let upper = contour.limit_at(dom.hi);
    // a monotone contour is unimodal with the mode at the higher end
    let increasing = upper >= lower;
    let end = if increasing { dom.hi } else { dom.lo };
    if !keep(contour.limit_at(end)) {
        return Vec::new();
    }
    let anchor = if end.is_finite() {
        end
    } else {
        let mut x = if increasing { dom.lo.max(0.0) } else { dom.hi.min(0.0) };
        if !x.is_finite() {
            x = 0.0;
        }
        let mut step = 1.0;
        while !keep(contour.at(x)) && step < 4.0 * contour.horizon() {
            x += if increasing { step } else { -step };
            step *= 2.0;
        }
        x
    };
    if !keep(contour.at(anchor)) {
        let full = if increasing { Interval::new(anchor, dom.hi, false, false) } else { Interval::new(dom.lo, anchor, false, false) };
        return vec![full];
    }
    let side = if increasing { Side::Lower } else { Side::Upper };
    let (edge, closed) = unimodal_side(contour, dom, anchor, side, &keep);
    if increasing {
        vec![Interval::new(edge, dom.hi, closed, dom.hi_closed)]
    } else {
        vec![Interval::new(dom.lo, edge, dom.lo_closed, closed)]
    }
}

/// Level set of an arbitrary continuous 1-D contour by grid scan plus
/// bisection at every crossing.
pub fn level_set_scan<P: Fn(f64) -> bool>(
    contour: &PossibilityContour,
    keep: P,
) -> Result<Vec<Interval>> {
    let dom = contour.interval_domain()?;
    let scale = [dom.lo, dom.hi, contour.mode().unwrap_or(0.0)]
        .iter()
        .filter(|x| x.is_finite())
        .fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let map = interval_map(&dom, scale);
    let n = 4 * SCAN_POINTS;
    let xs: Vec<f64> = (0..=n).map(|k| map(k as f64 / n as f64)).collect();
    let inside: Vec<bool> = xs.iter().map(|&x| keep(contour.limit_at(x))).collect();
    let mut out = Vec::new();
    let mut start: Option<(f64, bool)> = None;
    for k in 0..=n {
        match (inside[k], start) {
            (true, None) => {
                if k == 0 {
                    start = Some((dom.lo, dom.lo_closed));
                } else {
                    let e = bisect_boundary(|x| keep(contour.at(x)), xs[k], xs[k - 1], ENDPOINT_TOL);
                    start = Some((e, true));
                }
            }
            (false, Some((s, sc))) => {
                let e = bisect_boundary(|x| keep(contour.at(x)), xs[k - 1], xs[k], ENDPOINT_TOL);
                out.push(Interval::new(s, e, sc, true));
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, sc)) = start {
        out.push(Interval::new(s, dom.hi, sc, dom.hi_closed));
    }
    Ok(out)
}

/// A contour tabulated on a grid with linear interpolation in between.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedContour {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedContour {
    pub fn from_contour(contour: &PossibilityContour, grid: &[f64]) -> Self {
        let mut xs = grid.to_vec();
        xs.sort_by(f64::total_cmp);
        let values = xs.iter().map(|&x| contour.at(x)).collect();
        TabulatedContour { xs, values }
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&g| g < x);
        if k == 0 {
            return if x == self.xs[0] { self.values[0] } else { 0.0 };
        }
        if k == self.xs.len() {
            return 0.0;
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let w = (x - x0) / (x1 - x0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    pub fn into_contour(self) -> PossibilityContour {
        let lo = self.xs[0];
        let hi = *self.xs.last().expect("non-empty grid");
        let table = Arc::new(self);
        PossibilityContour::from_fn(SpaceDescriptor::Interval(Interval::closed(lo, hi)), move |x| {
            table.interpolate(x)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ConstructionMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

fn reject_constant_density(dist: &dyn AuxiliaryDistribution) -> Result<()> {
    if let Some(dom) = dist.support().as_interval() {
        if dom.is_bounded() {
            let probes: Vec<f64> =
                (1..=17).map(|k| dist.density1(dom.lo + (dom.hi - dom.lo) * k as f64 / 18.0)).collect();
            if probes.iter().all(|&d| (d - probes[0]).abs() <= 1e-12 * probes[0].abs().max(1.0)) {
                return Err(Error::Unsupported(format!(
                    "{} has a constant density, so maximum specificity is not unique; use build_triangular",
                    dist.name()
                )));
            }
        }
    }
    Ok(())
}

/// The maximum-specificity contour `π(u) = P{f(U) < f(u)}`.
pub fn build_max_specificity(
    dist: Arc<dyn AuxiliaryDistribution>,
    method: ConstructionMethod,
    budget: usize,
    seed: u64,
) -> Result<PossibilityContour> {
    reject_constant_density(dist.as_ref())?;
    match method {
        ConstructionMethod::ClosedForm => {
            let center = dist.symmetry_center().ok_or_else(|| {
                Error::Configuration("closed form needs a symmetric unimodal density".into())
            })?;
            if dist.cdf(center).is_none() {
                return Err(Error::Configuration("closed form needs a CDF".into()));
            }
            let dom = dist.support();
            let d = Arc::clone(&dist);
            Ok(PossibilityContour::from_fn(dom, move |u| {
                let tail = 1.0 - d.cdf(center + (u - center).abs()).expect("checked above");
                (2.0 * tail).clamp(0.0, 1.0)
            })
            .with_mode(center)
            .with_shape(Shape::Unimodal)
            .with_tails(TailLimits { lower: Some(0.0), upper: Some(0.0) }))
        }
        ConstructionMethod::Quadrature => {
            let dom = dist
                .support()
                .as_interval()
                .ok_or_else(|| Error::Configuration("quadrature needs a 1-D density".into()))?;
            let mode = dist
                .mode()
                .ok_or_else(|| Error::Configuration("quadrature needs the density mode".into()))?;
            let d = Arc::clone(&dist);
            let f = move |u: f64| level_set_probability(d.as_ref(), &dom, mode, u);
            Ok(PossibilityContour::from_fn(SpaceDescriptor::Interval(dom), f)
                .with_mode(mode)
                .with_shape(Shape::Unimodal))
        }
        ConstructionMethod::MonteCarlo => {
            let d = Arc::clone(&dist);
            let rank: RankFn = Arc::new(move |u: &[f64]| d.density(u));
            let contour = build_ranked(dist, rank, budget, seed)?;
            Ok(contour)
        }
    }
}

/// `P{f(U) < f(u)}` for a unimodal 1-D density by root finding plus tail quadrature.
fn level_set_probability(dist: &dyn AuxiliaryDistribution, dom: &Interval, mode: f64, u: f64) -> f64 {
    if !dom.contains(u) && !(u == dom.lo || u == dom.hi) {
        return 0.0;
    }
    let level = dist.density1(u);
    if level >= dist.density1(mode) {
        return 1.0;
    }
    let below = |w: f64| dist.density1(w) < level;
    // other root: walk away from the mode on the opposite side of u
    let other = {
        let dir = if u < mode { 1.0 } else { -1.0 };
        let bound = if dir > 0.0 { dom.hi } else { dom.lo };
        let mut step = (u - mode).abs().max(1e-3);
        let mut inside = mode;
        let mut outside = f64::NAN;
        for _ in 0..2000 {
            let probe = mode + dir * step;
            if (dir > 0.0 && probe >= bound) || (dir < 0.0 && probe <= bound) {
                outside = bound;
                break;
            }
            if below(probe) {
                outside = probe;
                break;
            }
            inside = probe;
            step *= 2.0;
        }
        if outside.is_nan() {
            bound
        } else {
            bisect_boundary(|w| !below(w), inside, outside, 1e-12 * (1.0 + inside.abs()))
        }
    };
    let (left, right) = if u < mode { (u, other) } else { (other, u) };
    let dens = |w: f64| dist.density1(w);
    let lower_tail = integrate_mapped(dens, dom.lo, left, 1e-13, 1e-11).unwrap_or(f64::NAN);
    let upper_tail = integrate_mapped(dens, right, dom.hi, 1e-13, 1e-11).unwrap_or(f64::NAN);
    (lower_tail + upper_tail).clamp(0.0, 1.0)
}

pub type RankFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// The ranked contour `π(u) = P{h(U) < h(u)}`, estimated from `budget` draws.
pub fn build_ranked(
    dist: Arc<dyn AuxiliaryDistribution>,
    rank: RankFn,
    budget: usize,
    seed: u64,
) -> Result<PossibilityContour> {
    if budget == 0 {
        return Err(Error::Argument("Monte Carlo budget must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    let mut values = Vec::with_capacity(budget);
    for _ in 0..budget {
        let u = dist.sample(&mut rng).ok_or_else(|| {
            Error::Configuration(format!("{} has no sampler for Monte Carlo construction", dist.name()))
        })?;
        let h = rank(&u);
        if !h.is_finite() {
            return Err(Error::Numeric(format!("rank function is {h} at sampled point {u:?}")));
        }
        values.push(h);
    }
    values.sort_by(f64::total_cmp);
    let top = *values.last().expect("budget > 0");
    let below_top = values.partition_point(|&v| v < top);
    let sup_est = below_top as f64 / budget as f64;
    let deficit = if sup_est < 1.0 - 1.0 / budget as f64 - 1e-12 { Some(1.0 - sup_est) } else { None };
    let table = Arc::new(values);
    let n = budget as f64;
    let r = Arc::clone(&rank);
    let eval: ContourFn = Arc::new(move |u: &[f64]| {
        let h = r(u);
        table.partition_point(|&v| v < h) as f64 / n
    });
    Ok(PossibilityContour::new(dist.support(), eval)
        .with_monte_carlo(MonteCarloMeta { budget })
        .with_sup_deficit(deficit))
}

/// Root of `π(u) = alpha` on the side of the mode given by `side`, for
/// contours known in closed form. Used by tests and by region extraction.
pub fn invert_unimodal(contour: &PossibilityContour, alpha: f64, side: Side) -> Result<f64> {
    let m = contour
        .mode()
        .ok_or_else(|| Error::Configuration("inversion needs a mode hint".into()))?;
    let dir = if side == Side::Upper { 1.0 } else { -1.0 };
    let mut far = m + dir;
    let mut step = 1.0;
    while contour.at(far) > alpha {
        step *= 2.0;
        far = m + dir * step;
        if step > 1e12 {
            return Err(Error::Numeric("contour never drops below alpha".into()));
        }
    }
    bisect(|x| contour.at(x) - alpha, m, far, 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auxiliary::{Cauchy, Normal, StandardNormalProduct, Uniform};
    use approx::assert_abs_diff_eq;

    fn tri() -> PossibilityContour {
        build_triangular()
    }

    fn iv(a: f64, b: f64) -> SetDescriptor {
        SetDescriptor::interval(Interval::closed(a, b))
    }

    #[test]
    fn triangular_values() {
        let t = tri();
        assert_eq!(t.at(0.5), 1.0);
        assert_eq!(t.at(0.0), 0.0);
        assert_eq!(t.at(1.0), 0.0);
        assert_eq!(t.at(0.25), 0.5);
        t.check_invariants(&(0..=100).map(|k| k as f64 / 100.0).collect::<Vec<_>>()).unwrap();
    }

    #[test]
    fn possibility_examples() {
        let t = tri();
        assert_eq!(eval_possibility(&t, &SetDescriptor::Empty).unwrap(), 0.0);
        assert_eq!(eval_possibility(&t, &iv(0.4, 0.6)).unwrap(), 1.0);
        assert_abs_diff_eq!(eval_possibility(&t, &iv(0.0, 0.1)).unwrap(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn necessity_examples() {
        let t = tri();
        assert_eq!(necessity_of(&t, &iv(0.0, 1.0)).unwrap(), 1.0);
        assert_abs_diff_eq!(necessity_of(&t, &iv(0.25, 0.75)).unwrap(), 0.5, epsilon = 1e-12);
        assert_eq!(necessity_of(&t, &iv(0.0, 0.1)).unwrap(), 0.0);
    }

    #[test]
    fn set_outside_domain_is_a_domain_error() {
        let err = eval_possibility(&tri(), &iv(0.5, 2.0)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn general_shape_sup_matches_unimodal_shortcut() {
        let t = tri();
        let g = PossibilityContour::from_fn(SpaceDescriptor::unit_interval(), |u| 1.0 - (2.0 * u - 1.0).abs());
        for (a, b) in [(0.0, 0.1), (0.3, 0.45), (0.2, 0.9), (0.7, 1.0)] {
            let exact = eval_possibility(&t, &iv(a, b)).unwrap();
            let scanned = eval_possibility(&g, &iv(a, b)).unwrap();
            assert_abs_diff_eq!(exact, scanned, epsilon = 1e-6);
        }
    }

    #[test]
    fn max_specificity_normal_and_cauchy() {
        let n = build_max_specificity(Arc::new(Normal::standard()), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        assert_eq!(n.at(0.0), 1.0);
        // oracle: 2(1 - Φ(1.96)) with Φ from erfc
        let oracle = statrs::function::erf::erfc(1.96 / std::f64::consts::SQRT_2);
        assert_abs_diff_eq!(n.at(1.96), oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(n.at(1.96), 0.0500, epsilon = 1e-4);
        let c = build_max_specificity(Arc::new(Cauchy::standard()), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        assert_eq!(c.at(1.0), 0.5);
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let d: Arc<dyn AuxiliaryDistribution> = Arc::new(Normal::standard());
        let closed = build_max_specificity(Arc::clone(&d), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        let quad = build_max_specificity(d, ConstructionMethod::Quadrature, 0, 0).unwrap();
        for k in -40..=40 {
            let u = k as f64 / 10.0;
            assert_abs_diff_eq!(closed.at(u), quad.at(u), epsilon = 1e-9);
        }
        let d: Arc<dyn AuxiliaryDistribution> = Arc::new(Cauchy::standard());
        let quad = build_max_specificity(d, ConstructionMethod::Quadrature, 0, 0).unwrap();
        assert_abs_diff_eq!(quad.at(1.0), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn constant_density_is_rejected() {
        let err = build_max_specificity(Arc::new(Uniform::unit()), ConstructionMethod::MonteCarlo, 100, 1)
            .unwrap_err();
        assert!(matches!(err, Error::Unsupported(ref m) if m.contains("build_triangular")));
    }

    #[test]
    fn missing_sampler_is_configuration_error() {
        let d = crate::auxiliary::DensityOnly {
            label: "no-sampler".into(),
            support: SpaceDescriptor::real_line(),
            density: |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            mode: Some(0.0),
        };
        let err = build_max_specificity(Arc::new(d), ConstructionMethod::MonteCarlo, 10, 1).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn ranked_contour_examples() {
        let constant: RankFn = Arc::new(|_u: &[f64]| 1.0);
        let c = build_ranked(Arc::new(Normal::standard()), constant, 1000, 3).unwrap();
        assert_eq!(c.at(0.3), 0.0);
        assert!(c.sup_deficit().is_some());

        let ident: RankFn = Arc::new(|u: &[f64]| u[0]);
        let budget = 100_000;
        let c = build_ranked(Arc::new(Uniform::unit()), ident, budget, 5).unwrap();
        let se = (0.3_f64 * 0.7 / budget as f64).sqrt();
        assert!((c.at(0.3) - 0.3).abs() < 3.0 * se);
        assert!((c.mc_standard_error(&[0.3]) - se).abs() < 1e-4);

        let nan: RankFn = Arc::new(|_u: &[f64]| f64::NAN);
        assert!(matches!(build_ranked(Arc::new(Uniform::unit()), nan, 10, 1), Err(Error::Numeric(_))));
    }

    #[test]
    fn ranked_by_density_matches_closed_form() {
        let d: Arc<dyn AuxiliaryDistribution> = Arc::new(Normal::standard());
        let closed = build_max_specificity(Arc::clone(&d), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        let budget = 50_000;
        let dd = Arc::clone(&d);
        let rank: RankFn = Arc::new(move |u: &[f64]| dd.density(u));
        let mc = build_ranked(d, rank, budget, 11).unwrap();
        for k in -30..=30 {
            let u = k as f64 / 10.0;
            let p = closed.at(u);
            let se = (p * (1.0 - p) / budget as f64).sqrt().max(1.0 / budget as f64);
            assert!((mc.at(u) - p).abs() <= 2.0 * se + 1e-12 || (mc.at(u) - p).abs() <= 3.0 * se, "u={u}");
        }
    }

    #[test]
    fn monte_carlo_works_in_two_dimensions() {
        let d: Arc<dyn AuxiliaryDistribution> = Arc::new(StandardNormalProduct { dim: 2 });
        let c = build_max_specificity(d, ConstructionMethod::MonteCarlo, 40_000, 2).unwrap();
        // P{|Z|^2 > r^2} = exp(-r^2/2) for a 2-D standard normal
        let u = [1.0, 1.0];
        let exact = (-1.0_f64).exp();
        assert!((c.eval(&u) - exact).abs() < 4.0 * (exact * (1.0 - exact) / 40_000.0).sqrt());
    }

    #[test]
    fn alpha_cut_examples() {
        let t = tri();
        let cut = alpha_cut(&t, 0.5).unwrap();
        let i = cut.intervals()[0];
        assert_abs_diff_eq!(i.lo, 0.25, epsilon = 1e-8);
        assert_abs_diff_eq!(i.hi, 0.75, epsilon = 1e-8);
        let whole = alpha_cut(&t, 0.0).unwrap();
        assert_eq!(whole.intervals(), &[Interval::closed(0.0, 1.0)]);
        assert!(matches!(alpha_cut(&t, 1.5), Err(Error::Argument(_))));

        let n = build_max_specificity(Arc::new(Normal::standard()), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        let cut = alpha_cut(&n, 0.05).unwrap();
        let oracle = invert_unimodal(&n, 0.05, Side::Upper).unwrap();
        let i = cut.intervals()[0];
        assert_abs_diff_eq!(i.hi, oracle, epsilon = 1e-7);
        assert_abs_diff_eq!(i.lo, -1.96, epsilon = 1e-3);
        assert_abs_diff_eq!(i.hi, 1.96, epsilon = 1e-3);

        let g = PossibilityContour::from_fn(SpaceDescriptor::real_line(), |x| (-x * x).exp());
        assert!(matches!(alpha_cut(&g, 0.5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn alpha_cut_with_nonvanishing_tail_is_unbounded() {
        let c = PossibilityContour::from_fn(SpaceDescriptor::real_line(), |x| {
            if x <= 0.0 { (-x * x).exp() } else { 0.3 + 0.7 * (-x * x).exp() }
        })
        .with_mode(0.0)
        .with_shape(Shape::Unimodal)
        .with_tails(TailLimits { lower: Some(0.0), upper: Some(0.3) });
        let cut = alpha_cut(&c, 0.2).unwrap();
        let i = cut.intervals()[0];
        assert!(i.hi.is_infinite() && i.lo.is_finite());
        let cut = alpha_cut(&c, 0.4).unwrap();
        assert!(cut.intervals()[0].is_bounded());
    }

    #[test]
    fn finite_domain_cut_and_sup() {
        let labels = vec!["a".to_string(), "b".into(), "c".into()];
        let vals = [1.0, 0.6, 0.3];
        let c = PossibilityContour::from_fn(SpaceDescriptor::Finite(labels), move |i| vals[i as usize]);
        let cut = alpha_cut(&c, 0.5).unwrap();
        assert_eq!(cut.set, CutSet::Labels(vec![0, 1]));
        assert_eq!(eval_possibility(&c, &SetDescriptor::Points(vec![1.0, 2.0])).unwrap(), 0.6);
        assert_abs_diff_eq!(necessity_of(&c, &SetDescriptor::Points(vec![0.0])).unwrap(), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn level_scan_finds_two_components() {
        let c = PossibilityContour::from_fn(SpaceDescriptor::Interval(Interval::closed(-3.0, 3.0)), |x| {
            (-(x - 1.5f64).powi(2) * 4.0).exp().max((-(x + 1.5f64).powi(2) * 4.0).exp())
        });
        let set = level_set_scan(&c, |v| v > 0.5).unwrap();
        assert_eq!(set.len(), 2);
        let half = (0.5f64.ln() / -4.0).sqrt();
        assert_abs_diff_eq!(set[1].lo, 1.5 - half, epsilon = 1e-7);
        assert_abs_diff_eq!(set[0].hi, -1.5 + half, epsilon = 1e-7);
    }

    #[test]
    fn tabulation_interpolates() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let tab = TabulatedContour::from_contour(&tri(), &grid);
        assert_abs_diff_eq!(tab.interpolate(0.25), 0.5, epsilon = 1e-12);
        let c = tab.into_contour();
        assert_abs_diff_eq!(c.at(0.55), 0.9, epsilon = 1e-12);
    }
}
