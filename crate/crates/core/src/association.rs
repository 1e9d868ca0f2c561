//! Propagation of an auxiliary-space contour through an association into a
//! posterior possibility contour on the parameter, and the regions and tests
//! derived from it.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::auxiliary::AuxiliaryDistribution;
use crate::error::{Error, Result};
use crate::possibility::{
    eval_possibility, level_set_scan, monotone_level_set, necessity_of, unimodal_level_set, ContourFn,
    PossibilityContour, Shape, TailLimits,
};
use crate::space::{Interval, SetDescriptor, SpaceDescriptor};

/// The relation `a(y, θ, u) = 0` linking data, a scalar parameter and the auxiliary variable.
pub trait Association: Send + Sync {
    fn aux(&self) -> Arc<dyn AuxiliaryDistribution>;

    fn param_domain(&self) -> Interval;

    /// All `u` with `a(y, θ, u) = 0`; empty when no auxiliary value is compatible.
    fn solve_u(&self, y: &[f64], theta: f64) -> Vec<Vec<f64>>;

    fn solve_theta(&self, _y: &[f64], _u: &[f64]) -> Option<f64> {
        None
    }

    /// Data generated by parameter `theta` and auxiliary value `u`.
    fn simulate(&self, theta: f64, u: &[f64]) -> Vec<f64>;

    /// Shape information for the posterior contour at data `y`.
    fn posterior_hints(&self, _y: &[f64]) -> ContourHints {
        ContourHints::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourHints {
    pub shape: Shape,
    pub mode: Option<f64>,
    pub tails: TailLimits,
}

impl Default for ContourHints {
    fn default() -> Self {
        ContourHints { shape: Shape::General, mode: None, tails: TailLimits::default() }
    }
}

/// A posterior possibility contour `ϑ ↦ sup{π(u) : u ∈ solve_u(y, ϑ)}`.
#[derive(Clone)]
pub struct PosteriorContour {
    y: Vec<f64>,
    contour: PossibilityContour,
    base: Option<PossibilityContour>,
    assoc: Option<Arc<dyn Association>>,
    empty_solutions: Arc<AtomicU64>,
}

impl fmt::Debug for PosteriorContour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PosteriorContour")
            .field("y", &self.y)
            .field("contour", &self.contour)
            .field("empty_solutions", &self.empty_solution_count())
            .finish()
    }
}

impl PosteriorContour {
    /// Wrap a closed-form contour on the parameter space.
    pub fn from_parts(
        y: Vec<f64>,
        contour: PossibilityContour,
        base: Option<PossibilityContour>,
        assoc: Option<Arc<dyn Association>>,
    ) -> Self {
        PosteriorContour { y, contour, base, assoc, empty_solutions: Arc::new(AtomicU64::new(0)) }
    }

    pub(crate) fn with_counter(mut self, counter: Arc<AtomicU64>) -> Self {
        self.empty_solutions = counter;
        self
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.contour.at(theta)
    }

    pub fn contour(&self) -> &PossibilityContour {
        &self.contour
    }

    pub fn base(&self) -> Option<&PossibilityContour> {
        self.base.as_ref()
    }

    pub fn association(&self) -> Option<&Arc<dyn Association>> {
        self.assoc.as_ref()
    }

    pub fn param_domain(&self) -> Interval {
        self.contour.domain().as_interval().unwrap_or_else(Interval::real_line)
    }

    /// Number of evaluations so far at which `solve_u` was empty.
    pub fn empty_solution_count(&self) -> u64 {
        self.empty_solutions.load(Ordering::Relaxed)
    }
}

/// Generic C-step: push `base` through `assoc` at data `y`.
pub fn posterior_contour(assoc: Arc<dyn Association>, y: &[f64], base: PossibilityContour) -> PosteriorContour {
    let counter = Arc::new(AtomicU64::new(0));
    let hints = assoc.posterior_hints(y);
    let dom = assoc.param_domain();
    let y_owned = y.to_vec();
    let a = Arc::clone(&assoc);
    let b = base.clone();
    let c = Arc::clone(&counter);
    let eval: ContourFn = Arc::new(move |theta: &[f64]| {
        let sols = a.solve_u(&y_owned, theta[0]);
        if sols.is_empty() {
            c.fetch_add(1, Ordering::Relaxed);
            return 0.0;
        }
        sols.iter().map(|u| b.eval(u)).fold(0.0, f64::max)
    });
    let mut contour = PossibilityContour::new(SpaceDescriptor::Interval(dom), eval)
        .with_shape(hints.shape)
        .with_tails(hints.tails);
    if let Some(m) = hints.mode {
        contour = contour.with_mode(m);
    }
    PosteriorContour::from_parts(y.to_vec(), contour, Some(base), Some(assoc)).with_counter(counter)
}

pub fn posterior_possibility(post: &PosteriorContour, set: &SetDescriptor) -> Result<f64> {
    eval_possibility(post.contour(), set)
}

pub fn posterior_necessity(post: &PosteriorContour, set: &SetDescriptor) -> Result<f64> {
    necessity_of(post.contour(), set)
}

/// `{ϑ : π_y(ϑ) > α}` as sorted disjoint intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlausibilityRegion {
    pub alpha: f64,
    pub intervals: Vec<Interval>,
}

impl PlausibilityRegion {
    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|i| i.lo <= theta && theta <= i.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    /// Total length; infinite when any piece is unbounded.
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::length).sum()
    }

    pub fn lower(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn upper(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.hi)
    }
}

pub fn plausibility_region(post: &PosteriorContour, alpha: f64) -> Result<PlausibilityRegion> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha {alpha} outside (0,1)")));
    }
    let c = post.contour();
    let dom = post.param_domain();
    let keep = |v: f64| v > alpha;
    let intervals = match (c.shape(), c.mode()) {
        (Shape::Unimodal, Some(m)) => unimodal_level_set(c, &dom, m, keep),
        (Shape::Monotone, _) => monotone_level_set(c, &dom, keep),
        _ => level_set_scan(c, keep)?,
    };
    let intervals = intervals
        .into_iter()
        .map(|i| Interval::new(i.lo, i.hi, i.lo_closed && i.lo == dom.lo, i.hi_closed && i.hi == dom.hi))
        .collect();
    Ok(PlausibilityRegion { alpha, intervals })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Reject,
    Retain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestOutcome {
    pub decision: Decision,
    pub attained: f64,
}

/// Reject the hypothesis `θ ∈ A` when its posterior possibility is at most `α`.
pub fn hypothesis_test(post: &PosteriorContour, set: &SetDescriptor, alpha: f64) -> Result<TestOutcome> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Argument(format!("alpha {alpha} outside (0,1)")));
    }
    let attained = posterior_possibility(post, set)?;
    let decision = if attained <= alpha { Decision::Reject } else { Decision::Retain };
    Ok(TestOutcome { decision, attained })
}

/// Round trip `solve_u(simulate(ϑ, u), ϑ) ∋ u` for draws from the auxiliary distribution.
pub fn check_round_trip(
    assoc: &dyn Association,
    thetas: &[f64],
    draws: usize,
    rng: &mut dyn RngCore,
) -> Result<()> {
    let aux = assoc.aux();
    for _ in 0..draws {
        let u = aux
            .sample(rng)
            .ok_or_else(|| Error::Configuration("auxiliary distribution has no sampler".into()))?;
        for &theta in thetas {
            let y = assoc.simulate(theta, &u);
            let back = assoc.solve_u(&y, theta);
            let hit = back
                .iter()
                .any(|b| b.iter().zip(&u).all(|(x, z)| (x - z).abs() <= 1e-8 * (1.0 + z.abs())));
            if !hit {
                return Err(Error::Numeric(format!(
                    "round trip failed at theta={theta}, u={u:?}: got {back:?}"
                )));
            }
        }
    }
    Ok(())
}

/// Every auxiliary grid point is reached by some parameter value at data `y`.
pub fn check_coverage_assumption(assoc: &dyn Association, y: &[f64], u_grid: &[f64]) -> Result<()> {
    let dom = assoc.param_domain();
    for &u in u_grid {
        let theta = assoc
            .solve_theta(y, &[u])
            .ok_or_else(|| Error::Unsupported("coverage check needs solve_theta".into()))?;
        let ok = dom.contains(theta)
            && assoc
                .solve_u(y, theta)
                .iter()
                .any(|s| (s[0] - u).abs() <= 1e-8 * (1.0 + u.abs()));
        if !ok {
            return Err(Error::Domain(format!("auxiliary value {u} is not reachable at y={y:?}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::possibility::build_triangular;

    /// `y = ϑ + u - 1/2` with `u ∈ [0, 1]`: the location-shift identity association.
    struct Shift;

    impl Association for Shift {
        fn aux(&self) -> Arc<dyn AuxiliaryDistribution> {
            Arc::new(crate::auxiliary::Uniform::unit())
        }
        fn param_domain(&self) -> Interval {
            Interval::real_line()
        }
        fn solve_u(&self, y: &[f64], theta: f64) -> Vec<Vec<f64>> {
            let u = y[0] - theta + 0.5;
            if (0.0..=1.0).contains(&u) { vec![vec![u]] } else { Vec::new() }
        }
        fn solve_theta(&self, y: &[f64], u: &[f64]) -> Option<f64> {
            Some(y[0] - u[0] + 0.5)
        }
        fn simulate(&self, theta: f64, u: &[f64]) -> Vec<f64> {
            vec![theta + u[0] - 0.5]
        }
        fn posterior_hints(&self, y: &[f64]) -> ContourHints {
            ContourHints { shape: Shape::Unimodal, mode: Some(y[0]), tails: TailLimits { lower: Some(0.0), upper: Some(0.0) } }
        }
    }

    #[test]
    fn shift_association_peaks_at_data() {
        let post = posterior_contour(Arc::new(Shift), &[0.25], build_triangular());
        assert_eq!(post.eval(0.25), 1.0);
        for t in [-0.1, 0.0, 0.1, 0.4, 0.6] {
            let expect = 1.0 - (2.0 * (0.25 - t + 0.5) - 1.0f64).abs();
            assert!((post.eval(t) - expect.max(0.0)).abs() < 1e-12);
        }
        assert_eq!(post.empty_solution_count(), 0);
        assert_eq!(post.eval(5.0), 0.0);
        assert_eq!(post.empty_solution_count(), 1);
    }

    #[test]
    fn shift_round_trip_and_coverage() {
        let mut rng = crate::rng::substream(1, 0);
        check_round_trip(&Shift, &[-1.0, 0.0, 2.5], 200, &mut rng).unwrap();
        let grid: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
        check_coverage_assumption(&Shift, &[0.3], &grid).unwrap();
    }

    #[test]
    fn region_and_test_on_shift() {
        let post = posterior_contour(Arc::new(Shift), &[0.0], build_triangular());
        let r = plausibility_region(&post, 0.5).unwrap();
        assert!((r.lower().unwrap() + 0.25).abs() < 1e-8 && (r.upper().unwrap() - 0.25).abs() < 1e-8);
        assert!(plausibility_region(&post, 0.0).is_err());
        assert!(plausibility_region(&post, 1.0).is_err());
        let all = SetDescriptor::interval(Interval::real_line());
        let t = hypothesis_test(&post, &all, 0.3).unwrap();
        assert_eq!(t.decision, Decision::Retain);
        assert_eq!(t.attained, 1.0);
    }
}
