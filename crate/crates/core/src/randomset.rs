//! Nested random sets `S = {u : h(u) >= h(Ũ)}`, `Ũ ~ P_U`, and their
//! hitting probabilities and plausibilities, computed from thresholds only.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::association::Association;
use crate::auxiliary::AuxiliaryDistribution;
use crate::error::{Error, Result};
use crate::numerics::bisect_boundary;
use crate::possibility::{sup_on_interval, ContourFn, PossibilityContour, RankFn, ENDPOINT_TOL};
use crate::rng::substream;
use crate::space::{Interval, SetDescriptor, SpaceDescriptor};

#[derive(Clone)]
pub struct NestedRandomSetSampler {
    dist: Arc<dyn AuxiliaryDistribution>,
    rank: RankFn,
    mode: Option<f64>,
}

impl fmt::Debug for NestedRandomSetSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NestedRandomSetSampler").field("dist", &self.dist.name()).field("mode", &self.mode).finish()
    }
}

/// One realized set, represented by its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NestedSetDraw {
    pub threshold: f64,
    /// Explicit endpoints for unimodal 1-D ranks.
    pub interval: Option<Interval>,
}

impl NestedRandomSetSampler {
    /// Level sets of the density of `dist`.
    pub fn from_density(dist: Arc<dyn AuxiliaryDistribution>) -> Self {
        let d = Arc::clone(&dist);
        let mode = dist.mode();
        NestedRandomSetSampler { dist, rank: Arc::new(move |u: &[f64]| d.density(u)), mode }
    }

    /// Level sets of an arbitrary rank function, unimodal about `mode` if given.
    pub fn ranked(dist: Arc<dyn AuxiliaryDistribution>, rank: RankFn, mode: Option<f64>) -> Self {
        NestedRandomSetSampler { dist, rank, mode }
    }

    pub fn rank(&self, u: &[f64]) -> f64 {
        (self.rank)(u)
    }

    pub fn contains(&self, draw: &NestedSetDraw, u: &[f64]) -> bool {
        self.rank(u) >= draw.threshold
    }

    /// The set `{u : h(u) >= h(ũ)}`.
    pub fn set_for(&self, u_tilde: &[f64]) -> NestedSetDraw {
        let threshold = self.rank(u_tilde);
        let interval = match (self.mode, self.dist.support().as_interval()) {
            (Some(m), Some(dom)) => Some(self.level_interval(m, &dom, threshold)),
            _ => None,
        };
        NestedSetDraw { threshold, interval }
    }

    fn level_interval(&self, mode: f64, dom: &Interval, t: f64) -> Interval {
        let inside = |u: f64| self.rank(&[u]) >= t;
        let edge = |dir: f64| {
            let bound = if dir > 0.0 { dom.hi } else { dom.lo };
            let mut step = 1e-3;
            let mut last_in = mode;
            loop {
                let probe = mode + dir * step;
                if (dir > 0.0 && probe >= bound) || (dir < 0.0 && probe <= bound) {
                    return if bound.is_finite() && !inside(bound) {
                        bisect_boundary(inside, last_in, bound, ENDPOINT_TOL)
                    } else {
                        bound
                    };
                }
                if !inside(probe) {
                    return bisect_boundary(inside, last_in, probe, ENDPOINT_TOL);
                }
                last_in = probe;
                step *= 2.0;
                if step > 1e300 {
                    return bound;
                }
            }
        };
        Interval::closed(edge(-1.0), edge(1.0))
    }
}

pub fn sample_nested_set(sampler: &NestedRandomSetSampler, rng: &mut dyn RngCore) -> Result<NestedSetDraw> {
    let u = sampler
        .dist
        .sample(rng)
        .ok_or_else(|| Error::Configuration(format!("{} has no sampler", sampler.dist.name())))?;
    Ok(sampler.set_for(&u))
}

fn thresholds(sampler: &NestedRandomSetSampler, budget: usize, seed: u64) -> Result<Vec<f64>> {
    if budget == 0 {
        return Err(Error::Argument("budget must be positive".into()));
    }
    let mut rng = substream(seed, 0);
    (0..budget)
        .map(|_| {
            sampler
                .dist
                .sample(&mut rng)
                .map(|u| sampler.rank(&u))
                .ok_or_else(|| Error::Configuration(format!("{} has no sampler", sampler.dist.name())))
        })
        .collect()
}

/// `P(S ∋ u) = P{h(Ũ) <= h(u)}` from `budget` draws.
pub fn hitting_probability(sampler: &NestedRandomSetSampler, u: &[f64], budget: usize, seed: u64) -> Result<f64> {
    let level = sampler.rank(u);
    let t = thresholds(sampler, budget, seed)?;
    Ok(t.iter().filter(|&&x| x <= level).count() as f64 / budget as f64)
}

/// Hitting probabilities on a grid from one shared set of draws.
pub fn hitting_curve(sampler: &NestedRandomSetSampler, grid: &[f64], budget: usize, seed: u64) -> Result<Vec<f64>> {
    let mut t = thresholds(sampler, budget, seed)?;
    t.sort_by(f64::total_cmp);
    Ok(grid
        .iter()
        .map(|&u| {
            let level = sampler.rank(&[u]);
            t.partition_point(|&x| x <= level) as f64 / budget as f64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomSetEstimate {
    pub estimate: f64,
    pub mc_se: f64,
    /// Draws for which `Θ_y(S)` was empty.
    pub empty_count: usize,
    pub budget: usize,
}

/// `P{Θ_y(S) ∩ A ≠ ∅}`: per draw, whether `sup_{ϑ∈A} h(u_{y,ϑ}) >= t`.
pub fn randomset_plausibility(
    sampler: &NestedRandomSetSampler,
    assoc: Arc<dyn Association>,
    y: &[f64],
    set: &SetDescriptor,
    budget: usize,
    seed: u64,
) -> Result<RandomSetEstimate> {
    let dom = assoc.param_domain();
    set.check_within(&dom)?;
    let hints = assoc.posterior_hints(y);
    let y_owned = y.to_vec();
    let a = Arc::clone(&assoc);
    let s = sampler.clone();
    let eval: ContourFn = Arc::new(move |theta: &[f64]| {
        a.solve_u(&y_owned, theta[0]).iter().map(|u| s.rank(u)).fold(f64::NEG_INFINITY, f64::max)
    });
    let mut over_theta = PossibilityContour::new(SpaceDescriptor::Interval(dom), eval).with_shape(hints.shape);
    if let Some(m) = hints.mode {
        over_theta = over_theta.with_mode(m);
    }
    let sup_over = |target: &SetDescriptor| -> f64 {
        target.normalized().iter().map(|p| sup_on_interval(&over_theta, p)).fold(f64::NEG_INFINITY, f64::max)
    };
    let sup_a = sup_over(set);
    let sup_all = sup_over(&SetDescriptor::interval(dom));
    let t = thresholds(sampler, budget, seed)?;
    let hits = t.iter().filter(|&&x| sup_a >= x).count();
    let empty_count = t.iter().filter(|&&x| sup_all < x).count();
    let estimate = hits as f64 / budget as f64;
    Ok(RandomSetEstimate {
        estimate,
        mc_se: (estimate * (1.0 - estimate) / budget as f64).sqrt(),
        empty_count,
        budget,
    })
}
