//! Comparison methods: fiducial push-forwards and the flat-prior Bayes
//! marginal for the errors-in-variables model.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::association::Association;
use crate::auxiliary::{AuxiliaryDistribution, Exponential};
use crate::error::{Error, Result};
use crate::models::curved_normal::{ConditionalDensity, CurvedNormalModel, CurvedNormalReduction};
use crate::models::eiv::EivModel;
use crate::possibility::{ContourFn, MonteCarloMeta, PossibilityContour};
use crate::rng::substream;
use crate::space::{Interval, SetDescriptor, SpaceDescriptor};

const FD_STEP: f64 = 1e-6;

/// `|∂u_{y,ϑ}/∂ϑ|` by central differences; `None` when `solve_u` is empty nearby.
pub fn jacobian(assoc: &dyn Association, y: &[f64], theta: f64) -> Option<f64> {
    let e = FD_STEP * theta.abs().max(1.0);
    let up = assoc.solve_u(y, theta + e);
    let down = assoc.solve_u(y, theta - e);
    let (a, b) = (up.first()?, down.first()?);
    Some(((a[0] - b[0]) / (2.0 * e)).abs())
}

/// Fiducial density `f(u_{y,ϑ})·J_y(ϑ)` of the parameter.
fn fiducial_density(assoc: &dyn Association, aux: &dyn AuxiliaryDistribution, y: &[f64], theta: f64) -> Result<f64> {
    let sols = assoc.solve_u(y, theta);
    let Some(u) = sols.first() else { return Ok(0.0) };
    let Some(j) = jacobian(assoc, y, theta) else { return Ok(0.0) };
    if !j.is_finite() {
        return Err(Error::Numeric(format!("non-finite Jacobian at theta={theta}")));
    }
    Ok(aux.density(u) * j)
}

/// `ϑ ↦ P_U{q(θ_{y,U}) < q(ϑ)}` with `q` the fiducial density, from `budget` draws.
pub fn fiducial_contour(
    assoc: Arc<dyn Association>,
    y: &[f64],
    budget: usize,
    seed: u64,
) -> Result<PossibilityContour> {
    if budget == 0 {
        return Err(Error::Argument("budget must be positive".into()));
    }
    let aux = assoc.aux();
    let mut rng = substream(seed, 0);
    let mut q = Vec::with_capacity(budget);
    for _ in 0..budget {
        let u = aux
            .sample(&mut rng)
            .ok_or_else(|| Error::Configuration(format!("{} has no sampler", aux.name())))?;
        let theta = assoc
            .solve_theta(y, &u)
            .ok_or_else(|| Error::Unsupported("fiducial contour needs solve_theta".into()))?;
        q.push(fiducial_density(assoc.as_ref(), aux.as_ref(), y, theta)?);
    }
    q.sort_by(f64::total_cmp);
    let table = Arc::new(q);
    let y_owned = y.to_vec();
    let a = Arc::clone(&assoc);
    let n = budget as f64;
    let eval: ContourFn = Arc::new(move |theta: &[f64]| {
        let level = fiducial_density(a.as_ref(), a.aux().as_ref(), &y_owned, theta[0]).unwrap_or(f64::NAN);
        if level.is_nan() {
            return 0.0;
        }
        table.partition_point(|&v| v < level) as f64 / n
    });
    Ok(PossibilityContour::new(SpaceDescriptor::Interval(assoc.param_domain()), eval)
        .with_monte_carlo(MonteCarloMeta { budget }))
}

/// `P_U(θ_{y,U} >= ϑ)`, the fiducial probability of the half line `[ϑ, ∞)`.
pub fn fiducial_halfline_possibility(
    assoc: &dyn Association,
    y: &[f64],
    theta: f64,
    budget: usize,
    seed: u64,
) -> Result<f64> {
    let aux = assoc.aux();
    let mut rng = substream(seed, 0);
    // monotonicity of u ↦ θ_{y,u} on sorted auxiliary draws
    let mut probe: Vec<f64> = (0..257)
        .filter_map(|_| aux.sample(&mut rng).map(|u| u[0]))
        .collect();
    if probe.is_empty() {
        return Err(Error::Configuration(format!("{} has no sampler", aux.name())));
    }
    probe.sort_by(f64::total_cmp);
    let thetas: Vec<f64> = probe
        .iter()
        .map(|&u| assoc.solve_theta(y, &[u]).ok_or_else(|| Error::Unsupported("needs solve_theta".into())))
        .collect::<Result<_>>()?;
    let increasing = thetas.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = thetas.windows(2).all(|w| w[1] <= w[0]);
    if !increasing && !decreasing {
        return Err(Error::Unsupported("theta_{y,u} is not monotone in u".into()));
    }
    if theta == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    if theta == f64::INFINITY {
        return Ok(0.0);
    }
    if let (Some(u), true) = (assoc.solve_u(y, theta).first().cloned(), aux.cdf(0.0).is_some()) {
        let f = aux.cdf(u[0]).expect("checked");
        return Ok(if decreasing { f } else { 1.0 - f });
    }
    if budget == 0 {
        return Err(Error::Argument("budget must be positive".into()));
    }
    let mut hits = 0usize;
    for _ in 0..budget {
        let u = aux.sample(&mut rng).expect("sampler checked");
        if assoc.solve_theta(y, &u).is_some_and(|t| t >= theta) {
            hits += 1;
        }
    }
    Ok(hits as f64 / budget as f64)
}

/// Linear-interpolation sample quantile of sorted data.
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let k = pos.floor() as usize;
    let frac = pos - k as f64;
    if k + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[k] + frac * (sorted[k + 1] - sorted[k])
    }
}

/// Draws of `θ = y1 - y2·V`, `V ~ f_h`, sorted.
pub fn curved_normal_fiducial_draws(
    model: &CurvedNormalModel,
    reduction: &CurvedNormalReduction,
    budget: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    if budget < 2 {
        return Err(Error::Argument("budget must be at least 2".into()));
    }
    let density = ConditionalDensity::new(model, reduction.h)?;
    let mut draws: Vec<f64> = (0..budget)
        .map(|_| {
            let v = density.sample(rng).expect("conditional density has a sampler")[0];
            reduction.y1 - reduction.y2 * v
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    Ok(draws)
}

/// Equal-tailed `level` interval from the fiducial draws.
pub fn curved_normal_fiducial_interval(
    model: &CurvedNormalModel,
    reduction: &CurvedNormalReduction,
    level: f64,
    budget: usize,
    rng: &mut dyn RngCore,
) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!("level {level} outside (0,1)")));
    }
    let draws = curved_normal_fiducial_draws(model, reduction, budget, rng)?;
    let tail = 0.5 * (1.0 - level);
    Ok(Interval::closed(sample_quantile(&draws, tail), sample_quantile(&draws, 1.0 - tail)))
}

/// Handling of the positivity of `(θ1, θ2)` under the flat prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum BayesTruncation {
    /// Flat prior on all of `R²`.
    #[default]
    None,
    /// Flat prior restricted to `θ1, θ2 > 0` by rejection.
    PositiveQuadrant,
}

/// Flat-prior posterior probability of `{φ : pred(φ)}`, `φ = θ1/θ2`, with
/// `θ_i = y_i - E_i`, `E_i ~ Exp(λ_i)`.
pub fn eiv_flat_bayes_probability(
    model: &EivModel,
    pred: &dyn Fn(f64) -> bool,
    budget: usize,
    truncation: BayesTruncation,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    if budget == 0 {
        return Err(Error::Argument("budget must be positive".into()));
    }
    let e1 = Exp::new(model.lambda1).map_err(|e| Error::Argument(e.to_string()))?;
    let e2 = Exp::new(model.lambda2).map_err(|e| Error::Argument(e.to_string()))?;
    let mut accepted = 0usize;
    let mut hits = 0usize;
    for _ in 0..budget {
        let t1 = model.y1 - e1.sample(rng);
        let t2 = model.y2 - e2.sample(rng);
        if truncation == BayesTruncation::PositiveQuadrant && !(t1 > 0.0 && t2 > 0.0) {
            continue;
        }
        accepted += 1;
        if pred(t1 / t2) {
            hits += 1;
        }
    }
    if (accepted as f64) < 1e-4 * budget as f64 || accepted == 0 {
        return Err(Error::DegeneratePosterior(format!("acceptance rate {accepted}/{budget} below 1e-4")));
    }
    Ok(hits as f64 / accepted as f64)
}

pub type AssignFn = Arc<dyn Fn(&[f64], &SetDescriptor, &mut dyn RngCore) -> Result<f64> + Send + Sync>;

/// A data-dependent probability (or belief) assignment `A ↦ Q_y(A)`.
#[derive(Clone)]
pub struct BeliefAssigner {
    pub name: String,
    pub assign: AssignFn,
}

impl fmt::Debug for BeliefAssigner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BeliefAssigner").field("name", &self.name).finish()
    }
}

impl BeliefAssigner {
    pub fn new(name: impl Into<String>, assign: AssignFn) -> Self {
        BeliefAssigner { name: name.into(), assign }
    }

    /// Flat-prior Bayes on the EIV model; `y = [y1, y2]`, `A` read as a set of real `φ`.
    pub fn eiv_flat_bayes(lambda1: f64, lambda2: f64, budget: usize, truncation: BayesTruncation) -> Self {
        let assign: AssignFn = Arc::new(move |y: &[f64], set: &SetDescriptor, rng: &mut dyn RngCore| {
            let model = EivModel::new(lambda1, lambda2, y[0], y[1])?;
            eiv_flat_bayes_probability(&model, &|phi| set.contains(phi), budget, truncation, rng)
        });
        let name = match truncation {
            BayesTruncation::None => "bayes-flat",
            BayesTruncation::PositiveQuadrant => "bayes-flat-truncated",
        };
        BeliefAssigner::new(name, assign)
    }

    pub fn assign(&self, y: &[f64], set: &SetDescriptor, rng: &mut dyn RngCore) -> Result<f64> {
        (self.assign)(y, set, rng)
    }
}

/// `y = ϑ·u`, `u ~ Exp(1)`, `ϑ > 0`: a scale association with a non-constant Jacobian.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScaleAssociation;

impl Association for ScaleAssociation {
    fn aux(&self) -> Arc<dyn AuxiliaryDistribution> {
        Arc::new(Exponential { rate: 1.0 })
    }

    fn param_domain(&self) -> Interval {
        Interval::new(0.0, f64::INFINITY, false, false)
    }

    fn solve_u(&self, y: &[f64], theta: f64) -> Vec<Vec<f64>> {
        if theta > 0.0 {
            vec![vec![y[0] / theta]]
        } else {
            Vec::new()
        }
    }

    fn solve_theta(&self, y: &[f64], u: &[f64]) -> Option<f64> {
        (u[0] > 0.0).then(|| y[0] / u[0])
    }

    fn simulate(&self, theta: f64, u: &[f64]) -> Vec<f64> {
        vec![theta * u[0]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::cauchy::{cauchy_posterior_contour, CauchyLocationModel};
    use crate::models::curved_normal::DensityForm;

    #[test]
    fn fiducial_contour_matches_im_for_location_model() {
        let budget = 20_000;
        let c = fiducial_contour(Arc::new(CauchyLocationModel), &[0.4], budget, 3).unwrap();
        let im = cauchy_posterior_contour(0.4);
        for k in -40..=40 {
            let t = 0.4 + k as f64 / 8.0;
            let p = im.eval(t);
            let se = (p * (1.0 - p) / budget as f64).sqrt().max(1.0 / budget as f64);
            assert!((c.at(t) - p).abs() <= 3.0 * se + 1e-12, "t={t}: {} vs {p}", c.at(t));
        }
    }

    #[test]
    fn fiducial_contour_differs_for_scale_model() {
        let budget = 200_000;
        let y = 1.0;
        let c = fiducial_contour(Arc::new(ScaleAssociation), &[y], budget, 5).unwrap();
        // IM contour through the exponential maximum-specificity contour e^{-u}
        let im = |theta: f64| (-y / theta).exp();
        let worst = (1..200)
            .map(|k| {
                let t = k as f64 * 0.05;
                let p = c.at(t);
                let se = (p * (1.0 - p) / budget as f64).sqrt().max(1.0 / budget as f64);
                (p - im(t)).abs() / se
            })
            .fold(0.0, f64::max);
        assert!(worst > 5.0);
        let sup = (1..2000).map(|k| c.at(k as f64 * 0.001)).fold(0.0, f64::max);
        assert!(sup > 1.0 - 1e-3);
    }

    #[test]
    fn halfline_cauchy() {
        let a = CauchyLocationModel;
        assert!((fiducial_halfline_possibility(&a, &[0.0], 0.0, 0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((fiducial_halfline_possibility(&a, &[0.0], 1.0, 0, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!(fiducial_halfline_possibility(&a, &[0.0], -1e12, 0, 1).unwrap() > 1.0 - 1e-12);
        assert_eq!(fiducial_halfline_possibility(&a, &[0.0], f64::NEG_INFINITY, 0, 1).unwrap(), 1.0);
        let mut last = 1.0;
        for k in -50..50 {
            let v = fiducial_halfline_possibility(&a, &[0.0], k as f64 * 0.3, 0, 1).unwrap();
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn fiducial_interval_is_quantile_transform() {
        let model = CurvedNormalModel::new(10, 1, DensityForm::Printed).unwrap();
        let red = CurvedNormalReduction::new(1.86, 2.12).unwrap();
        let density = ConditionalDensity::new(&model, red.h).unwrap();
        let mut rng = substream(9, 0);
        let mut vs: Vec<f64> = (0..4000).map(|_| density.sample(&mut rng).unwrap()[0]).collect();
        vs.sort_by(f64::total_cmp);
        let i = curved_normal_fiducial_interval(&model, &red, 0.95, 4000, &mut substream(9, 0)).unwrap();
        let lo = red.y1 - red.y2 * sample_quantile(&vs, 0.975);
        let hi = red.y1 - red.y2 * sample_quantile(&vs, 0.025);
        assert!((i.lo - lo).abs() < 1e-12 && (i.hi - hi).abs() < 1e-12);
    }

    #[test]
    fn fiducial_interval_scale_equivariant() {
        let model = CurvedNormalModel::new(10, 1, DensityForm::Printed).unwrap();
        let a = CurvedNormalReduction::new(1.86, 2.12).unwrap();
        let b = CurvedNormalReduction::new(3.0 * 1.86, 3.0 * 2.12).unwrap();
        let ia = curved_normal_fiducial_interval(&model, &a, 0.9, 5000, &mut substream(2, 0)).unwrap();
        let ib = curved_normal_fiducial_interval(&model, &b, 0.9, 5000, &mut substream(2, 0)).unwrap();
        // same V stream, so equality holds up to rounding in h
        assert!((ib.lo - 3.0 * ia.lo).abs() < 1e-6 && (ib.hi - 3.0 * ia.hi).abs() < 1e-6);
    }

    #[test]
    fn bayes_trivial_sets_and_additivity() {
        let m = EivModel::new(5.0, 5.0, 1.4, 0.5).unwrap();
        let mut rng = substream(1, 0);
        for trunc in [BayesTruncation::None, BayesTruncation::PositiveQuadrant] {
            assert_eq!(eiv_flat_bayes_probability(&m, &|_| true, 1000, trunc, &mut rng).unwrap(), 1.0);
            assert_eq!(eiv_flat_bayes_probability(&m, &|_| false, 1000, trunc, &mut rng).unwrap(), 0.0);
        }
        let budget = 200_000;
        let p = |f: &dyn Fn(f64) -> bool| {
            eiv_flat_bayes_probability(&m, f, budget, BayesTruncation::None, &mut substream(3, 0)).unwrap()
        };
        let a = p(&|x| x <= 2.0);
        let b = p(&|x| x > 2.0 && x <= 9.0);
        let ab = p(&|x| x <= 9.0);
        let se = (ab * (1.0 - ab) / budget as f64).sqrt();
        assert!((a + b - ab).abs() <= 2.0 * se + 1e-12);
    }

    #[test]
    fn bayes_truncation_can_degenerate() {
        let m = EivModel::new(5.0, 5.0, -3.0, 0.5).unwrap();
        let r = eiv_flat_bayes_probability(&m, &|_| true, 10_000, BayesTruncation::PositiveQuadrant, &mut substream(1, 0));
        assert!(matches!(r, Err(Error::DegeneratePosterior(_))));
    }

    #[test]
    fn assigner_full_and_empty() {
        let b = BeliefAssigner::eiv_flat_bayes(5.0, 5.0, 2000, BayesTruncation::None);
        let mut rng = substream(1, 0);
        let full = SetDescriptor::interval(Interval::real_line());
        assert_eq!(b.assign(&[1.4, 0.5], &full, &mut rng).unwrap(), 1.0);
        assert_eq!(b.assign(&[1.4, 0.5], &SetDescriptor::Empty, &mut rng).unwrap(), 0.0);
    }
}
