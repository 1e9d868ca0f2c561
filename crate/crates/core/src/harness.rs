//! Replication studies: validity CDFs, coverage and false confidence.
//!
//! Replicate `r` draws its data from `substream(seed, r)`; any further
//! randomness inside a replicate (Monte Carlo assigners, fiducial draws) uses
//! `substream2(seed, r, k)` with `k >= 1`. Results are merged by index, so
//! reports are identical for any worker count.

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{plausibility_region, posterior_necessity, posterior_possibility, PosteriorContour};
use crate::auxiliary::{AuxiliaryDistribution, Cauchy};
use crate::baselines::{curved_normal_fiducial_interval, BeliefAssigner};
use crate::dominance::{default_alpha_grid, dkw_band, ecdf_on_grid};
use crate::error::{Error, Result};
use crate::models::cauchy::cauchy_posterior_contour;
use crate::models::curved_normal::{
    curved_normal_posterior_contour, curved_normal_reduce, CurvedNormalModel, CurvedNormalReduction,
};
use crate::models::eiv::{eiv_posterior_contour, EivModel};
use crate::rng::{substream, substream2};
use crate::space::SetDescriptor;

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_FIDUCIAL_BUDGET: usize = 4000;

/// A registered model with its fixed (non-parameter) inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Cauchy,
    CurvedNormal(CurvedNormalModel),
    ExpEiv { lambda1: f64, lambda2: f64 },
}

impl ModelSpec {
    pub const NAMES: [&'static str; 3] = ["cauchy", "curved-normal", "exp-eiv"];

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Cauchy => "cauchy",
            ModelSpec::CurvedNormal(_) => "curved-normal",
            ModelSpec::ExpEiv { .. } => "exp-eiv",
        }
    }

    /// Check a name against the registry.
    pub fn check_name(name: &str) -> Result<()> {
        if Self::NAMES.contains(&name) {
            Ok(())
        } else {
            Err(Error::Configuration(format!("unknown model '{name}' (known: {})", Self::NAMES.join(", "))))
        }
    }

    /// The scalar of interest at the true parameter: `θ`, or `φ = θ1/θ2`.
    pub fn interest(&self, truth: &[f64]) -> Result<f64> {
        match self {
            ModelSpec::Cauchy => one(truth),
            ModelSpec::CurvedNormal(m) => {
                let t = one(truth)?;
                if !(t * m.sign > 0.0) {
                    return Err(Error::Argument(format!("true theta {t} does not have the assumed sign")));
                }
                Ok(t)
            }
            ModelSpec::ExpEiv { .. } => {
                if truth.len() != 2 || !(truth[0] > 0.0 && truth[1] > 0.0) {
                    return Err(Error::Argument(format!("need positive (theta1, theta2), got {truth:?}")));
                }
                Ok(truth[0] / truth[1])
            }
        }
    }

    /// One data record: `[y]`, `[y1, y2]` (mean, sd) or `[y1, y2]`.
    pub fn simulate(&self, truth: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        match self {
            ModelSpec::Cauchy => Ok(vec![truth[0] + Cauchy::standard().sample(rng).expect("sampler")[0]]),
            ModelSpec::CurvedNormal(m) => {
                let r = curved_normal_reduce(&m.simulate_sample(truth[0], rng))?;
                Ok(vec![r.y1, r.y2])
            }
            ModelSpec::ExpEiv { lambda1, lambda2 } => {
                let e1 = Exp::new(*lambda1).map_err(|e| Error::Argument(e.to_string()))?;
                let e2 = Exp::new(*lambda2).map_err(|e| Error::Argument(e.to_string()))?;
                Ok(vec![truth[0] + e1.sample(rng), truth[1] + e2.sample(rng)])
            }
        }
    }

    pub fn posterior(&self, y: &[f64]) -> Result<PosteriorContour> {
        match self {
            ModelSpec::Cauchy => Ok(cauchy_posterior_contour(y[0])),
            ModelSpec::CurvedNormal(m) => {
                curved_normal_posterior_contour(m, &CurvedNormalReduction::new(y[0], y[1])?)
            }
            ModelSpec::ExpEiv { lambda1, lambda2 } => {
                Ok(eiv_posterior_contour(&EivModel::new(*lambda1, *lambda2, y[0], y[1])?))
            }
        }
    }
}

fn one(truth: &[f64]) -> Result<f64> {
    match truth {
        [t] if t.is_finite() => Ok(*t),
        _ => Err(Error::Argument(format!("expected one finite parameter, got {truth:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationPlan {
    pub model: ModelSpec,
    pub truth: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    pub delta: f64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl ReplicationPlan {
    pub fn new(model: ModelSpec, truth: Vec<f64>, reps: usize, seed: u64) -> Self {
        ReplicationPlan { model, truth, reps, seed, alpha_grid: default_alpha_grid(), delta: DEFAULT_DELTA, workers: None }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Argument("replication count must be at least 1".into()));
        }
        let g = &self.alpha_grid;
        if g.is_empty() || g.iter().any(|a| !(0.0..=1.0).contains(a)) || g.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Argument("alpha grid must be sorted within [0,1]".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Argument(format!("delta {} outside (0,1)", self.delta)));
        }
        self.model.interest(&self.truth)?;
        Ok(())
    }

    pub fn band(&self) -> f64 {
        dkw_band(self.reps, self.delta)
    }

    /// Run `job(r, data_rng)` for every replicate, in index order.
    pub fn run<T, F>(&self, job: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
    {
        let work = || {
            (0..self.reps as u64)
                .into_par_iter()
                .map(|r| job(r, &mut substream(self.seed, r)))
                .collect::<Result<Vec<T>>>()
        };
        match self.workers {
            Some(w) => rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Configuration(e.to_string()))?
                .install(work),
            None => work(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    ContourAtTruth,
    NecessityOfAssertion,
    PossibilityOfAssertion,
}

/// Which side of the diagonal the empirical CDF must stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `CDF(α) <= α + band`: small values are rare.
    AtMost,
    /// `CDF(α) >= α - band`: large values are rare.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub statistic: Statistic,
    pub direction: Direction,
    pub alpha_grid: Vec<f64>,
    pub cdf: Vec<f64>,
    pub band: f64,
    pub delta: f64,
    pub max_violation: f64,
    pub pass: bool,
    /// Two-sided: `|CDF(α) - α| <= band` everywhere.
    pub uniform: bool,
    pub values: Vec<f64>,
}

fn report(statistic: Statistic, direction: Direction, plan: &ReplicationPlan, values: Vec<f64>) -> ValidityReport {
    let cdf = ecdf_on_grid(&values, &plan.alpha_grid);
    let band = plan.band();
    let signed = |c: f64, a: f64| match direction {
        Direction::AtMost => c - a,
        Direction::AtLeast => a - c,
    };
    let max_violation = cdf.iter().zip(&plan.alpha_grid).map(|(&c, &a)| signed(c, a)).fold(f64::NEG_INFINITY, f64::max);
    let uniform = cdf.iter().zip(&plan.alpha_grid).all(|(c, a)| (c - a).abs() <= band);
    ValidityReport {
        statistic,
        direction,
        alpha_grid: plan.alpha_grid.clone(),
        cdf,
        band,
        delta: plan.delta,
        max_violation,
        pass: max_violation <= band,
        uniform,
        values,
    }
}

/// The assertion as a subset of the model's parameter domain.
fn clip(post: &PosteriorContour, set: &SetDescriptor) -> SetDescriptor {
    set.clip_to(&post.param_domain())
}

/// Empirical distribution of a validity statistic over `plan.reps` replicates.
pub fn validity_cdf(plan: &ReplicationPlan, statistic: Statistic, assertion: Option<&SetDescriptor>) -> Result<ValidityReport> {
    plan.validate()?;
    if statistic != Statistic::ContourAtTruth && assertion.is_none() {
        return Err(Error::Argument("assertion statistics need an assertion".into()));
    }
    let truth = plan.model.interest(&plan.truth)?;
    let values = plan.run(|_, rng| {
        let y = plan.model.simulate(&plan.truth, rng)?;
        let post = plan.model.posterior(&y)?;
        let v = match statistic {
            Statistic::ContourAtTruth => post.eval(truth),
            Statistic::NecessityOfAssertion => posterior_necessity(&post, &clip(&post, assertion.expect("checked")))?,
            Statistic::PossibilityOfAssertion => {
                posterior_possibility(&post, &clip(&post, assertion.expect("checked")))?
            }
        };
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Numeric(format!("statistic {v} outside [0,1]")));
        }
        Ok(v)
    })?;
    let direction = match statistic {
        Statistic::NecessityOfAssertion => Direction::AtLeast,
        _ => Direction::AtMost,
    };
    Ok(report(statistic, direction, plan, values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMethod {
    Im,
    Fiducial,
}

impl CoverageMethod {
    pub fn name(self) -> &'static str {
        match self {
            CoverageMethod::Im => "im",
            CoverageMethod::Fiducial => "fiducial",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageSummary {
    pub method: CoverageMethod,
    pub level: f64,
    pub coverage: f64,
    /// Mean over bounded regions; infinite when every region is unbounded.
    pub mean_length: f64,
    pub unbounded_count: usize,
    pub mc_se: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(skip)]
    pub covered: Vec<bool>,
    #[serde(skip)]
    pub lengths: Vec<f64>,
}

/// Coverage and mean length of `level` regions (IM) or intervals (fiducial).
pub fn coverage_study(
    plan: &ReplicationPlan,
    level: f64,
    method: CoverageMethod,
    fiducial_budget: usize,
) -> Result<CoverageSummary> {
    plan.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Argument(format!("level {level} outside (0,1)")));
    }
    let cn = match (method, plan.model) {
        (CoverageMethod::Fiducial, ModelSpec::CurvedNormal(m)) => Some(m),
        (CoverageMethod::Fiducial, _) => {
            return Err(Error::Unsupported("fiducial intervals are implemented for the curved normal only".into()))
        }
        _ => None,
    };
    let truth = plan.model.interest(&plan.truth)?;
    let rows = plan.run(|r, rng| {
        let y = plan.model.simulate(&plan.truth, rng)?;
        match method {
            CoverageMethod::Im => {
                let region = plausibility_region(&plan.model.posterior(&y)?, 1.0 - level)?;
                Ok((region.contains(truth), region.length()))
            }
            CoverageMethod::Fiducial => {
                let m = cn.expect("checked");
                let red = CurvedNormalReduction::new(y[0], y[1])?;
                let mut frng = substream2(plan.seed, r, 1);
                let i = curved_normal_fiducial_interval(&m, &red, level, fiducial_budget, &mut frng)?;
                Ok((i.contains(truth), i.length()))
            }
        }
    })?;
    let covered: Vec<bool> = rows.iter().map(|r| r.0).collect();
    let lengths: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let reps = rows.len();
    let coverage = covered.iter().filter(|&&c| c).count() as f64 / reps as f64;
    let bounded: Vec<f64> = lengths.iter().copied().filter(|l| l.is_finite()).collect();
    let mean_length =
        if bounded.is_empty() { f64::INFINITY } else { bounded.iter().sum::<f64>() / bounded.len() as f64 };
    Ok(CoverageSummary {
        method,
        level,
        coverage,
        mean_length,
        unbounded_count: reps - bounded.len(),
        mc_se: (coverage * (1.0 - coverage) / reps as f64).sqrt(),
        reps,
        seed: plan.seed,
        covered,
        lengths,
    })
}

/// A belief assignment evaluated in a false-confidence study.
#[derive(Debug, Clone)]
pub enum Assigner {
    /// Posterior necessity of the assertion under the model's IM.
    ImNecessity,
    Belief(BeliefAssigner),
    Constant { name: String, value: f64 },
}

impl Assigner {
    pub fn name(&self) -> String {
        match self {
            Assigner::ImNecessity => "im-necessity".into(),
            Assigner::Belief(b) => b.name.clone(),
            Assigner::Constant { name, .. } => name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalseConfidenceTable {
    pub alpha_grid: Vec<f64>,
    pub names: Vec<String>,
    pub cdfs: Vec<Vec<f64>>,
    pub band: f64,
    /// `values[k][r]`: assigner `k` at replicate `r`.
    pub values: Vec<Vec<f64>>,
}

/// Distribution of the belief each assigner gives to `assertion` across replicates.
pub fn false_confidence_curves(
    plan: &ReplicationPlan,
    assertion: &SetDescriptor,
    assigners: &[Assigner],
) -> Result<FalseConfidenceTable> {
    plan.validate()?;
    if assigners.is_empty() {
        return Err(Error::Argument("need at least one assigner".into()));
    }
    let need_post = assigners.iter().any(|a| matches!(a, Assigner::ImNecessity));
    let rows = plan.run(|r, rng| {
        let y = plan.model.simulate(&plan.truth, rng)?;
        let post = if need_post { Some(plan.model.posterior(&y)?) } else { None };
        assigners
            .iter()
            .enumerate()
            .map(|(k, a)| match a {
                Assigner::ImNecessity => {
                    let p = post.as_ref().expect("built above");
                    posterior_necessity(p, &clip(p, assertion))
                }
                Assigner::Belief(b) => b.assign(&y, assertion, &mut substream2(plan.seed, r, k as u64 + 1)),
                Assigner::Constant { value, .. } => Ok(*value),
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let values: Vec<Vec<f64>> = (0..assigners.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    let cdfs = values.iter().map(|v| ecdf_on_grid(v, &plan.alpha_grid)).collect();
    Ok(FalseConfidenceTable {
        alpha_grid: plan.alpha_grid.clone(),
        names: assigners.iter().map(Assigner::name).collect(),
        cdfs,
        band: plan.band(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::curved_normal::DensityForm;
    use crate::space::Interval;

    #[test]
    fn cauchy_contour_at_truth_is_uniform() {
        let plan = ReplicationPlan::new(ModelSpec::Cauchy, vec![0.0], 5000, 17);
        let r = validity_cdf(&plan, Statistic::ContourAtTruth, None).unwrap();
        assert!(r.pass && r.uniform, "max violation {}", r.max_violation);
        assert!(r.values.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(r.cdf.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let plan = ReplicationPlan::new(ModelSpec::ExpEiv { lambda1: 5.0, lambda2: 5.0 }, vec![1.0, 0.1], 300, 5);
        let a = validity_cdf(&plan.clone().with_workers(1), Statistic::ContourAtTruth, None).unwrap();
        let b = validity_cdf(&plan.with_workers(4), Statistic::ContourAtTruth, None).unwrap();
        assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn assertion_statistics_need_assertion() {
        let plan = ReplicationPlan::new(ModelSpec::Cauchy, vec![0.0], 10, 1);
        assert!(validity_cdf(&plan, Statistic::NecessityOfAssertion, None).is_err());
        assert!(ModelSpec::check_name("gamma").is_err());
        assert!(ModelSpec::check_name("exp-eiv").is_ok());
    }

    #[test]
    fn single_replicate_coverage() {
        let m = CurvedNormalModel::new(10, 1, DensityForm::Printed).unwrap();
        let plan = ReplicationPlan::new(ModelSpec::CurvedNormal(m), vec![2.0], 1, 3);
        let s = coverage_study(&plan, 0.95, CoverageMethod::Im, 0).unwrap();
        assert!(s.coverage == 0.0 || s.coverage == 1.0);
        assert_eq!(s.mc_se, 0.0);
        assert!(coverage_study(
            &ReplicationPlan::new(ModelSpec::Cauchy, vec![0.0], 1, 3),
            0.95,
            CoverageMethod::Fiducial,
            100
        )
        .is_err());
    }

    #[test]
    fn constant_zero_assigner_has_unit_cdf() {
        let plan = ReplicationPlan::new(ModelSpec::ExpEiv { lambda1: 5.0, lambda2: 5.0 }, vec![1.0, 0.1], 50, 2);
        let a = SetDescriptor::interval(Interval::at_most(9.0));
        let t = false_confidence_curves(&plan, &a, &[Assigner::Constant { name: "zero".into(), value: 0.0 }]).unwrap();
        assert!(t.cdfs[0].iter().all(|&c| c == 1.0));
    }
}
