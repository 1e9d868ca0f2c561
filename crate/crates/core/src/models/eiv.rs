//! Exponential errors-in-variables: `Y1 = φξ + U1`, `Y2 = ξ + U2`,
//! `U_i ~ Exp(λ_i)`, with marginal inference on `φ > 0`.
//!
//! The `ξ`-free equation `Y1 - φY2 = U1 - φU2` is reduced to a uniform
//! auxiliary by the probability integral transform `G_φ`, the asymmetric
//! Laplace CDF with rates `λ1` (right tail) and `λ2/φ` (left tail).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::laplace::{asymmetric_laplace_cdf, asymmetric_laplace_quantile};
use crate::association::{posterior_contour, Association, ContourHints, PosteriorContour};
use crate::auxiliary::{AuxiliaryDistribution, Uniform};
use crate::error::{Error, Result};
use crate::possibility::{build_triangular, level_set_scan, PossibilityContour, Shape, TailLimits};
use crate::space::{Interval, SpaceDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EivModel {
    pub lambda1: f64,
    pub lambda2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl EivModel {
    pub fn new(lambda1: f64, lambda2: f64, y1: f64, y2: f64) -> Result<Self> {
        if !(lambda1 > 0.0 && lambda2 > 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::Argument(format!("rates must be positive, got ({lambda1}, {lambda2})")));
        }
        if !(y1.is_finite() && y2.is_finite()) {
            return Err(Error::Argument("observations must be finite".into()));
        }
        Ok(EivModel { lambda1, lambda2, y1, y2 })
    }

    /// `G_φ(x)`, the CDF of `U1 - φU2`.
    pub fn g(&self, phi: f64, x: f64) -> f64 {
        asymmetric_laplace_cdf(self.lambda1, self.lambda2 / phi, x)
    }

    /// `G_φ(y1 - φ y2)`, continuously extended to `φ = 0`.
    pub fn pit(&self, phi: f64) -> f64 {
        if phi == 0.0 {
            return if self.y1 > 0.0 { -(-self.lambda1 * self.y1).exp_m1() } else { 0.0 };
        }
        self.g(phi, self.y1 - phi * self.y2)
    }

    /// Limit of the contour as `φ → ∞`.
    pub fn upper_tail_limit(&self) -> f64 {
        if self.y2 > 0.0 {
            let g = (-self.lambda2 * self.y2).exp();
            1.0 - (2.0 * g - 1.0).abs()
        } else {
            0.0
        }
    }

    pub fn lower_tail_limit(&self) -> f64 {
        1.0 - (2.0 * self.pit(0.0) - 1.0).abs()
    }
}

/// Marginal association for `φ` at a fixed second observation `y2`.
#[derive(Debug, Clone, Copy)]
pub struct EivAssociation {
    pub lambda1: f64,
    pub lambda2: f64,
    pub y2: f64,
}

impl EivAssociation {
    fn model(&self, y: &[f64]) -> EivModel {
        EivModel { lambda1: self.lambda1, lambda2: self.lambda2, y1: y[0], y2: y[1] }
    }
}

impl Association for EivAssociation {
    fn aux(&self) -> Arc<dyn AuxiliaryDistribution> {
        Arc::new(Uniform::unit())
    }

    fn param_domain(&self) -> Interval {
        Interval::new(0.0, f64::INFINITY, true, false)
    }

    fn solve_u(&self, y: &[f64], phi: f64) -> Vec<Vec<f64>> {
        if phi < 0.0 || phi.is_nan() {
            return Vec::new();
        }
        vec![vec![self.model(y).pit(phi)]]
    }

    fn simulate(&self, phi: f64, u: &[f64]) -> Vec<f64> {
        let z = asymmetric_laplace_quantile(self.lambda1, self.lambda2 / phi, u[0]);
        vec![phi * self.y2 + z, self.y2]
    }

    fn posterior_hints(&self, y: &[f64]) -> ContourHints {
        let m = self.model(y);
        ContourHints {
            shape: Shape::General,
            mode: None,
            tails: TailLimits { lower: Some(m.lower_tail_limit()), upper: Some(m.upper_tail_limit()) },
        }
    }
}

/// `π_y(φ) = 1 - |2 G_φ(y1 - φ y2) - 1|` on `φ > 0` with the triangular base contour.
pub fn eiv_posterior_contour(model: &EivModel) -> PosteriorContour {
    let assoc = Arc::new(EivAssociation { lambda1: model.lambda1, lambda2: model.lambda2, y2: model.y2 });
    let post = posterior_contour(assoc, &[model.y1, model.y2], build_triangular());
    // locate the median crossing for the mode hint, when there is one
    let contour = post.contour().clone();
    let mode = median_crossing(model);
    let contour = match mode {
        Some(m) => contour.with_mode(m),
        None => contour,
    };
    PosteriorContour::from_parts(
        post.y().to_vec(),
        contour,
        post.base().cloned(),
        post.association().cloned(),
    )
}

/// A `φ` with `G_φ(y1 - φ y2) = 1/2`, found by scanning the contour's level set near 1.
fn median_crossing(model: &EivModel) -> Option<f64> {
    let m = *model;
    let probe = PossibilityContour::from_fn(
        SpaceDescriptor::Interval(Interval::new(0.0, f64::INFINITY, true, false)),
        move |phi| m.pit(phi) - 0.5,
    )
    .with_tails(TailLimits { lower: Some(m.pit(0.0) - 0.5), upper: None });
    let set = level_set_scan(&probe, |v| v >= 0.0).ok()?;
    set.iter().map(|i| i.hi).find(|x| x.is_finite() && *x > 0.0)
}

/// Contour value at `φ`, erroring outside `φ > 0`.
pub fn eiv_contour_value(model: &EivModel, phi: f64) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::Domain(format!("phi must be positive, got {phi}")));
    }
    Ok(1.0 - (2.0 * model.pit(phi) - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::plausibility_region;

    fn example_instance() -> EivModel {
        EivModel::new(5.0, 5.0, 1.40, 0.50).unwrap()
    }

    #[test]
    fn median_crossing_has_possibility_one() {
        let m = example_instance();
        let post = eiv_posterior_contour(&m);
        let mode = post.contour().mode().expect("crossing exists");
        assert!((m.pit(mode) - 0.5).abs() < 1e-7);
        assert!((post.eval(mode) - 1.0).abs() < 2e-7);
    }

    #[test]
    fn right_tail_does_not_vanish() {
        let m = example_instance();
        let limit = 2.0 * (-2.5f64).exp();
        assert!((m.upper_tail_limit() - limit).abs() < 1e-15);
        let post = eiv_posterior_contour(&m);
        assert!((post.eval(1e9) - limit).abs() < 1e-8);
    }

    #[test]
    fn regions_unbounded_then_bounded() {
        let post = eiv_posterior_contour(&example_instance());
        let r10 = plausibility_region(&post, 0.10).unwrap();
        assert!(r10.upper().unwrap().is_infinite());
        let r20 = plausibility_region(&post, 0.20).unwrap();
        assert!(r20.is_bounded());
        // grid-scan oracle for the right endpoint at alpha = 0.2
        let hi = r20.upper().unwrap();
        assert!(post.eval(hi - 1e-3) > 0.2 && post.eval(hi + 1e-3) < 0.2);
    }

    #[test]
    fn nuisance_free() {
        // same y1 - φ y2 from different ξ gives the same value
        let phi = 2.0;
        let a = EivModel::new(5.0, 5.0, 1.375, 0.5).unwrap();
        let shift = 0.25;
        let b = EivModel::new(5.0, 5.0, 1.375 + phi * shift, 0.5 + shift).unwrap();
        assert_eq!(a.y1 - phi * a.y2, b.y1 - phi * b.y2);
        assert_eq!(eiv_contour_value(&a, phi).unwrap(), eiv_contour_value(&b, phi).unwrap());
    }

    #[test]
    fn domain_error_for_nonpositive_phi() {
        assert!(eiv_contour_value(&example_instance(), 0.0).is_err());
        assert!(EivModel::new(-1.0, 5.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn association_round_trip() {
        let assoc = EivAssociation { lambda1: 5.0, lambda2: 5.0, y2: 0.5 };
        let mut rng = crate::rng::substream(4, 0);
        crate::association::check_round_trip(&assoc, &[0.5, 2.0, 10.0], 200, &mut rng).unwrap();
    }
}
