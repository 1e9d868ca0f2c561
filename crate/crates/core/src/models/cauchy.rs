//! Cauchy location model `Y = θ + U`, `U ~ Cauchy(0, 1)`.

use std::sync::Arc;

use crate::association::{Association, ContourHints, PosteriorContour};
use crate::auxiliary::{AuxiliaryDistribution, Cauchy};
use crate::possibility::{build_max_specificity, ConstructionMethod, PossibilityContour, Shape, TailLimits};
use crate::space::{Interval, SpaceDescriptor};

#[derive(Debug, Clone, Copy, Default)]
pub struct CauchyLocationModel;

impl Association for CauchyLocationModel {
    fn aux(&self) -> Arc<dyn AuxiliaryDistribution> {
        Arc::new(Cauchy::standard())
    }

    fn param_domain(&self) -> Interval {
        Interval::real_line()
    }

    fn solve_u(&self, y: &[f64], theta: f64) -> Vec<Vec<f64>> {
        vec![vec![y[0] - theta]]
    }

    fn solve_theta(&self, y: &[f64], u: &[f64]) -> Option<f64> {
        Some(y[0] - u[0])
    }

    fn simulate(&self, theta: f64, u: &[f64]) -> Vec<f64> {
        vec![theta + u[0]]
    }

    fn posterior_hints(&self, y: &[f64]) -> ContourHints {
        ContourHints {
            shape: Shape::Unimodal,
            mode: Some(y[0]),
            tails: TailLimits { lower: Some(0.0), upper: Some(0.0) },
        }
    }
}

/// `π_y(ϑ) = 2{1 - F(|y - ϑ|)}` with the arctangent CDF.
pub fn cauchy_posterior_contour(y: f64) -> PosteriorContour {
    let aux = Cauchy::standard();
    let contour = PossibilityContour::from_fn(SpaceDescriptor::real_line(), move |theta| {
        (2.0 * aux.survival((y - theta).abs())).min(1.0)
    })
    .with_mode(y)
    .with_shape(Shape::Unimodal)
    .with_tails(TailLimits { lower: Some(0.0), upper: Some(0.0) });
    let base = build_max_specificity(Arc::new(Cauchy::standard()), ConstructionMethod::ClosedForm, 0, 0)
        .expect("Cauchy satisfies the closed-form preconditions");
    PosteriorContour::from_parts(vec![y], contour, Some(base), Some(Arc::new(CauchyLocationModel)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::posterior_contour;

    #[test]
    fn closed_form_values() {
        let p = cauchy_posterior_contour(0.0);
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.0), 0.5);
        assert_eq!(cauchy_posterior_contour(3.0).eval(3.0), 1.0);
    }

    #[test]
    fn generic_engine_agrees_with_closed_form() {
        let assoc = Arc::new(CauchyLocationModel);
        let base = build_max_specificity(assoc.aux(), ConstructionMethod::ClosedForm, 0, 0).unwrap();
        let generic = posterior_contour(assoc, &[0.7], base);
        let closed = cauchy_posterior_contour(0.7);
        for k in -100..=100 {
            let t = k as f64 / 5.0;
            assert!((generic.eval(t) - closed.eval(t)).abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn symmetric_about_data() {
        let p = cauchy_posterior_contour(-2.5);
        for k in 0..200 {
            let t = k as f64 * 0.173;
            assert!((p.eval(-2.5 + t) - p.eval(-2.5 - t)).abs() <= 1e-12);
        }
    }
}
