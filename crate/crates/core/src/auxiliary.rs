//! Auxiliary-variable distributions `P_U`.

use std::f64::consts::PI;

use rand::RngCore;
use rand_distr::{Distribution, Exp, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal};

use crate::space::{Interval, SpaceDescriptor};

/// Density, optional CDF, sampler and support of an auxiliary variable.
///
/// Points are slices so that product spaces fit the same interface; the 1-D
/// distributions here take `u[0]`.
pub trait AuxiliaryDistribution: Send + Sync {
    fn name(&self) -> String;
    fn support(&self) -> SpaceDescriptor;
    fn density(&self, u: &[f64]) -> f64;

    /// 1-D distribution function, when available in closed form.
    fn cdf(&self, _x: f64) -> Option<f64> {
        None
    }

    /// Draw one point; `None` when the distribution has no sampler.
    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>>;

    /// Location of the density maximum for unimodal 1-D densities.
    fn mode(&self) -> Option<f64> {
        None
    }

    /// Center of symmetry for symmetric unimodal densities.
    fn symmetry_center(&self) -> Option<f64> {
        None
    }

    fn density1(&self, x: f64) -> f64 {
        self.density(&[x])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Normal {
    pub mean: f64,
    pub sd: f64,
    inner: StatrsNormal,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Self {
        let inner = StatrsNormal::new(mean, sd).expect("sd must be positive and finite");
        Normal { mean, sd, inner }
    }

    pub fn standard() -> Self {
        Self::new(0.0, 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.inner.inverse_cdf(p)
    }
}

impl AuxiliaryDistribution for Normal {
    fn name(&self) -> String {
        format!("normal({}, {})", self.mean, self.sd)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::real_line()
    }

    fn density(&self, u: &[f64]) -> f64 {
        let z = (u[0] - self.mean) / self.sd;
        (-0.5 * z * z).exp() / (self.sd * (2.0 * PI).sqrt())
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(self.inner.cdf(x))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let z: f64 = StandardNormal.sample(rng);
        Some(vec![self.mean + self.sd * z])
    }

    fn mode(&self) -> Option<f64> {
        Some(self.mean)
    }

    fn symmetry_center(&self) -> Option<f64> {
        Some(self.mean)
    }
}

/// Cauchy distribution; CDF via the arctangent closed form.
#[derive(Debug, Clone, Copy)]
pub struct Cauchy {
    pub location: f64,
    pub scale: f64,
}

impl Cauchy {
    pub fn standard() -> Self {
        Cauchy { location: 0.0, scale: 1.0 }
    }

    pub fn cdf_value(&self, x: f64) -> f64 {
        0.5 + ((x - self.location) / self.scale).atan() / PI
    }

    /// Upper tail `1 - F(x)`, computed without cancellation for large `x`.
    pub fn survival(&self, x: f64) -> f64 {
        let z = (x - self.location) / self.scale;
        if z > 1.0 {
            (1.0 / z).atan() / PI
        } else {
            0.5 - z.atan() / PI
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.location + self.scale * (PI * (p - 0.5)).tan()
    }
}

impl AuxiliaryDistribution for Cauchy {
    fn name(&self) -> String {
        format!("cauchy({}, {})", self.location, self.scale)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::real_line()
    }

    fn density(&self, u: &[f64]) -> f64 {
        let z = (u[0] - self.location) / self.scale;
        1.0 / (PI * self.scale * (1.0 + z * z))
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(self.cdf_value(x))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let p: f64 = rand::Rng::random(rng);
        Some(vec![self.quantile(p)])
    }

    fn mode(&self) -> Option<f64> {
        Some(self.location)
    }

    fn symmetry_center(&self) -> Option<f64> {
        Some(self.location)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform {
    pub fn unit() -> Self {
        Uniform { lo: 0.0, hi: 1.0 }
    }
}

impl AuxiliaryDistribution for Uniform {
    fn name(&self) -> String {
        format!("uniform({}, {})", self.lo, self.hi)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::Interval(Interval::closed(self.lo, self.hi))
    }

    fn density(&self, u: &[f64]) -> f64 {
        if u[0] >= self.lo && u[0] <= self.hi {
            1.0 / (self.hi - self.lo)
        } else {
            0.0
        }
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let p: f64 = rand::Rng::random(rng);
        Some(vec![self.lo + (self.hi - self.lo) * p])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    pub rate: f64,
}

impl AuxiliaryDistribution for Exponential {
    fn name(&self) -> String {
        format!("exp({})", self.rate)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::Interval(Interval::at_least(0.0))
    }

    fn density(&self, u: &[f64]) -> f64 {
        if u[0] < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * u[0]).exp()
        }
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(if x <= 0.0 { 0.0 } else { -(-self.rate * x).exp_m1() })
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let e = Exp::new(self.rate).ok()?;
        Some(vec![e.sample(rng)])
    }

    fn mode(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Product of independent standard normals, for multivariate Monte Carlo contours.
#[derive(Debug, Clone, Copy)]
pub struct StandardNormalProduct {
    pub dim: usize,
}

impl AuxiliaryDistribution for StandardNormalProduct {
    fn name(&self) -> String {
        format!("normal^{}", self.dim)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::Product(vec![Interval::real_line(); self.dim])
    }

    fn density(&self, u: &[f64]) -> f64 {
        let ss: f64 = u.iter().map(|x| x * x).sum();
        (-0.5 * ss).exp() / (2.0 * PI).powf(self.dim as f64 / 2.0)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        Some((0..self.dim).map(|_| StandardNormal.sample(rng)).collect())
    }
}

/// A distribution with a density but no sampler.
pub struct DensityOnly<F> {
    pub label: String,
    pub support: SpaceDescriptor,
    pub density: F,
    pub mode: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Send + Sync> AuxiliaryDistribution for DensityOnly<F> {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn support(&self) -> SpaceDescriptor {
        self.support.clone()
    }

    fn density(&self, u: &[f64]) -> f64 {
        (self.density)(u[0])
    }

    fn sample(&self, _rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        None
    }

    fn mode(&self) -> Option<f64> {
        self.mode
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn cauchy_cdf_closed_form() {
        let c = Cauchy::standard();
        assert_eq!(c.cdf_value(0.0), 0.5);
        assert!((c.cdf_value(1.0) - 0.75).abs() < 1e-15);
        assert!((c.survival(10.0) - (1.0 - c.cdf_value(10.0))).abs() < 1e-15);
        assert!((c.quantile(0.75) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn samplers_stay_in_support() {
        let mut rng = substream(3, 0);
        let e = Exponential { rate: 5.0 };
        let u = Uniform::unit();
        for _ in 0..1000 {
            assert!(e.sample(&mut rng).unwrap()[0] >= 0.0);
            let x = u.sample(&mut rng).unwrap()[0];
            assert!((0.0..=1.0).contains(&x));
        }
    }

    #[test]
    fn normal_cdf_is_monotone_with_limits() {
        let n = Normal::standard();
        let mut prev = 0.0;
        for k in -80..=80 {
            let c = n.cdf(k as f64 / 10.0).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!(n.cdf(-40.0).unwrap() < 1e-300 && n.cdf(40.0).unwrap() == 1.0);
    }
}
