//! Curved normal `N(θ, θ²)` with known sign of `θ`, reduced to `(Y1, Y2)`
//! (mean, sd) and conditioned on the observed `η = Y1/Y2 = h`.
//!
//! Work is done in `s = sign/(h - v) > 0`, where `v` is the conditional
//! auxiliary and the log density of `v` is `ℓ(s) = p·ln s - Q(s)/2` with
//! `Q(s) = n(hs - sign)² + (n-1)s²`. The law of `S` is tabulated in `t = ln s`.

use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::association::{posterior_contour, Association, ContourHints, PosteriorContour};
use crate::auxiliary::AuxiliaryDistribution;
use crate::error::{Error, Result};
use crate::numerics::gauss_kronrod15;
use crate::possibility::{PossibilityContour, Shape, TailLimits};
use crate::space::{Interval, SpaceDescriptor};

const CELLS: usize = 4096;
const LOG_CUTOFF: f64 = 60.0;

/// Which power of `s` multiplies the conditional density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DensityForm {
    /// `(n-1)·ln s`, the density as usually written.
    #[default]
    Printed,
    /// `(n+1)·ln s`, the exact conditional law of `V` given `η = h`.
    ExactJacobian,
}

impl DensityForm {
    fn power(self, n: usize) -> f64 {
        match self {
            DensityForm::Printed => n as f64 - 1.0,
            DensityForm::ExactJacobian => n as f64 + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvedNormalModel {
    pub n: usize,
    pub sign: f64,
    pub form: DensityForm,
}

impl CurvedNormalModel {
    pub fn new(n: usize, sign: i32, form: DensityForm) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("n must be at least 2, got {n}")));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::Argument(format!("sign must be +1 or -1, got {sign}")));
        }
        Ok(CurvedNormalModel { n, sign: sign as f64, form })
    }

    /// `n` draws from `N(θ, θ²)`.
    pub fn simulate_sample(&self, theta: f64, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..self.n)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                theta + theta.abs() * z
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvedNormalReduction {
    pub y1: f64,
    pub y2: f64,
    pub h: f64,
}

impl CurvedNormalReduction {
    pub fn new(y1: f64, y2: f64) -> Result<Self> {
        if !(y2 > 0.0 && y2.is_finite() && y1.is_finite()) {
            return Err(Error::DegenerateData(format!("need finite mean and positive sd, got ({y1}, {y2})")));
        }
        Ok(CurvedNormalReduction { y1, y2, h: y1 / y2 })
    }
}

/// Mean, standard deviation (divisor `n - 1`) and their ratio.
pub fn curved_normal_reduce(sample: &[f64]) -> Result<CurvedNormalReduction> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 observations, got {n}")));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::Data("sample contains non-finite values".into()));
    }
    let mean = sample.iter().sum::<f64>() / n as f64;
    let ss: f64 = sample.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateData("sample has zero variance".into()));
    }
    CurvedNormalReduction::new(mean, sd)
}

/// `u_{y,θ} = ((y1 - θ)/|θ|, y2/|θ|)` for the reduced two-dimensional association.
pub fn full_solve_u(y1: f64, y2: f64, theta: f64) -> [f64; 2] {
    [(y1 - theta) / theta.abs(), y2 / theta.abs()]
}

/// The conditioning statistic `η(u) = (sign + u1)/u2`.
pub fn eta(sign: f64, u: [f64; 2]) -> f64 {
    (sign + u[0]) / u[1]
}

/// Conditional law of `V` given `η = h`, tabulated once per instance.
#[derive(Debug, Clone)]
pub struct ConditionalDensity {
    n: usize,
    h: f64,
    sign: f64,
    p: f64,
    quad: f64,
    lin: f64,
    t_lo: f64,
    dt: f64,
    peak: f64,
    total: f64,
    /// Mass of cells `0..k`, normalized.
    cum: Vec<f64>,
    /// Mass of cells `k..`, normalized.
    tail: Vec<f64>,
    log_norm: f64,
    s_mode: f64,
    unimodal: bool,
}

impl ConditionalDensity {
    pub fn new(model: &CurvedNormalModel, h: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::Argument(format!("h must be finite, got {h}")));
        }
        let n = model.n;
        let p = model.form.power(n);
        if p <= 1.0 {
            return Err(Error::Numeric(format!(
                "conditional density is not normalizable for n = {n} (integral diverges at v -> -sign*inf)"
            )));
        }
        let nf = n as f64;
        let quad = nf * h * h + nf - 1.0;
        let lin = 2.0 * nf * h * model.sign;
        let mut d = ConditionalDensity {
            n,
            h,
            sign: model.sign,
            p,
            quad,
            lin,
            t_lo: 0.0,
            dt: 0.0,
            peak: 0.0,
            total: 0.0,
            cum: Vec::new(),
            tail: Vec::new(),
            log_norm: 0.0,
            s_mode: 0.0,
            unimodal: true,
        };
        d.s_mode = d.stationary(p);
        d.tabulate()?;
        Ok(d)
    }

    fn q(&self, s: f64) -> f64 {
        self.quad * s * s - self.lin * s + self.n as f64
    }

    /// Root of `a s² - (lin/2) s - c = 0`.
    fn stationary(&self, c: f64) -> f64 {
        let b = 0.5 * self.lin;
        (b + (b * b + 4.0 * self.quad * c).sqrt()) / (2.0 * self.quad)
    }

    /// `ℓ(s)`: log density of `v` at `v(s)`, unnormalized.
    pub fn log_kernel(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.p * s.ln() - 0.5 * self.q(s)
    }

    /// Log density of `T = ln S`, unnormalized.
    fn log_t(&self, t: f64) -> f64 {
        let s = t.exp();
        (self.p - 1.0) * t - 0.5 * self.q(s)
    }

    fn t_density(&self, t: f64) -> f64 {
        (self.log_t(t) - self.peak).exp()
    }

    fn tabulate(&mut self) -> Result<()> {
        let t_mode = self.stationary(self.p - 1.0).ln();
        self.peak = self.log_t(t_mode);
        let mut step = 0.5;
        let mut lo = t_mode - step;
        while self.log_t(lo) - self.peak > -LOG_CUTOFF {
            step *= 1.5;
            lo = t_mode - step;
        }
        step = 0.5;
        let mut hi = t_mode + step;
        while self.log_t(hi) - self.peak > -LOG_CUTOFF {
            step *= 1.5;
            hi = t_mode + step;
        }
        self.t_lo = lo;
        self.dt = (hi - lo) / CELLS as f64;
        let masses: Vec<f64> = (0..CELLS)
            .map(|k| {
                let a = lo + k as f64 * self.dt;
                gauss_kronrod15(&|t| self.t_density(t), a, a + self.dt).0
            })
            .collect();
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Numeric("conditional density normalization is not finite".into()));
        }
        self.total = total;
        let mut cum = vec![0.0; CELLS + 1];
        for k in 0..CELLS {
            cum[k + 1] = cum[k] + masses[k] / total;
        }
        let mut tail = vec![0.0; CELLS + 1];
        for k in (0..CELLS).rev() {
            tail[k] = tail[k + 1] + masses[k] / total;
        }
        self.cum = cum;
        self.tail = tail;
        self.log_norm = self.peak + total.ln();
        self.unimodal = self.check_unimodal();
        Ok(())
    }

    fn node(&self, k: usize) -> f64 {
        self.t_lo + k as f64 * self.dt
    }

    fn check_unimodal(&self) -> bool {
        let vals: Vec<f64> = (0..=CELLS).map(|k| self.log_kernel(self.node(k).exp())).collect();
        let top = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|x| x.0).unwrap_or(0);
        vals[..=top].windows(2).all(|w| w[1] >= w[0]) && vals[top..].windows(2).all(|w| w[1] <= w[0])
    }

    pub fn is_unimodal(&self) -> bool {
        self.unimodal
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn s_of_v(&self, v: f64) -> f64 {
        self.sign / (self.h - v)
    }

    pub fn v_of_s(&self, s: f64) -> f64 {
        self.h - self.sign / s
    }

    /// Maximizer of `ℓ`, i.e. the mode of `f_h` in `s` coordinates.
    pub fn s_mode(&self) -> f64 {
        self.s_mode
    }

    pub fn v_mode(&self) -> f64 {
        self.v_of_s(self.s_mode)
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let x = (t - self.t_lo) / self.dt;
        if x < 0.0 {
            None
        } else {
            Some((x as usize).min(CELLS - 1))
        }
    }

    /// `P(S <= s)`.
    pub fn cdf_s(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        if s.is_infinite() {
            return 1.0;
        }
        let t = s.ln();
        let Some(k) = self.locate(t) else { return 0.0 };
        if t >= self.node(CELLS) {
            return 1.0;
        }
        let part = gauss_kronrod15(&|x| self.t_density(x), self.node(k), t).0 / self.total;
        (self.cum[k] + part).clamp(0.0, 1.0)
    }

    /// `P(S > s)` without cancellation.
    pub fn sf_s(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 1.0;
        }
        if s.is_infinite() {
            return 0.0;
        }
        let t = s.ln();
        let Some(k) = self.locate(t) else { return 1.0 };
        if t >= self.node(CELLS) {
            return 0.0;
        }
        let part = gauss_kronrod15(&|x| self.t_density(x), t, self.node(k + 1)).0 / self.total;
        (self.tail[k + 1] + part).clamp(0.0, 1.0)
    }

    /// Inverse of `cdf_s`.
    pub fn quantile_s(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let k = (self.cum.partition_point(|&c| c <= u).max(1) - 1).min(CELLS - 1);
        let (a, b) = (self.node(k), self.node(k + 1));
        let mass = self.cum[k + 1] - self.cum[k];
        let mut t = if mass > 0.0 { a + (b - a) * ((u - self.cum[k]) / mass).clamp(0.0, 1.0) } else { a };
        let (mut lo, mut hi) = (a, b);
        for _ in 0..50 {
            let f = self.cum[k] + gauss_kronrod15(&|x| self.t_density(x), a, t).0 / self.total - u;
            if f.abs() < 1e-14 {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.t_density(t) / self.total;
            let next = t - f / d;
            t = if d > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        t.exp()
    }

    /// Normalized density of `v`.
    pub fn density_v(&self, v: f64) -> f64 {
        let s = self.s_of_v(v);
        if !(s > 0.0) || !s.is_finite() {
            return 0.0;
        }
        (self.log_kernel(s) - self.log_norm).exp()
    }

    pub fn cdf_v(&self, v: f64) -> f64 {
        if self.sign > 0.0 {
            if v >= self.h {
                return 1.0;
            }
            self.cdf_s(self.s_of_v(v))
        } else {
            if v <= self.h {
                return 0.0;
            }
            self.sf_s(self.s_of_v(v))
        }
    }

    /// `π_h` in `s` coordinates: `P{ℓ(S) < ℓ(s)}`.
    pub fn possibility_s(&self, s: f64) -> f64 {
        if !(s > 0.0) || !s.is_finite() {
            return 0.0;
        }
        let level = self.log_kernel(s);
        if !level.is_finite() {
            return 0.0;
        }
        if !self.unimodal {
            return self.sublevel_mass(level);
        }
        let m = self.s_mode;
        if s == m {
            return 1.0;
        }
        let g = |w: f64| self.log_kernel(w) - level;
        let other = if s < m {
            let mut hi = 2.0 * m;
            while g(hi) > 0.0 {
                hi *= 2.0;
            }
            bisect_sign(g, m, hi)
        } else {
            // below the mode, search in ln s; ℓ ~ p ln s as s -> 0
            let gt = |t: f64| g(t.exp());
            let tm = m.ln();
            let mut step = 1.0;
            let mut lo = tm - step;
            while gt(lo) > 0.0 {
                step *= 2.0;
                lo = tm - step;
                if lo < -700.0 {
                    return (self.cdf_s(0.0) + self.sf_s(s)).min(1.0);
                }
            }
            bisect_sign(gt, tm, lo).exp()
        };
        let (a, b) = if s < other { (s, other) } else { (other, s) };
        (self.cdf_s(a) + self.sf_s(b)).min(1.0)
    }

    /// Mass of the grid cells whose midpoint lies strictly below `level`.
    fn sublevel_mass(&self, level: f64) -> f64 {
        (0..CELLS)
            .filter(|&k| self.log_kernel((self.node(k) + 0.5 * self.dt).exp()) < level)
            .map(|k| self.cum[k + 1] - self.cum[k])
            .sum::<f64>()
            .min(1.0)
    }

    /// `π_h(v)`.
    pub fn possibility_v(&self, v: f64) -> f64 {
        self.possibility_s(self.s_of_v(v))
    }

    pub fn support_interval(&self) -> Interval {
        if self.sign > 0.0 {
            Interval::new(f64::NEG_INFINITY, self.h, false, false)
        } else {
            Interval::new(self.h, f64::INFINITY, false, false)
        }
    }
}

/// Bisection between `a` (where `g > 0`) and `b` (where `g <= 0`).
fn bisect_sign<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if g(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

impl AuxiliaryDistribution for ConditionalDensity {
    fn name(&self) -> String {
        format!("curved-normal-conditional(n={}, h={}, sign={})", self.n, self.h, self.sign)
    }

    fn support(&self) -> SpaceDescriptor {
        SpaceDescriptor::Interval(self.support_interval())
    }

    fn density(&self, u: &[f64]) -> f64 {
        self.density_v(u[0])
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(self.cdf_v(x))
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Option<Vec<f64>> {
        let u: f64 = rng.random();
        Some(vec![self.v_of_s(self.quantile_s(u))])
    }

    fn mode(&self) -> Option<f64> {
        Some(self.v_mode())
    }
}

/// The reduced location-type association `y1 = θ + y2·V`, `V ~ f_h`.
#[derive(Debug, Clone)]
pub struct CurvedNormalConditional {
    pub density: Arc<ConditionalDensity>,
    pub y2: f64,
}

impl CurvedNormalConditional {
    /// Possibility contour of the conditional auxiliary `V`.
    pub fn base_contour(&self) -> PossibilityContour {
        let d = Arc::clone(&self.density);
        PossibilityContour::from_fn(self.density.support(), move |v| d.possibility_v(v))
            .with_mode(self.density.v_mode())
            .with_shape(Shape::Unimodal)
            .with_tails(TailLimits { lower: Some(0.0), upper: Some(0.0) })
    }
}

impl Association for CurvedNormalConditional {
    fn aux(&self) -> Arc<dyn AuxiliaryDistribution> {
        self.density.clone()
    }

    fn param_domain(&self) -> Interval {
        Interval::real_line()
    }

    fn solve_u(&self, y: &[f64], theta: f64) -> Vec<Vec<f64>> {
        if !(self.density.sign * theta > 0.0) {
            return Vec::new();
        }
        vec![vec![(y[0] - theta) / y[1]]]
    }

    fn solve_theta(&self, y: &[f64], u: &[f64]) -> Option<f64> {
        let theta = y[0] - y[1] * u[0];
        (self.density.sign * theta > 0.0).then_some(theta)
    }

    fn simulate(&self, theta: f64, u: &[f64]) -> Vec<f64> {
        vec![theta + self.y2 * u[0], self.y2]
    }

    fn posterior_hints(&self, y: &[f64]) -> ContourHints {
        ContourHints {
            shape: Shape::Unimodal,
            mode: Some(self.density.sign * y[1] / self.density.s_mode()),
            tails: TailLimits { lower: Some(0.0), upper: Some(0.0) },
        }
    }
}

/// Conditional posterior contour `ϑ ↦ π_h((y1 - ϑ)/y2)`; zero on the excluded sign.
pub fn curved_normal_posterior_contour(
    model: &CurvedNormalModel,
    reduction: &CurvedNormalReduction,
) -> Result<PosteriorContour> {
    let density = Arc::new(ConditionalDensity::new(model, reduction.h)?);
    let assoc = CurvedNormalConditional { density, y2: reduction.y2 };
    let base = assoc.base_contour();
    Ok(posterior_contour(Arc::new(assoc), &[reduction.y1, reduction.y2], base))
}
