//! Empirical checks that a sample in `[0,1]` is stochastically no smaller
//! (or no larger) than `Unif(0,1)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of points on the default α-grid `0, 0.001, ..., 1`.
pub const ALPHA_GRID_POINTS: usize = 1001;

pub fn default_alpha_grid() -> Vec<f64> {
    (0..ALPHA_GRID_POINTS).map(|k| k as f64 / (ALPHA_GRID_POINTS - 1) as f64).collect()
}

/// Dvoretzky–Kiefer–Wolfowitz half-width `sqrt(ln(2/δ) / (2n))`.
pub fn dkw_band(n: usize, delta: f64) -> f64 {
    ((2.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Empirical CDF `#{x <= a} / n` on each grid point.
pub fn ecdf_on_grid(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter().map(|&a| sorted.partition_point(|&x| x <= a) as f64 / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceReport {
    pub max_violation: f64,
    pub pass: bool,
}

fn check_unit(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Data("empty sample".into()));
    }
    if let Some(bad) = samples.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Data(format!("value {bad} outside [0,1]")));
    }
    Ok(())
}

/// `max_α (ECDF(α) - α)` on the 1001-point grid; passes when it is at most `tolerance`.
pub fn dominance_check(samples: &[f64], tolerance: f64) -> Result<DominanceReport> {
    check_unit(samples)?;
    let grid = default_alpha_grid();
    let cdf = ecdf_on_grid(samples, &grid);
    let max_violation = cdf.iter().zip(&grid).map(|(c, a)| c - a).fold(f64::NEG_INFINITY, f64::max);
    Ok(DominanceReport { max_violation, pass: max_violation <= tolerance })
}

/// The mirror check for necessities of false assertions: `max_α (α - ECDF(α))`.
pub fn dominated_check(samples: &[f64], tolerance: f64) -> Result<DominanceReport> {
    check_unit(samples)?;
    let grid = default_alpha_grid();
    let cdf = ecdf_on_grid(samples, &grid);
    let max_violation = cdf.iter().zip(&grid).map(|(c, a)| a - c).fold(f64::NEG_INFINITY, f64::max);
    Ok(DominanceReport { max_violation, pass: max_violation <= tolerance })
}

/// Exact two-sided Kolmogorov–Smirnov distance from `Unif(0,1)`.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max)
}
