//! Asymmetric Laplace law of `U1 - c·U2` for independent exponentials.

/// `F_{r1,r2}(x)`: decays at rate `r1` on the right, `r2` on the left.
pub fn asymmetric_laplace_cdf(r1: f64, r2: f64, x: f64) -> f64 {
    if !(r1 > 0.0 && r2 > 0.0) {
        return f64::NAN;
    }
    if x >= 0.0 {
        1.0 - r2 / (r1 + r2) * (-r1 * x).exp()
    } else {
        r1 / (r1 + r2) * (r2 * x).exp()
    }
}

pub fn asymmetric_laplace_quantile(r1: f64, r2: f64, p: f64) -> f64 {
    let at_zero = r1 / (r1 + r2);
    if p < at_zero {
        (p * (r1 + r2) / r1).ln() / r2
    } else {
        -((1.0 - p) * (r1 + r2) / r2).ln() / r1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continuity_at_zero() {
        let (r1, r2) = (5.0, 0.5);
        let left = r1 / (r1 + r2) * (r2 * -1e-300f64).exp();
        assert!((asymmetric_laplace_cdf(r1, r2, 0.0) - r1 / (r1 + r2)).abs() < 1e-15);
        assert!((left - asymmetric_laplace_cdf(r1, r2, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn left_branch_value() {
        // (5 / 5.5) e^{-1.8}
        let v = asymmetric_laplace_cdf(5.0, 0.5, -3.6);
        assert!((v - 5.0 / 5.5 * (-1.8f64).exp()).abs() < 1e-15);
        assert!((v - 0.1503).abs() < 5e-5);
    }

    #[test]
    fn limits_and_quantile() {
        assert_eq!(asymmetric_laplace_cdf(2.0, 3.0, 1e6), 1.0);
        assert_eq!(asymmetric_laplace_cdf(2.0, 3.0, -1e6), 0.0);
        assert!(asymmetric_laplace_cdf(0.0, 1.0, 0.0).is_nan());
        for p in [0.01, 0.2, 0.4, 0.5, 0.9, 0.999] {
            let x = asymmetric_laplace_quantile(2.0, 3.0, p);
            assert!((asymmetric_laplace_cdf(2.0, 3.0, x) - p).abs() < 1e-12);
        }
    }
}
