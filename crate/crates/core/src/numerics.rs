//! Root finding, quadrature and 1-D maximization used throughout the crate.

use crate::error::{Error, Result};

/// Bisection on `[a, b]` for a sign change of `f`. Stops when the bracket is
/// narrower than `tol` (absolute).
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() || fa.is_infinite()) || fa.signum() == fb.signum() {
        return Err(Error::Numeric(format!(
            "bisection needs a sign change on [{a}, {b}] (f(a)={fa}, f(b)={fb})"
        )));
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Locate the crossing of a predicate between `inside` (predicate true) and
/// `outside` (predicate false), to absolute tolerance `tol`.
pub fn bisect_boundary<P: Fn(f64) -> bool>(pred: P, mut inside: f64, mut outside: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        if (outside - inside).abs() <= tol {
            break;
        }
        let m = 0.5 * (inside + outside);
        if m == inside || m == outside {
            break;
        }
        if pred(m) {
            inside = m;
        } else {
            outside = m;
        }
    }
    0.5 * (inside + outside)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and error estimate against the embedded 7-point Gauss rule.
pub fn gauss_kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric("integrate() needs finite limits; use integrate_mapped".into()));
    }
    let (v, e) = gauss_kronrod15(&f, a, b);
    let mut segments = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    for _ in 0..2000 {
        if !total.is_finite() {
            return Err(Error::Numeric(format!("non-finite integral on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, v0, e0) = segments.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod15(&f, lo, mid);
        let (v2, e2) = gauss_kronrod15(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Numeric(format!("non-finite integral on [{a}, {b}]")))
    }
}

/// Integrate over a possibly infinite interval by mapping onto a finite one.
pub fn integrate_mapped<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    mapped_dyn(&f, a, b, abs_tol, rel_tol)
}

fn mapped_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate(f, a, b, abs_tol, rel_tol),
        (true, false) => integrate(
            |t: f64| {
                let one_minus = 1.0 - t;
                if one_minus <= 0.0 {
                    return 0.0;
                }
                let x = a + t / one_minus;
                f(x) / (one_minus * one_minus)
            },
            0.0,
            1.0,
            abs_tol,
            rel_tol,
        ),
        (false, true) => mapped_dyn(&|x: f64| f(-x), -b, f64::INFINITY, abs_tol, rel_tol),
        (false, false) => {
            let left = mapped_dyn(f, f64::NEG_INFINITY, 0.0, abs_tol / 2.0, rel_tol)?;
            let right = mapped_dyn(f, 0.0, f64::INFINITY, abs_tol / 2.0, rel_tol)?;
            Ok(left + right)
        }
    }
}

/// Golden-section search for a maximum of `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert_relative_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-11);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn quadrature_of_gaussian_and_heavy_tail() {
        let g = integrate_mapped(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-12, 1e-10)
            .unwrap();
        assert_relative_eq!(g, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-9);
        let c = integrate_mapped(|x| 1.0 / (1.0 + x * x), 1.0, f64::INFINITY, 1e-12, 1e-10).unwrap();
        assert_relative_eq!(c, std::f64::consts::FRAC_PI_4, max_relative = 1e-9);
    }

    #[test]
    fn quadrature_of_polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert_relative_eq!(v, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn golden_section_peak() {
        let (x, fx) = golden_max(|x| -(x - 0.3).powi(2), -5.0, 5.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8 && fx <= 0.0);
    }
}
