//! Quadrature, root finding, regression and confidence bounds.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};

/// Composite Gauss-Legendre rule with equal panels.
#[derive(Debug, Clone)]
pub struct CompositeGaussLegendre {
    panels: usize,
    pairs: Vec<(f64, f64)>,
}

impl CompositeGaussLegendre {
    /// Rule with `panels` equal panels of `order` nodes each.
    pub fn new(panels: usize, order: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).expect("nonzero order");
        let rule = GaussLegendre::new(order);
        Self {
            panels: panels.max(1),
            pairs: rule.as_node_weight_pairs().to_vec(),
        }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let mut s = 0.0;
            for &(x, w) in &self.pairs {
                s += w * f(mid + 0.5 * h * x);
            }
            total += 0.5 * h * s;
        }
        total
    }
}

/// Root of a function with a sign change on `[lo, hi]` by bisection refined with secant steps.
///
/// Each iteration tries a secant step from the current bracket and falls back to
/// bisection when the step leaves the bracket or fails to shrink it by half.
pub fn bisect_secant<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    for _ in 0..max_iter {
        let width = hi - lo;
        let secant = hi - fhi * (hi - lo) / (fhi - flo);
        let mid = 0.5 * (lo + hi);
        let x = if secant.is_finite() && secant > lo && secant < hi {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if hi - lo > 0.5 * width {
            let m = 0.5 * (lo + hi);
            let fm = f(m);
            if fm.abs() <= ftol {
                return Ok(m);
            }
            if fm.signum() == flo.signum() {
                lo = m;
                flo = fm;
            } else {
                hi = m;
                fhi = fm;
            }
        }
        if hi - lo <= xtol {
            return Ok(if flo.abs() < fhi.abs() { lo } else { hi });
        }
    }
    Err(Error::Numeric(format!(
        "root finder did not converge in {max_iter} iterations"
    )))
}

/// Ordinary least-squares line through `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

/// Least-squares fit of `y = intercept + slope * x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Domain(
            "linear fit needs at least two paired points".into(),
        ));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("linear fit with constant abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// One-sided Clopper-Pearson upper confidence bound for a binomial proportion.
///
/// `trials` may be fractional (an effective sample size).
pub fn clopper_pearson_upper(successes: f64, trials: f64, confidence: f64) -> f64 {
    if trials <= 0.0 {
        return 1.0;
    }
    let alpha = 1.0 - confidence;
    if successes <= 0.0 {
        return 1.0 - alpha.powf(1.0 / trials);
    }
    if successes >= trials {
        return 1.0;
    }
    match Beta::new(successes + 1.0, trials - successes) {
        Ok(b) => b.inverse_cdf(1.0 - alpha),
        Err(_) => 1.0,
    }
}

/// Minimiser of a function of two variables by compass search with shrinking steps.
pub fn compass_minimise<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    start: (f64, f64),
    initial_step: f64,
    min_step: f64,
) -> ((f64, f64), f64) {
    let mut best = start;
    let mut fbest = f(start.0, start.1);
    let mut step = initial_step;
    let dirs = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (
            std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        ),
        (
            -std::f64::consts::FRAC_1_SQRT_2,
            std::f64::consts::FRAC_1_SQRT_2,
        ),
        (
            std::f64::consts::FRAC_1_SQRT_2,
            -std::f64::consts::FRAC_1_SQRT_2,
        ),
        (
            -std::f64::consts::FRAC_1_SQRT_2,
            -std::f64::consts::FRAC_1_SQRT_2,
        ),
    ];
    while step > min_step {
        let mut improved = false;
        for (dx, dy) in dirs {
            let cand = (best.0 + step * dx, best.1 + step * dy);
            let fc = f(cand.0, cand.1);
            if fc < fbest {
                best = cand;
                fbest = fc;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, fbest)
}

/// Numerically stable `log(sum(exp(x)))`.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn composite_rule_integrates_polynomials_and_exponentials() {
        let q = CompositeGaussLegendre::new(7, 5);
        assert_abs_diff_eq!(q.integrate(0.0, 2.0, |x| x.powi(9)), 102.4, epsilon = 1e-11);
        assert_abs_diff_eq!(
            q.integrate(-1.0, 3.0, f64::exp),
            3f64.exp() - (-1f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn root_finder_matches_closed_form() {
        let r = bisect_secant(|x| x * x - 2.0, 0.0, 3.0, 1e-15, 0.0, 200).unwrap();
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-14);
        let r = bisect_secant(|x| (x - 1.0).powi(3), -4.0, 10.0, 1e-13, 0.0, 500).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
        assert!(bisect_secant(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0, 50).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 2.0 * v).collect();
        let fit = linear_fit(&x, &y).unwrap();
        assert_abs_diff_eq!(fit.slope, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.intercept, 3.0, epsilon = 1e-13);
        assert!(fit.slope_stderr < 1e-12);
    }

    #[test]
    fn clopper_pearson_zero_hits_closed_form() {
        let u = clopper_pearson_upper(0.0, 1000.0, 0.95);
        assert_abs_diff_eq!(u, 1.0 - 0.05f64.powf(1e-3), epsilon = 1e-15);
        let u = clopper_pearson_upper(5.0, 100.0, 0.95);
        assert!(u > 0.05 && u < 0.2);
    }

    #[test]
    fn compass_search_finds_quadratic_minimum() {
        let ((x, y), v) = compass_minimise(
            |x, y| (x - 1.5).powi(2) + 2.0 * (y + 0.5).powi(2),
            (0.0, 0.0),
            1.0,
            1e-10,
        );
        assert_abs_diff_eq!(x, 1.5, epsilon = 1e-8);
        assert_abs_diff_eq!(y, -0.5, epsilon = 1e-8);
        assert!(v < 1e-15);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert_abs_diff_eq!(
            log_sum_exp(&[1000.0, 1000.0]),
            1000.0 + 2f64.ln(),
            epsilon = 1e-12
        );
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
