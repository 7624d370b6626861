//! Scalar numerics: exponential integral, bracketed bisection and Wilson
//! score intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{domain, Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Argument at which [`exp_integral_e1`] switches from the power series to
/// the continued fraction.
pub const E1_CROSSOVER: f64 = 1.0;

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
///
/// For `x <= 1` the convergent series `-γ - ln x - Σ (-x)^k / (k·k!)` is
/// summed; above that the continued fraction is evaluated with the modified
/// Lentz algorithm. Results that underflow (`x` beyond roughly 700) come back
/// as `0.0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return domain(format!("E1 requires x > 0, got {x}"));
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= E1_CROSSOVER {
        Ok(e1_series(x))
    } else {
        Ok(e1_continued_fraction(x))
    }
}

fn e1_series(x: f64) -> f64 {
    // term_k = (-x)^k / k!
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < f64::EPSILON * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    h * (-x).exp()
}

/// Search interval and stopping rule for [`find_root_monotone`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lo: f64,
    pub hi: f64,
    pub tol_abs: f64,
    pub max_iter: usize,
}

impl RootBracket {
    pub fn new(lo: f64, hi: f64, tol_abs: f64) -> Result<Self> {
        Self::with_max_iter(lo, hi, tol_abs, 200)
    }

    pub fn with_max_iter(lo: f64, hi: f64, tol_abs: f64, max_iter: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return domain(format!("bracket requires finite lo < hi, got [{lo}, {hi}]"));
        }
        if !(tol_abs > 0.0) {
            return domain(format!("tol_abs must be positive, got {tol_abs}"));
        }
        if max_iter == 0 {
            return domain("max_iter must be at least 1");
        }
        Ok(Self { lo, hi, tol_abs, max_iter })
    }
}

/// Plain bisection. Returns the midpoint of the first bracket whose width is
/// at most `tol_abs` (or an exact zero met on the way).
pub fn find_root_monotone<F>(f: F, bracket: RootBracket) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let RootBracket { mut lo, mut hi, tol_abs, max_iter } = bracket;
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracket { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol_abs {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol_abs {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::Convergence { iterations: max_iter, lo, hi })
}

/// Two-sided confidence interval on a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Wilson score interval for `successes` out of `trials` Bernoulli draws.
pub fn binomial_ci(successes: u64, trials: u64, level: f64) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("confidence level must lie in (0, 1), got {level}"));
    }
    if trials == 0 {
        return domain("binomial_ci requires at least one trial");
    }
    if successes > trials {
        return domain(format!("successes {successes} exceed trials {trials}"));
    }
    let z = standard_normal_quantile(0.5 + 0.5 * level);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2n = z * z / n;
    let denom = 1.0 + z2n;
    let center = (p + 0.5 * z2n) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();

    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == trials { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(ConfidenceInterval { lo, hi, level })
}

fn standard_normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::integrate;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// E1 via the substitution t = x·e^v, which turns the defining integral
    /// into the smooth ∫_0^∞ exp(-x e^v) dv.
    fn e1_quadrature(x: f64) -> f64 {
        let upper = (60.0 / x).ln().max(1.0);
        integrate(|v| (-x * v.exp()).exp(), 0.0, upper, 1e-14)
    }

    #[test]
    fn e1_reference_values() {
        assert_abs_diff_eq!(exp_integral_e1(1.0).unwrap(), 0.219383934396, epsilon = 1e-11);
        assert_abs_diff_eq!(exp_integral_e1(10.0).unwrap(), 4.15697e-6, epsilon = 1e-10);
        let tiny = exp_integral_e1(1e-8).unwrap();
        assert_abs_diff_eq!(tiny, 17.8435, epsilon = 1e-3);
        assert_abs_diff_eq!(tiny, -EULER_GAMMA - 1e-8f64.ln(), epsilon = 1e-7);
    }

    #[test]
    fn e1_matches_quadrature_across_seam() {
        let xs = [1e-8, 1e-4, 0.01, 0.3, 0.9, 0.999, 1.0, 1.001, 1.1, 2.0, 5.0, 12.0, 30.0, 50.0];
        for &x in &xs {
            let got = exp_integral_e1(x).unwrap();
            let want = e1_quadrature(x);
            assert!((got - want).abs() < 1e-12, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn e1_domain_and_underflow() {
        assert!(matches!(exp_integral_e1(0.0), Err(Error::Domain(_))));
        assert!(matches!(exp_integral_e1(-1.0), Err(Error::Domain(_))));
        assert!(exp_integral_e1(f64::NAN).is_err());
        assert_eq!(exp_integral_e1(800.0).unwrap(), 0.0);
        assert_eq!(exp_integral_e1(f64::INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn e1_strictly_decreasing_on_log_grid() {
        let mut prev = f64::INFINITY;
        for k in 0..=200 {
            let x = 10f64.powf(-8.0 + k as f64 * (9.7 / 200.0));
            let v = exp_integral_e1(x).unwrap();
            assert!(v < prev, "not decreasing at x={x}");
            prev = v;
        }
    }

    #[test]
    fn e1_recurrence_against_quadrature() {
        // E2(x) = e^{-x} - x·E1(x); check against ∫_1^∞ e^{-xs}/s² ds.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let x: f64 = rng.random_range(0.01..20.0);
            let e2 = (-x).exp() - x * exp_integral_e1(x).unwrap();
            // s = e^v: ∫_0^∞ exp(-x e^v - v) dv
            let upper = (60.0 / x).ln().max(1.0);
            let quad = integrate(|v| (-x * v.exp() - v).exp(), 0.0, upper, 1e-14);
            assert!((e2 - quad).abs() < 1e-9, "x={x}: {e2} vs {quad}");
        }
    }

    #[test]
    fn root_examples() {
        let b = RootBracket::new(0.0, 2.0, 1e-12).unwrap();
        assert_abs_diff_eq!(find_root_monotone(|x| x - 1.0, b).unwrap(), 1.0, epsilon = 1e-12);
        let b = RootBracket::new(0.0, 2.0, 1e-10).unwrap();
        let r = find_root_monotone(|x| (-x).exp() - 0.5, b).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::LN_2, epsilon = 1e-10);
        let b = RootBracket::new(1.0, 2.0, 1e-10).unwrap();
        let r = find_root_monotone(|x| x * x - 2.0, b).unwrap();
        assert_abs_diff_eq!(r, std::f64::consts::SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn root_errors() {
        let b = RootBracket::new(2.0, 3.0, 1e-12).unwrap();
        assert!(matches!(find_root_monotone(|x| x - 1.0, b), Err(Error::Bracket { .. })));
        let b = RootBracket::with_max_iter(0.0, 2.0, 1e-12, 5).unwrap();
        match find_root_monotone(|x| x - 1.3, b) {
            Err(Error::Convergence { iterations, lo, hi }) => {
                assert_eq!(iterations, 5);
                assert!(lo <= 1.3 && 1.3 <= hi);
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
        assert!(RootBracket::new(1.0, 1.0, 1e-3).is_err());
        assert!(RootBracket::new(0.0, 1.0, 0.0).is_err());
        assert!(RootBracket::with_max_iter(0.0, 1.0, 1e-3, 0).is_err());
    }

    #[test]
    fn wilson_examples() {
        let ci = binomial_ci(0, 100, 0.95).unwrap();
        assert_eq!(ci.lo, 0.0);
        let ci = binomial_ci(50, 100, 0.95).unwrap();
        assert_abs_diff_eq!(ci.lo, 0.4038, epsilon = 1e-3);
        assert_abs_diff_eq!(ci.hi, 0.5962, epsilon = 1e-3);
        let ci = binomial_ci(100, 100, 0.95).unwrap();
        assert_eq!(ci.hi, 1.0);
        assert!(binomial_ci(1, 2, 1.0).is_err());
        assert!(binomial_ci(1, 2, 0.0).is_err());
        assert!(binomial_ci(3, 2, 0.5).is_err());
        assert!(binomial_ci(0, 0, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn root_inside_bracket_and_stable_under_tighter_tol(
            root in -5.0f64..5.0,
            slope in 0.1f64..10.0,
            tol_exp in 3i32..12,
        ) {
            let f = |x: f64| slope * (x - root);
            let tol = 10f64.powi(-tol_exp);
            let b = RootBracket::new(-6.0, 6.0, tol).unwrap();
            let coarse = find_root_monotone(f, b).unwrap();
            prop_assert!((-6.0..=6.0).contains(&coarse));
            let fine = find_root_monotone(f, RootBracket { tol_abs: tol / 8.0, ..b }).unwrap();
            prop_assert!((coarse - fine).abs() <= tol);
        }

        #[test]
        fn wilson_contains_point_estimate_and_widens(
            trials in 1u64..5000,
            frac in 0.0f64..=1.0,
            level in 0.5f64..0.98,
        ) {
            let successes = ((trials as f64) * frac).round() as u64;
            let p = successes as f64 / trials as f64;
            let narrow = binomial_ci(successes, trials, level).unwrap();
            let wide = binomial_ci(successes, trials, level + 0.01).unwrap();
            prop_assert!(narrow.contains(p));
            prop_assert!(0.0 <= narrow.lo && narrow.hi <= 1.0);
            prop_assert!(wide.lo <= narrow.lo && wide.hi >= narrow.hi);
        }
    }
}
