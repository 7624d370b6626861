//! Fading channel statistics.
//!
//! Static distributions for block (slow) fading, where a whole session sees a
//! single channel realization, plus a time-correlated Rayleigh process in
//! [`doppler`] for waiting-time questions.

mod doppler;

pub use doppler::{
    first_passage_time, sample_gain_process, DopplerProcess, DopplerSpec, GainTrace, Passage,
};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::montecarlo::McRng;

/// Noise power spectral density assumed when a spec is built from an average
/// SNR, where it never enters a computation.
pub const DEFAULT_NOISE_PSD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FadingFamily {
    Rayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combining {
    Selection,
}

/// Mean of the fading distribution: either a received SNR or a channel power
/// gain. Both are linear and dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AverageLevel {
    Snr(f64),
    Gain(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingSpec {
    pub family: FadingFamily,
    pub average: AverageLevel,
    pub bandwidth_hz: f64,
    /// Watts per hertz.
    pub noise_psd: f64,
    pub diversity_order: u32,
    pub combining: Combining,
}

impl FadingSpec {
    /// Single-branch Rayleigh channel described by its average received SNR.
    pub fn rayleigh_snr(avg_snr_linear: f64, bandwidth_hz: f64) -> Result<Self> {
        Self {
            family: FadingFamily::Rayleigh,
            average: AverageLevel::Snr(avg_snr_linear),
            bandwidth_hz,
            noise_psd: DEFAULT_NOISE_PSD,
            diversity_order: 1,
            combining: Combining::Selection,
        }
        .validated()
    }

    /// Single-branch Rayleigh channel described by its average power gain.
    pub fn rayleigh_gain(avg_gain: f64, bandwidth_hz: f64, noise_psd: f64) -> Result<Self> {
        Self {
            family: FadingFamily::Rayleigh,
            average: AverageLevel::Gain(avg_gain),
            bandwidth_hz,
            noise_psd,
            diversity_order: 1,
            combining: Combining::Selection,
        }
        .validated()
    }

    /// Same channel observed through `branches` i.i.d. branches with selection
    /// combining.
    pub fn with_branches(self, branches: u32) -> Result<Self> {
        Self { diversity_order: branches, ..self }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let level = match self.average {
            AverageLevel::Snr(v) | AverageLevel::Gain(v) => v,
        };
        if !(level > 0.0 && level.is_finite()) {
            return domain(format!("average level must be positive and finite, got {level}"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return domain(format!("bandwidth_hz must be positive, got {}", self.bandwidth_hz));
        }
        if !(self.noise_psd > 0.0 && self.noise_psd.is_finite()) {
            return domain(format!("noise_psd must be positive, got {}", self.noise_psd));
        }
        if self.diversity_order == 0 {
            return domain("diversity_order must be at least 1");
        }
        Ok(self)
    }

    pub fn avg_snr(&self) -> Result<f64> {
        match self.average {
            AverageLevel::Snr(v) => Ok(v),
            AverageLevel::Gain(_) => domain("channel is specified by average gain, not SNR"),
        }
    }

    pub fn avg_gain(&self) -> Result<f64> {
        match self.average {
            AverageLevel::Gain(v) => Ok(v),
            AverageLevel::Snr(_) => domain("channel is specified by average SNR, not gain"),
        }
    }
}

fn check_level(x: f64, what: &str) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return domain(format!("{what} must be nonnegative, got {x}"));
    }
    Ok(())
}

/// `P(γ ≤ x)` for the post-combining SNR: `(1 - e^{-x/γ̄})^L`.
pub fn snr_cdf(spec: &FadingSpec, x: f64) -> Result<f64> {
    check_level(x, "SNR")?;
    let avg = spec.avg_snr()?;
    let branch = -(-x / avg).exp_m1();
    Ok(branch.powi(spec.diversity_order as i32))
}

/// One post-combining SNR draw: `γ̄` times the largest of `L` unit exponentials.
pub(crate) fn draw_snr(avg_snr: f64, branches: u32, rng: &mut McRng) -> f64 {
    let mut best: f64 = 0.0;
    for _ in 0..branches {
        let e: f64 = rng.sample(Exp1);
        best = best.max(e);
    }
    avg_snr * best
}

/// `n` i.i.d. post-combining SNR draws, reproducible from `seed`.
pub fn sample_snr(spec: &FadingSpec, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return domain("sample_snr requires n >= 1");
    }
    let avg = spec.avg_snr()?;
    let mut rng = crate::montecarlo::stream_rng(seed, 0);
    Ok((0..n).map(|_| draw_snr(avg, spec.diversity_order, &mut rng)).collect())
}

/// `P(g ≤ x) = 1 - e^{-x/ḡ}` for a single Rayleigh branch.
pub fn gain_cdf(spec: &FadingSpec, g: f64) -> Result<f64> {
    check_level(g, "gain")?;
    if spec.diversity_order > 1 {
        return Err(Error::Unsupported(
            "gain_cdf models a single branch; diversity_order must be 1".into(),
        ));
    }
    let avg = spec.avg_gain()?;
    Ok(-(-g / avg).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::binomial_ci;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn empirical_within_ci(samples: &[f64], x: f64, want: f64) -> bool {
        let below = samples.iter().filter(|&&s| s <= x).count() as u64;
        binomial_ci(below, samples.len() as u64, 0.99).unwrap().contains(want)
    }

    #[test]
    fn snr_cdf_examples() {
        let ch = FadingSpec::rayleigh_snr(10.0, 2e5).unwrap();
        assert_eq!(snr_cdf(&ch, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(snr_cdf(&ch, 10.0).unwrap(), 0.632121, epsilon = 1e-6);
        let ch = FadingSpec::rayleigh_snr(100.0, 2e5).unwrap().with_branches(2).unwrap();
        assert_abs_diff_eq!(snr_cdf(&ch, 4.65685).unwrap(), 0.0020703, epsilon = 1e-6);
        assert_eq!(snr_cdf(&ch, f64::INFINITY).unwrap(), 1.0);
        assert!(snr_cdf(&ch, -1.0).is_err());
    }

    #[test]
    fn snr_samples_match_closed_form() {
        let ch = FadingSpec::rayleigh_snr(10.0, 2e5).unwrap();
        let s = sample_snr(&ch, 11, 1_000_000).unwrap();
        assert!(empirical_within_ci(&s, 10.0, 0.632121));

        let ch3 = ch.with_branches(3).unwrap();
        let s = sample_snr(&ch3, 12, 1_000_000).unwrap();
        for x in [1.0, 5.0, 10.0, 30.0] {
            assert!(empirical_within_ci(&s, x, snr_cdf(&ch3, x).unwrap()), "x={x}");
        }
    }

    #[test]
    fn sample_snr_rejects_empty_and_is_reproducible() {
        let ch = FadingSpec::rayleigh_snr(10.0, 2e5).unwrap();
        assert!(sample_snr(&ch, 1, 0).is_err());
        assert_eq!(sample_snr(&ch, 5, 1000).unwrap(), sample_snr(&ch, 5, 1000).unwrap());
        assert_ne!(sample_snr(&ch, 5, 1000).unwrap(), sample_snr(&ch, 6, 1000).unwrap());
    }

    #[test]
    fn gain_cdf_examples() {
        let ch = FadingSpec::rayleigh_gain(0.1, 2e5, 1e-7).unwrap();
        assert_eq!(gain_cdf(&ch, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(gain_cdf(&ch, 0.2).unwrap(), 0.864665, epsilon = 1e-6);
        assert_abs_diff_eq!(gain_cdf(&ch, 0.1).unwrap(), 0.632121, epsilon = 1e-6);
        let div = ch.with_branches(2).unwrap();
        assert!(matches!(gain_cdf(&div, 0.1), Err(Error::Unsupported(_))));
        assert!(snr_cdf(&ch, 1.0).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(FadingSpec::rayleigh_snr(0.0, 2e5).is_err());
        assert!(FadingSpec::rayleigh_snr(10.0, -1.0).is_err());
        assert!(FadingSpec::rayleigh_gain(0.1, 2e5, 0.0).is_err());
        assert!(FadingSpec::rayleigh_snr(10.0, 2e5).unwrap().with_branches(0).is_err());
    }

    proptest! {
        #[test]
        fn cdfs_are_monotone_probabilities(avg in 0.01f64..1e3, a in 0.0f64..1e4, b in 0.0f64..1e4, l in 1u32..20) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let ch = FadingSpec::rayleigh_snr(avg, 1.0).unwrap().with_branches(l).unwrap();
            let (clo, chi) = (snr_cdf(&ch, lo).unwrap(), snr_cdf(&ch, hi).unwrap());
            prop_assert!((0.0..=1.0).contains(&clo) && (0.0..=1.0).contains(&chi));
            prop_assert!(clo <= chi);
            let g = FadingSpec::rayleigh_gain(avg, 1.0, 1.0).unwrap();
            prop_assert!(gain_cdf(&g, lo).unwrap() <= gain_cdf(&g, hi).unwrap());
        }

        #[test]
        fn selection_combining_is_power_of_single_branch(avg in 0.01f64..1e3, x in 0.0f64..1e3, l in 1u32..30) {
            let one = FadingSpec::rayleigh_snr(avg, 1.0).unwrap();
            let many = one.with_branches(l).unwrap();
            prop_assert_eq!(snr_cdf(&many, x).unwrap(), snr_cdf(&one, x).unwrap().powi(l as i32));
        }
    }

    #[test]
    fn cdfs_approach_one() {
        let ch = FadingSpec::rayleigh_snr(10.0, 1.0).unwrap().with_branches(4).unwrap();
        assert!(snr_cdf(&ch, 1e3).unwrap() > 1.0 - 1e-12);
        let g = FadingSpec::rayleigh_gain(0.1, 1.0, 1.0).unwrap();
        assert!(gain_cdf(&g, 10.0).unwrap() > 1.0 - 1e-12);
    }
}
