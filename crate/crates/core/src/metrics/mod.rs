//! Data-oriented session metrics.
//!
//! Delay side: minimum transmission time (MTT) of `H` bits over one channel
//! realization and the delay outage rate `DOR(T) = P(MTT > T)`. Energy side:
//! minimum energy consumption (MEC) under truncated channel inversion and the
//! energy outage rate `EOR(E) = P(MEC > E)`. Waiting-time and delivery-time
//! distributions cover the time spent before CPA is allowed to transmit.
//!
//! Every outage probability has a closed form and an independent Monte Carlo
//! estimator that shares no code with it beyond the strategy rate laws.

mod curve;
mod delay;
mod energy;
mod waiting;

pub use curve::{format_f64, write_csv, write_json, Curve, CurveDocument, CurveKind, CurvePoint, Method, CSV_COLUMNS};
pub use delay::{
    dor_closed_form, dor_monte_carlo, prob_no_transmission, required_avg_snr, required_avg_snr_bisect,
    required_diversity_order,
};
pub use energy::{
    cpa_energy_per_bit, cpa_tradeoff_table, eor_closed_form, eor_monte_carlo, mec, peak_session_energy, TradeoffRow,
};
pub use waiting::{
    average_fade_duration, delivery_time_cdf, sample_waiting_times, waiting_time_cdf_lcr, waiting_time_cdf_mc,
};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::strategy::Strategy;

/// Bits to deliver plus the threshold under test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub data_bits: f64,
    pub threshold: Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Threshold {
    DelaySeconds(f64),
    EnergyJoules(f64),
}

impl SessionSpec {
    pub fn delay(data_bits: f64, delay_threshold_s: f64) -> Result<Self> {
        Self { data_bits, threshold: Threshold::DelaySeconds(delay_threshold_s) }.validated()
    }

    pub fn energy(data_bits: f64, energy_threshold_j: f64) -> Result<Self> {
        Self { data_bits, threshold: Threshold::EnergyJoules(energy_threshold_j) }.validated()
    }

    fn validated(self) -> Result<Self> {
        check_data_bits(self.data_bits)?;
        let (Threshold::DelaySeconds(v) | Threshold::EnergyJoules(v)) = self.threshold;
        if !(v > 0.0) {
            return domain(format!("threshold must be positive, got {v}"));
        }
        Ok(self)
    }
}

pub(crate) fn check_data_bits(data_bits: f64) -> Result<()> {
    if data_bits >= 0.0 && data_bits.is_finite() {
        Ok(())
    } else {
        domain(format!("data_bits must be finite and nonnegative, got {data_bits}"))
    }
}

pub(crate) fn check_positive(value: f64, what: &str) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        domain(format!("{what} must be positive, got {value}"))
    }
}

/// A duration that may be infinite because the strategy never transmits.
/// `Never` orders above every finite duration.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum DurationOrNever {
    Finite(f64),
    Never,
}

impl DurationOrNever {
    pub fn seconds(&self) -> Option<f64> {
        match *self {
            DurationOrNever::Finite(s) => Some(s),
            DurationOrNever::Never => None,
        }
    }

    pub fn exceeds(&self, limit_s: f64) -> bool {
        *self > DurationOrNever::Finite(limit_s)
    }
}

/// Spectral-efficiency load `c = H/(W·T)` in bit/s/Hz.
pub fn spectral_load(data_bits: f64, bandwidth_hz: f64, delay_threshold_s: f64) -> f64 {
    data_bits / (bandwidth_hz * delay_threshold_s)
}

/// Time to push `data_bits` through one realization at SNR `snr`.
pub fn mtt(strategy: &Strategy, snr: f64, bandwidth_hz: f64, data_bits: f64) -> Result<DurationOrNever> {
    check_data_bits(data_bits)?;
    if data_bits == 0.0 {
        return Ok(DurationOrNever::Finite(0.0));
    }
    let rate = strategy.rate(snr, bandwidth_hz)?;
    Ok(if rate > 0.0 { DurationOrNever::Finite(data_bits / rate) } else { DurationOrNever::Never })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::opra_cutoff;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mtt_examples() {
        let t = mtt(&Strategy::Cra, 3.0, 2e5, 2e4).unwrap();
        assert_abs_diff_eq!(t.seconds().unwrap(), 0.05, epsilon = 1e-15);
        let opra = Strategy::Opra(opra_cutoff(10.0).unwrap());
        for s in [&Strategy::Cra, &opra] {
            assert_eq!(mtt(s, 0.0, 2e5, 0.0).unwrap(), DurationOrNever::Finite(0.0));
        }
        assert_eq!(mtt(&opra, 0.5, 2e5, 2e4).unwrap(), DurationOrNever::Never);
        assert_eq!(mtt(&Strategy::Cra, 0.0, 2e5, 1.0).unwrap(), DurationOrNever::Never);
        assert!(mtt(&Strategy::Cra, 1.0, 2e5, -1.0).is_err());
    }

    #[test]
    fn never_exceeds_everything() {
        assert!(DurationOrNever::Never > DurationOrNever::Finite(f64::MAX));
        assert!(DurationOrNever::Never.exceeds(f64::INFINITY));
        assert!(DurationOrNever::Finite(2.0) > DurationOrNever::Finite(1.0));
        assert!(!DurationOrNever::Finite(1.0).exceeds(1.0));
    }

    #[test]
    fn session_validation() {
        assert!(SessionSpec::delay(2e4, 0.05).is_ok());
        assert!(SessionSpec::delay(0.0, 0.05).is_ok());
        assert!(SessionSpec::delay(-1.0, 0.05).is_err());
        assert!(SessionSpec::energy(1.0, 0.0).is_err());
    }
}
