//! Idealized adaptive transmission strategies.
//!
//! * CRA: constant power, rate `W·log2(1+γ)`.
//! * OPRA: water-filling power `(1/γ0 - 1/γ)+` with rate `W·log2(γ/γ0)` above
//!   the cutoff `γ0` and silence below it. Average transmit power is
//!   normalized to 1, so `γ̄` already carries the power budget.
//! * CPA (truncated channel inversion): transmit power `γ_c·N0·W/g` holds the
//!   received SNR at `γ_c`; transmission is suspended when that power would
//!   exceed `P_max`.

mod amc;

pub use amc::{amc_select_mode, amc_thresholds, qam_ber, threshold_for, AmcMode, AmcScheme, TrafficClass};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::mathcore::{exp_integral_e1, find_root_monotone, RootBracket};

/// Largest accepted OPRA power-constraint residual.
pub const OPRA_RESIDUAL_TOL: f64 = 1e-9;

/// Shannon rate at constant power.
pub fn cra_rate(snr: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpraParams {
    pub cutoff_snr: f64,
}

/// Left side minus right side of the Rayleigh water-filling constraint
/// `e^{-γ0/γ̄}/γ0 - E1(γ0/γ̄)/γ̄ = 1`.
pub fn opra_constraint_residual(cutoff: f64, avg_snr: f64) -> Result<f64> {
    let u = cutoff / avg_snr;
    Ok((-u).exp() / cutoff - exp_integral_e1(u)? / avg_snr - 1.0)
}

/// Water-filling cutoff for a Rayleigh channel with average SNR `avg_snr`.
pub fn opra_cutoff(avg_snr_linear: f64) -> Result<OpraParams> {
    if !(avg_snr_linear > 0.0 && avg_snr_linear.is_finite()) {
        return domain(format!("average SNR must be positive, got {avg_snr_linear}"));
    }
    let residual = |g0: f64| opra_constraint_residual(g0, avg_snr_linear).unwrap_or(f64::NAN);
    let bracket = RootBracket::with_max_iter(1e-9, 1.0, 1e-15, 200)?;
    let cutoff = find_root_monotone(residual, bracket).map_err(|e| {
        Error::Unsupported(format!("water-filling cutoff search failed for γ̄={avg_snr_linear}: {e}"))
    })?;
    let r = residual(cutoff);
    if !(r.abs() < OPRA_RESIDUAL_TOL) {
        return Err(Error::Unsupported(format!(
            "water-filling cutoff residual {r:e} exceeds tolerance for γ̄={avg_snr_linear}"
        )));
    }
    Ok(OpraParams { cutoff_snr: cutoff })
}

/// Rate under water filling; exactly `0.0` at or below the cutoff.
pub fn opra_rate(snr: f64, params: &OpraParams, bandwidth_hz: f64) -> f64 {
    if snr > params.cutoff_snr {
        bandwidth_hz * (snr / params.cutoff_snr).log2()
    } else {
        0.0
    }
}

/// Instantaneous transmit power relative to the average power.
pub fn opra_power_fraction(snr: f64, params: &OpraParams) -> f64 {
    (1.0 / params.cutoff_snr - 1.0 / snr).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpaParams {
    pub target_snr: f64,
    pub peak_power_w: f64,
    #[serde(default)]
    pub circuit_power_w: f64,
}

impl CpaParams {
    pub fn new(target_snr: f64, peak_power_w: f64) -> Result<Self> {
        Self::with_circuit_power(target_snr, peak_power_w, 0.0)
    }

    pub fn with_circuit_power(target_snr: f64, peak_power_w: f64, circuit_power_w: f64) -> Result<Self> {
        if !(target_snr > 0.0 && target_snr.is_finite()) {
            return domain(format!("target_snr must be positive, got {target_snr}"));
        }
        if !(peak_power_w > 0.0) {
            return domain(format!("peak_power_w must be positive, got {peak_power_w}"));
        }
        if !(circuit_power_w >= 0.0 && circuit_power_w.is_finite()) {
            return domain(format!("circuit_power_w must be nonnegative, got {circuit_power_w}"));
        }
        Ok(Self { target_snr, peak_power_w, circuit_power_w })
    }

    /// Constant rate while transmitting.
    pub fn rate(&self, bandwidth_hz: f64) -> f64 {
        cra_rate(self.target_snr, bandwidth_hz)
    }

    /// Transmission time of `data_bits` at the held SNR.
    pub fn transmission_time(&self, bandwidth_hz: f64, data_bits: f64) -> f64 {
        if data_bits == 0.0 {
            return 0.0;
        }
        data_bits / self.rate(bandwidth_hz)
    }
}

/// Uncapped power needed to hold the target SNR at gain `gain`.
pub fn cpa_transmit_power(gain: f64, params: &CpaParams, noise_psd: f64, bandwidth_hz: f64) -> f64 {
    params.target_snr * noise_psd * bandwidth_hz / gain
}

/// Smallest gain at which the required power stays within `P_max`.
pub fn cpa_min_gain(params: &CpaParams, noise_psd: f64, bandwidth_hz: f64) -> f64 {
    params.target_snr * noise_psd * bandwidth_hz / params.peak_power_w
}

/// Strategy selection with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    Cra,
    Opra(OpraParams),
    /// For CPA the per-realization SNR argument of rate-based metrics is the
    /// SNR that peak power would deliver, `g·P_max/(N0·W)`; transmission is
    /// permitted exactly when it reaches `γ_c`.
    Cpa(CpaParams),
    Amc { scheme: AmcScheme, class: TrafficClass },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Cra => "cra",
            Strategy::Opra(_) => "opra",
            Strategy::Cpa(_) => "cpa",
            Strategy::Amc { .. } => "amc",
        }
    }

    /// Rate in bit/s at SNR `snr`; `0.0` means no transmission.
    pub fn rate(&self, snr: f64, bandwidth_hz: f64) -> Result<f64> {
        Ok(match self {
            Strategy::Cra => cra_rate(snr, bandwidth_hz),
            Strategy::Opra(p) => opra_rate(snr, p, bandwidth_hz),
            Strategy::Cpa(p) => {
                if snr >= p.target_snr {
                    p.rate(bandwidth_hz)
                } else {
                    0.0
                }
            }
            Strategy::Amc { scheme, class } => scheme
                .select_mode(*class, snr)?
                .map_or(0.0, |m| m.spectral_efficiency * bandwidth_hz),
        })
    }
}
