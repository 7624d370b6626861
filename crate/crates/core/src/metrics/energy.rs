//! Energy consumption under truncated channel inversion.
//!
//! EOR is evaluated over the gain distribution conditioned on transmission
//! being permitted, `g | g ≥ g_min`. Energy spent while waiting for a
//! permitted gain is not counted.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::channel::FadingSpec;
use crate::error::{domain, Error, Result};
use crate::montecarlo::{estimate, MonteCarloConfig, MonteCarloEstimate};
use crate::strategy::{cpa_min_gain, cpa_transmit_power, CpaParams};

use super::waiting::average_fade_duration;
use super::{check_data_bits, check_positive};

/// Energy per delivered bit at gain `gain`, in J/bit:
/// `(γ_c·N0·W/g + P_c) / (W·log2(1+γ_c))`.
pub fn cpa_energy_per_bit(cpa: &CpaParams, gain: f64, noise_psd: f64, bandwidth_hz: f64) -> f64 {
    (cpa_transmit_power(gain, cpa, noise_psd, bandwidth_hz) + cpa.circuit_power_w) / cpa.rate(bandwidth_hz)
}

/// Energy needed to send `data_bits` at gain `gain`.
pub fn mec(cpa: &CpaParams, gain: f64, noise_psd: f64, bandwidth_hz: f64, data_bits: f64) -> Result<f64> {
    check_data_bits(data_bits)?;
    check_positive(noise_psd, "noise_psd")?;
    check_positive(bandwidth_hz, "bandwidth_hz")?;
    if data_bits == 0.0 {
        return Ok(0.0);
    }
    let g_min = cpa_min_gain(cpa, noise_psd, bandwidth_hz);
    if !(gain > 0.0) || gain < g_min {
        return Err(Error::NotPermitted { gain, g_min });
    }
    let power = cpa_transmit_power(gain, cpa, noise_psd, bandwidth_hz) + cpa.circuit_power_w;
    Ok(power * cpa.transmission_time(bandwidth_hz, data_bits))
}

/// Largest energy any permitted session can use: `(P_max + P_c)·T_tx`.
/// Infinite when the peak power is unbounded.
pub fn peak_session_energy(cpa: &CpaParams, bandwidth_hz: f64, data_bits: f64) -> f64 {
    if data_bits == 0.0 {
        return 0.0;
    }
    (cpa.peak_power_w + cpa.circuit_power_w) * cpa.transmission_time(bandwidth_hz, data_bits)
}

fn gain_channel(channel: &FadingSpec) -> Result<f64> {
    if channel.diversity_order > 1 {
        return Err(Error::Unsupported("CPA energy metrics model a single branch".into()));
    }
    channel.avg_gain()
}

/// `P(MEC > E_th | g ≥ g_min)` for a Rayleigh gain channel.
pub fn eor_closed_form(cpa: &CpaParams, channel: &FadingSpec, data_bits: f64, energy_threshold_j: f64) -> Result<f64> {
    check_data_bits(data_bits)?;
    check_positive(energy_threshold_j, "energy_threshold_j")?;
    let avg = gain_channel(channel)?;
    if data_bits == 0.0 {
        return Ok(0.0);
    }
    let (n0, bw) = (channel.noise_psd, channel.bandwidth_hz);
    let t_tx = cpa.transmission_time(bw, data_bits);
    let transmit_budget = energy_threshold_j - cpa.circuit_power_w * t_tx;
    if transmit_budget <= 0.0 {
        return Ok(1.0);
    }
    if energy_threshold_j >= peak_session_energy(cpa, bw, data_bits) {
        return Ok(0.0);
    }
    let g_min = cpa_min_gain(cpa, n0, bw);
    let g_e = cpa.target_snr * n0 * bw * t_tx / transmit_budget;
    if g_e <= g_min {
        return Ok(0.0);
    }
    Ok(-(-(g_e - g_min) / avg).exp_m1())
}

/// Monte Carlo EOR. Gains are drawn as `g_min + ḡ·Exp(1)`, which is exactly
/// the Rayleigh gain conditioned on `g ≥ g_min`, and each trial compares the
/// energy per bit against `E_th / H`.
pub fn eor_monte_carlo(
    cpa: &CpaParams,
    channel: &FadingSpec,
    data_bits: f64,
    energy_threshold_j: f64,
    mc: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    check_data_bits(data_bits)?;
    check_positive(energy_threshold_j, "energy_threshold_j")?;
    let avg = gain_channel(channel)?;
    let (n0, bw) = (channel.noise_psd, channel.bandwidth_hz);
    if data_bits == 0.0 {
        return estimate(mc, |_| false);
    }
    let g_min = cpa_min_gain(cpa, n0, bw);
    let per_bit_threshold = energy_threshold_j / data_bits;
    estimate(mc, |rng| {
        let e: f64 = rng.sample(Exp1);
        cpa_energy_per_bit(cpa, g_min + avg * e, n0, bw) > per_bit_threshold
    })
}

/// One row of the γ_c / P_max trade-off between energy and waiting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub params: CpaParams,
    pub eor: f64,
    /// Probability of transmitting immediately, `e^{-g_min/ḡ}`.
    pub p0: f64,
    pub afd_s: f64,
    /// `(1 - p0)·AFD`.
    pub mean_wait_s: f64,
}

/// EOR, immediate-transmission probability and approximate mean waiting time
/// for each parameter set, in the order given.
pub fn cpa_tradeoff_table(
    grid: &[CpaParams],
    channel: &FadingSpec,
    doppler_hz: f64,
    data_bits: f64,
    energy_threshold_j: f64,
) -> Result<Vec<TradeoffRow>> {
    if grid.is_empty() {
        return domain("trade-off grid is empty");
    }
    let avg = gain_channel(channel)?;
    grid.iter()
        .map(|p| {
            let g_min = cpa_min_gain(p, channel.noise_psd, channel.bandwidth_hz);
            let p0 = (-g_min / avg).exp();
            let afd_s = average_fade_duration(avg, g_min, doppler_hz)?;
            Ok(TradeoffRow {
                params: *p,
                eor: eor_closed_form(p, channel, data_bits, energy_threshold_j)?,
                p0,
                afd_s,
                mean_wait_s: (1.0 - p0) * afd_s,
            })
        })
        .collect()
}
