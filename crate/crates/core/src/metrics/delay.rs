//! Delay outage rate and the inverse planning problems built on it.

use std::f64::consts::LN_2;

use crate::channel::{draw_snr, gain_cdf, snr_cdf, FadingSpec};
use crate::error::{domain, Error, Result};
use crate::mathcore::{find_root_monotone, RootBracket};
use crate::montecarlo::{estimate, MonteCarloConfig, MonteCarloEstimate};
use crate::strategy::{cpa_min_gain, Strategy};

use super::{check_data_bits, check_positive, mtt, spectral_load};

/// `P(MTT > T)` for CRA (any number of selection branches) or OPRA (single
/// branch).
///
/// With `c = H/(W·T)`, CRA misses the deadline when `γ < 2^c - 1` and OPRA
/// when `γ < γ0·2^c`. Thresholds are formed in the log domain; if they
/// overflow the result is exactly 1.
pub fn dor_closed_form(strategy: &Strategy, channel: &FadingSpec, data_bits: f64, delay_threshold_s: f64) -> Result<f64> {
    check_data_bits(data_bits)?;
    check_positive(delay_threshold_s, "delay_threshold_s")?;
    let avg = channel.avg_snr()?;
    if data_bits == 0.0 {
        return Ok(0.0);
    }
    let c = spectral_load(data_bits, channel.bandwidth_hz, delay_threshold_s);
    let snr_threshold = match strategy {
        Strategy::Cra => (c * LN_2).exp_m1(),
        Strategy::Opra(p) => {
            if channel.diversity_order > 1 {
                return Err(Error::Unsupported("OPRA closed form is single-branch only".into()));
            }
            (c * LN_2 + p.cutoff_snr.ln() - avg.ln()).exp() * avg
        }
        other => {
            return Err(Error::Unsupported(format!("no closed-form DOR for {}", other.name())));
        }
    };
    snr_cdf(channel, snr_threshold)
}

/// Fraction of sampled SNR realizations whose MTT exceeds the threshold.
/// Realizations where the strategy stays silent count as exceeding.
pub fn dor_monte_carlo(
    strategy: &Strategy,
    channel: &FadingSpec,
    data_bits: f64,
    delay_threshold_s: f64,
    mc: &MonteCarloConfig,
) -> Result<MonteCarloEstimate> {
    check_data_bits(data_bits)?;
    check_positive(delay_threshold_s, "delay_threshold_s")?;
    let avg = channel.avg_snr()?;
    let branches = channel.diversity_order;
    let bw = channel.bandwidth_hz;
    // Surface configuration errors (e.g. an AMC class without a target) once.
    mtt(strategy, avg, bw, data_bits)?;
    estimate(mc, |rng| {
        let snr = draw_snr(avg, branches, rng);
        matches!(mtt(strategy, snr, bw, data_bits), Ok(t) if t.exceeds(delay_threshold_s))
    })
}

/// Probability that the strategy does not transmit on a given realization:
/// `P(γ ≤ γ0)` for OPRA and `P(g < g_min)` for CPA.
pub fn prob_no_transmission(strategy: &Strategy, channel: &FadingSpec) -> Result<f64> {
    match strategy {
        Strategy::Opra(p) => snr_cdf(channel, p.cutoff_snr),
        Strategy::Cpa(p) => gain_cdf(channel, cpa_min_gain(p, channel.noise_psd, channel.bandwidth_hz)),
        other => Err(Error::Unsupported(format!("{} always transmits", other.name()))),
    }
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        domain(format!("DOR target must lie in (0, 1), got {target}"))
    }
}

/// Smallest number of selection-combining branches for which CRA meets
/// `dor_target`. The diversity order of `channel` is ignored.
pub fn required_diversity_order(
    channel: &FadingSpec,
    data_bits: f64,
    delay_threshold_s: f64,
    dor_target: f64,
) -> Result<u32> {
    check_target(dor_target)?;
    let single = channel.with_branches(1)?;
    let dor1 = dor_closed_form(&Strategy::Cra, &single, data_bits, delay_threshold_s)?;
    if dor1 >= 1.0 {
        return Err(Error::Infeasible { saturated_dor: dor1 });
    }
    if dor1 <= dor_target {
        return Ok(1);
    }
    let estimate = (dor_target.ln() / dor1.ln()).ceil();
    if !(estimate < u32::MAX as f64) {
        return Err(Error::Infeasible { saturated_dor: dor1 });
    }
    let mut branches = (estimate as u32).max(1);
    let dor = |l: u32| dor1.powi(l as i32);
    while dor(branches) > dor_target {
        branches += 1;
    }
    while branches > 1 && dor(branches - 1) <= dor_target {
        branches -= 1;
    }
    Ok(branches)
}

fn check_inverse_inputs(branches: u32, spectral_load: f64, dor_target: f64) -> Result<()> {
    check_target(dor_target)?;
    if branches == 0 {
        return domain("branches must be at least 1");
    }
    check_positive(spectral_load, "spectral load")
}

/// Average SNR at which CRA with `branches` selection branches reaches
/// `dor_target` at spectral load `c`:
/// `γ̄ = (2^c - 1) / (-ln(1 - target^{1/L}))`.
pub fn required_avg_snr(branches: u32, spectral_load: f64, dor_target: f64) -> Result<f64> {
    check_inverse_inputs(branches, spectral_load, dor_target)?;
    let per_branch = dor_target.powf(1.0 / branches as f64);
    Ok((spectral_load * LN_2).exp_m1() / -(-per_branch).ln_1p())
}

/// Same quantity as [`required_avg_snr`], found by bisection on `ln γ̄`
/// against the forward DOR.
pub fn required_avg_snr_bisect(branches: u32, spectral_load: f64, dor_target: f64) -> Result<f64> {
    check_inverse_inputs(branches, spectral_load, dor_target)?;
    let snr_threshold = (spectral_load * LN_2).exp_m1();
    let gap = |log_avg: f64| {
        let branch = -(-snr_threshold / log_avg.exp()).exp_m1();
        branch.powi(branches as i32) - dor_target
    };
    let bracket = RootBracket::with_max_iter(-60.0, 300.0, 1e-13, 400)?;
    Ok(find_root_monotone(gap, bracket)?.exp())
}
