//! Waiting time before CPA may transmit, over a Doppler-faded gain process.
//!
//! The process starts from its stationary distribution, so the waiting time
//! is zero with probability `p0 = e^{-g_min/ḡ}`. Delivery time adds the
//! constant transmission time to the wait.

use rayon::prelude::*;

use crate::channel::{first_passage_time, DopplerSpec, FadingSpec, Passage};
use crate::error::{domain, Result};
use crate::montecarlo::{derive_seed, MonteCarloConfig, MonteCarloEstimate};
use crate::strategy::{cpa_min_gain, CpaParams};

use super::curve::{Curve, CurveKind, CurvePoint};
use super::{check_data_bits, check_positive};

/// Mean time a Rayleigh gain with mean `avg_gain` spends below `g_min` per
/// fade: `(e^{ρ²} - 1)/(ρ·f_d·√(2π))` with `ρ² = g_min/ḡ`.
pub fn average_fade_duration(avg_gain: f64, g_min: f64, doppler_hz: f64) -> Result<f64> {
    check_positive(avg_gain, "avg_gain")?;
    check_positive(doppler_hz, "doppler_hz")?;
    if !(g_min >= 0.0) {
        return domain(format!("g_min must be nonnegative, got {g_min}"));
    }
    if g_min == 0.0 {
        return Ok(0.0);
    }
    let rho2 = g_min / avg_gain;
    Ok(rho2.exp_m1() / (rho2.sqrt() * doppler_hz * (2.0 * std::f64::consts::PI).sqrt()))
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return domain("time grid is empty");
    }
    if t_grid[0] < 0.0 || !t_grid.iter().all(|t| t.is_finite()) {
        return domain("time grid must be finite and nonnegative");
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return domain("time grid must be strictly increasing");
    }
    Ok(())
}

fn min_gain_and_avg(cpa: &CpaParams, channel: &FadingSpec) -> Result<(f64, f64)> {
    let avg = channel.avg_gain()?;
    Ok((cpa_min_gain(cpa, channel.noise_psd, channel.bandwidth_hz), avg))
}

/// `P(wait ≤ t) ≈ p0 + (1 - p0)(1 - e^{-t/AFD})`, treating the remaining
/// fade as exponential with the average fade duration as mean.
pub fn waiting_time_cdf_lcr(cpa: &CpaParams, channel: &FadingSpec, doppler_hz: f64, t_grid: &[f64]) -> Result<Curve> {
    check_grid(t_grid)?;
    let (g_min, avg) = min_gain_and_avg(cpa, channel)?;
    let afd = average_fade_duration(avg, g_min, doppler_hz)?;
    let p0 = (-g_min / avg).exp();
    let points = t_grid
        .iter()
        .map(|&t| {
            let tail = if afd == 0.0 { 0.0 } else { (-t / afd).exp() };
            CurvePoint::closed_form(t, (1.0 - (1.0 - p0) * tail).min(1.0))
        })
        .collect();
    Curve::new("wait-lcr", CurveKind::Cdf, "s", points)
}

/// First-passage outcomes of `traces` independent realizations; trace `i`
/// is seeded with `derive_seed(seed, i)`. The seed in `dspec` is ignored.
pub fn sample_waiting_times(
    cpa: &CpaParams,
    channel: &FadingSpec,
    dspec: &DopplerSpec,
    traces: u64,
    seed: u64,
    cap_s: Option<f64>,
) -> Result<Vec<Passage>> {
    let dspec = dspec.validated()?;
    let (g_min, avg) = min_gain_and_avg(cpa, channel)?;
    if g_min == 0.0 {
        return Ok(vec![Passage::Crossed { wait_s: 0.0 }; traces as usize]);
    }
    (0..traces)
        .into_par_iter()
        .map(|i| first_passage_time(&dspec.with_seed(derive_seed(seed, i)), avg, g_min, cap_s))
        .collect()
}

/// Empirical waiting-time CDF over `mc.trials` traces. Censored traces count
/// as exceeding every grid point; their number is recorded on the curve.
pub fn waiting_time_cdf_mc(
    cpa: &CpaParams,
    channel: &FadingSpec,
    dspec: &DopplerSpec,
    t_grid: &[f64],
    mc: &MonteCarloConfig,
    cap_s: Option<f64>,
) -> Result<Curve> {
    check_grid(t_grid)?;
    mc.validate()?;
    let passages = sample_waiting_times(cpa, channel, dspec, mc.trials, mc.seed, cap_s)?;
    let mut waits: Vec<f64> = passages.iter().filter_map(Passage::wait_s).collect();
    let censored = passages.len() - waits.len();
    waits.sort_by(f64::total_cmp);
    let points = t_grid
        .iter()
        .map(|&t| {
            let below = waits.partition_point(|&w| w <= t) as u64;
            Ok(CurvePoint::monte_carlo(t, &MonteCarloEstimate::from_counts(below, mc)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Curve::new("wait-mc", CurveKind::Cdf, "s", points)?.with_censored(censored as u64))
}

/// Delivery-time CDF: the waiting CDF shifted right by the transmission time
/// `H/(W·log2(1+γ_c))`, and zero below it.
pub fn delivery_time_cdf(waiting: &Curve, cpa: &CpaParams, bandwidth_hz: f64, data_bits: f64) -> Result<Curve> {
    waiting.validate()?;
    check_data_bits(data_bits)?;
    check_positive(bandwidth_hz, "bandwidth_hz")?;
    if waiting.kind != CurveKind::Cdf {
        return domain("delivery time needs a waiting-time CDF");
    }
    let t_tx = cpa.transmission_time(bandwidth_hz, data_bits);
    let mut points = Vec::with_capacity(waiting.points.len() + 1);
    if waiting.points.first().is_some_and(|p| p.threshold + t_tx > 0.0) {
        points.push(CurvePoint::closed_form(0.0, 0.0));
    }
    points.extend(waiting.points.iter().map(|p| CurvePoint { threshold: p.threshold + t_tx, ..*p }));
    let mut curve = Curve::new(waiting.label.replacen("wait", "delivery", 1), CurveKind::Cdf, "s", points)?;
    curve.censored = waiting.censored;
    Ok(curve)
}
