//! Time-correlated Rayleigh gain process.
//!
//! Each quadrature of the unit-power complex envelope is a sum of `N`
//! unit-amplitude sinusoids:
//!
//! ```text
//! x(t) = N^{-1/2} Σ_n cos(2π f_d cos(α_n) t + φ_n),
//! α_n  = (2π n - π + θ_n) / (4N),   n = 1..N
//! ```
//!
//! with `θ_n` uniform on `[-π, π)` and `φ_n` uniform on `[0, 2π)`, drawn
//! independently for every sinusoid and for each quadrature. The arrival
//! angles cover `[0, π/2]` once, which reproduces the classical (Clarke)
//! Doppler spectrum and a `J0(2π f_d τ)` autocorrelation, and the two
//! quadratures use distinct frequency sets so they are uncorrelated along a
//! single realization. The power gain is `ḡ·(x_I² + x_Q²)`.

use std::f64::consts::{PI, TAU};
use std::io::{self, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::montecarlo::stream_rng;

pub const DEFAULT_SINUSOIDS: usize = 64;
/// Default samples per Doppler period.
pub const DEFAULT_SAMPLES_PER_DOPPLER_PERIOD: f64 = 32.0;
/// Coarsest allowed sampling, in samples per Doppler period.
pub const MIN_SAMPLES_PER_DOPPLER_PERIOD: f64 = 16.0;
pub const MIN_SINUSOIDS: usize = 8;
/// Default first-passage cap, in Doppler periods.
pub const DEFAULT_CAP_DOPPLER_PERIODS: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerSpec {
    pub doppler_hz: f64,
    pub sample_dt_s: f64,
    pub num_sinusoids: usize,
    pub seed: u64,
}

impl DopplerSpec {
    /// Spec with 64 sinusoids sampled 32 times per Doppler period.
    pub fn new(doppler_hz: f64, seed: u64) -> Result<Self> {
        if !(doppler_hz > 0.0 && doppler_hz.is_finite()) {
            return domain(format!("doppler_hz must be positive, got {doppler_hz}"));
        }
        Self {
            doppler_hz,
            sample_dt_s: 1.0 / (DEFAULT_SAMPLES_PER_DOPPLER_PERIOD * doppler_hz),
            num_sinusoids: DEFAULT_SINUSOIDS,
            seed,
        }
        .validated()
    }

    pub fn with_sample_dt(self, sample_dt_s: f64) -> Result<Self> {
        Self { sample_dt_s, ..self }.validated()
    }

    pub fn with_sinusoids(self, num_sinusoids: usize) -> Result<Self> {
        Self { num_sinusoids, ..self }.validated()
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.doppler_hz > 0.0 && self.doppler_hz.is_finite()) {
            return domain(format!("doppler_hz must be positive, got {}", self.doppler_hz));
        }
        let max_dt = 1.0 / (MIN_SAMPLES_PER_DOPPLER_PERIOD * self.doppler_hz);
        if !(self.sample_dt_s > 0.0) || self.sample_dt_s > max_dt * (1.0 + 1e-12) {
            return domain(format!(
                "sample_dt_s must lie in (0, {max_dt}] for doppler {} Hz, got {}",
                self.doppler_hz, self.sample_dt_s
            ));
        }
        if self.num_sinusoids < MIN_SINUSOIDS {
            return domain(format!(
                "num_sinusoids must be at least {MIN_SINUSOIDS}, got {}",
                self.num_sinusoids
            ));
        }
        Ok(self)
    }

    pub fn default_cap_s(&self) -> f64 {
        DEFAULT_CAP_DOPPLER_PERIODS / self.doppler_hz
    }
}

#[derive(Debug, Clone)]
struct Quadrature {
    /// Angular frequencies, rad/s.
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl Quadrature {
    fn draw<R: Rng>(n: usize, doppler_hz: f64, rng: &mut R) -> Self {
        let nf = n as f64;
        let mut omega = Vec::with_capacity(n);
        let mut phase = Vec::with_capacity(n);
        for k in 1..=n {
            let theta = rng.random_range(-PI..PI);
            let alpha = (TAU * k as f64 - PI + theta) / (4.0 * nf);
            omega.push(TAU * doppler_hz * alpha.cos());
            phase.push(rng.random_range(0.0..TAU));
        }
        Self { omega, phase }
    }

    fn at(&self, t: f64) -> f64 {
        self.omega.iter().zip(&self.phase).map(|(w, p)| (w * t + p).cos()).sum()
    }
}

/// One realization of the Doppler-faded power gain.
#[derive(Debug, Clone)]
pub struct DopplerProcess {
    spec: DopplerSpec,
    avg_gain: f64,
    inphase: Quadrature,
    quadrature: Quadrature,
    scale: f64,
}

impl DopplerProcess {
    pub fn new(spec: &DopplerSpec, avg_gain: f64) -> Result<Self> {
        let spec = spec.validated()?;
        if !(avg_gain > 0.0 && avg_gain.is_finite()) {
            return domain(format!("avg_gain must be positive, got {avg_gain}"));
        }
        let mut rng = stream_rng(spec.seed, 0);
        let inphase = Quadrature::draw(spec.num_sinusoids, spec.doppler_hz, &mut rng);
        let quadrature = Quadrature::draw(spec.num_sinusoids, spec.doppler_hz, &mut rng);
        Ok(Self {
            spec,
            avg_gain,
            inphase,
            quadrature,
            scale: (spec.num_sinusoids as f64).recip().sqrt(),
        })
    }

    pub fn spec(&self) -> &DopplerSpec {
        &self.spec
    }

    /// Unit-power complex envelope at time `t`.
    pub fn envelope_at(&self, t: f64) -> (f64, f64) {
        (self.scale * self.inphase.at(t), self.scale * self.quadrature.at(t))
    }

    pub fn gain_at(&self, t: f64) -> f64 {
        let (i, q) = self.envelope_at(t);
        self.avg_gain * (i * i + q * q)
    }

    /// Gains at `0, dt, 2dt, ...`, advanced by phasor rotation.
    pub fn samples(&self) -> GainSamples {
        let dt = self.spec.sample_dt_s;
        let rotors = |q: &Quadrature| -> (Vec<[f64; 2]>, Vec<[f64; 2]>) {
            let z = q.phase.iter().map(|p| [p.cos(), p.sin()]).collect();
            let r = q.omega.iter().map(|w| [(w * dt).cos(), (w * dt).sin()]).collect();
            (z, r)
        };
        let (zi, ri) = rotors(&self.inphase);
        let (zq, rq) = rotors(&self.quadrature);
        GainSamples { zi, ri, zq, rq, scale2: self.scale * self.scale * self.avg_gain }
    }
}

/// Iterator over successive gain samples of a [`DopplerProcess`].
#[derive(Debug, Clone)]
pub struct GainSamples {
    zi: Vec<[f64; 2]>,
    ri: Vec<[f64; 2]>,
    zq: Vec<[f64; 2]>,
    rq: Vec<[f64; 2]>,
    scale2: f64,
}

fn real_sum_and_rotate(z: &mut [[f64; 2]], r: &[[f64; 2]]) -> f64 {
    let mut sum = 0.0;
    for (zn, rn) in z.iter_mut().zip(r) {
        sum += zn[0];
        let re = zn[0] * rn[0] - zn[1] * rn[1];
        let im = zn[0] * rn[1] + zn[1] * rn[0];
        *zn = [re, im];
    }
    sum
}

impl Iterator for GainSamples {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let i = real_sum_and_rotate(&mut self.zi, &self.ri);
        let q = real_sum_and_rotate(&mut self.zq, &self.rq);
        Some(self.scale2 * (i * i + q * q))
    }
}

/// Uniformly sampled power gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTrace {
    pub dt_s: f64,
    pub gains: Vec<f64>,
}

impl GainTrace {
    pub fn duration_s(&self) -> f64 {
        self.dt_s * self.gains.len().saturating_sub(1) as f64
    }

    pub fn mean(&self) -> f64 {
        self.gains.iter().sum::<f64>() / self.gains.len() as f64
    }

    /// CSV with columns `t_s,gain`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t_s,gain")?;
        for (k, g) in self.gains.iter().enumerate() {
            writeln!(out, "{},{}", k as f64 * self.dt_s, g)?;
        }
        Ok(())
    }
}

/// Samples `duration_s` seconds of the process starting at `t = 0`.
pub fn sample_gain_process(dspec: &DopplerSpec, avg_gain: f64, duration_s: f64) -> Result<GainTrace> {
    let process = DopplerProcess::new(dspec, avg_gain)?;
    let dt = process.spec.sample_dt_s;
    if !(duration_s >= 10.0 * dt) || !duration_s.is_finite() {
        return domain(format!("duration_s must be at least 10 samples ({}), got {duration_s}", 10.0 * dt));
    }
    let n = (duration_s / dt).floor() as usize + 1;
    Ok(GainTrace { dt_s: dt, gains: process.samples().take(n).collect() })
}

/// Outcome of a first-passage search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Passage {
    /// First sample time at which the gain reached the level.
    Crossed { wait_s: f64 },
    /// No crossing up to and including `cap_s`.
    Censored { cap_s: f64 },
}

impl Passage {
    pub fn wait_s(&self) -> Option<f64> {
        match *self {
            Passage::Crossed { wait_s } => Some(wait_s),
            Passage::Censored { .. } => None,
        }
    }
}

/// Time until the gain first reaches `g_min`, starting from the stationary
/// process at `t = 0`. Returns `0` when the first sample already qualifies.
/// `cap_s` defaults to `1000 / f_d`.
pub fn first_passage_time(
    dspec: &DopplerSpec,
    avg_gain: f64,
    g_min: f64,
    cap_s: Option<f64>,
) -> Result<Passage> {
    if !(g_min > 0.0) {
        return domain(format!("g_min must be positive, got {g_min}"));
    }
    let process = DopplerProcess::new(dspec, avg_gain)?;
    let cap_s = cap_s.unwrap_or_else(|| dspec.default_cap_s());
    if !(cap_s >= 0.0) {
        return domain(format!("cap_s must be nonnegative, got {cap_s}"));
    }
    let dt = process.spec.sample_dt_s;
    for (k, g) in process.samples().enumerate() {
        let t = k as f64 * dt;
        if t > cap_s {
            break;
        }
        if g >= g_min {
            return Ok(Passage::Crossed { wait_s: t });
        }
    }
    Ok(Passage::Censored { cap_s })
}
