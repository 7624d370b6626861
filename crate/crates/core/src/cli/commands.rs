//! The four subcommands, each turning a resolved configuration into curves
//! or a solution report.

use std::collections::BTreeMap;

use crate::channel::{sample_gain_process, DopplerSpec, FadingSpec};
use crate::error::Error;
use crate::metrics::{
    delivery_time_cdf, dor_closed_form, dor_monte_carlo, eor_closed_form, eor_monte_carlo, required_avg_snr,
    required_avg_snr_bisect, required_diversity_order, spectral_load, waiting_time_cdf_lcr, waiting_time_cdf_mc, Curve,
    CurveKind, CurvePoint, format_f64,
};
use crate::montecarlo::MonteCarloConfig;
use crate::strategy::{opra_cutoff, AmcScheme, CpaParams, Strategy, TrafficClass};

use super::config::{linear_grid, log_grid, threshold_grid, ScenarioConfig};
use super::CliError;

/// Result of a curve-producing command.
pub struct CurveReport {
    pub curves: Vec<Curve>,
    /// Log-scaled threshold axis when plotting.
    pub log_x: bool,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Closed,
    MonteCarlo,
    Both,
}

impl Method {
    fn parse(cfg: &ScenarioConfig) -> Result<Self, CliError> {
        match cfg.string("method")? {
            "closed" => Ok(Method::Closed),
            "mc" => Ok(Method::MonteCarlo),
            "both" => Ok(Method::Both),
            other => Err(CliError::Config(format!("method: invalid value `{other}`: expected closed, mc or both"))),
        }
    }

    fn closed(self) -> bool {
        self != Method::MonteCarlo
    }

    fn mc(self) -> bool {
        self != Method::Closed
    }
}

fn mc_config(cfg: &ScenarioConfig) -> Result<MonteCarloConfig, CliError> {
    let trials = cfg.u64("trials")?;
    if trials == 0 {
        return Err(CliError::Config("trials: must be at least 1".into()));
    }
    let mc = MonteCarloConfig::new(trials, cfg.u64("seed")?).with_ci_level(cfg.f64("ci-level")?);
    mc.validate().map_err(|e| CliError::Config(format!("ci-level: {e}")))?;
    Ok(mc)
}

fn data_amounts(cfg: &ScenarioConfig) -> Result<Vec<f64>, CliError> {
    let hs = cfg.f64_list("h-bits")?;
    if hs.iter().any(|h| *h < 0.0) {
        return Err(CliError::Config("h-bits: values must be nonnegative".into()));
    }
    Ok(hs)
}

/// Short text for a number in a curve label.
fn tag(x: f64) -> String {
    let s = format!("{x}");
    if s.len() <= 8 {
        s
    } else {
        format!("{x:.4e}")
    }
}

fn strategies(cfg: &ScenarioConfig, avg_snr: f64) -> Result<Vec<Strategy>, CliError> {
    let names: Vec<&str> = cfg.string("strategy")?.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(CliError::Config("strategy: list is empty".into()));
    }
    names
        .into_iter()
        .map(|name| match name {
            "cra" => Ok(Strategy::Cra),
            "opra" => Ok(Strategy::Opra(opra_cutoff(avg_snr)?)),
            "amc" => {
                let path = cfg.string("amc-scheme")?;
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("amc-scheme: cannot read {path}: {e}")))?;
                let scheme = AmcScheme::from_kv_str(&text).map_err(|e| CliError::Config(format!("amc-scheme: {e}")))?;
                let class: TrafficClass =
                    cfg.string("traffic-class")?.parse().map_err(|e| CliError::Config(format!("traffic-class: {e}")))?;
                scheme.target_ber(class).map_err(|e| CliError::Config(format!("traffic-class: {e}")))?;
                Ok(Strategy::Amc { scheme, class })
            }
            other => Err(CliError::Config(format!("strategy: unknown strategy `{other}`"))),
        })
        .collect()
}

pub fn run_dor(cfg: &ScenarioConfig) -> Result<CurveReport, CliError> {
    let avg = cfg.linear("avg-snr")?;
    let bw = cfg.positive("bw-hz")?;
    let hs = data_amounts(cfg)?;
    let branches = cfg.u32_list("branches")?;
    let method = Method::parse(cfg)?;
    let mc = mc_config(cfg)?;
    let grid = threshold_grid(cfg, false, || {
        log_grid(cfg.positive("t-min-s")?, cfg.positive("t-max-s")?, cfg.u64("points-per-decade")?)
    })?;
    let base = FadingSpec::rayleigh_snr(avg, bw)?;

    let mut curves = Vec::new();
    for strategy in strategies(cfg, avg)? {
        for &h in &hs {
            for &l in &branches {
                let channel = base.with_branches(l)?;
                let label = format!("{}-h{}-l{l}", strategy.name(), tag(h));
                if method.closed() {
                    let closed: Result<Vec<_>, _> = grid
                        .iter()
                        .map(|&t| Ok(CurvePoint::closed_form(t, dor_closed_form(&strategy, &channel, h, t)?)))
                        .collect();
                    match closed {
                        Ok(points) => curves.push(Curve::new(format!("{label}-closed"), CurveKind::Tail, "s", points)?),
                        Err(Error::Unsupported(why)) if method == Method::Both => {
                            log::warn!("{label}: closed form skipped ({why})");
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
                if method.mc() {
                    let points = grid
                        .iter()
                        .map(|&t| Ok(CurvePoint::monte_carlo(t, &dor_monte_carlo(&strategy, &channel, h, t, &mc)?)))
                        .collect::<Result<Vec<_>, Error>>()?;
                    curves.push(Curve::new(format!("{label}-mc"), CurveKind::Tail, "s", points)?);
                }
            }
        }
    }
    Ok(CurveReport { curves, log_x: true, exit_code: 0 })
}

/// CPA parameter sets in the order γ_c (outer) × P_max (inner), with label
/// fragments built from the values as given.
fn cpa_grid(cfg: &ScenarioConfig, circuit_power_w: f64) -> Result<Vec<(CpaParams, String)>, CliError> {
    let gcs = cfg.linear_list("gamma-c")?;
    let gc_db = !cfg.has("gamma-c");
    let gc_raw = cfg.f64_list(if gc_db { "gamma-c-db" } else { "gamma-c" })?;
    let pmaxs = cfg.f64_list("pmax-w")?;
    let mut out = Vec::new();
    for (gc, raw) in gcs.iter().zip(&gc_raw) {
        for &p in &pmaxs {
            let params = CpaParams::with_circuit_power(*gc, p, circuit_power_w)
                .map_err(|e| CliError::Config(format!("gamma-c/pmax-w: {e}")))?;
            let gc_tag = if gc_db { format!("{}db", tag(*raw)) } else { tag(*raw) };
            out.push((params, format!("cpa-gc{gc_tag}-pmax{}", tag(p))));
        }
    }
    Ok(out)
}

pub fn run_eor(cfg: &ScenarioConfig) -> Result<CurveReport, CliError> {
    let avg_gain = cfg.linear("avg-gain")?;
    let bw = cfg.positive("bw-hz")?;
    let n0 = cfg.positive("noise-psd")?;
    let pc = cfg.f64("pc-w")?;
    let hs = data_amounts(cfg)?;
    let method = Method::parse(cfg)?;
    let mc = mc_config(cfg)?;
    let grid = threshold_grid(cfg, false, || {
        log_grid(cfg.positive("e-min-j")?, cfg.positive("e-max-j")?, cfg.u64("points-per-decade")?)
    })?;
    let channel = FadingSpec::rayleigh_gain(avg_gain, bw, n0)?;

    let mut curves = Vec::new();
    for (params, cpa_label) in cpa_grid(cfg, pc)? {
        for &h in &hs {
            let label = format!("{cpa_label}-h{}", tag(h));
            if method.closed() {
                let points = grid
                    .iter()
                    .map(|&e| Ok(CurvePoint::closed_form(e, eor_closed_form(&params, &channel, h, e)?)))
                    .collect::<Result<Vec<_>, Error>>()?;
                curves.push(Curve::new(format!("{label}-closed"), CurveKind::Tail, "J", points)?);
            }
            if method.mc() {
                let points = grid
                    .iter()
                    .map(|&e| Ok(CurvePoint::monte_carlo(e, &eor_monte_carlo(&params, &channel, h, e, &mc)?)))
                    .collect::<Result<Vec<_>, Error>>()?;
                curves.push(Curve::new(format!("{label}-mc"), CurveKind::Tail, "J", points)?);
            }
        }
    }
    Ok(CurveReport { curves, log_x: true, exit_code: 0 })
}

pub fn run_wait(cfg: &ScenarioConfig) -> Result<CurveReport, CliError> {
    let avg_gain = cfg.linear("avg-gain")?;
    let bw = cfg.positive("bw-hz")?;
    let n0 = cfg.positive("noise-psd")?;
    let doppler_hz = cfg.positive("doppler-hz")?;
    let method = Method::parse(cfg)?;
    let mc = mc_config(cfg)?;
    let grid = threshold_grid(cfg, true, || linear_grid(cfg.positive("t-max-s")?, cfg.u64("wait-points")?))?;
    let hs = if cfg.has("h-bits") { data_amounts(cfg)? } else { Vec::new() };
    let channel = FadingSpec::rayleigh_gain(avg_gain, bw, n0)?;
    let mut dspec = DopplerSpec::new(doppler_hz, mc.seed)?;
    if cfg.has("sinusoids") {
        dspec = dspec.with_sinusoids(cfg.u64("sinusoids")? as usize)?;
    }
    if let Some(dt) = cfg.opt_f64("sample-dt-s")? {
        dspec = dspec.with_sample_dt(dt)?;
    }
    let cap_s = cfg.opt_f64("cap-s")?;

    if let Some(path) = cfg.raw("trace-out") {
        let trace = sample_gain_process(&dspec, avg_gain, cfg.positive("trace-duration-s")?)?;
        let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("trace-out: {path}: {e}")))?;
        trace
            .write_csv(std::io::BufWriter::new(file))
            .map_err(|e| CliError::Io(format!("trace-out: {path}: {e}")))?;
    }

    let mut curves = Vec::new();
    let mut exit_code = 0;
    for (params, cpa_label) in cpa_grid(cfg, 0.0)? {
        let mut waits = Vec::new();
        if method.mc() {
            let mut c = waiting_time_cdf_mc(&params, &channel, &dspec, &grid, &mc, cap_s)?;
            c.label = format!("wait-mc-{cpa_label}");
            let censored = c.censored.unwrap_or(0);
            if censored > 0 {
                log::warn!("{}: {censored} of {} traces censored", c.label, mc.trials);
            }
            if 2 * censored > mc.trials {
                exit_code = 3;
            }
            waits.push(c);
        }
        if method.closed() {
            let mut c = waiting_time_cdf_lcr(&params, &channel, doppler_hz, &grid)?;
            c.label = format!("wait-lcr-{cpa_label}");
            waits.push(c);
        }
        let mut delivery = Vec::new();
        for w in &waits {
            for &h in &hs {
                let mut d = delivery_time_cdf(w, &params, bw, h)?;
                d.label = format!("{}-h{}", d.label, tag(h));
                delivery.push(d);
            }
        }
        curves.extend(waits);
        curves.extend(delivery);
    }
    Ok(CurveReport { curves, log_x: false, exit_code })
}

/// Ordered `key = value` lines describing a solution.
pub type SolveReport = Vec<(String, String)>;

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn num(k: &str, v: f64) -> (String, String) {
    (k.to_string(), format_f64(v))
}

pub fn run_solve(cfg: &ScenarioConfig) -> Result<SolveReport, CliError> {
    let target = cfg.f64("target")?;
    match cfg.string("find")? {
        "branches" => {
            let avg = cfg.linear("avg-snr")?;
            let bw = cfg.positive("bw-hz")?;
            let h = cfg.f64("h-bits")?;
            let t = cfg.positive("t-th-s")?;
            let channel = FadingSpec::rayleigh_snr(avg, bw)?;
            let l = required_diversity_order(&channel, h, t, target)?;
            let dor = |n: u32| dor_closed_form(&Strategy::Cra, &channel.with_branches(n)?, h, t);
            let mut report = vec![entry("find", "branches"), num("target", target), entry("value", l), num("dor_at_value", dor(l)?)];
            if l > 1 {
                report.push(num("dor_at_value_minus_1", dor(l - 1)?));
            }
            Ok(report)
        }
        "avg-snr" => {
            let branches = cfg.u32_list("branches")?;
            let [l] = branches[..] else {
                return Err(CliError::Config("branches: solving for avg-snr takes a single value".into()));
            };
            let c = match cfg.opt_f64("c")? {
                Some(c) => c,
                None => spectral_load(cfg.f64("h-bits")?, cfg.positive("bw-hz")?, cfg.positive("t-th-s")?),
            };
            let g = required_avg_snr(l, c, target)?;
            let g_bisect = required_avg_snr_bisect(l, c, target)?;
            let dor_at = |avg: f64| -> Result<f64, CliError> {
                let ch = FadingSpec::rayleigh_snr(avg, 1.0)?.with_branches(l)?;
                Ok(dor_closed_form(&Strategy::Cra, &ch, c, 1.0)?)
            };
            let below = g * (1.0 - 1e-6);
            Ok(vec![
                entry("find", "avg-snr"),
                num("target", target),
                num("spectral_load", c),
                num("value", g),
                num("value_db", 10.0 * g.log10()),
                num("value_bisection", g_bisect),
                num("dor_at_value", dor_at(g)?),
                num("value_minus_eps", below),
                num("dor_at_value_minus_eps", dor_at(below)?),
            ])
        }
        other => Err(CliError::Config(format!("find: invalid value `{other}`: expected branches or avg-snr"))),
    }
}

/// JSON form of a solve report together with the resolved configuration.
pub fn solve_json(report: &SolveReport, provenance: &BTreeMap<String, String>) -> serde_json::Value {
    let solution: serde_json::Map<String, serde_json::Value> =
        report.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
    serde_json::json!({ "config": provenance, "solution": solution })
}
