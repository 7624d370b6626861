//! Scenario configuration: the key registry shared by flags and config
//! files, presets, layering and typed access.

use std::collections::BTreeMap;
use std::fmt;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Dor,
    Eor,
    Wait,
    Solve,
}

impl Command {
    pub const ALL: [Command; 4] = [Command::Dor, Command::Eor, Command::Wait, Command::Solve];

    pub fn name(self) -> &'static str {
        match self {
            Command::Dor => "dor",
            Command::Eor => "eor",
            Command::Wait => "wait",
            Command::Solve => "solve",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Command::Dor => DOR,
            Command::Eor => EOR,
            Command::Wait => WAIT,
            Command::Solve => SOLVE,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const DOR: u8 = 1;
const EOR: u8 = 2;
const WAIT: u8 = 4;
const SOLVE: u8 = 8;
const CURVES: u8 = DOR | EOR | WAIT;
const ALL: u8 = DOR | EOR | WAIT | SOLVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Value,
    Switch,
    /// Accepted on the command line only; never read from a config file and
    /// not part of the recorded configuration.
    CommandLine,
    /// Where results go rather than what is computed; not recorded.
    Output,
}

pub struct Key {
    pub name: &'static str,
    pub help: &'static str,
    pub kind: Kind,
    scope: u8,
}

impl Key {
    pub fn applies_to(&self, cmd: Command) -> bool {
        self.scope & cmd.bit() != 0
    }
}

const fn key(name: &'static str, scope: u8, kind: Kind, help: &'static str) -> Key {
    Key { name, help, kind, scope }
}

use Kind::{CommandLine, Output, Switch, Value};

pub static KEYS: &[Key] = &[
    key("preset", CURVES, CommandLine, "Figure preset: fig2, fig3 (dor), fig4 (eor), fig5 (wait)"),
    key("config", ALL, CommandLine, "Key-value config file; keys mirror flag names"),
    key("out", ALL, Output, "Output path (stdout when absent)"),
    key("format", ALL, Output, "Output format: csv or json"),
    key("plot", CURVES, Switch, "Also write an SVG plot next to --out"),
    key("seed", CURVES, Value, "Master seed for Monte Carlo streams"),
    key("trials", CURVES, Value, "Monte Carlo trials (traces for wait)"),
    key("ci-level", CURVES, Value, "Confidence level of reported intervals"),
    key("method", CURVES, Value, "closed, mc or both"),
    key("strategy", DOR, Value, "Comma list of cra, opra, amc"),
    key("avg-snr", DOR | SOLVE, Value, "Average received SNR, linear"),
    key("avg-snr-db", DOR | SOLVE, Value, "Average received SNR in dB"),
    key("avg-gain", EOR | WAIT, Value, "Average channel power gain, linear"),
    key("avg-gain-db", EOR | WAIT, Value, "Average channel power gain in dB"),
    key("bw-hz", ALL, Value, "Channel bandwidth in Hz"),
    key("noise-psd", EOR | WAIT, Value, "Noise power spectral density in W/Hz"),
    key("branches", DOR | SOLVE, Value, "Selection-combining branches (comma list for dor)"),
    key("h-bits", ALL, Value, "Data amount in bits (comma list for curves)"),
    key("thresholds", CURVES, Value, "Explicit threshold grid, comma list"),
    key("t-min-s", DOR, Value, "Smallest delay threshold of the log grid"),
    key("t-max-s", DOR | WAIT, Value, "Largest delay threshold (dor) or waiting time (wait)"),
    key("e-min-j", EOR, Value, "Smallest energy threshold of the log grid"),
    key("e-max-j", EOR, Value, "Largest energy threshold of the log grid"),
    key("points-per-decade", DOR | EOR, Value, "Density of log-spaced grids"),
    key("wait-points", WAIT, Value, "Number of points of the linear waiting-time grid"),
    key("gamma-c", EOR | WAIT, Value, "CPA target SNR, linear (comma list)"),
    key("gamma-c-db", EOR | WAIT, Value, "CPA target SNR in dB (comma list)"),
    key("pmax-w", EOR | WAIT, Value, "CPA peak transmit power in W (comma list)"),
    key("pc-w", EOR, Value, "Circuit power during transmission in W"),
    key("doppler-hz", WAIT, Value, "Maximum Doppler frequency in Hz"),
    key("sinusoids", WAIT, Value, "Sinusoids per quadrature of the fading generator"),
    key("sample-dt-s", WAIT, Value, "Sampling interval of the fading process"),
    key("cap-s", WAIT, Value, "Censoring cap of the first-passage search"),
    key("trace-out", WAIT, Output, "Write one sampled gain trace as CSV"),
    key("trace-duration-s", WAIT, Value, "Duration of the trace written by --trace-out"),
    key("amc-scheme", DOR, Value, "AMC scheme file (modes and per-class BER targets)"),
    key("traffic-class", DOR, Value, "AMC traffic class: critical-mtc, mbb, massive-mtc"),
    key("find", SOLVE, Value, "Unknown to solve for: branches or avg-snr"),
    key("target", SOLVE, Value, "DOR target"),
    key("t-th-s", SOLVE, Value, "Delay threshold in seconds"),
    key("c", SOLVE, Value, "Spectral load H/(W·T) in bit/s/Hz"),
];

/// Pairs of keys naming the same quantity on linear and dB scales.
const ALIASES: &[(&str, &str)] = &[("avg-snr", "avg-snr-db"), ("avg-gain", "avg-gain-db"), ("gamma-c", "gamma-c-db")];

pub fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

fn partner(name: &str) -> Option<&'static str> {
    ALIASES.iter().find_map(|&(a, b)| {
        if a == name {
            Some(b)
        } else if b == name {
            Some(a)
        } else {
            None
        }
    })
}

fn defaults(cmd: Command) -> Vec<(&'static str, &'static str)> {
    let mut d = vec![("format", "csv"), ("bw-hz", "200000")];
    match cmd {
        Command::Dor | Command::Eor | Command::Wait => {
            d.extend([("seed", "1"), ("trials", "100000"), ("ci-level", "0.99"), ("method", "both")]);
        }
        Command::Solve => {}
    }
    match cmd {
        Command::Dor => d.extend([
            ("strategy", "cra"),
            ("branches", "1"),
            ("t-min-s", "0.001"),
            ("t-max-s", "1"),
            ("points-per-decade", "60"),
        ]),
        Command::Eor => d.extend([
            ("noise-psd", "1e-7"),
            ("pc-w", "0"),
            ("e-min-j", "0.001"),
            ("e-max-j", "1"),
            ("points-per-decade", "60"),
        ]),
        Command::Wait => d.extend([("noise-psd", "1e-7"), ("t-max-s", "0.25"), ("wait-points", "251"), ("trace-duration-s", "1")]),
        Command::Solve => d.extend([("branches", "1")]),
    }
    d
}

fn preset(name: &str, cmd: Command) -> Result<Vec<(&'static str, &'static str)>, CliError> {
    let (owner, values): (Command, Vec<(&'static str, &'static str)>) = match name {
        "fig2" => (
            Command::Dor,
            vec![
                ("avg-snr-db", "10"),
                ("bw-hz", "200000"),
                ("strategy", "cra,opra"),
                ("h-bits", "20000,5000"),
                ("t-min-s", "0.001"),
                ("t-max-s", "1"),
            ],
        ),
        "fig3" => (
            Command::Dor,
            vec![
                ("avg-snr-db", "20"),
                ("bw-hz", "200000"),
                ("strategy", "cra"),
                ("h-bits", "5000"),
                ("branches", "1,2,5,10,15"),
                ("t-min-s", "0.001"),
                ("t-max-s", "1"),
            ],
        ),
        "fig4" => (
            Command::Eor,
            vec![
                ("h-bits", "50000"),
                ("avg-gain-db", "-10"),
                ("bw-hz", "200000"),
                ("noise-psd", "1e-7"),
                ("e-min-j", "0.001"),
                ("e-max-j", "1"),
            ],
        ),
        "fig5" => (
            Command::Wait,
            vec![
                ("avg-gain-db", "-10"),
                ("doppler-hz", "50"),
                ("bw-hz", "200000"),
                ("noise-psd", "1e-7"),
                ("t-max-s", "0.25"),
            ],
        ),
        other => return Err(CliError::Config(format!("preset: unknown preset `{other}`"))),
    };
    if owner != cmd {
        return Err(CliError::Config(format!("preset: `{name}` belongs to `{owner}`, not `{cmd}`")));
    }
    Ok(values)
}

/// Fully merged configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

/// Source layer of a value, lowest precedence first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layer {
    Default,
    Preset,
    ConfigFile,
    Flag,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Layer::Default => "default",
            Layer::Preset => "preset",
            Layer::ConfigFile => "config file",
            Layer::Flag => "command line",
        })
    }
}

struct Merger {
    cmd: Command,
    values: BTreeMap<String, (String, Layer)>,
}

impl Merger {
    fn apply(&mut self, layer: Layer, entries: &[(String, String)]) -> Result<(), CliError> {
        for (k, _) in entries {
            if let Some(p) = partner(k) {
                if entries.iter().any(|(o, _)| o == p) {
                    return Err(CliError::Config(format!("{k}: conflicts with `{p}` in the same {layer}")));
                }
            }
        }
        for (k, v) in entries {
            let spec = lookup(k).ok_or_else(|| CliError::Config(format!("{k}: unknown key")))?;
            if !spec.applies_to(self.cmd) {
                return Err(CliError::Config(format!("{k}: not used by `{}`", self.cmd)));
            }
            if let Some(p) = partner(k) {
                if let Some((old, from)) = self.values.remove(p) {
                    log::info!("{k} = {v} from {layer} replaces {p} = {old} from {from}");
                }
            }
            if let Some((old, from)) = self.values.get(k.as_str()) {
                if old != v && *from != Layer::Default {
                    log::info!("{k} = {v} from {layer} overrides {old} from {from}");
                }
            }
            self.values.insert(k.clone(), (v.clone(), layer));
        }
        Ok(())
    }
}

fn owned(pairs: Vec<(&'static str, &'static str)>) -> Vec<(String, String)> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

impl ScenarioConfig {
    /// Merges defaults < preset < config file < flags. `flags` holds only
    /// the keys given on the command line.
    pub fn resolve(cmd: Command, flags: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let mut m = Merger { cmd, values: BTreeMap::new() };
        m.apply(Layer::Default, &owned(defaults(cmd)))?;
        if let Some(name) = flags.get("preset") {
            m.apply(Layer::Preset, &owned(preset(name, cmd)?))?;
        }
        if let Some(path) = flags.get("config") {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config: cannot read {path}: {e}")))?;
            let parsed = crate::kvfile::parse(&text).map_err(|e| CliError::Config(format!("config: {path}: {e}")))?;
            for k in parsed.keys() {
                match lookup(k) {
                    Some(spec) if spec.kind == Kind::CommandLine => {
                        return Err(CliError::Config(format!("{k}: only accepted on the command line")));
                    }
                    Some(_) => {}
                    None => return Err(CliError::Config(format!("{k}: unknown key in {path}"))),
                }
            }
            m.apply(Layer::ConfigFile, &parsed.into_iter().collect::<Vec<_>>())?;
        }
        m.apply(Layer::Flag, &flags.iter().map(|(k, v)| (k.clone(), v.clone())).collect::<Vec<_>>())?;
        Ok(Self { command: cmd, values: m.values.into_iter().map(|(k, (v, _))| (k, v)).collect() })
    }

    /// Recorded configuration: every computation-relevant key plus the
    /// command name.
    pub fn provenance(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> = self
            .values
            .iter()
            .filter(|(k, _)| lookup(k).is_some_and(|s| !matches!(s.kind, Kind::Output) && s.name != "config" && s.name != "plot"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        out.insert("command".into(), self.command.name().into());
        out
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn switch(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some(v) => v.parse().map_err(|_| invalid(key, v, "expected true or false")),
        }
    }

    pub fn string(&self, key: &str) -> Result<&str, CliError> {
        self.raw(key).ok_or_else(|| CliError::Config(format!("{key}: required but not set")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        parse_f64(key, self.string(key)?)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.raw(key).map(|v| parse_f64(key, v)).transpose()
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v = self.f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(invalid(key, &v.to_string(), "must be positive"))
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let v = self.string(key)?;
        v.trim().parse().map_err(|_| invalid(key, v, "expected a nonnegative integer"))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.string(key)?;
        let items: Vec<f64> = split_list(v).map(|s| parse_f64(key, s)).collect::<Result<_, _>>()?;
        if items.is_empty() {
            return Err(invalid(key, v, "list is empty"));
        }
        Ok(items)
    }

    pub fn u32_list(&self, key: &str) -> Result<Vec<u32>, CliError> {
        let v = self.string(key)?;
        let items: Vec<u32> = split_list(v)
            .map(|s| s.parse().map_err(|_| invalid(key, s, "expected a positive integer")))
            .collect::<Result<_, _>>()?;
        if items.is_empty() || items.contains(&0) {
            return Err(invalid(key, v, "expected positive integers"));
        }
        Ok(items)
    }

    /// Linear value of a quantity that may be given as `key` or `key-db`.
    pub fn linear(&self, key: &str) -> Result<f64, CliError> {
        let db_key = format!("{key}-db");
        if self.has(key) {
            self.positive(key)
        } else if self.has(&db_key) {
            Ok(db_to_linear(self.f64(&db_key)?))
        } else {
            Err(CliError::Config(format!("{key}: required (or {db_key})")))
        }
    }

    pub fn linear_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let db_key = format!("{key}-db");
        if self.has(key) {
            let v = self.f64_list(key)?;
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(invalid(key, self.raw(key).unwrap_or_default(), "values must be positive"));
            }
            Ok(v)
        } else if self.has(&db_key) {
            Ok(self.f64_list(&db_key)?.into_iter().map(db_to_linear).collect())
        } else {
            Err(CliError::Config(format!("{key}: required (or {db_key})")))
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CliError> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(invalid(key, v, "expected a finite number")),
    }
}

fn invalid(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key}: invalid value `{value}`: {why}"))
}

/// `min·10^{k/n}` for `k = 0..`, ending exactly at `max`.
pub fn log_grid(min: f64, max: f64, per_decade: u64) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && max > min) || per_decade == 0 {
        return Err(CliError::Config(format!(
            "grid: need 0 < min < max and points-per-decade >= 1, got [{min}, {max}] with {per_decade}"
        )));
    }
    let steps = ((max / min).log10() * per_decade as f64).round().max(1.0) as u64;
    let mut grid: Vec<f64> = (0..steps).map(|k| min * 10f64.powf(k as f64 / per_decade as f64)).collect();
    grid.retain(|&t| t < max);
    grid.push(max);
    Ok(grid)
}

/// `n` evenly spaced points on `[0, max]`.
pub fn linear_grid(max: f64, n: u64) -> Result<Vec<f64>, CliError> {
    if !(max > 0.0) || n < 2 {
        return Err(CliError::Config(format!("grid: need max > 0 and at least 2 points, got {max} and {n}")));
    }
    Ok((0..n).map(|k| max * k as f64 / (n - 1) as f64).collect())
}

/// Explicit `thresholds` if set, otherwise `fallback()`. Explicit grids must
/// be nonempty and strictly increasing.
pub fn threshold_grid(
    cfg: &ScenarioConfig,
    allow_zero: bool,
    fallback: impl FnOnce() -> Result<Vec<f64>, CliError>,
) -> Result<Vec<f64>, CliError> {
    if !cfg.has("thresholds") {
        return fallback();
    }
    let grid = cfg.f64_list("thresholds")?;
    let lowest_ok = if allow_zero { grid[0] >= 0.0 } else { grid[0] > 0.0 };
    if !lowest_ok || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Config(format!(
            "thresholds: must be strictly increasing and {}",
            if allow_zero { "nonnegative" } else { "positive" }
        )));
    }
    Ok(grid)
}
