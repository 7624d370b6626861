//! Command-line front end.
//!
//! Every flag is also a config-file key; see [`config::KEYS`]. Exit codes:
//! 0 success, 1 I/O failure, 2 configuration error, 3 infeasible or
//! censoring-dominated result.

pub mod commands;
pub mod config;
mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Arg, ArgAction};
use thiserror::Error;

use crate::metrics::{write_csv, write_json};
use config::{Command, Kind, ScenarioConfig, KEYS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Io(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Io(_) | CliError::Numeric(_) => EXIT_IO,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error::*;
        match e {
            Infeasible { saturated_dor } => {
                CliError::Infeasible(format!("single-branch DOR saturates at {saturated_dor}; no diversity order helps"))
            }
            Domain(_) | Unsupported(_) | NotPermitted { .. } => CliError::Config(e.to_string()),
            Bracket { .. } | Convergence { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

fn about(cmd: Command) -> &'static str {
    match cmd {
        Command::Dor => "Delay outage rate curves for CRA, OPRA or AMC",
        Command::Eor => "Energy outage rate curves for truncated channel inversion (CPA)",
        Command::Wait => "Waiting-time and delivery-time CDFs for CPA over Doppler fading",
        Command::Solve => "Minimal diversity order or average SNR meeting a DOR target",
    }
}

fn cli() -> clap::Command {
    let mut root = clap::Command::new("dataqos")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Delay and energy outage analysis of data transmission sessions over fading channels")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for cmd in Command::ALL {
        let mut sub = clap::Command::new(cmd.name()).about(about(cmd));
        for key in KEYS.iter().filter(|k| k.applies_to(cmd)) {
            let arg = Arg::new(key.name).long(key.name).help(key.help);
            sub = sub.arg(match key.kind {
                Kind::Switch => arg.action(ArgAction::SetTrue),
                _ => arg.action(ArgAction::Set).value_name("VALUE").allow_hyphen_values(true),
            });
        }
        root = root.subcommand(sub);
    }
    root
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cmd = Command::ALL.into_iter().find(|c| c.name() == name).expect("registered subcommand");
    let mut flags = BTreeMap::new();
    for key in KEYS.iter().filter(|k| k.applies_to(cmd)) {
        match key.kind {
            Kind::Switch => {
                if sub.get_flag(key.name) {
                    flags.insert(key.name.to_string(), "true".to_string());
                }
            }
            _ => {
                if let Some(v) = sub.get_one::<String>(key.name) {
                    flags.insert(key.name.to_string(), v.clone());
                }
            }
        }
    }
    match execute(cmd, &flags) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("dataqos {}: {e}", cmd.name());
            e.exit_code()
        }
    }
}

fn execute(cmd: Command, flags: &BTreeMap<String, String>) -> Result<i32, CliError> {
    let cfg = ScenarioConfig::resolve(cmd, flags)?;
    let json = match cfg.string("format")? {
        "csv" => false,
        "json" => true,
        other => return Err(CliError::Config(format!("format: invalid value `{other}`: expected csv or json"))),
    };
    let out = cfg.raw("out").map(Path::new);
    let plot = cfg.switch("plot")?;
    if plot && out.is_none_or(|p| p.extension().is_some_and(|e| e == "svg")) {
        return Err(CliError::Config("plot: requires --out with a non-.svg path; the plot goes next to it".into()));
    }
    let provenance = cfg.provenance();

    let mut buf = Vec::new();
    let exit_code = if cmd == Command::Solve {
        let report = commands::run_solve(&cfg)?;
        if json {
            serde_json::to_writer_pretty(&mut buf, &commands::solve_json(&report, &provenance))
                .map_err(|e| CliError::Io(e.to_string()))?;
            buf.push(b'\n');
        } else {
            for (k, v) in &provenance {
                let _ = writeln!(buf, "# {k} = {v}");
            }
            for (k, v) in &report {
                let _ = writeln!(buf, "{k} = {v}");
            }
        }
        EXIT_OK
    } else {
        let report = match cmd {
            Command::Dor => commands::run_dor(&cfg)?,
            Command::Eor => commands::run_eor(&cfg)?,
            _ => commands::run_wait(&cfg)?,
        };
        let written = if json {
            write_json(&report.curves, &provenance, &mut buf)
        } else {
            write_csv(&report.curves, &provenance, &mut buf)
        };
        written.map_err(|e| CliError::Io(e.to_string()))?;
        if let (true, Some(path)) = (plot, out) {
            let unit = report.curves.first().map_or("", |c| c.unit.as_str());
            let axis = match cmd {
                Command::Eor => format!("energy threshold ({unit})"),
                Command::Wait => format!("time ({unit})"),
                _ => format!("delay threshold ({unit})"),
            };
            let svg_path = path.with_extension("svg");
            std::fs::write(&svg_path, svg::render(&report.curves, report.log_x, &axis))
                .map_err(|e| CliError::Io(format!("{}: {e}", svg_path.display())))?;
        }
        report.exit_code
    };

    match out {
        Some(path) => std::fs::write(path, &buf).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(exit_code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        cli().debug_assert();
    }

    #[test]
    fn error_codes() {
        assert_eq!(run(["dataqos", "dor", "--bogus", "1"]), EXIT_CONFIG);
        assert_eq!(run(["dataqos", "dor", "--preset", "fig2", "--thresholds", ""]), EXIT_CONFIG);
        assert_eq!(run(["dataqos", "eor", "--preset", "fig4", "--gamma-c-db", "10"]), EXIT_CONFIG);
        assert_eq!(run(["dataqos", "wait", "--preset", "fig5", "--gamma-c", "10", "--pmax-w", "1", "--trials", "0"]), EXIT_CONFIG);
        assert_eq!(
            run(["dataqos", "solve", "--find", "branches", "--avg-snr-db", "20", "--h-bits", "5000", "--t-th-s", "0.001", "--target", "1e-9"]),
            EXIT_INFEASIBLE
        );
    }
}
