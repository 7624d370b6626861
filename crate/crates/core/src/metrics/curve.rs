//! Threshold/probability curves and their CSV and JSON forms.

use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::mathcore::ConfidenceInterval;
use crate::montecarlo::{MonteCarloEstimate, LOW_CONFIDENCE_EVENTS};

/// CSV header, in column order.
pub const CSV_COLUMNS: &str = "curve,threshold,value,method,ci_lo,ci_hi,successes,trials,flags";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// Whether values are a tail probability `P(X > t)` (outage curves) or a
/// CDF `P(X ≤ t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Tail,
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub value: f64,
    pub method: Method,
    pub ci: Option<ConfidenceInterval>,
    pub successes: Option<u64>,
    pub trials: Option<u64>,
}

impl CurvePoint {
    pub fn closed_form(threshold: f64, value: f64) -> Self {
        Self { threshold, value, method: Method::ClosedForm, ci: None, successes: None, trials: None }
    }

    pub fn monte_carlo(threshold: f64, est: &MonteCarloEstimate) -> Self {
        Self {
            threshold,
            value: est.estimate,
            method: Method::MonteCarlo,
            ci: Some(est.ci),
            successes: Some(est.successes),
            trials: Some(est.trials),
        }
    }

    pub fn low_confidence(&self) -> bool {
        matches!(self.successes, Some(s) if s < LOW_CONFIDENCE_EVENTS)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub kind: CurveKind,
    /// Unit of the threshold axis, e.g. `s` or `J`.
    pub unit: String,
    pub points: Vec<CurvePoint>,
    /// Monte Carlo observations that hit the censoring cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub censored: Option<u64>,
}

impl Curve {
    /// Builds a curve, checking ordering, range and monotonicity.
    pub fn new(label: impl Into<String>, kind: CurveKind, unit: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        let curve = Self { label: label.into(), kind, unit: unit.into(), points, censored: None };
        curve.validate()?;
        Ok(curve)
    }

    pub fn with_censored(mut self, censored: u64) -> Self {
        self.censored = Some(censored);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.points {
            if !(0.0..=1.0).contains(&p.value) {
                return domain(format!("{}: value {} at {} outside [0, 1]", self.label, p.value, p.threshold));
            }
        }
        for w in self.points.windows(2) {
            if !(w[0].threshold < w[1].threshold) {
                return domain(format!("{}: thresholds must be strictly increasing", self.label));
            }
            let ordered = match self.kind {
                CurveKind::Tail => w[1].value <= w[0].value,
                CurveKind::Cdf => w[1].value >= w[0].value,
            };
            if !ordered {
                return domain(format!(
                    "{}: value not monotone between {} and {}",
                    self.label, w[0].threshold, w[1].threshold
                ));
            }
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.threshold).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// Right-continuous step lookup: the value at the last grid point `≤ t`.
    /// `None` below the first grid point.
    pub fn step_value_at(&self, t: f64) -> Option<f64> {
        let idx = self.points.partition_point(|p| p.threshold <= t);
        idx.checked_sub(1).map(|i| self.points[i].value)
    }

    fn flags(&self, p: &CurvePoint) -> String {
        let mut flags = Vec::new();
        if p.low_confidence() {
            flags.push("low-confidence".to_string());
        }
        if let (Some(c), Method::MonteCarlo) = (self.censored, p.method) {
            if c > 0 {
                flags.push(format!("censored={c}"));
            }
        }
        flags.join(";")
    }
}

/// Shortest round-tripping text, switching to exponent form for very small
/// or very large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes curves as CSV. `provenance` is emitted first as `# key = value`
/// comment lines.
pub fn write_csv<W: Write>(curves: &[Curve], provenance: &BTreeMap<String, String>, mut out: W) -> io::Result<()> {
    for (k, v) in provenance {
        writeln!(out, "# {k} = {v}")?;
    }
    writeln!(out, "{CSV_COLUMNS}")?;
    for c in curves {
        for p in &c.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                c.label,
                format_f64(p.threshold),
                format_f64(p.value),
                p.method.as_str(),
                opt_f64(p.ci.map(|ci| ci.lo)),
                opt_f64(p.ci.map(|ci| ci.hi)),
                opt(p.successes),
                opt(p.trials),
                c.flags(p),
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub config: BTreeMap<String, String>,
    pub curves: Vec<Curve>,
}

pub fn write_json<W: Write>(curves: &[Curve], provenance: &BTreeMap<String, String>, mut out: W) -> io::Result<()> {
    let doc = CurveDocument { config: provenance.clone(), curves: curves.to_vec() };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)
}
