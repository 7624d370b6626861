//! Adaptive modulation with per-traffic-class target error rates.
//!
//! Mode thresholds come from the exponential M-QAM approximation
//! `BER ≈ 0.2·exp(-1.5γ/(M-1))`, valid for target BERs below 0.2. Thresholds
//! are uncoded; a coded scheme would scale each one by its SNR gap.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kvfile;

/// Upper limit of target BERs the approximation covers.
pub const BER_MODEL_LIMIT: f64 = 0.2;

/// Approximate M-QAM bit error rate at SNR `snr`.
pub fn qam_ber(snr: f64, constellation_size: u32) -> f64 {
    BER_MODEL_LIMIT * (-1.5 * snr / (constellation_size as f64 - 1.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrafficClass {
    CriticalMtc,
    Mbb,
    MassiveMtc,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 3] = [TrafficClass::CriticalMtc, TrafficClass::Mbb, TrafficClass::MassiveMtc];

    pub fn key(&self) -> &'static str {
        match self {
            TrafficClass::CriticalMtc => "critical-mtc",
            TrafficClass::Mbb => "mbb",
            TrafficClass::MassiveMtc => "massive-mtc",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for TrafficClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrafficClass::ALL
            .into_iter()
            .find(|c| c.key() == s)
            .ok_or_else(|| Error::Domain(format!("unknown traffic class `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmcMode {
    pub constellation_size: u32,
    /// Bits per symbol.
    pub spectral_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmcScheme {
    modes: Vec<AmcMode>,
    class_target_ber: BTreeMap<TrafficClass, f64>,
}

impl AmcScheme {
    pub fn new(modes: Vec<AmcMode>, class_target_ber: BTreeMap<TrafficClass, f64>) -> Result<Self> {
        if modes.is_empty() {
            return domain("AMC scheme needs at least one mode");
        }
        for m in &modes {
            if m.constellation_size < 2 {
                return domain(format!("constellation size must be at least 2, got {}", m.constellation_size));
            }
            if !(m.spectral_efficiency > 0.0 && m.spectral_efficiency.is_finite()) {
                return domain(format!("spectral efficiency must be positive, got {}", m.spectral_efficiency));
            }
        }
        if modes.windows(2).any(|w| w[0].constellation_size >= w[1].constellation_size) {
            return domain("modes must be strictly increasing in constellation size");
        }
        for (class, &ber) in &class_target_ber {
            check_target_ber(ber).map_err(|_| {
                Error::Domain(format!("target BER for {class} must lie in (0, {BER_MODEL_LIMIT}), got {ber}"))
            })?;
        }
        Ok(Self { modes, class_target_ber })
    }

    /// Square QAM modes `M ∈ {4, 16, 64, ...}` with `log2 M` bits per symbol.
    pub fn square_qam(sizes: &[u32], class_target_ber: BTreeMap<TrafficClass, f64>) -> Result<Self> {
        let modes = sizes
            .iter()
            .map(|&m| AmcMode { constellation_size: m, spectral_efficiency: (m as f64).log2() })
            .collect();
        Self::new(modes, class_target_ber)
    }

    /// Parses the key-value form:
    ///
    /// ```text
    /// # size:bits_per_symbol, bits default to log2 M
    /// modes = 4:2, 16:4, 64:6
    /// ber.critical-mtc = 1e-6
    /// ber.mbb = 1e-3
    /// ber.massive-mtc = 1e-2
    /// ```
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let map = kvfile::parse(text).map_err(|e| Error::Domain(e.to_string()))?;
        let mut modes = None;
        let mut targets = BTreeMap::new();
        for (key, value) in &map {
            if key == "modes" {
                modes = Some(parse_modes(value)?);
            } else if let Some(class) = key.strip_prefix("ber.") {
                let class: TrafficClass = class.parse()?;
                let ber: f64 = value
                    .parse()
                    .map_err(|_| Error::Domain(format!("{key}: `{value}` is not a number")))?;
                targets.insert(class, ber);
            } else {
                return domain(format!("unknown AMC key `{key}`"));
            }
        }
        let modes = modes.ok_or_else(|| Error::Domain("missing key `modes`".into()))?;
        Self::new(modes, targets)
    }

    pub fn modes(&self) -> &[AmcMode] {
        &self.modes
    }

    pub fn target_ber(&self, class: TrafficClass) -> Result<f64> {
        self.class_target_ber
            .get(&class)
            .copied()
            .ok_or_else(|| Error::Domain(format!("no target BER configured for {class}")))
    }

    /// Per-mode switching thresholds for `class`, in mode order.
    pub fn thresholds(&self, class: TrafficClass) -> Result<Vec<f64>> {
        amc_thresholds(self, class)
    }

    pub fn select_mode(&self, class: TrafficClass, snr: f64) -> Result<Option<AmcMode>> {
        amc_select_mode(self, class, snr)
    }
}

fn parse_modes(value: &str) -> Result<Vec<AmcMode>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let bad = || Error::Domain(format!("modes: cannot parse `{item}`"));
            let (size, bits) = match item.split_once(':') {
                Some((m, b)) => (m.trim().parse::<u32>().map_err(|_| bad())?, Some(b.trim().parse::<f64>().map_err(|_| bad())?)),
                None => (item.parse::<u32>().map_err(|_| bad())?, None),
            };
            Ok(AmcMode { constellation_size: size, spectral_efficiency: bits.unwrap_or((size as f64).log2()) })
        })
        .collect()
}

fn check_target_ber(ber: f64) -> Result<()> {
    if ber > 0.0 && ber < BER_MODEL_LIMIT {
        Ok(())
    } else {
        domain(format!("target BER must lie in (0, {BER_MODEL_LIMIT}), got {ber}"))
    }
}

/// SNR at which a constellation of size `m` meets `target_ber`.
pub fn threshold_for(constellation_size: u32, target_ber: f64) -> Result<f64> {
    check_target_ber(target_ber)?;
    Ok(-(constellation_size as f64 - 1.0) * (target_ber / BER_MODEL_LIMIT).ln() / 1.5)
}

pub fn amc_thresholds(scheme: &AmcScheme, class: TrafficClass) -> Result<Vec<f64>> {
    let ber = scheme.target_ber(class)?;
    scheme.modes.iter().map(|m| threshold_for(m.constellation_size, ber)).collect()
}

/// Largest mode whose threshold is at or below `snr`.
pub fn amc_select_mode(scheme: &AmcScheme, class: TrafficClass, snr: f64) -> Result<Option<AmcMode>> {
    let thresholds = amc_thresholds(scheme, class)?;
    Ok(scheme
        .modes
        .iter()
        .zip(&thresholds)
        .rev()
        .find(|(_, &t)| t <= snr)
        .map(|(m, _)| *m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn scheme() -> AmcScheme {
        let targets = BTreeMap::from([
            (TrafficClass::CriticalMtc, 1e-6),
            (TrafficClass::Mbb, 1e-3),
            (TrafficClass::MassiveMtc, 1e-2),
        ]);
        AmcScheme::square_qam(&[4, 16, 64], targets).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let t = threshold_for(4, 1e-3).unwrap();
        assert_abs_diff_eq!(t, 10.597, epsilon = 1e-3);
        assert_abs_diff_eq!(10.0 * t.log10(), 10.25, epsilon = 1e-2);
        assert_abs_diff_eq!(threshold_for(4, 1e-6).unwrap(), 24.412, epsilon = 1e-3);
        assert_abs_diff_eq!(threshold_for(16, 1e-3).unwrap(), 52.983, epsilon = 1e-3);
        for (m, p) in [(4, 1e-3), (4, 1e-6), (16, 1e-3), (64, 1e-9)] {
            let t = threshold_for(m, p).unwrap();
            assert!((qam_ber(t, m) - p).abs() < 1e-12);
        }
        assert!(threshold_for(4, 0.2).is_err());
        assert!(threshold_for(4, 0.0).is_err());
    }

    #[test]
    fn selection_examples() {
        let s = scheme();
        let c = TrafficClass::Mbb;
        assert_eq!(s.select_mode(c, 1.0).unwrap(), None);
        let t4 = s.thresholds(c).unwrap()[0];
        assert_eq!(s.select_mode(c, t4).unwrap().unwrap().constellation_size, 4);
        assert_eq!(s.select_mode(c, 60.0).unwrap().unwrap().constellation_size, 16);
        assert_abs_diff_eq!(s.thresholds(c).unwrap()[2], 222.53, epsilon = 1e-2);
    }

    #[test]
    fn missing_class_and_bad_schemes() {
        let s = AmcScheme::square_qam(&[4], BTreeMap::from([(TrafficClass::Mbb, 1e-3)])).unwrap();
        assert!(s.thresholds(TrafficClass::CriticalMtc).is_err());
        assert!(AmcScheme::square_qam(&[16, 4], BTreeMap::new()).is_err());
        assert!(AmcScheme::square_qam(&[4, 4], BTreeMap::new()).is_err());
        assert!(AmcScheme::square_qam(&[1], BTreeMap::new()).is_err());
        assert!(AmcScheme::square_qam(&[4], BTreeMap::from([(TrafficClass::Mbb, 0.3)])).is_err());
    }

    #[test]
    fn kv_round_trip() {
        let text = "# uncoded QAM\nmodes = 4:2, 16:4, 64\nber.critical-mtc = 1e-6\nber.mbb = 1e-3\nber.massive-mtc = 1e-2\n";
        assert_eq!(AmcScheme::from_kv_str(text).unwrap(), scheme());
        assert!(AmcScheme::from_kv_str("ber.mbb = 1e-3").is_err());
        assert!(AmcScheme::from_kv_str("modes = 4\nber.urllc = 1e-3").is_err());
        assert!(AmcScheme::from_kv_str("modes = 4\ncolour = red").is_err());
        assert!(AmcScheme::from_kv_str("modes = four").is_err());
    }

    #[test]
    fn critical_class_is_most_conservative() {
        let s = scheme();
        let crit = s.thresholds(TrafficClass::CriticalMtc).unwrap();
        let mbb = s.thresholds(TrafficClass::Mbb).unwrap();
        let mass = s.thresholds(TrafficClass::MassiveMtc).unwrap();
        for i in 0..3 {
            assert!(crit[i] > mbb[i] && mbb[i] > mass[i]);
        }
        for w in crit.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    proptest! {
        #[test]
        fn selection_monotone_in_snr(a in 0.0f64..400.0, b in 0.0f64..400.0) {
            let s = scheme();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for class in TrafficClass::ALL {
                let m_lo = s.select_mode(class, lo).unwrap().map_or(0, |m| m.constellation_size);
                let m_hi = s.select_mode(class, hi).unwrap().map_or(0, |m| m.constellation_size);
                prop_assert!(m_lo <= m_hi);
            }
        }

        #[test]
        fn thresholds_increase_as_target_tightens(p in 1e-12f64..0.19, q in 1e-12f64..0.19, m in 2u32..1024) {
            prop_assume!(p != q);
            let (loose, tight) = if p > q { (p, q) } else { (q, p) };
            prop_assert!(threshold_for(m, tight).unwrap() > threshold_for(m, loose).unwrap());
            prop_assert!(threshold_for(m + 1, tight).unwrap() > threshold_for(m, tight).unwrap());
        }
    }
}
