use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::config::GeneratorConfig;
use super::generate::SynthDataset;
use crate::ingest::{reporting_rate, Country};
use crate::metrics::decompose;
use crate::taxonomy::{noise_type, AggregatedClass, GcrcClass, NoiseType, VerificationFlag};

/// Shares and rates are checked at this absolute tolerance.
pub const SHARE_TOLERANCE: f64 = 0.02;
pub const SUPER_REPORTER_THRESHOLD: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    Within { target: f64, tolerance: f64 },
    AtLeast { minimum: f64 },
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub metric: String,
    pub achieved: f64,
    pub check: Check,
}

impl CalibrationRow {
    pub fn pass(&self) -> Option<bool> {
        match self.check {
            Check::Within { target, tolerance } => Some((self.achieved - target).abs() <= tolerance),
            Check::AtLeast { minimum } => Some(self.achieved >= minimum),
            Check::Info => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
}

impl CalibrationReport {
    pub fn row(&self, metric: &str) -> Option<&CalibrationRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    pub fn missed(&self) -> Vec<&CalibrationRow> {
        self.rows.iter().filter(|r| r.pass() == Some(false)).collect()
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>12} {:>20}  status", "metric", "achieved", "target")?;
        for r in &self.rows {
            let target = match r.check {
                Check::Within { target, tolerance } => format!("{target:.4} ± {tolerance:.3}"),
                Check::AtLeast { minimum } => format!(">= {minimum}"),
                Check::Info => String::new(),
            };
            let status = match r.pass() {
                Some(true) => "ok",
                Some(false) => "MISSED",
                None => "",
            };
            writeln!(f, "{:<28} {:>12.4} {:>20}  {status}", r.metric, r.achieved, target)?;
        }
        Ok(())
    }
}

/// Expected noise fractions implied by a config's marginals and flag rates.
pub fn expected_noise(config: &GeneratorConfig) -> BTreeMap<NoiseType, f64> {
    let mut out: BTreeMap<NoiseType, f64> = NoiseType::ALL.iter().map(|&n| (n, 0.0)).collect();
    for (class, share) in config.expected_class_shares() {
        let vm = if class.is_controversial() { config.vm_rate_given_c } else { 0.0 };
        let vo = (1.0 - vm) * config.vo_rate(class);
        for (flag, p) in [
            (VerificationFlag::VM, vm),
            (VerificationFlag::VO, vo),
            (VerificationFlag::None, 1.0 - vm - vo),
        ] {
            *out.get_mut(&noise_type(class, flag)).unwrap() += share * p;
        }
    }
    out
}

fn median(sorted: &[u64]) -> f64 {
    let n = sorted.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0
    }
}

/// Achieved marginals of a generated dataset against what its config implies.
pub fn calibration_report(dataset: &SynthDataset) -> CalibrationReport {
    let cfg = &dataset.config;
    let mut rows = Vec::new();
    let within = |target| Check::Within { target, tolerance: SHARE_TOLERANCE };
    let n = dataset.contents.len() as f64;

    let expected = cfg.expected_class_shares();
    let mut counts: BTreeMap<AggregatedClass, usize> = BTreeMap::new();
    for c in &dataset.contents {
        if let Some(g) = c.gcrc {
            *counts.entry(g.aggregate()).or_default() += 1;
        }
    }
    for agg in AggregatedClass::ALL {
        let target: f64 = expected.iter().filter(|(k, _)| k.aggregate() == agg).map(|(_, v)| v).sum();
        let achieved = counts.get(&agg).copied().unwrap_or(0) as f64 / n;
        rows.push(CalibrationRow { metric: format!("share_{agg}"), achieved, check: within(target) });
    }

    let rate_of = |pred: &dyn Fn(GcrcClass) -> bool, flag: VerificationFlag| {
        let pool: Vec<_> = dataset.contents.iter().filter(|c| c.gcrc.is_some_and(pred)).collect();
        if pool.is_empty() {
            return None;
        }
        Some(pool.iter().filter(|c| c.verification == flag).count() as f64 / pool.len() as f64)
    };
    if let Some(r) = rate_of(&|g| g.is_controversial(), VerificationFlag::VM) {
        rows.push(CalibrationRow { metric: "vm_rate_given_C".into(), achieved: r, check: Check::Info });
    }
    let m_classes = [GcrcClass::M1, GcrcClass::M2, GcrcClass::M3, GcrcClass::MS];
    if let Some(r) = rate_of(&|g| m_classes.contains(&g), VerificationFlag::VO) {
        rows.push(CalibrationRow { metric: "vo_rate_given_M".into(), achieved: r, check: Check::Info });
    }
    if let Some(r) = rate_of(&|g| g == GcrcClass::I, VerificationFlag::VO) {
        rows.push(CalibrationRow { metric: "vo_rate_given_I".into(), achieved: r, check: Check::Info });
    }

    if let Ok(d) = decompose(&dataset.contents) {
        let exp = expected_noise(cfg);
        rows.push(CalibrationRow {
            metric: "inaccuracy".into(),
            achieved: d.inaccuracy(),
            check: within(1.0 - exp[&NoiseType::Accurate]),
        });
        for kind in NoiseType::ALL {
            rows.push(CalibrationRow {
                metric: kind.as_str().to_string(),
                achieved: d.fraction(kind),
                check: within(exp[&kind]),
            });
        }
    }

    let mut per_reporter: BTreeMap<&str, u64> = dataset.reporters.keys().map(|k| (k.as_str(), 0)).collect();
    for e in &dataset.events {
        *per_reporter.entry(&e.reporter_id).or_default() += 1;
    }
    let mut activity: Vec<u64> = per_reporter.into_values().collect();
    activity.sort_unstable();
    let supers = activity.iter().filter(|&&a| a > SUPER_REPORTER_THRESHOLD).count();
    rows.push(CalibrationRow {
        metric: "super_reporters".into(),
        achieved: supers as f64,
        check: if cfg.n_reporters >= 10_000 { Check::AtLeast { minimum: 1.0 } } else { Check::Info },
    });
    let med = median(&activity);
    let max = activity.last().copied().unwrap_or(0) as f64;
    rows.push(CalibrationRow {
        metric: "max_to_median_activity".into(),
        achieved: if med > 0.0 { max / med } else { 0.0 },
        check: if cfg.n_reporters >= 10_000 { Check::AtLeast { minimum: 50.0 } } else { Check::Info },
    });
    rows.push(CalibrationRow { metric: "events".into(), achieved: dataset.events.len() as f64, check: Check::Info });

    let mut mau: BTreeMap<Country, u64> = BTreeMap::new();
    for c in &cfg.cells {
        *mau.entry(c.country).or_default() += c.mau;
    }
    if let Ok(rates) = reporting_rate(&dataset.events, &mau) {
        for (country, r) in rates {
            rows.push(CalibrationRow { metric: format!("reporting_rate_{country}"), achieved: r, check: Check::Info });
        }
    }
    CalibrationReport { rows }
}

#[cfg(test)]
mod tests {
    use super::super::{generate, preset, BehaviourKind};
    use super::*;

    #[test]
    fn expected_noise_of_ig_us() {
        let e = expected_noise(&preset("ig-us").unwrap());
        let total: f64 = e.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((e[&NoiseType::FalseNoise] - 0.35).abs() < 0.005);
        assert!((e[&NoiseType::QuasiNoise] - 0.20).abs() < 0.005);
        assert!((e[&NoiseType::SoftNoise] - 0.03).abs() < 0.005);
        assert!((e[&NoiseType::HardNoise] - 0.34).abs() < 0.005);
    }

    #[test]
    fn degenerate_report() {
        let mut cfg = preset("ig-us").unwrap();
        cfg.n_content = 50;
        cfg.n_reporters = 200;
        cfg.behaviour_mix = BTreeMap::from([(BehaviourKind::FaithfulFlagger, 1.0)]);
        cfg.cells[0].class_marginals = BTreeMap::from([(GcrcClass::C2, 1.0)]);
        cfg.vm_rate_given_c = 1.0;
        let report = calibration_report(&generate(&cfg).unwrap());
        assert_eq!(report.row("accurate").unwrap().achieved, 1.0);
        assert_eq!(report.row("share_C").unwrap().achieved, 1.0);
        assert!(report.missed().is_empty(), "{report}");
    }

    #[test]
    fn default_report_rows() {
        let mut cfg = preset("ig-us").unwrap();
        cfg.seed = 11;
        let report = calibration_report(&generate(&cfg).unwrap());
        let c = report.row("share_C").unwrap();
        assert!(matches!(c.check, Check::Within { target, .. } if (target - 0.418).abs() < 0.01));
        assert!(report.row("super_reporters").unwrap().achieved > 0.0);
        assert!(report.row("max_to_median_activity").unwrap().achieved > 50.0);
        assert!(report.missed().is_empty(), "{report}");
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[]), 0.0);
        assert_eq!(median(&[1, 2, 9]), 2.0);
        assert_eq!(median(&[1, 2, 3, 9]), 2.5);
    }
}
