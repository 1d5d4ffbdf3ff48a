use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::profiles::{BehaviourKind, BehaviourProfile};
use crate::ingest::{Country, Platform, ReportCategory};
use crate::taxonomy::{AggregatedClass, GcrcClass};

const NORM_TOL: f64 = 1e-9;

/// May 1 2020, 00:00 UTC.
pub const DEFAULT_START_TS: i64 = 1_588_291_200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub reason: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// One platform x country population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub platform: Platform,
    pub country: Country,
    /// Fraction of items (and reporters) placed in this cell.
    pub content_share: f64,
    /// Monthly active users, used for the reporting rate.
    pub mau: u64,
    pub class_marginals: BTreeMap<GcrcClass, f64>,
}

/// Pareto shape of the per-item popularity weight, per aggregated class.
/// Lower shapes give a heavier tail of report totals.
pub type PopularityShapes = BTreeMap<AggregatedClass, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub name: String,
    /// Replaced by a seed derived from `--seed` when run from the CLI.
    #[serde(default)]
    pub seed: u64,
    pub n_content: usize,
    pub n_reporters: usize,
    #[serde(default = "default_window_days")]
    pub window_days: u32,
    #[serde(default = "default_start_ts")]
    pub start_ts: i64,
    /// Activity is truncated at `max_reports_per_day * window_days`.
    pub max_reports_per_day: u32,
    pub behaviour_mix: BTreeMap<BehaviourKind, f64>,
    pub profiles: Vec<BehaviourProfile>,
    pub cells: Vec<CellConfig>,
    pub vm_rate_given_c: f64,
    #[serde(default)]
    pub vo_rates: BTreeMap<GcrcClass, f64>,
    pub popularity: PopularityShapes,
    /// Gamma shape of the per (behaviour, item) affinity multiplier. Small
    /// values let single items draw most of their reports from one behaviour.
    pub affinity_shape: f64,
}

fn default_window_days() -> u32 {
    crate::ingest::DEFAULT_WINDOW_DAYS
}

fn default_start_ts() -> i64 {
    DEFAULT_START_TS
}

impl GeneratorConfig {
    pub fn from_json<R: Read>(reader: R) -> Result<Self, serde_json::Error> {
        serde_json::from_reader(reader)
    }

    pub fn to_json<W: Write>(&self, writer: W) -> Result<(), serde_json::Error> {
        serde_json::to_writer_pretty(writer, self)
    }

    pub fn activity_cap(&self) -> u64 {
        self.max_reports_per_day as u64 * self.window_days as u64
    }

    pub fn profile(&self, kind: BehaviourKind) -> Option<&BehaviourProfile> {
        self.profiles.iter().find(|p| p.kind == kind)
    }

    pub fn vo_rate(&self, class: GcrcClass) -> f64 {
        self.vo_rates.get(&class).copied().unwrap_or(0.0)
    }

    /// Expected class shares over all cells.
    pub fn expected_class_shares(&self) -> BTreeMap<GcrcClass, f64> {
        let total: f64 = self.cells.iter().map(|c| c.content_share).sum();
        let mut out: BTreeMap<GcrcClass, f64> = GcrcClass::ALL.iter().map(|&c| (c, 0.0)).collect();
        for cell in &self.cells {
            for (&class, &m) in &cell.class_marginals {
                *out.get_mut(&class).unwrap() += cell.content_share / total * m;
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        let mut err = |field: String, reason: String| errs.push(FieldError { field, reason });

        if self.n_content == 0 {
            err("n_content".into(), "must be positive".into());
        }
        if self.n_reporters == 0 {
            err("n_reporters".into(), "must be positive".into());
        }
        if self.window_days == 0 {
            err("window_days".into(), "must be positive".into());
        }
        if self.start_ts < 0 {
            err("start_ts".into(), "must be non-negative".into());
        }
        if self.max_reports_per_day == 0 {
            err("max_reports_per_day".into(), "must be positive".into());
        }
        if !(self.affinity_shape > 0.0 && self.affinity_shape.is_finite()) {
            err("affinity_shape".into(), "must be positive and finite".into());
        }
        if let Some(reason) = distribution_problem(self.behaviour_mix.values()) {
            err("behaviour_mix".into(), reason);
        }
        probability("vm_rate_given_c", self.vm_rate_given_c, &mut err);
        for (class, &p) in &self.vo_rates {
            probability(&format!("vo_rates.{class}"), p, &mut err);
        }
        for class in AggregatedClass::ALL {
            match self.popularity.get(&class) {
                Some(&s) if s > 0.0 && s.is_finite() => {}
                Some(&s) => err(format!("popularity.{class}"), format!("shape {s} must be positive")),
                None => err(format!("popularity.{class}"), "missing".into()),
            }
        }

        let mut kinds = BTreeSet::new();
        for (i, p) in self.profiles.iter().enumerate() {
            let field = format!("profiles[{i}]");
            if !kinds.insert(p.kind) {
                err(field.clone(), format!("duplicate behaviour {}", p.kind));
            }
            if let Some(reason) = distribution_problem(p.target_class_weights.values()) {
                err(format!("{field}.target_class_weights"), reason);
            }
            if let Some(reason) = distribution_problem(p.category_weights.values()) {
                err(format!("{field}.category_weights"), reason);
            }
            if !(p.activity.shape > 0.0 && p.activity.scale > 0.0)
                || !p.activity.shape.is_finite()
                || !p.activity.scale.is_finite()
            {
                err(format!("{field}.activity"), "shape and scale must be positive".into());
            }
        }
        for (kind, &w) in &self.behaviour_mix {
            if w > 0.0 && !kinds.contains(kind) {
                err("behaviour_mix".into(), format!("{kind} has weight but no profile"));
            }
        }

        if self.cells.is_empty() {
            err("cells".into(), "at least one cell is required".into());
        }
        let mut seen = BTreeSet::new();
        for (i, c) in self.cells.iter().enumerate() {
            let field = format!("cells[{i}]");
            if !seen.insert((c.platform, c.country)) {
                err(field.clone(), format!("duplicate cell {} {}", c.platform, c.country));
            }
            if !(c.content_share > 0.0 && c.content_share.is_finite()) {
                err(format!("{field}.content_share"), "must be positive".into());
            }
            if c.mau == 0 {
                err(format!("{field}.mau"), "must be positive".into());
            }
            if let Some(reason) = distribution_problem(c.class_marginals.values()) {
                err(format!("{field}.class_marginals"), reason);
            }
        }
        if errs.is_empty() && self.cells.len() > self.n_reporters.min(self.n_content) {
            errs.push(FieldError {
                field: "cells".into(),
                reason: "every cell needs at least one item and one reporter".into(),
            });
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

fn probability(field: &str, p: f64, err: &mut impl FnMut(String, String)) {
    if !(0.0..=1.0).contains(&p) {
        err(field.to_string(), format!("{p} is not a probability"));
    }
}

fn distribution_problem<'a>(weights: impl Iterator<Item = &'a f64>) -> Option<String> {
    let mut sum = 0.0;
    let mut n = 0;
    for &w in weights {
        if !(w >= 0.0 && w.is_finite()) {
            return Some(format!("weight {w} must be non-negative and finite"));
        }
        sum += w;
        n += 1;
    }
    if n == 0 {
        return Some("empty distribution".into());
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Some(format!("weights sum to {sum}, expected 1"));
    }
    None
}

/// Category weights as a map, for building profiles from arrays.
pub(crate) fn category_map(weights: &[f64; crate::ingest::N_CATEGORIES]) -> BTreeMap<ReportCategory, f64> {
    ReportCategory::ALL.iter().copied().zip(weights.iter().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::super::presets::preset;
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in super::super::PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let mut buf = Vec::new();
            cfg.to_json(&mut buf).unwrap();
            let back = GeneratorConfig::from_json(&buf[..]).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn field_level_errors() {
        let mut cfg = preset("ig-us").unwrap();
        cfg.n_content = 0;
        cfg.vm_rate_given_c = 1.5;
        cfg.cells[0].class_marginals.insert(GcrcClass::C1, 0.9);
        cfg.profiles[1].activity.shape = -1.0;
        cfg.popularity.remove(&AggregatedClass::HM);
        let errs = cfg.validate().unwrap_err();
        let fields: Vec<&str> = errs.iter().map(|e| e.field.as_str()).collect();
        for want in [
            "n_content",
            "vm_rate_given_c",
            "cells[0].class_marginals",
            "profiles[1].activity",
            "popularity.HM",
        ] {
            assert!(fields.contains(&want), "missing {want} in {fields:?}");
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v = serde_json::to_value(preset("ig-us").unwrap()).unwrap();
        v["colour"] = serde_json::json!("blue");
        assert!(serde_json::from_value::<GeneratorConfig>(v).is_err());
    }

    #[test]
    fn expected_shares_sum_to_one() {
        let cfg = preset("ig-us").unwrap();
        let s: f64 = cfg.expected_class_shares().values().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}
