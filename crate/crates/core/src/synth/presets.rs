//! Shipped generator presets. Class mixes are approximate readings of the
//! published per-country figures; behaviour weights are derived from a small
//! set of design knobs below so that every preset shares the same mechanics.

use std::collections::BTreeMap;

use super::config::{category_map, CellConfig, GeneratorConfig, DEFAULT_START_TS};
use super::profiles::{default_activity, default_category_weights, BehaviourKind, BehaviourProfile};
use crate::ingest::{Country, Platform};
use crate::taxonomy::{AggregatedClass, GcrcClass};

pub const PRESET_NAMES: [&str; 3] = ["ig-fr", "ig-us", "fb-us"];

const N_CONTENT: usize = 4056;
const N_REPORTERS: usize = 50_000;
const MAX_REPORTS_PER_DAY: u32 = 50;
const AFFINITY_SHAPE: f64 = 0.5;

struct Design {
    platform: Platform,
    country: Country,
    marginals: [f64; 16],
    vm_rate: f64,
    vo: [f64; 16],
    /// Distinct reported items per thousand monthly active users.
    rate_per_kmau: f64,
}

use GcrcClass::*;

// Column order follows GcrcClass::ALL:
// C0 C1 C2 C2* C3 M1 M2 M3 MS H1 H2 H3 O1 O2 I J
const VO_DEFAULT: [f64; 16] =
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.55, 0.55, 0.55, 0.55, 0.0, 0.0, 0.0, 0.0, 0.0, 0.075, 0.0];

fn design(name: &str) -> Option<Design> {
    Some(match name {
        "ig-us" => Design {
            platform: Platform::IG,
            country: Country::US,
            marginals: [
                0.05, 0.07, 0.257, 0.02, 0.028, 0.05, 0.035, 0.03, 0.09975, 0.045, 0.003, 0.003, 0.167,
                0.0035, 0.13, 0.00875,
            ],
            vm_rate: 0.173,
            vo: VO_DEFAULT,
            rate_per_kmau: 0.81,
        },
        "ig-fr" => Design {
            platform: Platform::IG,
            country: Country::FR,
            marginals: [
                0.005, 0.001, 0.03, 0.004, 0.01, 0.03, 0.02, 0.02, 0.58, 0.03, 0.005, 0.005, 0.161, 0.01,
                0.08, 0.009,
            ],
            vm_rate: 0.173,
            vo: VO_DEFAULT,
            rate_per_kmau: 0.78,
        },
        "fb-us" => Design {
            platform: Platform::FB,
            country: Country::US,
            marginals: [
                0.03, 0.05, 0.21, 0.02, 0.03, 0.04, 0.04, 0.06, 0.06, 0.04, 0.01, 0.01, 0.19, 0.03, 0.17,
                0.01,
            ],
            vm_rate: 0.173,
            vo: VO_DEFAULT,
            rate_per_kmau: 0.81,
        },
        _ => return None,
    })
}

/// Mean report volume per item, relative, by aggregated class.
fn volume(class: AggregatedClass) -> f64 {
    match class {
        AggregatedClass::C => 2.0,
        AggregatedClass::M => 1.0,
        AggregatedClass::I => 1.0,
        AggregatedClass::HM => 0.8,
        AggregatedClass::OH => 1.0,
    }
}

/// Share of a class's reports contributed by each behaviour, in
/// BehaviourKind::ALL order.
fn responsibility(class: GcrcClass) -> [f64; 4] {
    match class {
        C0 | C1 | C2 | C2Star | C3 => [0.45, 0.46, 0.08, 0.01],
        M1 | M2 | MS => [0.12, 0.12, 0.75, 0.01],
        M3 => [0.1, 0.1, 0.1, 0.7],
        H1 | H2 | H3 => [0.25, 0.6, 0.14, 0.01],
        O1 | O2 | J => [0.25, 0.65, 0.09, 0.01],
        I => [0.2, 0.65, 0.14, 0.01],
    }
}

/// Pareto shape of item popularity. Heavier tails put single items above
/// the clipping quantile often enough to skew class means.
const POPULARITY_SHAPE: f64 = 3.0;

fn popularity() -> BTreeMap<AggregatedClass, f64> {
    AggregatedClass::ALL.iter().map(|&k| (k, POPULARITY_SHAPE)).collect()
}

fn normalise(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Builds a named preset. Names: `ig-fr`, `ig-us`, `fb-us`.
pub fn preset(name: &str) -> Option<GeneratorConfig> {
    let d = design(name)?;
    let cap = MAX_REPORTS_PER_DAY as u64 * crate::ingest::DEFAULT_WINDOW_DAYS as u64;

    let mut profiles = Vec::new();
    let mut mix = BTreeMap::new();
    for kind in BehaviourKind::ALL {
        let p = kind.index();
        let mut target: Vec<f64> = GcrcClass::ALL
            .iter()
            .map(|&c| d.marginals[c.index()] * volume(c.aggregate()) * responsibility(c)[p])
            .collect();
        let load: f64 = target.iter().sum();
        normalise(&mut target);
        let activity = default_activity(kind);
        mix.insert(kind, load / activity.mean(cap));
        profiles.push(BehaviourProfile {
            kind,
            target_class_weights: GcrcClass::ALL.iter().copied().zip(target).collect(),
            category_weights: category_map(&default_category_weights(kind)),
            activity,
        });
    }
    let total: f64 = mix.values().sum();
    mix.values_mut().for_each(|w| *w /= total);

    let mut marginals = d.marginals;
    normalise(&mut marginals);
    Some(GeneratorConfig {
        name: name.to_string(),
        seed: 0,
        n_content: N_CONTENT,
        n_reporters: N_REPORTERS,
        window_days: crate::ingest::DEFAULT_WINDOW_DAYS,
        start_ts: DEFAULT_START_TS,
        max_reports_per_day: MAX_REPORTS_PER_DAY,
        behaviour_mix: mix,
        profiles,
        cells: vec![CellConfig {
            platform: d.platform,
            country: d.country,
            content_share: 1.0,
            mau: (N_CONTENT as f64 * 1000.0 / d.rate_per_kmau).round() as u64,
            class_marginals: GcrcClass::ALL.iter().copied().zip(marginals).collect(),
        }],
        vm_rate_given_c: d.vm_rate,
        vo_rates: GcrcClass::ALL
            .iter()
            .copied()
            .zip(d.vo)
            .filter(|&(_, r)| r > 0.0)
            .collect(),
        popularity: popularity(),
        affinity_shape: AFFINITY_SHAPE,
    })
}
