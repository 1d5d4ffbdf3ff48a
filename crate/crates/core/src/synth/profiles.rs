use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::{ReportCategory, N_CATEGORIES};
use crate::taxonomy::GcrcClass;

/// The four reporting behaviours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviourKind {
    /// Reports actual misinformation.
    FaithfulFlagger,
    /// Reports content it disagrees with or dislikes.
    DislikeJealousy,
    /// Picks "false news" for content that belongs to another channel.
    ConfusedReporter,
    /// Uses the report button to get moderators to look at something.
    AttentionSeeker,
}

impl BehaviourKind {
    pub const ALL: [BehaviourKind; 4] = [
        BehaviourKind::FaithfulFlagger,
        BehaviourKind::DislikeJealousy,
        BehaviourKind::ConfusedReporter,
        BehaviourKind::AttentionSeeker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviourKind::FaithfulFlagger => "faithful_flagger",
            BehaviourKind::DislikeJealousy => "dislike_jealousy",
            BehaviourKind::ConfusedReporter => "confused_reporter",
            BehaviourKind::AttentionSeeker => "attention_seeker",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BehaviourKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BehaviourKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BehaviourKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown behaviour {s:?}"))
    }
}

/// Discrete Pareto law for reports per reporter: `floor(scale * U^(-1/shape))`,
/// truncated at the window capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivityLaw {
    pub shape: f64,
    pub scale: f64,
}

impl ActivityLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, cap: u64) -> u64 {
        // 1 - U lies in (0, 1], so the power is finite.
        let u = 1.0 - rng.random::<f64>();
        let x = (self.scale * u.powf(-1.0 / self.shape)).floor();
        if x >= cap as f64 {
            cap
        } else {
            x as u64
        }
    }

    /// Exact mean of the truncated law: sum over k of P(X >= k).
    pub fn mean(&self, cap: u64) -> f64 {
        (1..=cap).map(|k| (self.scale / k as f64).powf(self.shape).min(1.0)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviourProfile {
    pub kind: BehaviourKind,
    pub target_class_weights: BTreeMap<GcrcClass, f64>,
    pub category_weights: BTreeMap<ReportCategory, f64>,
    pub activity: ActivityLaw,
}

impl BehaviourProfile {
    pub fn target_weight(&self, class: GcrcClass) -> f64 {
        self.target_class_weights.get(&class).copied().unwrap_or(0.0)
    }

    pub fn category_weight(&self, category: ReportCategory) -> f64 {
        self.category_weights.get(&category).copied().unwrap_or(0.0)
    }

    pub fn category_vector(&self) -> [f64; N_CATEGORIES] {
        ReportCategory::ALL.map(|c| self.category_weight(c))
    }
}

/// Category mix per behaviour, columns in feature order. Every entry is at
/// least 0.005 so all ten channels see some traffic.
pub(crate) fn default_category_weights(kind: BehaviourKind) -> [f64; N_CATEGORIES] {
    match kind {
        BehaviourKind::FaithfulFlagger => [0.88, 0.005, 0.01, 0.01, 0.005, 0.02, 0.025, 0.005, 0.03, 0.01],
        BehaviourKind::DislikeJealousy => [0.42, 0.005, 0.01, 0.04, 0.005, 0.03, 0.06, 0.005, 0.05, 0.375],
        BehaviourKind::ConfusedReporter => [0.40, 0.06, 0.06, 0.03, 0.01, 0.22, 0.03, 0.04, 0.13, 0.02],
        BehaviourKind::AttentionSeeker => [0.35, 0.01, 0.08, 0.12, 0.06, 0.03, 0.08, 0.005, 0.22, 0.045],
    }
}

pub(crate) fn default_activity(kind: BehaviourKind) -> ActivityLaw {
    match kind {
        BehaviourKind::FaithfulFlagger => ActivityLaw { shape: 1.2, scale: 1.0 },
        _ => ActivityLaw { shape: 1.35, scale: 1.0 },
    }
}

/// The four behaviours with the target weights of the default (ig-us) preset.
pub fn default_profiles() -> Vec<BehaviourProfile> {
    super::presets::preset("ig-us").expect("built-in preset").profiles
}
