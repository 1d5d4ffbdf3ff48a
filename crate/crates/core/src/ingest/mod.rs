//! Report events, labelled content tables, per-item feature vectors and the
//! sampling / rate utilities that sit on top of them.

mod content;
mod events;
mod features;
mod rate;
mod sample;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::taxonomy::{GcrcClass, VerificationFlag};

pub use content::{read_contents, write_contents};
pub use events::{parse_events, write_events, EventReader};
pub use features::{
    aggregate_features, clip_outliers, merge_feature_maps, nearest_rank, read_features,
    write_features, ClipOutcome, FeatureMap, FeatureVector, Window, DEFAULT_WINDOW_DAYS,
};
pub use rate::reporting_rate;
pub use sample::{build_sample, SampleOptions};

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("line {line}: unknown report category {value:?}")]
    UnknownCategory { line: usize, value: String },
    #[error("line {line}: unknown country {value:?}")]
    UnknownCountry { line: usize, value: String },
    #[error("line {line}: unknown platform {value:?}")]
    UnknownPlatform { line: usize, value: String },
    #[error("empty input")]
    EmptyInput,
    #[error("quantile {0} is outside (0, 1]")]
    InvalidQuantile(f64),
    #[error("window end {end} precedes start {start}")]
    InvalidWindow { start: i64, end: i64 },
    #[error("insufficient records: {0}")]
    InsufficientRecords(String),
    #[error("no monthly active user count for country {0}")]
    MissingMau(Country),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Platform {
    FB,
    IG,
}

impl Platform {
    pub const ALL: [Platform; 2] = [Platform::FB, Platform::IG];

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::FB => "FB",
            Platform::IG => "IG",
        }
    }
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FB" => Ok(Platform::FB),
            "IG" => Ok(Platform::IG),
            _ => Err(format!("unknown platform {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Country {
    FR,
    UK,
    US,
}

impl Country {
    pub const ALL: [Country; 3] = [Country::FR, Country::UK, Country::US];

    pub fn as_str(self) -> &'static str {
        match self {
            Country::FR => "FR",
            Country::UK => "UK",
            Country::US => "US",
        }
    }
}

impl FromStr for Country {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FR" => Ok(Country::FR),
            "UK" => Ok(Country::UK),
            "US" => Ok(Country::US),
            _ => Err(format!("unknown country {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gender {
    F,
    M,
    Other,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::F => "F",
            Gender::M => "M",
            Gender::Other => "Other",
        }
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F" => Ok(Gender::F),
            "M" => Ok(Gender::M),
            "Other" => Ok(Gender::Other),
            _ => Err(format!("unknown gender {s:?}")),
        }
    }
}

/// Ordinal age band of the reporter (0 = youngest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgeBand(pub u8);

/// Platform reporting channel. Order matches the feature columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReportCategory {
    FalseNews,
    NuditySexualSolicitation,
    Violence,
    Harassment,
    SuicideInjury,
    Spam,
    HateSpeech,
    UnauthorisedSales,
    InappropriateContent,
    IDontLikeIt,
}

pub const N_CATEGORIES: usize = 10;

impl ReportCategory {
    pub const ALL: [ReportCategory; N_CATEGORIES] = [
        ReportCategory::FalseNews,
        ReportCategory::NuditySexualSolicitation,
        ReportCategory::Violence,
        ReportCategory::Harassment,
        ReportCategory::SuicideInjury,
        ReportCategory::Spam,
        ReportCategory::HateSpeech,
        ReportCategory::UnauthorisedSales,
        ReportCategory::InappropriateContent,
        ReportCategory::IDontLikeIt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReportCategory::FalseNews => "false_news",
            ReportCategory::NuditySexualSolicitation => "nudity_sexual_solicitation",
            ReportCategory::Violence => "violence",
            ReportCategory::Harassment => "harassment",
            ReportCategory::SuicideInjury => "suicide_injury",
            ReportCategory::Spam => "spam",
            ReportCategory::HateSpeech => "hate_speech",
            ReportCategory::UnauthorisedSales => "unauthorised_sales",
            ReportCategory::InappropriateContent => "inappropriate_content",
            ReportCategory::IDontLikeIt => "i_dont_like_it",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn names() -> Vec<String> {
        ReportCategory::ALL.iter().map(|c| c.as_str().to_string()).collect()
    }
}

impl FromStr for ReportCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportCategory::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown report category {s:?}"))
    }
}

macro_rules! display_and_serde_via_str {
    ($($ty:ty),*) => {$(
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

display_and_serde_via_str!(Platform, Country, Gender, ReportCategory);

/// One report of one item under one category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEvent {
    pub report_id: String,
    pub content_id: String,
    pub reporter_id: String,
    pub platform: Platform,
    pub country: Country,
    pub category: ReportCategory,
    /// Seconds since the Unix epoch, UTC.
    #[serde(rename = "ts")]
    pub timestamp: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContentRecord {
    pub content_id: String,
    pub platform: Platform,
    pub country: Country,
    pub gcrc: Option<GcrcClass>,
    pub verification: VerificationFlag,
    pub reporter_gender: Option<Gender>,
    pub reporter_age_band: Option<AgeBand>,
}

impl ContentRecord {
    /// A record with a verification flag must also carry a class label.
    pub fn validate(&self) -> Result<(), String> {
        if self.content_id.is_empty() {
            return Err("empty content_id".into());
        }
        if self.verification != VerificationFlag::None && self.gcrc.is_none() {
            return Err(format!(
                "content {} is flagged {} but has no class label",
                self.content_id, self.verification
            ));
        }
        Ok(())
    }
}
