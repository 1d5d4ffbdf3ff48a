//! Labels assigned to reported content by human review, the verification
//! flags coming from fact-checkers and moderators, and the pure mappings from
//! labels to aggregated classes, classifier targets and noise buckets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("unknown class label {0:?}")]
    UnknownClass(String),
    #[error("unknown verification flag {0:?}")]
    UnknownFlag(String),
    #[error("unknown aggregated class {0:?}")]
    UnknownAggregated(String),
    #[error("unknown target class {0:?}")]
    UnknownTarget(String),
}

/// Review label of a reported item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GcrcClass {
    C0,
    C1,
    C2,
    C2Star,
    C3,
    M1,
    M2,
    M3,
    MS,
    H1,
    H2,
    H3,
    O1,
    O2,
    I,
    J,
}

impl GcrcClass {
    pub const ALL: [GcrcClass; 16] = [
        GcrcClass::C0,
        GcrcClass::C1,
        GcrcClass::C2,
        GcrcClass::C2Star,
        GcrcClass::C3,
        GcrcClass::M1,
        GcrcClass::M2,
        GcrcClass::M3,
        GcrcClass::MS,
        GcrcClass::H1,
        GcrcClass::H2,
        GcrcClass::H3,
        GcrcClass::O1,
        GcrcClass::O2,
        GcrcClass::I,
        GcrcClass::J,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GcrcClass::C0 => "C0",
            GcrcClass::C1 => "C1",
            GcrcClass::C2 => "C2",
            GcrcClass::C2Star => "C2*",
            GcrcClass::C3 => "C3",
            GcrcClass::M1 => "M1",
            GcrcClass::M2 => "M2",
            GcrcClass::M3 => "M3",
            GcrcClass::MS => "MS",
            GcrcClass::H1 => "H1",
            GcrcClass::H2 => "H2",
            GcrcClass::H3 => "H3",
            GcrcClass::O1 => "O1",
            GcrcClass::O2 => "O2",
            GcrcClass::I => "I",
            GcrcClass::J => "J",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_controversial(self) -> bool {
        self.aggregate() == AggregatedClass::C
    }

    pub fn aggregate(self) -> AggregatedClass {
        aggregate_class(self)
    }
}

impl fmt::Display for GcrcClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GcrcClass {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GcrcClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| LabelError::UnknownClass(s.to_string()))
    }
}

/// Outcome of external verification. A record carries at most one flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum VerificationFlag {
    #[default]
    None,
    /// Confirmed misinformation by fact-checkers.
    VM,
    /// Confirmed violation of another policy by moderators.
    VO,
}

impl VerificationFlag {
    pub const ALL: [VerificationFlag; 3] =
        [VerificationFlag::None, VerificationFlag::VM, VerificationFlag::VO];

    pub fn as_str(self) -> &'static str {
        match self {
            VerificationFlag::None => "",
            VerificationFlag::VM => "VM",
            VerificationFlag::VO => "VO",
        }
    }
}

impl fmt::Display for VerificationFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VerificationFlag {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "" => Ok(VerificationFlag::None),
            "VM" => Ok(VerificationFlag::VM),
            "VO" => Ok(VerificationFlag::VO),
            other => Err(LabelError::UnknownFlag(other.to_string())),
        }
    }
}

/// Coarser grouping used for report-volume statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggregatedClass {
    C,
    M,
    HM,
    OH,
    I,
}

impl AggregatedClass {
    pub const ALL: [AggregatedClass; 5] = [
        AggregatedClass::C,
        AggregatedClass::M,
        AggregatedClass::HM,
        AggregatedClass::OH,
        AggregatedClass::I,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregatedClass::C => "C",
            AggregatedClass::M => "M",
            AggregatedClass::HM => "HM",
            AggregatedClass::OH => "OH",
            AggregatedClass::I => "I",
        }
    }

    pub fn target(self) -> TargetClass {
        target_class(self)
    }
}

impl fmt::Display for AggregatedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregatedClass {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AggregatedClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| LabelError::UnknownAggregated(s.to_string()))
    }
}

/// Moderation channel predicted by the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetClass {
    C,
    M,
    I,
    Others,
}

impl TargetClass {
    pub const ALL: [TargetClass; 4] =
        [TargetClass::C, TargetClass::M, TargetClass::I, TargetClass::Others];

    pub fn as_str(self) -> &'static str {
        match self {
            TargetClass::C => "C",
            TargetClass::M => "M",
            TargetClass::I => "I",
            TargetClass::Others => "Others",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<TargetClass> {
        TargetClass::ALL.get(i).copied()
    }

    pub fn of(class: GcrcClass) -> TargetClass {
        target_class(aggregate_class(class))
    }
}

impl fmt::Display for TargetClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TargetClass {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TargetClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| LabelError::UnknownTarget(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseType {
    Accurate,
    FalseNoise,
    QuasiNoise,
    SoftNoise,
    HardNoise,
}

impl NoiseType {
    pub const ALL: [NoiseType; 5] = [
        NoiseType::Accurate,
        NoiseType::FalseNoise,
        NoiseType::QuasiNoise,
        NoiseType::SoftNoise,
        NoiseType::HardNoise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseType::Accurate => "accurate",
            NoiseType::FalseNoise => "false_noise",
            NoiseType::QuasiNoise => "quasi_noise",
            NoiseType::SoftNoise => "soft_noise",
            NoiseType::HardNoise => "hard_noise",
        }
    }
}

/// J has no aggregated bucket of its own; it rides with OH.
pub fn aggregate_class(c: GcrcClass) -> AggregatedClass {
    use GcrcClass::*;
    match c {
        C0 | C1 | C2 | C3 | C2Star => AggregatedClass::C,
        M2 | M3 | MS => AggregatedClass::M,
        H2 | H3 | M1 => AggregatedClass::HM,
        H1 | O1 | O2 | J => AggregatedClass::OH,
        I => AggregatedClass::I,
    }
}

pub fn target_class(a: AggregatedClass) -> TargetClass {
    match a {
        AggregatedClass::C => TargetClass::C,
        AggregatedClass::M => TargetClass::M,
        AggregatedClass::I => TargetClass::I,
        AggregatedClass::HM | AggregatedClass::OH => TargetClass::Others,
    }
}

/// Noise bucket of a labelled item. VM wins over VO, and VO wins over the
/// base class.
pub fn noise_type(c: GcrcClass, v: VerificationFlag) -> NoiseType {
    use GcrcClass::*;
    match v {
        VerificationFlag::VM => NoiseType::Accurate,
        VerificationFlag::VO => NoiseType::QuasiNoise,
        VerificationFlag::None => match c {
            C0 | C1 | C2 | C2Star | C3 => NoiseType::FalseNoise,
            M2 | M3 | MS => NoiseType::QuasiNoise,
            M1 | H2 | H3 | O2 => NoiseType::SoftNoise,
            H1 | O1 | I | J => NoiseType::HardNoise,
        },
    }
}

macro_rules! serde_via_str {
    ($($ty:ty),*) => {$(
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

serde_via_str!(GcrcClass, VerificationFlag, AggregatedClass, TargetClass);
