//! Behaviour-driven generator for items, reporters and report streams.

mod calibration;
mod config;
mod generate;
mod presets;
mod profiles;

use thiserror::Error;

pub use calibration::{
    calibration_report, expected_noise, CalibrationReport, CalibrationRow, Check, SHARE_TOLERANCE,
    SUPER_REPORTER_THRESHOLD,
};
pub use config::{CellConfig, FieldError, GeneratorConfig, PopularityShapes, DEFAULT_START_TS};
pub use generate::{generate, SynthDataset};
pub use presets::{preset, PRESET_NAMES};
pub use profiles::{default_profiles, ActivityLaw, BehaviourKind, BehaviourProfile};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<FieldError>),
}
