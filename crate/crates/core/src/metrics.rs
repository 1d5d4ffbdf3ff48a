//! Inaccuracy of a labelled sample, its split into noise buckets, and the
//! per-platform class distribution table.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ContentRecord, Country, Platform};
use crate::taxonomy::{noise_type, GcrcClass, NoiseType, VerificationFlag};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("empty sample")]
    EmptySample,
    #[error("record {0} has no class label")]
    UnlabelledRecord(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Share of the sample in each noise bucket; `n` is the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseDecomposition {
    pub n: usize,
    pub accurate: f64,
    pub false_noise: f64,
    pub quasi_noise: f64,
    pub soft_noise: f64,
    pub hard_noise: f64,
}

impl NoiseDecomposition {
    pub fn fraction(&self, kind: NoiseType) -> f64 {
        match kind {
            NoiseType::Accurate => self.accurate,
            NoiseType::FalseNoise => self.false_noise,
            NoiseType::QuasiNoise => self.quasi_noise,
            NoiseType::SoftNoise => self.soft_noise,
            NoiseType::HardNoise => self.hard_noise,
        }
    }

    pub fn inaccuracy(&self) -> f64 {
        1.0 - self.accurate
    }

    pub fn total(&self) -> f64 {
        self.accurate + self.false_noise + self.quasi_noise + self.soft_noise + self.hard_noise
    }
}

/// Splits records into labelled ones and the ids of those without a label.
pub fn filter_labelled(records: &[ContentRecord]) -> (Vec<ContentRecord>, Vec<String>) {
    let (labelled, unlabelled): (Vec<_>, Vec<_>) =
        records.iter().cloned().partition(|r| r.gcrc.is_some());
    (labelled, unlabelled.into_iter().map(|r| r.content_id).collect())
}

fn labels(sample: &[ContentRecord]) -> Result<Vec<(GcrcClass, VerificationFlag)>, MetricsError> {
    if sample.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    sample
        .iter()
        .map(|r| {
            r.gcrc
                .map(|c| (c, r.verification))
                .ok_or_else(|| MetricsError::UnlabelledRecord(r.content_id.clone()))
        })
        .collect()
}

/// `1 - |VM| / n`.
pub fn inaccuracy(sample: &[ContentRecord]) -> Result<f64, MetricsError> {
    let labels = labels(sample)?;
    let vm = labels.iter().filter(|(_, v)| *v == VerificationFlag::VM).count();
    Ok(1.0 - vm as f64 / labels.len() as f64)
}

pub fn noise_counts(sample: &[ContentRecord]) -> Result<BTreeMap<NoiseType, usize>, MetricsError> {
    let mut counts: BTreeMap<NoiseType, usize> = NoiseType::ALL.iter().map(|&k| (k, 0)).collect();
    for (c, v) in labels(sample)? {
        *counts.get_mut(&noise_type(c, v)).unwrap() += 1;
    }
    Ok(counts)
}

pub fn decompose(sample: &[ContentRecord]) -> Result<NoiseDecomposition, MetricsError> {
    let counts = noise_counts(sample)?;
    let n = sample.len();
    let f = |k: NoiseType| counts[&k] as f64 / n as f64;
    Ok(NoiseDecomposition {
        n,
        accurate: f(NoiseType::Accurate),
        false_noise: f(NoiseType::FalseNoise),
        quasi_noise: f(NoiseType::QuasiNoise),
        soft_noise: f(NoiseType::SoftNoise),
        hard_noise: f(NoiseType::HardNoise),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionRow {
    pub platform: Platform,
    pub country: Country,
    pub class: GcrcClass,
    pub count: usize,
    pub share: f64,
    /// FB count minus IG count for this class and country; absent unless
    /// both platforms have data for the country.
    pub deviation: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClassDistribution {
    pub rows: Vec<DistributionRow>,
}

impl ClassDistribution {
    pub fn row(&self, platform: Platform, country: Country, class: GcrcClass) -> Option<&DistributionRow> {
        self.rows
            .iter()
            .find(|r| r.platform == platform && r.country == country && r.class == class)
    }

    pub fn deviation(&self, country: Country, class: GcrcClass) -> Option<i64> {
        self.rows
            .iter()
            .find(|r| r.country == country && r.class == class)
            .and_then(|r| r.deviation)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), MetricsError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["platform", "country", "class", "count", "share", "deviation"])?;
        for r in &self.rows {
            w.write_record([
                r.platform.as_str().to_string(),
                r.country.as_str().to_string(),
                r.class.as_str().to_string(),
                r.count.to_string(),
                r.share.to_string(),
                r.deviation.map(|d| d.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Counts and shares for all sixteen classes in every (platform, country)
/// cell present in the sample, with the FB-minus-IG deviation per class.
pub fn distribution_table(sample: &[ContentRecord]) -> Result<ClassDistribution, MetricsError> {
    let labels = labels(sample)?;
    let mut counts: BTreeMap<(Platform, Country), [usize; 16]> = BTreeMap::new();
    for (r, (class, _)) in sample.iter().zip(&labels) {
        counts.entry((r.platform, r.country)).or_insert([0; 16])[class.index()] += 1;
    }
    let mut rows = Vec::new();
    for (&(platform, country), per_class) in &counts {
        let total: usize = per_class.iter().sum();
        let fb = counts.get(&(Platform::FB, country));
        let ig = counts.get(&(Platform::IG, country));
        for class in GcrcClass::ALL {
            let i = class.index();
            rows.push(DistributionRow {
                platform,
                country,
                class,
                count: per_class[i],
                share: per_class[i] as f64 / total as f64,
                deviation: match (fb, ig) {
                    (Some(fb), Some(ig)) => Some(fb[i] as i64 - ig[i] as i64),
                    _ => None,
                },
            });
        }
    }
    Ok(ClassDistribution { rows })
}
