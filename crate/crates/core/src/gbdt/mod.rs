//! Gradient-boosted trees routing reported items to C / M / I / Others from
//! their per-category report counts.

mod eval;
mod train;
mod tree;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{ContentRecord, Country, FeatureMap, ReportCategory, N_CATEGORIES};
use crate::seed::sha256_hex;
use crate::taxonomy::TargetClass;

pub use eval::{
    evaluate, f1_scores, majority_baseline, Baseline, EvalReport, FeatureImportance, PrCurve, PrPoint,
    ALL_SLICE,
};
pub use train::train;
pub use tree::{Node, Tree};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_TEST_FRACTION: f64 = 0.10;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("too few instances: {0}")]
    TooFewInstances(String),
    #[error("test fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("training targets are all {0}; need at least two classes")]
    DegenerateTargets(TargetClass),
    #[error("empty training set")]
    EmptyTrainSet,
    #[error("empty test set")]
    EmptyTestSet,
    #[error("expected {expected} features, got {got}")]
    FeatureMismatch { expected: usize, got: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("record {0} has no class label")]
    UnlabelledRecord(String),
    #[error("unsupported model format version {0}")]
    UnsupportedFormat(u32),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { n_trees: 200, max_depth: 3, learning_rate: 0.1, min_leaf: 20 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), GbdtError> {
        let bad = |s: &str| Err(GbdtError::InvalidHyperparams(s.into()));
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.min_leaf == 0 {
            return bad("min_leaf must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingInstance {
    pub content_id: String,
    pub features: Vec<u32>,
    pub target: TargetClass,
    pub country: Country,
}

/// The ten report-category column names, in feature order.
pub fn category_feature_names() -> Vec<String> {
    ReportCategory::names()
}

/// Joins labelled records with their feature vectors. Records with no
/// in-window reports get an all-zero vector; vectors with no record are
/// ignored.
pub fn instances_from(
    features: &FeatureMap,
    contents: &[ContentRecord],
) -> Result<Vec<TrainingInstance>, GbdtError> {
    contents
        .iter()
        .map(|c| {
            let class = c.gcrc.ok_or_else(|| GbdtError::UnlabelledRecord(c.content_id.clone()))?;
            let counts = features.get(&c.content_id).map(|v| v.counts).unwrap_or([0; N_CATEGORIES]);
            Ok(TrainingInstance {
                content_id: c.content_id.clone(),
                features: counts.to_vec(),
                target: TargetClass::of(class),
                country: c.country,
            })
        })
        .collect()
}

/// Stratified split: each class contributes `round(test_fraction * n_class)`
/// items, chosen by a seeded shuffle. Both halves keep input order.
pub fn split_train_test(
    instances: &[TrainingInstance],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<TrainingInstance>, Vec<TrainingInstance>), GbdtError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(GbdtError::InvalidFraction(test_fraction));
    }
    let mut by_class: BTreeMap<TargetClass, Vec<usize>> = BTreeMap::new();
    for (i, inst) in instances.iter().enumerate() {
        by_class.entry(inst.target).or_default().push(i);
    }
    let mut rng = crate::seed::rng_for(seed, "split");
    let mut is_test = vec![false; instances.len()];
    for idx in by_class.values_mut() {
        let k = (test_fraction * idx.len() as f64).round() as usize;
        idx.shuffle(&mut rng);
        for &i in idx.iter().take(k) {
            is_test[i] = true;
        }
    }
    let n_test = is_test.iter().filter(|&&t| t).count();
    if n_test == 0 || n_test == instances.len() {
        return Err(GbdtError::TooFewInstances(format!(
            "{} instances at test fraction {test_fraction} leave {n_test} for testing",
            instances.len()
        )));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (inst, t) in instances.iter().zip(is_test) {
        if t {
            test.push(inst.clone());
        } else {
            train.push(inst.clone());
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub format_version: u32,
    pub feature_names: Vec<String>,
    pub classes: Vec<TargetClass>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    /// Prior log-odds per class.
    pub base_scores: Vec<f64>,
    /// One ensemble per class; leaf values already include the learning rate.
    pub ensembles: Vec<Vec<Tree>>,
    /// Mean one-vs-rest training loss per class, before and after every round.
    pub train_loss: Vec<Vec<f64>>,
}

impl GbdtModel {
    pub fn raw_scores(&self, x: &[u32]) -> Vec<f64> {
        self.base_scores
            .iter()
            .zip(&self.ensembles)
            .map(|(b, trees)| b + trees.iter().map(|t| t.predict(x)).sum::<f64>())
            .collect()
    }

    /// Per-class sigmoid of the summed scores, normalised to sum to one.
    pub fn predict_proba(&self, x: &[u32]) -> Vec<f64> {
        let s: Vec<f64> = self.raw_scores(x).into_iter().map(train::sigmoid).collect();
        let total: f64 = s.iter().sum();
        if total > 0.0 {
            s.into_iter().map(|v| v / total).collect()
        } else {
            vec![1.0 / s.len() as f64; s.len()]
        }
    }

    /// Arg-max class; ties go to the earlier class.
    pub fn predict(&self, x: &[u32]) -> TargetClass {
        let p = self.predict_proba(x);
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        self.classes[best]
    }

    /// Total split gain per feature over all trees, normalised to sum to one
    /// (all zeros when no tree split).
    pub fn importances(&self) -> Vec<f64> {
        let mut imp = vec![0.0; self.feature_names.len()];
        for (f, _, gain) in self.ensembles.iter().flatten().flat_map(|t| t.splits()) {
            imp[f] += gain;
        }
        let total: f64 = imp.iter().sum();
        if total > 0.0 {
            imp.iter_mut().for_each(|v| *v /= total);
        }
        imp
    }

    pub fn to_json<W: Write>(&self, w: W) -> Result<(), GbdtError> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    pub fn from_json<R: Read>(r: R) -> Result<Self, GbdtError> {
        let m: GbdtModel = serde_json::from_reader(r)?;
        if m.format_version != FORMAT_VERSION {
            return Err(GbdtError::UnsupportedFormat(m.format_version));
        }
        Ok(m)
    }

    /// SHA-256 of the compact JSON encoding.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("model serialises"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::TargetClass as T;

    fn inst(id: usize, fnews: u32, target: T) -> TrainingInstance {
        TrainingInstance {
            content_id: format!("c{id}"),
            features: vec![fnews, (id % 3) as u32],
            target,
            country: Country::US,
        }
    }

    fn separable(n: usize) -> Vec<TrainingInstance> {
        (0..n)
            .map(|i| {
                let fnews = (i % 12) as u32;
                inst(i, fnews, if fnews > 5 { T::C } else { T::Others })
            })
            .collect()
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("f{i}")).collect()
    }

    fn small_hp() -> Hyperparams {
        Hyperparams { n_trees: 30, max_depth: 2, learning_rate: 0.3, min_leaf: 2 }
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let data: Vec<_> = (0..4000).map(|i| inst(i, 0, T::ALL[i % 7 % 4])).collect();
        let (tr, te) = split_train_test(&data, 0.10, 1).unwrap();
        assert_eq!(tr.len() + te.len(), 4000);
        for k in T::ALL {
            let n = data.iter().filter(|i| i.target == k).count() as f64;
            let t = te.iter().filter(|i| i.target == k).count() as f64;
            assert!((t - 0.1 * n).abs() <= 1.0);
        }
        assert_eq!(split_train_test(&data, 0.10, 1).unwrap().1, te);
        assert_ne!(split_train_test(&data, 0.10, 2).unwrap().1, te);
    }

    #[test]
    fn split_single_class_and_errors() {
        let data: Vec<_> = (0..50).map(|i| inst(i, 1, T::M)).collect();
        let (tr, te) = split_train_test(&data, 0.2, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (40, 10));
        assert!(matches!(split_train_test(&data[..3], 0.1, 0), Err(GbdtError::TooFewInstances(_))));
        assert!(matches!(split_train_test(&data, 1.0, 0), Err(GbdtError::InvalidFraction(_))));
    }

    #[test]
    fn separable_fixture_is_learned() {
        let data = separable(240);
        let model = train(&data, &small_hp(), &names(2), 0).unwrap();
        for d in &data {
            assert_eq!(model.predict(&d.features) == T::C, d.target == T::C);
        }
        for t in model.ensembles.iter().flatten() {
            assert!(t.depth() <= 2);
        }
    }

    #[test]
    fn probabilities_are_distributions() {
        let model = train(&separable(120), &small_hp(), &names(2), 0).unwrap();
        for x in [[0u32, 0], [100, 2], [6, 1]] {
            let p = model.predict_proba(&x);
            assert_eq!(p.len(), 4);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn degenerate_and_mismatched_inputs() {
        let one: Vec<_> = (0..30).map(|i| inst(i, 3, T::I)).collect();
        assert!(matches!(train(&one, &small_hp(), &names(2), 0), Err(GbdtError::DegenerateTargets(T::I))));
        assert!(matches!(train(&[], &small_hp(), &names(2), 0), Err(GbdtError::EmptyTrainSet)));
        assert!(matches!(
            train(&separable(20), &small_hp(), &names(3), 0),
            Err(GbdtError::FeatureMismatch { expected: 3, got: 2 })
        ));
        let bad = Hyperparams { max_depth: 0, ..small_hp() };
        assert!(matches!(train(&separable(20), &bad, &names(2), 0), Err(GbdtError::InvalidHyperparams(_))));
    }

    #[test]
    fn json_round_trip_and_digest() {
        let model = train(&separable(120), &small_hp(), &names(2), 9).unwrap();
        let mut buf = Vec::new();
        model.to_json(&mut buf).unwrap();
        let back = GbdtModel::from_json(&buf[..]).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.digest(), model.digest());
        let mut v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        v["format_version"] = 99.into();
        assert!(matches!(
            GbdtModel::from_json(serde_json::to_vec(&v).unwrap().as_slice()),
            Err(GbdtError::UnsupportedFormat(99))
        ));
    }

    #[test]
    fn importances_sum_to_one() {
        let model = train(&separable(120), &small_hp(), &names(2), 0).unwrap();
        let imp = model.importances();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[0] > imp[1]);
    }

    #[test]
    fn instances_need_labels() {
        let rec = ContentRecord {
            content_id: "x".into(),
            platform: crate::ingest::Platform::IG,
            country: Country::FR,
            gcrc: None,
            verification: crate::taxonomy::VerificationFlag::None,
            reporter_gender: None,
            reporter_age_band: None,
        };
        assert!(matches!(instances_from(&FeatureMap::new(), std::slice::from_ref(&rec)), Err(GbdtError::UnlabelledRecord(_))));
        let rec = ContentRecord { gcrc: Some(crate::taxonomy::GcrcClass::MS), ..rec };
        let out = instances_from(&FeatureMap::new(), &[rec]).unwrap();
        assert_eq!(out[0].features, vec![0; 10]);
        assert_eq!(out[0].target, T::M);
    }
}
