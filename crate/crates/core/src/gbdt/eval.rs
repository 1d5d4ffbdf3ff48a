use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{GbdtError, GbdtModel, TrainingInstance};
use crate::taxonomy::TargetClass;

/// Slice name for the curve over every test item.
pub const ALL_SLICE: &str = "all";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub class: TargetClass,
    /// `all` or a country code.
    pub slice: String,
    pub n: usize,
    pub prevalence: f64,
    /// Ascending threshold.
    pub points: Vec<PrPoint>,
}

impl PrCurve {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GbdtError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["threshold", "precision", "recall"])?;
        for p in &self.points {
            wtr.write_record([p.threshold.to_string(), p.precision.to_string(), p.recall.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub class: TargetClass,
    pub f1: BTreeMap<TargetClass, f64>,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_test: usize,
    pub accuracy: f64,
    pub f1: BTreeMap<TargetClass, f64>,
    pub macro_f1: f64,
    /// Rows are actual classes, columns predicted, both in class order.
    pub confusion: Vec<Vec<usize>>,
    pub importances: Vec<FeatureImportance>,
    pub baseline: Option<Baseline>,
    pub pr_curves: Vec<PrCurve>,
}

impl EvalReport {
    /// Feature names ordered by decreasing importance (stable on ties).
    pub fn ranked_features(&self) -> Vec<&str> {
        let mut v: Vec<&FeatureImportance> = self.importances.iter().collect();
        v.sort_by(|a, b| b.importance.total_cmp(&a.importance));
        v.into_iter().map(|f| f.feature.as_str()).collect()
    }

    pub fn curve(&self, class: TargetClass, slice: &str) -> Option<&PrCurve> {
        self.pr_curves.iter().find(|c| c.class == class && c.slice == slice)
    }
}

/// One-vs-rest F1 per class; zero when a class is never predicted or never present.
pub fn f1_scores(actual: &[TargetClass], predicted: &[TargetClass]) -> BTreeMap<TargetClass, f64> {
    TargetClass::ALL
        .iter()
        .map(|&k| {
            let mut tp = 0usize;
            let mut fp = 0usize;
            let mut fneg = 0usize;
            for (&a, &p) in actual.iter().zip(predicted) {
                match (a == k, p == k) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fneg += 1,
                    _ => {}
                }
            }
            let f1 = if tp == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fneg) as f64 };
            (k, f1)
        })
        .collect()
}

fn macro_f1(f1: &BTreeMap<TargetClass, f64>) -> f64 {
    f1.values().sum::<f64>() / f1.len() as f64
}

/// Scores of always predicting the most frequent training class (earliest
/// class on ties) on the test set.
pub fn majority_baseline(train: &[TrainingInstance], test: &[TrainingInstance]) -> Baseline {
    let mut counts = [0usize; 4];
    for t in train {
        counts[t.target.index()] += 1;
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    let class = TargetClass::ALL[best];
    let actual: Vec<TargetClass> = test.iter().map(|t| t.target).collect();
    let f1 = f1_scores(&actual, &vec![class; actual.len()]);
    let macro_f1 = macro_f1(&f1);
    Baseline { class, f1, macro_f1 }
}

fn pr_curve(class: TargetClass, slice: String, scored: &[(f64, bool)]) -> Option<PrCurve> {
    let positives = scored.iter().filter(|s| s.1).count();
    if positives == 0 {
        return None;
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == t {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(PrPoint {
            threshold: t,
            precision: tp as f64 / (tp + fp) as f64,
            recall: tp as f64 / positives as f64,
        });
    }
    points.reverse();
    Some(PrCurve {
        class,
        slice,
        n: scored.len(),
        prevalence: positives as f64 / scored.len() as f64,
        points,
    })
}

/// Arg-max F1, confusion matrix, gain importances and precision-recall
/// curves per class for all items and per country. Curves for slices with no
/// positive item are left out since recall is undefined there.
pub fn evaluate(model: &GbdtModel, test: &[TrainingInstance]) -> Result<EvalReport, GbdtError> {
    if test.is_empty() {
        return Err(GbdtError::EmptyTestSet);
    }
    let probs: Vec<Vec<f64>> = test.iter().map(|t| model.predict_proba(&t.features)).collect();
    let predicted: Vec<TargetClass> = test.iter().map(|t| model.predict(&t.features)).collect();
    let actual: Vec<TargetClass> = test.iter().map(|t| t.target).collect();

    let mut confusion = vec![vec![0usize; 4]; 4];
    for (a, p) in actual.iter().zip(&predicted) {
        confusion[a.index()][p.index()] += 1;
    }
    let correct = actual.iter().zip(&predicted).filter(|(a, p)| a == p).count();
    let f1 = f1_scores(&actual, &predicted);

    let countries: BTreeSet<_> = test.iter().map(|t| t.country).collect();
    let mut pr_curves = Vec::new();
    for k in TargetClass::ALL {
        let scored = |keep: &dyn Fn(&TrainingInstance) -> bool| -> Vec<(f64, bool)> {
            test.iter()
                .zip(&probs)
                .filter(|(t, _)| keep(t))
                .map(|(t, p)| (p[k.index()], t.target == k))
                .collect()
        };
        pr_curves.extend(pr_curve(k, ALL_SLICE.to_string(), &scored(&|_| true)));
        for &c in &countries {
            pr_curves.extend(pr_curve(k, c.to_string(), &scored(&|t| t.country == c)));
        }
    }

    let importances = model
        .feature_names
        .iter()
        .zip(model.importances())
        .map(|(f, i)| FeatureImportance { feature: f.clone(), importance: i })
        .collect();

    Ok(EvalReport {
        n_test: test.len(),
        accuracy: correct as f64 / test.len() as f64,
        macro_f1: macro_f1(&f1),
        f1,
        confusion,
        importances,
        baseline: None,
        pr_curves,
    })
}
