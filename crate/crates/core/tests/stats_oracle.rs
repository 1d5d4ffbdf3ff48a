//! Reference values in `data/stats_reference.json` come from scipy (see
//! `data/gen_reference.py`).

use reportsignal::stats::{dagostino_pearson, ks_two_sample, welch_t, Alternative};
use serde::Deserialize;

#[derive(Deserialize)]
struct WelchCase {
    a: Vec<f64>,
    b: Vec<f64>,
    statistic: f64,
    df: f64,
    greater: f64,
    less: f64,
    #[serde(rename = "two-sided")]
    two_sided: f64,
}

#[derive(Deserialize)]
struct KsCase {
    a: Vec<f64>,
    b: Vec<f64>,
    d: f64,
    p: f64,
}

#[derive(Deserialize)]
struct DpCase {
    a: Vec<f64>,
    statistic: f64,
    p: f64,
}

#[derive(Deserialize)]
struct Reference {
    welch: Vec<WelchCase>,
    ks: Vec<KsCase>,
    dagostino_pearson: Vec<DpCase>,
}

fn reference() -> Reference {
    serde_json::from_str(include_str!("data/stats_reference.json")).unwrap()
}

fn close(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol * want.abs().max(1.0)
}

#[test]
fn welch_matches_reference() {
    let r = reference();
    assert_eq!(r.welch.len(), 100);
    for (i, c) in r.welch.iter().enumerate() {
        for (alt, want) in [
            (Alternative::Greater, c.greater),
            (Alternative::Less, c.less),
            (Alternative::TwoSided, c.two_sided),
        ] {
            let got = welch_t(&c.a, &c.b, alt).unwrap();
            assert!(close(got.statistic, c.statistic, 1e-6), "case {i}: t {} vs {}", got.statistic, c.statistic);
            assert!(close(got.df.unwrap(), c.df, 1e-6), "case {i}: df {:?} vs {}", got.df, c.df);
            assert!((got.p_value - want).abs() <= 1e-6, "case {i} {alt:?}: p {} vs {want}", got.p_value);
        }
    }
}

#[test]
fn ks_matches_reference() {
    let r = reference();
    assert_eq!(r.ks.len(), 100);
    for (i, c) in r.ks.iter().enumerate() {
        let got = ks_two_sample(&c.a, &c.b).unwrap();
        assert!((got.statistic - c.d).abs() <= 1e-12, "case {i}: D {} vs {}", got.statistic, c.d);
        assert!((got.p_value - c.p).abs() <= 1e-6, "case {i}: p {} vs {}", got.p_value, c.p);
    }
}

#[test]
fn dagostino_pearson_matches_reference() {
    for (i, c) in reference().dagostino_pearson.iter().enumerate() {
        let got = dagostino_pearson(&c.a).unwrap();
        assert!(close(got.statistic, c.statistic, 1e-6), "case {i}: K2 {} vs {}", got.statistic, c.statistic);
        assert!((got.p_value - c.p).abs() <= 1e-6, "case {i}: p {} vs {}", got.p_value, c.p);
    }
}
