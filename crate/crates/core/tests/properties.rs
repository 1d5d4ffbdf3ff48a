use std::collections::BTreeMap;

use proptest::prelude::*;
use reportsignal::ingest::{
    aggregate_features, clip_outliers, merge_feature_maps, ContentRecord, Country, FeatureVector, Platform,
    ReportCategory, ReportEvent, Window,
};
use reportsignal::metrics::decompose;
use reportsignal::stats::{derive_partial_order, ks_two_sample, welch_t, Alternative};
use reportsignal::taxonomy::{AggregatedClass, GcrcClass, VerificationFlag};

const T0: i64 = 1_600_000_000;

fn record() -> impl Strategy<Value = ContentRecord> {
    (0..16usize, 0..3usize, any::<bool>()).prop_map(|(c, f, fb)| {
        let class = GcrcClass::ALL[c];
        let mut flag = VerificationFlag::ALL[f];
        if flag == VerificationFlag::VM && !class.is_controversial() {
            flag = VerificationFlag::None;
        }
        ContentRecord {
            content_id: String::new(),
            platform: if fb { Platform::FB } else { Platform::IG },
            country: Country::US,
            gcrc: Some(class),
            verification: flag,
            reporter_gender: None,
            reporter_age_band: None,
        }
    })
}

fn events(max: usize) -> impl Strategy<Value = Vec<ReportEvent>> {
    prop::collection::vec((0..20u32, 0..10usize, 0..(20 * 86_400i64), 0..5u32), 0..max).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (item, cat, dt, who))| ReportEvent {
                report_id: format!("R{i}"),
                content_id: format!("c{item}"),
                reporter_id: format!("U{who}"),
                platform: Platform::IG,
                country: Country::FR,
                category: ReportCategory::ALL[cat],
                timestamp: T0 + dt,
            })
            .collect()
    })
}

fn sample(min: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, min..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn noise_buckets_close(sample in prop::collection::vec(record(), 1..200)) {
        let d = decompose(&sample).unwrap();
        prop_assert!((d.total() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(d.n, sample.len());
    }
}

proptest! {
    #[test]
    fn aggregation_ignores_event_order(evs in events(300), seed in any::<u64>()) {
        let window = Window::from_days(T0, 10);
        let mut shuffled = evs.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            let j = (seed.wrapping_mul(i as u64 + 1) >> 7) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        prop_assert_eq!(aggregate_features(&evs, window), aggregate_features(&shuffled, window));
    }

    #[test]
    fn partitions_merge_to_whole(evs in events(300), cut in 0usize..300) {
        let window = Window::from_days(T0, 15);
        let cut = cut.min(evs.len());
        let (a, b) = evs.split_at(cut);
        let merged = merge_feature_maps(aggregate_features(a, window), aggregate_features(b, window));
        prop_assert_eq!(merged, aggregate_features(&evs, window));
    }

    #[test]
    fn window_is_half_open(evs in events(200)) {
        let window = Window::from_days(T0 + 86_400, 3);
        let inside = evs.iter().filter(|e| e.timestamp >= window.start && e.timestamp < window.end).count();
        let total: u64 = aggregate_features(&evs, window).values().map(|v| v.total).sum();
        prop_assert_eq!(total, inside as u64);
    }

    #[test]
    fn clipping_splits_at_threshold(totals in prop::collection::vec(0u32..5000, 1..300), q in 0.5..1.0f64) {
        let vectors: Vec<FeatureVector> = totals
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut counts = [0u32; 10];
                counts[i % 10] = t;
                FeatureVector::from_counts(format!("c{i}"), counts)
            })
            .collect();
        let all = clip_outliers(&vectors, 1.0).unwrap();
        prop_assert!(all.excluded.is_empty());
        prop_assert_eq!(&all.kept, &vectors);
        let c = clip_outliers(&vectors, q).unwrap();
        prop_assert_eq!(c.kept.len() + c.excluded.len(), vectors.len());
        prop_assert!(c.kept.iter().all(|v| v.total <= c.threshold));
        prop_assert!(c.excluded.iter().all(|v| v.total > c.threshold));
    }

    #[test]
    fn welch_is_affine_invariant(a in sample(3), b in sample(3), scale in 0.01..100.0f64, shift in -1e3..1e3f64) {
        let base = welch_t(&a, &b, Alternative::TwoSided);
        let f = |x: &f64| x * scale + shift;
        let moved = welch_t(&a.iter().map(f).collect::<Vec<_>>(), &b.iter().map(f).collect::<Vec<_>>(), Alternative::TwoSided);
        match (base, moved) {
            (Ok(x), Ok(y)) => {
                prop_assert!((x.statistic - y.statistic).abs() <= 1e-6 * x.statistic.abs().max(1.0));
                prop_assert!((x.p_value - y.p_value).abs() <= 1e-6);
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "{x:?} vs {y:?}"),
        }
    }

    #[test]
    fn welch_one_sided_p_values_complement(a in sample(3), b in sample(3)) {
        if let (Ok(g), Ok(l)) = (welch_t(&a, &b, Alternative::Greater), welch_t(&a, &b, Alternative::Less)) {
            prop_assert!((g.p_value + l.p_value - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn ks_statistic_and_p_in_unit_interval(a in sample(1), b in sample(1)) {
        let r = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.statistic));
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        let same = ks_two_sample(&a, &a).unwrap();
        prop_assert_eq!(same.statistic, 0.0);
    }

    #[test]
    fn raising_weak_alpha_keeps_edges(
        groups in prop::collection::vec(prop::collection::vec(0.0..50.0f64, 5..40), 5),
        shifts in prop::collection::vec(0.0..20.0f64, 5),
        a1 in 0.01..0.2f64,
        extra in 0.0..0.3f64,
    ) {
        let samples: BTreeMap<AggregatedClass, Vec<f64>> = AggregatedClass::ALL
            .iter()
            .zip(groups.iter().zip(&shifts))
            .map(|(&k, (g, s))| (k, g.iter().map(|x| x + s).collect()))
            .collect();
        let (Ok(narrow), Ok(wide)) = (
            derive_partial_order(&samples, a1 / 2.0, a1),
            derive_partial_order(&samples, a1 / 2.0, a1 + extra),
        ) else {
            // Significant in both directions cannot happen with one-sided
            // tests below 0.5, so any error here is a bug.
            return Err(TestCaseError::fail("order failed"));
        };
        for e in &narrow.edges {
            prop_assert!(wide.edge(e.greater, e.lesser).is_some());
        }
        for e in &wide.edges {
            prop_assert!(!wide.edges.iter().any(|f| f.greater == e.lesser && f.lesser == e.greater));
        }
    }
}
