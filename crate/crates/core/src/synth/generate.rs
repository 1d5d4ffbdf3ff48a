use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Gamma, Pareto};

use super::config::{FieldError, GeneratorConfig};
use super::profiles::BehaviourKind;
use super::SynthError;
use crate::ingest::{AgeBand, ContentRecord, Gender, ReportCategory, ReportEvent, SECONDS_PER_DAY};
use crate::seed::rng_for;
use crate::taxonomy::{GcrcClass, VerificationFlag};

const GENDER_WEIGHTS: [(Gender, f64); 3] = [(Gender::F, 0.5), (Gender::M, 0.47), (Gender::Other, 0.03)];
const AGE_WEIGHTS: [f64; 6] = [0.15, 0.25, 0.22, 0.18, 0.12, 0.08];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub config: GeneratorConfig,
    pub contents: Vec<ContentRecord>,
    pub events: Vec<ReportEvent>,
    pub reporters: BTreeMap<String, BehaviourKind>,
}

struct Item {
    class: GcrcClass,
    popularity: f64,
    affinity: [f64; 4],
}

struct Reporter {
    id: String,
    kind: BehaviourKind,
    gender: Gender,
    age: AgeBand,
    activity: u64,
}

/// Splits `total` by `weights` with the largest-remainder rule; ties go to
/// the earlier entry.
fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let assigned: usize = out.iter().sum();
    for &i in order.iter().take(total - assigned) {
        out[i] += 1;
    }
    out
}

fn weighted(weights: &[f64]) -> Option<WeightedIndex<f64>> {
    WeightedIndex::new(weights).ok()
}

/// Generates items, reporters and the report stream for `config`.
///
/// Items get a class by quota from their cell's marginals, then VM (C classes only)
/// or VO flags, a Pareto popularity weight and one Gamma affinity per
/// behaviour. Each reporter draws a behaviour and a heavy-tailed activity
/// weight. The cell's report budget is the sum of those weights; it is
/// split across classes in proportion to the load the config expects each
/// class to receive. Each report of a class then picks a behaviour by its
/// expected share of that class, an item with probability proportional to
/// popularity x affinity, a reporter of that behaviour by activity, and a
/// category from the behaviour's mix. Every item also receives one
/// `false_news` report from a random reporter of its cell, which is what put
/// it in the reported sample in the first place.
pub fn generate(config: &GeneratorConfig) -> Result<SynthDataset, SynthError> {
    config.validate().map_err(SynthError::InvalidConfig)?;
    let shares: Vec<f64> = config.cells.iter().map(|c| c.content_share).collect();
    let items_per_cell = largest_remainder(config.n_content, &shares);
    let reporters_per_cell = largest_remainder(config.n_reporters, &shares);
    let starved: Vec<FieldError> = items_per_cell
        .iter()
        .zip(&reporters_per_cell)
        .enumerate()
        .filter(|(_, (&i, &r))| i == 0 || r == 0)
        .map(|(i, _)| FieldError {
            field: format!("cells[{i}].content_share"),
            reason: "too small to receive any item or reporter".into(),
        })
        .collect();
    if !starved.is_empty() {
        return Err(SynthError::InvalidConfig(starved));
    }

    let window_secs = config.window_days as i64 * SECONDS_PER_DAY;
    let cap = config.activity_cap();
    let affinity = Gamma::new(config.affinity_shape, 1.0 / config.affinity_shape).expect("validated");
    let popularity: BTreeMap<_, _> = config
        .popularity
        .iter()
        .map(|(&k, &shape)| (k, Pareto::new(1.0, shape).expect("validated")))
        .collect();

    // Items.
    let mut rng = rng_for(config.seed, "content");
    let mut cell_items: Vec<Vec<Item>> = Vec::with_capacity(config.cells.len());
    let mut contents = Vec::with_capacity(config.n_content);
    for (cell, &n) in config.cells.iter().zip(&items_per_cell) {
        let marginals: Vec<f64> =
            GcrcClass::ALL.iter().map(|c| cell.class_marginals.get(c).copied().unwrap_or(0.0)).collect();
        // Class counts are fixed by quota, as in a balanced review sample;
        // only their order is random.
        let mut classes: Vec<GcrcClass> = largest_remainder(n, &marginals)
            .into_iter()
            .zip(GcrcClass::ALL)
            .flat_map(|(k, c)| std::iter::repeat_n(c, k))
            .collect();
        classes.shuffle(&mut rng);
        let mut items = Vec::with_capacity(n);
        for (j, class) in classes.into_iter().enumerate() {
            let (u_vm, u_vo): (f64, f64) = (rng.random(), rng.random());
            let verification = if class.is_controversial() && u_vm < config.vm_rate_given_c {
                VerificationFlag::VM
            } else if u_vo < config.vo_rate(class) {
                VerificationFlag::VO
            } else {
                VerificationFlag::None
            };
            let pop = popularity[&class.aggregate()].sample(&mut rng);
            let aff = [0; 4].map(|_| affinity.sample(&mut rng));
            items.push(Item { class, popularity: pop, affinity: aff });
            contents.push(ContentRecord {
                content_id: format!("{}-{}-{:05}", cell.platform, cell.country, j),
                platform: cell.platform,
                country: cell.country,
                gcrc: Some(class),
                verification,
                reporter_gender: None,
                reporter_age_band: None,
            });
        }
        cell_items.push(items);
    }

    // Reporters.
    let mut rng = rng_for(config.seed, "reporters");
    let mix: Vec<f64> = BehaviourKind::ALL
        .iter()
        .map(|k| config.behaviour_mix.get(k).copied().unwrap_or(0.0))
        .collect();
    let mix = weighted(&mix).expect("validated mix");
    let gender_dist = weighted(&GENDER_WEIGHTS.map(|(_, w)| w)).unwrap();
    let age_dist = weighted(&AGE_WEIGHTS).unwrap();
    let mut cell_reporters: Vec<Vec<Reporter>> = Vec::with_capacity(config.cells.len());
    let mut next_id = 0usize;
    for &n in &reporters_per_cell {
        let mut list = Vec::with_capacity(n);
        for _ in 0..n {
            let kind = BehaviourKind::ALL[mix.sample(&mut rng)];
            let gender = GENDER_WEIGHTS[gender_dist.sample(&mut rng)].0;
            let age = AgeBand(age_dist.sample(&mut rng) as u8);
            let profile = config.profile(kind).expect("validated");
            let activity = profile.activity.sample(&mut rng, cap);
            list.push(Reporter { id: format!("U{next_id:06}"), kind, gender, age, activity });
            next_id += 1;
        }
        cell_reporters.push(list);
    }

    // Reports. Expected loads fix how a cell's report budget splits across
    // classes and, within a class, across behaviours; realised activity
    // only sets the budget and who files each report.
    let loads: Vec<f64> = BehaviourKind::ALL
        .iter()
        .map(|&k| match config.profile(k) {
            Some(p) => config.behaviour_mix.get(&k).copied().unwrap_or(0.0) * p.activity.mean(cap),
            None => 0.0,
        })
        .collect();
    let mut rng = rng_for(config.seed, "events");
    let mut events = Vec::new();
    let mut offset = 0usize;
    for (ci, cell) in config.cells.iter().enumerate() {
        let items = &cell_items[ci];
        let reporters = &cell_reporters[ci];
        let mut by_class: BTreeMap<GcrcClass, Vec<usize>> = BTreeMap::new();
        for (i, it) in items.iter().enumerate() {
            by_class.entry(it.class).or_default().push(i);
        }
        let mut by_kind: [Vec<usize>; 4] = Default::default();
        for (i, r) in reporters.iter().enumerate() {
            by_kind[r.kind.index()].push(i);
        }
        let who: Vec<Option<WeightedIndex<f64>>> =
            by_kind.iter().map(|ids| weighted(&ids.iter().map(|&i| reporters[i].activity as f64).collect::<Vec<_>>())).collect();
        let category: Vec<Option<WeightedIndex<f64>>> = BehaviourKind::ALL
            .iter()
            .map(|&k| config.profile(k).and_then(|p| weighted(&p.category_vector())))
            .collect();
        let active = |p: usize| who[p].is_some() && category[p].is_some();

        // Responsibility of each present behaviour for each present class.
        let classes: Vec<GcrcClass> = by_class.keys().copied().collect();
        let resp: Vec<Vec<f64>> = classes
            .iter()
            .map(|&c| {
                BehaviourKind::ALL
                    .iter()
                    .map(|&k| {
                        let p = k.index();
                        let w = config.profile(k).map_or(0.0, |prof| prof.target_weight(c));
                        if active(p) { loads[p] * w } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let class_load: Vec<f64> = resp.iter().map(|r| r.iter().sum()).collect();
        let budget: u64 = reporters.iter().map(|r| r.activity).sum();
        if class_load.iter().all(|&l| l == 0.0) {
            log::debug!("{} {}: no behaviour reaches any class", cell.platform, cell.country);
            offset += items.len();
            continue;
        }
        let totals = largest_remainder(budget as usize, &class_load);

        for ((c, r), &total) in classes.iter().zip(&resp).zip(&totals) {
            let Some(pick_kind) = weighted(r) else { continue };
            let ids = &by_class[c];
            let item_dist: Vec<Option<WeightedIndex<f64>>> = (0..4)
                .map(|p| {
                    // Affinities can underflow to zero; fall back to popularity alone.
                    weighted(&ids.iter().map(|&i| items[i].popularity * items[i].affinity[p]).collect::<Vec<_>>())
                        .or_else(|| weighted(&ids.iter().map(|&i| items[i].popularity).collect::<Vec<_>>()))
                })
                .collect();
            for _ in 0..total {
                let p = pick_kind.sample(&mut rng);
                let item = ids[item_dist[p].as_ref().expect("positive popularity").sample(&mut rng)];
                let reporter = &reporters[by_kind[p][who[p].as_ref().expect("active").sample(&mut rng)]];
                let cat = ReportCategory::ALL[category[p].as_ref().expect("active").sample(&mut rng)];
                events.push(ReportEvent {
                    report_id: String::new(),
                    content_id: contents[offset + item].content_id.clone(),
                    reporter_id: reporter.id.clone(),
                    platform: cell.platform,
                    country: cell.country,
                    category: cat,
                    timestamp: config.start_ts + rng.random_range(0..window_secs),
                });
            }
        }
        offset += items.len();
    }

    let mut rng = rng_for(config.seed, "seed-reports");
    let mut offset = 0usize;
    for (ci, cell) in config.cells.iter().enumerate() {
        let reporters = &cell_reporters[ci];
        for record in &mut contents[offset..offset + cell_items[ci].len()] {
            let r = &reporters[rng.random_range(0..reporters.len())];
            record.reporter_gender = Some(r.gender);
            record.reporter_age_band = Some(r.age);
            events.push(ReportEvent {
                report_id: String::new(),
                content_id: record.content_id.clone(),
                reporter_id: r.id.clone(),
                platform: cell.platform,
                country: cell.country,
                category: ReportCategory::FalseNews,
                timestamp: config.start_ts + rng.random_range(0..window_secs),
            });
        }
        offset += cell_items[ci].len();
    }

    events.sort_by(|a, b| {
        (a.timestamp, &a.content_id, &a.reporter_id, a.category).cmp(&(
            b.timestamp,
            &b.content_id,
            &b.reporter_id,
            b.category,
        ))
    });
    for (i, e) in events.iter_mut().enumerate() {
        e.report_id = format!("R{i:08}");
    }

    let reporters = cell_reporters.into_iter().flatten().map(|r| (r.id, r.kind)).collect();
    Ok(SynthDataset { config: config.clone(), contents, events, reporters })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::super::presets::preset;
    use super::*;
    use crate::metrics::decompose;

    fn small(name: &str, seed: u64) -> GeneratorConfig {
        let mut cfg = preset(name).unwrap();
        cfg.seed = seed;
        cfg.n_content = 400;
        cfg.n_reporters = 3000;
        cfg
    }

    #[test]
    fn largest_remainder_totals() {
        assert_eq!(largest_remainder(10, &[1.0, 1.0]), vec![5, 5]);
        assert_eq!(largest_remainder(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(largest_remainder(7, &[0.5, 0.3, 0.2]), vec![4, 2, 1]);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&small("ig-us", 5)).unwrap();
        let b = generate(&small("ig-us", 5)).unwrap();
        assert_eq!(a, b);
        let c = generate(&small("ig-us", 6)).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn referential_integrity() {
        let d = generate(&small("fb-us", 1)).unwrap();
        let ids: BTreeSet<&str> = d.contents.iter().map(|c| c.content_id.as_str()).collect();
        assert_eq!(ids.len(), d.contents.len());
        let window = d.config.window_days as i64 * SECONDS_PER_DAY;
        for e in &d.events {
            assert!(ids.contains(e.content_id.as_str()));
            assert!(d.reporters.contains_key(&e.reporter_id));
            assert!(e.timestamp >= d.config.start_ts && e.timestamp < d.config.start_ts + window);
        }
        let reported: BTreeSet<&str> = d.events.iter().map(|e| e.content_id.as_str()).collect();
        assert_eq!(reported, ids);
        for c in &d.contents {
            c.validate().unwrap();
            assert!(c.verification != VerificationFlag::VM || c.gcrc.unwrap().is_controversial());
        }
        let rids: BTreeSet<&str> = d.events.iter().map(|e| e.report_id.as_str()).collect();
        assert_eq!(rids.len(), d.events.len());
    }

    #[test]
    fn degenerate_all_verified_c2() {
        let mut cfg = small("ig-us", 2);
        cfg.behaviour_mix = BTreeMap::from([(BehaviourKind::FaithfulFlagger, 1.0)]);
        cfg.cells[0].class_marginals = BTreeMap::from([(GcrcClass::C2, 1.0)]);
        cfg.vm_rate_given_c = 1.0;
        let d = generate(&cfg).unwrap();
        let n = decompose(&d.contents).unwrap();
        assert_eq!(n.accurate, 1.0);
        assert_eq!((n.false_noise, n.quasi_noise, n.soft_noise, n.hard_noise), (0.0, 0.0, 0.0, 0.0));
        assert!(d.reporters.values().all(|&k| k == BehaviourKind::FaithfulFlagger));
    }

    #[test]
    fn invalid_config_reports_fields() {
        let mut cfg = small("ig-us", 0);
        cfg.n_reporters = 0;
        match generate(&cfg) {
            Err(SynthError::InvalidConfig(errs)) => assert!(errs.iter().any(|e| e.field == "n_reporters")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
