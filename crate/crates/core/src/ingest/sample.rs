use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AgeBand, ContentRecord, Country, Gender, IngestError, ReportEvent};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SampleOptions {
    pub seed: u64,
    /// Fail when some country x gender x age combination has no records.
    pub strict: bool,
}

type Cell = (Country, Option<Gender>, Option<AgeBand>);
/// Reporter overlap with the sample so far, shuffle priority, content id, record index.
type Slot<'a> = Reverse<(usize, u64, &'a str, usize)>;

fn cell_of(r: &ContentRecord) -> Cell {
    (r.country, r.reporter_gender, r.reporter_age_band)
}

/// Draws `target_n` records with distinct content ids, balanced across
/// country x gender x age cells.
///
/// Each non-empty cell gets an equal share of the target (largest remainder,
/// capped by the cell's distinct items, surplus handed to cells with room).
/// Inside a cell, items whose reporters overlap least with reporters already
/// in the sample go first; a seeded random priority and then the content id
/// break ties.
pub fn build_sample(
    records: &[ContentRecord],
    events: &[ReportEvent],
    target_n: usize,
    opts: SampleOptions,
) -> Result<Vec<ContentRecord>, IngestError> {
    let population: BTreeSet<&str> = records.iter().map(|r| r.content_id.as_str()).collect();
    if target_n > population.len() {
        return Err(IngestError::InsufficientRecords(format!(
            "requested {target_n} items from a population of {}",
            population.len()
        )));
    }

    let mut cells: BTreeMap<Cell, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        cells.entry(cell_of(r)).or_default().push(i);
    }
    if opts.strict {
        check_strata(records, &cells)?;
    }

    let mut reporters: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in events {
        reporters.entry(&e.content_id).or_default().push(&e.reporter_id);
    }
    for list in reporters.values_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let priority: Vec<u64> = records.iter().map(|_| rng.random()).collect();

    let keys: Vec<Cell> = cells.keys().copied().collect();
    let capacity: Vec<usize> = keys
        .iter()
        .map(|k| {
            cells[k].iter().map(|&i| records[i].content_id.as_str()).collect::<HashSet<_>>().len()
        })
        .collect();
    let mut quota = allocate(target_n, &capacity);

    let mut heaps: Vec<BinaryHeap<Slot>> = keys
        .iter()
        .map(|k| {
            cells[k]
                .iter()
                .map(|&i| Reverse((0, priority[i], records[i].content_id.as_str(), i)))
                .collect()
        })
        .collect();

    let mut chosen_content: HashSet<&str> = HashSet::new();
    let mut chosen_reporters: HashSet<&str> = HashSet::new();
    let mut picked: Vec<usize> = Vec::with_capacity(target_n);
    let mut released = 0usize;
    let overlap = |content: &str, seen: &HashSet<&str>| {
        reporters.get(content).map_or(0, |rs| rs.iter().filter(|r| seen.contains(*r)).count())
    };

    while picked.len() < target_n {
        let mut progressed = false;
        for c in 0..keys.len() {
            if quota[c] == 0 {
                continue;
            }
            // Lazy greedy: overlap scores only grow as the sample grows.
            let pick = loop {
                let Some(Reverse((score, prio, content, idx))) = heaps[c].pop() else {
                    break None;
                };
                if chosen_content.contains(content) {
                    continue;
                }
                let fresh = overlap(content, &chosen_reporters);
                if fresh > score {
                    heaps[c].push(Reverse((fresh, prio, content, idx)));
                    continue;
                }
                break Some(idx);
            };
            match pick {
                Some(idx) => {
                    let content = records[idx].content_id.as_str();
                    chosen_content.insert(content);
                    if let Some(rs) = reporters.get(content) {
                        chosen_reporters.extend(rs.iter().copied());
                    }
                    picked.push(idx);
                    quota[c] -= 1;
                    progressed = true;
                }
                None => {
                    released += quota[c];
                    quota[c] = 0;
                }
            }
            if picked.len() == target_n {
                break;
            }
        }
        if released > 0 {
            let room: Vec<usize> = heaps.iter().map(|h| h.len()).collect();
            let extra = allocate(released, &room);
            for (q, e) in quota.iter_mut().zip(&extra) {
                *q += e;
            }
            released = 0;
            progressed = true;
        }
        if !progressed {
            return Err(IngestError::InsufficientRecords(
                "ran out of unselected items before reaching the target".into(),
            ));
        }
    }

    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| records[i].clone()).collect())
}

/// Equal split of `n` across cells with largest-remainder rounding, capped
/// by each cell's capacity; surplus is re-split among cells with room.
/// Remainder ties go to the cell with more room, then the earlier cell.
fn allocate(n: usize, capacity: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize; capacity.len()];
    let mut left = n;
    loop {
        let open: Vec<usize> = (0..capacity.len()).filter(|&i| out[i] < capacity[i]).collect();
        if left == 0 || open.is_empty() {
            return out;
        }
        let share = left / open.len();
        let mut remainder = left % open.len();
        let mut by_room = open.clone();
        by_room.sort_by_key(|&i| (Reverse(capacity[i] - out[i]), i));
        let mut bonus = vec![0usize; capacity.len()];
        for &i in &by_room {
            if remainder == 0 {
                break;
            }
            bonus[i] = 1;
            remainder -= 1;
        }
        for &i in &open {
            let give = (share + bonus[i]).min(capacity[i] - out[i]);
            out[i] += give;
            left -= give;
        }
    }
}

fn check_strata(
    records: &[ContentRecord],
    cells: &BTreeMap<Cell, Vec<usize>>,
) -> Result<(), IngestError> {
    let countries: BTreeSet<_> = records.iter().map(|r| r.country).collect();
    let genders: BTreeSet<_> = records.iter().map(|r| r.reporter_gender).collect();
    let ages: BTreeSet<_> = records.iter().map(|r| r.reporter_age_band).collect();
    for &c in &countries {
        for &g in &genders {
            for &a in &ages {
                if !cells.contains_key(&(c, g, a)) {
                    return Err(IngestError::InsufficientRecords(format!(
                        "empty stratum country={c} gender={} age={}",
                        g.map_or("-", |g| g.as_str()),
                        a.map_or("-".to_string(), |a| a.0.to_string())
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Platform, ReportCategory};
    use crate::taxonomy::VerificationFlag;

    fn rec(id: &str, country: Country, gender: Option<Gender>) -> ContentRecord {
        ContentRecord {
            content_id: id.into(),
            platform: Platform::IG,
            country,
            gcrc: None,
            verification: VerificationFlag::None,
            reporter_gender: gender,
            reporter_age_band: None,
        }
    }

    fn report(content: &str, reporter: &str) -> ReportEvent {
        ReportEvent {
            report_id: format!("{content}-{reporter}"),
            content_id: content.into(),
            reporter_id: reporter.into(),
            platform: Platform::IG,
            country: Country::FR,
            category: ReportCategory::FalseNews,
            timestamp: 0,
        }
    }

    #[test]
    fn allocation() {
        assert_eq!(allocate(10, &[20, 20]), vec![5, 5]);
        assert_eq!(allocate(10, &[3, 20]), vec![3, 7]);
        assert_eq!(allocate(7, &[5, 5, 5]), vec![3, 2, 2]);
        assert_eq!(allocate(7, &[5, 9, 5]), vec![2, 3, 2]);
        assert_eq!(allocate(100, &[5, 9]), vec![5, 9]);
    }

    #[test]
    fn whole_population() {
        let records: Vec<_> = (0..12)
            .map(|i| rec(&format!("c{i}"), Country::ALL[i % 3], None))
            .collect();
        let sample = build_sample(&records, &[], 12, SampleOptions::default()).unwrap();
        assert_eq!(sample, records);
        assert!(build_sample(&records, &[], 13, SampleOptions::default()).is_err());
    }

    #[test]
    fn balanced_countries() {
        let mut records: Vec<_> = (0..30).map(|i| rec(&format!("fr{i}"), Country::FR, None)).collect();
        records.extend((0..8).map(|i| rec(&format!("us{i}"), Country::US, None)));
        let sample = build_sample(&records, &[], 10, SampleOptions { seed: 3, strict: false }).unwrap();
        let fr = sample.iter().filter(|r| r.country == Country::FR).count();
        assert_eq!((fr, sample.len() - fr), (5, 5));
    }

    #[test]
    fn deterministic_given_seed() {
        let records: Vec<_> =
            (0..50).map(|i| rec(&format!("c{i}"), Country::ALL[i % 3], None)).collect();
        let a = build_sample(&records, &[], 20, SampleOptions { seed: 9, strict: false }).unwrap();
        let b = build_sample(&records, &[], 20, SampleOptions { seed: 9, strict: false }).unwrap();
        let c = build_sample(&records, &[], 20, SampleOptions { seed: 10, strict: false }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    /// Exhaustive over seeds: with duplicate content ids in the table, no id
    /// is ever drawn twice.
    #[test]
    fn duplicate_content_ids_not_repeated() {
        let mut records = Vec::new();
        for i in 0..6 {
            let id = format!("c{}", i % 4);
            records.push(rec(&id, Country::FR, Some(if i % 2 == 0 { Gender::F } else { Gender::M })));
        }
        for seed in 0..50 {
            for n in 1..=4 {
                let s = build_sample(&records, &[], n, SampleOptions { seed, strict: false }).unwrap();
                let ids: HashSet<_> = s.iter().map(|r| r.content_id.clone()).collect();
                assert_eq!(ids.len(), n, "seed {seed} n {n}");
            }
        }
    }

    #[test]
    fn prefers_new_reporters() {
        let records: Vec<_> = ["a", "b", "c"].iter().map(|id| rec(id, Country::FR, None)).collect();
        // a and b share a reporter; c does not overlap with either.
        let events = vec![report("a", "u1"), report("b", "u1"), report("c", "u2")];
        for seed in 0..20 {
            let s = build_sample(&records, &events, 2, SampleOptions { seed, strict: false }).unwrap();
            assert!(s.iter().any(|r| r.content_id == "c"), "seed {seed}");
        }
    }

    #[test]
    fn strict_mode_flags_empty_strata() {
        let records = vec![
            rec("a", Country::FR, Some(Gender::F)),
            rec("b", Country::US, Some(Gender::M)),
        ];
        let strict = SampleOptions { seed: 0, strict: true };
        assert!(matches!(
            build_sample(&records, &[], 1, strict),
            Err(IngestError::InsufficientRecords(_))
        ));
        assert!(build_sample(&records, &[], 1, SampleOptions::default()).is_ok());
    }
}
