use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::{IngestError, ReportCategory, ReportEvent, N_CATEGORIES, SECONDS_PER_DAY};

pub const DEFAULT_WINDOW_DAYS: u32 = 90;

/// Half-open time range `[start, end)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: i64,
    pub end: i64,
}

impl Window {
    pub fn new(start: i64, end: i64) -> Result<Self, IngestError> {
        if end < start {
            return Err(IngestError::InvalidWindow { start, end });
        }
        Ok(Window { start, end })
    }

    pub fn from_days(start: i64, days: u32) -> Self {
        Window { start, end: start + days as i64 * SECONDS_PER_DAY }
    }

    pub fn contains(&self, ts: i64) -> bool {
        ts >= self.start && ts < self.end
    }

    /// Length in whole days, rounded up, never below one.
    pub fn days(&self) -> u32 {
        let secs = self.end - self.start;
        ((secs + SECONDS_PER_DAY - 1) / SECONDS_PER_DAY).max(1) as u32
    }
}

/// Per-item report counts over one window, one column per category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub content_id: String,
    pub counts: [u32; N_CATEGORIES],
    pub total: u64,
    pub window_days: u32,
}

impl FeatureVector {
    pub fn new(content_id: impl Into<String>, window_days: u32) -> Self {
        FeatureVector {
            content_id: content_id.into(),
            counts: [0; N_CATEGORIES],
            total: 0,
            window_days,
        }
    }

    pub fn from_counts(content_id: impl Into<String>, counts: [u32; N_CATEGORIES]) -> Self {
        let total = counts.iter().map(|&c| c as u64).sum();
        FeatureVector { content_id: content_id.into(), counts, total, window_days: DEFAULT_WINDOW_DAYS }
    }

    pub fn record(&mut self, category: ReportCategory) {
        self.counts[category.index()] += 1;
        self.total += 1;
    }

    pub fn count(&self, category: ReportCategory) -> u32 {
        self.counts[category.index()]
    }

    pub fn add(&mut self, other: &FeatureVector) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.total += other.total;
    }
}

pub type FeatureMap = BTreeMap<String, FeatureVector>;

fn canonical_key(e: &ReportEvent) -> (i64, &str, ReportCategory, &str, super::Platform, super::Country) {
    (e.timestamp, &e.content_id, e.category, &e.reporter_id, e.platform, e.country)
}

/// Counts in-window reports per item and category. Reports sharing a
/// `report_id` count once; if their payloads disagree the earliest (by
/// timestamp, then content and category) is kept, so the result does not
/// depend on input order.
pub fn aggregate_features(events: &[ReportEvent], window: Window) -> FeatureMap {
    let mut unique: HashMap<&str, &ReportEvent> = HashMap::with_capacity(events.len());
    for e in events {
        unique
            .entry(&e.report_id)
            .and_modify(|kept| {
                if canonical_key(e) < canonical_key(kept) {
                    *kept = e;
                }
            })
            .or_insert(e);
    }
    let days = window.days();
    let mut out = FeatureMap::new();
    for e in unique.values().filter(|e| window.contains(e.timestamp)) {
        out.entry(e.content_id.clone())
            .or_insert_with(|| FeatureVector::new(e.content_id.clone(), days))
            .record(e.category);
    }
    out
}

/// Sums two maps built from disjoint partitions of an event stream.
pub fn merge_feature_maps(mut a: FeatureMap, b: FeatureMap) -> FeatureMap {
    for (id, v) in b {
        match a.get_mut(&id) {
            Some(existing) => existing.add(&v),
            None => {
                a.insert(id, v);
            }
        }
    }
    a
}

/// Nearest-rank quantile: the `ceil(q * n)`-th smallest value (1-based).
pub fn nearest_rank(sorted: &[u64], q: f64) -> Result<u64, IngestError> {
    if sorted.is_empty() {
        return Err(IngestError::EmptyInput);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(IngestError::InvalidQuantile(q));
    }
    let n = sorted.len();
    // The epsilon absorbs products like 0.999 * 1000 landing a hair above 999.
    let rank = ((q * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    Ok(sorted[rank - 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClipOutcome {
    pub kept: Vec<FeatureVector>,
    pub excluded: Vec<FeatureVector>,
    /// Quantile of the totals; everything strictly above it was excluded.
    pub threshold: u64,
}

/// Splits off every vector whose total lies strictly above the nearest-rank
/// `q`-quantile of totals. Input order is preserved on both sides.
pub fn clip_outliers(vectors: &[FeatureVector], q: f64) -> Result<ClipOutcome, IngestError> {
    let mut totals: Vec<u64> = vectors.iter().map(|v| v.total).collect();
    totals.sort_unstable();
    let threshold = nearest_rank(&totals, q)?;
    let (kept, excluded) = vectors.iter().cloned().partition(|v| v.total <= threshold);
    Ok(ClipOutcome { kept, excluded, threshold })
}

fn header() -> Vec<String> {
    let mut h = vec!["content_id".to_string()];
    h.extend(ReportCategory::names());
    h.push("total".to_string());
    h
}

pub fn write_features<'a, W, I>(writer: W, vectors: I) -> Result<(), IngestError>
where
    W: Write,
    I: IntoIterator<Item = &'a FeatureVector>,
{
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header())?;
    for v in vectors {
        let mut row = Vec::with_capacity(N_CATEGORIES + 2);
        row.push(v.content_id.clone());
        row.extend(v.counts.iter().map(|c| c.to_string()));
        row.push(v.total.to_string());
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_features<R: Read>(reader: R, window_days: u32) -> Result<FeatureMap, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let expected = header();
    if rdr.headers()?.iter().collect::<Vec<_>>() != expected {
        return Err(IngestError::MalformedRecord {
            line: 1,
            reason: format!("expected header {}", expected.join(",")),
        });
    }
    let mut out = FeatureMap::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let malformed = |reason: String| IngestError::MalformedRecord { line, reason };
        if row.len() != N_CATEGORIES + 2 {
            return Err(malformed(format!("expected {} fields", N_CATEGORIES + 2)));
        }
        let mut v = FeatureVector::new(&row[0], window_days);
        for i in 0..N_CATEGORIES {
            v.counts[i] = row[i + 1]
                .parse()
                .map_err(|_| malformed(format!("bad count {:?}", &row[i + 1])))?;
        }
        v.total = v.counts.iter().map(|&c| c as u64).sum();
        let stated: u64 = row[N_CATEGORIES + 1]
            .parse()
            .map_err(|_| malformed(format!("bad total {:?}", &row[N_CATEGORIES + 1])))?;
        if stated != v.total {
            return Err(malformed(format!("total {stated} differs from sum {}", v.total)));
        }
        if v.content_id.is_empty() {
            return Err(malformed("empty content_id".into()));
        }
        out.insert(v.content_id.clone(), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Country, Platform};

    fn ev(id: &str, content: &str, cat: ReportCategory, ts: i64) -> ReportEvent {
        ReportEvent {
            report_id: id.into(),
            content_id: content.into(),
            reporter_id: "u".into(),
            platform: Platform::IG,
            country: Country::US,
            category: cat,
            timestamp: ts,
        }
    }

    #[test]
    fn direct_counts() {
        use ReportCategory::*;
        let events = vec![
            ev("1", "c", FalseNews, 1),
            ev("2", "c", Spam, 2),
            ev("3", "c", FalseNews, 3),
            ev("4", "c", Spam, 4),
            ev("5", "c", FalseNews, 5),
        ];
        let map = aggregate_features(&events, Window::from_days(0, 90));
        let v = &map["c"];
        assert_eq!(v.count(FalseNews), 3);
        assert_eq!(v.count(Spam), 2);
        assert_eq!(v.total, 5);
        assert_eq!(v.counts.iter().filter(|&&c| c == 0).count(), 8);
        assert_eq!(v.window_days, 90);
    }

    #[test]
    fn window_is_half_open() {
        let w = Window::new(10, 20).unwrap();
        let events = vec![
            ev("1", "a", ReportCategory::Spam, 9),
            ev("2", "a", ReportCategory::Spam, 10),
            ev("3", "b", ReportCategory::Spam, 20),
        ];
        let map = aggregate_features(&events, w);
        assert_eq!(map.len(), 1);
        assert_eq!(map["a"].total, 1);
        assert!(Window::new(5, 4).is_err());
    }

    #[test]
    fn nearest_rank_on_one_to_thousand() {
        let totals: Vec<u64> = (1..=1000).collect();
        assert_eq!(nearest_rank(&totals, 0.999).unwrap(), 999);
        assert_eq!(nearest_rank(&totals, 1.0).unwrap(), 1000);
        assert_eq!(nearest_rank(&totals, 0.5).unwrap(), 500);
        assert_eq!(nearest_rank(&totals, 1e-6).unwrap(), 1);
        assert!(nearest_rank(&totals, 0.0).is_err());
        assert!(nearest_rank(&totals, 1.5).is_err());
        assert!(nearest_rank(&[], 0.5).is_err());
    }

    #[test]
    fn clip_excludes_the_top_total() {
        let vectors: Vec<_> = (1..=1000u32)
            .map(|t| {
                let mut c = [0; N_CATEGORIES];
                c[0] = t;
                FeatureVector::from_counts(format!("c{t}"), c)
            })
            .collect();
        let out = clip_outliers(&vectors, 0.999).unwrap();
        assert_eq!(out.excluded.len(), 1);
        assert_eq!(out.excluded[0].total, 1000);
        assert_eq!(out.kept.len(), 999);
        assert!(clip_outliers(&vectors, 1.0).unwrap().excluded.is_empty());
        assert!(matches!(clip_outliers(&[], 0.9), Err(IngestError::EmptyInput)));
    }

    #[test]
    fn feature_csv_round_trip() {
        let mut a = FeatureVector::new("x", 90);
        a.record(ReportCategory::HateSpeech);
        a.record(ReportCategory::FalseNews);
        let b = FeatureVector::new("y", 90);
        let mut buf = Vec::new();
        write_features(&mut buf, [&a, &b]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("content_id,false_news,nudity_sexual_solicitation,"));
        let back = read_features(buf.as_slice(), 90).unwrap();
        assert_eq!(back["x"], a);
        assert_eq!(back["y"], b);
        let broken = text.replace("x,1,0,0,0,0,0,1,0,0,0,2", "x,1,0,0,0,0,0,1,0,0,0,3");
        assert!(read_features(broken.as_bytes(), 90).is_err());
    }
}
