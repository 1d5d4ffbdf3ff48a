use std::collections::{BTreeMap, BTreeSet};

use super::{Country, IngestError, ReportEvent};

/// Distinct reported items per thousand monthly active users, per country.
/// Every country in `mau` appears in the output, with 0.0 when it has no
/// events.
pub fn reporting_rate(
    events: &[ReportEvent],
    mau: &BTreeMap<Country, u64>,
) -> Result<BTreeMap<Country, f64>, IngestError> {
    let mut distinct: BTreeMap<Country, BTreeSet<&str>> = BTreeMap::new();
    for e in events {
        distinct.entry(e.country).or_default().insert(&e.content_id);
    }
    let mut out = BTreeMap::new();
    for (&country, &users) in mau {
        if users == 0 {
            return Err(IngestError::MissingMau(country));
        }
        let n = distinct.get(&country).map_or(0, |s| s.len());
        out.insert(country, 1000.0 * n as f64 / users as f64);
    }
    if let Some(&missing) = distinct.keys().find(|c| !mau.contains_key(c)) {
        return Err(IngestError::MissingMau(missing));
    }
    Ok(out)
}
