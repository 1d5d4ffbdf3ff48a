use std::io::{Read, Write};

use super::{AgeBand, ContentRecord, IngestError};

const HEADER: [&str; 7] =
    ["content_id", "platform", "country", "gcrc", "verification", "gender", "age_band"];

/// Reads the labelled content table. Empty cells mean "absent".
pub fn read_contents<R: Read>(reader: R) -> Result<Vec<ContentRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(IngestError::MalformedRecord {
            line: 1,
            reason: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let malformed = |reason: String| IngestError::MalformedRecord { line, reason };
        if row.len() != HEADER.len() {
            return Err(malformed(format!("expected {} fields, got {}", HEADER.len(), row.len())));
        }
        let platform = row[1]
            .parse()
            .map_err(|_| IngestError::UnknownPlatform { line, value: row[1].to_string() })?;
        let country = row[2]
            .parse()
            .map_err(|_| IngestError::UnknownCountry { line, value: row[2].to_string() })?;
        let gcrc = match &row[3] {
            "" => None,
            s => Some(s.parse().map_err(|e: crate::taxonomy::LabelError| malformed(e.to_string()))?),
        };
        let verification =
            row[4].parse().map_err(|e: crate::taxonomy::LabelError| malformed(e.to_string()))?;
        let reporter_gender = match &row[5] {
            "" => None,
            s => Some(s.parse().map_err(malformed)?),
        };
        let reporter_age_band = match &row[6] {
            "" => None,
            s => Some(AgeBand(
                s.parse().map_err(|_| malformed(format!("bad age band {s:?}")))?,
            )),
        };
        let record = ContentRecord {
            content_id: row[0].to_string(),
            platform,
            country,
            gcrc,
            verification,
            reporter_gender,
            reporter_age_band,
        };
        record.validate().map_err(malformed)?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_contents<W: Write>(writer: W, records: &[ContentRecord]) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        let age = r.reporter_age_band.map(|a| a.0.to_string()).unwrap_or_default();
        w.write_record([
            r.content_id.as_str(),
            r.platform.as_str(),
            r.country.as_str(),
            r.gcrc.map(|c| c.as_str()).unwrap_or(""),
            r.verification.as_str(),
            r.reporter_gender.map(|g| g.as_str()).unwrap_or(""),
            age.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
