use std::io::{BufRead, Write};

use serde::Deserialize;

use super::{Country, IngestError, Platform, ReportCategory, ReportEvent};

/// Untyped view of one JSONL line so that closed-set violations can be
/// reported with their own error kinds.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    report_id: String,
    content_id: String,
    reporter_id: String,
    platform: String,
    country: String,
    category: String,
    ts: i64,
}

/// Streams [`ReportEvent`]s out of a JSONL reader. Blank lines are skipped;
/// line numbers are 1-based.
pub struct EventReader<R> {
    reader: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> EventReader<R> {
    pub fn new(reader: R) -> Self {
        EventReader { reader, line: 0, buf: String::new() }
    }

    fn parse_line(&self, text: &str) -> Result<ReportEvent, IngestError> {
        let line = self.line;
        let raw: RawEvent = serde_json::from_str(text)
            .map_err(|e| IngestError::MalformedRecord { line, reason: e.to_string() })?;
        for (name, value) in [
            ("report_id", &raw.report_id),
            ("content_id", &raw.content_id),
            ("reporter_id", &raw.reporter_id),
        ] {
            if value.is_empty() {
                return Err(IngestError::MalformedRecord { line, reason: format!("empty {name}") });
            }
        }
        if raw.ts < 0 {
            return Err(IngestError::MalformedRecord {
                line,
                reason: format!("negative timestamp {}", raw.ts),
            });
        }
        let platform: Platform = raw
            .platform
            .parse()
            .map_err(|_| IngestError::UnknownPlatform { line, value: raw.platform.clone() })?;
        let country: Country = raw
            .country
            .parse()
            .map_err(|_| IngestError::UnknownCountry { line, value: raw.country.clone() })?;
        let category: ReportCategory = raw
            .category
            .parse()
            .map_err(|_| IngestError::UnknownCategory { line, value: raw.category.clone() })?;
        Ok(ReportEvent {
            report_id: raw.report_id,
            content_id: raw.content_id,
            reporter_id: raw.reporter_id,
            platform,
            country,
            category,
            timestamp: raw.ts,
        })
    }
}

impl<R: BufRead> Iterator for EventReader<R> {
    type Item = Result<ReportEvent, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line += 1;
                    let text = self.buf.trim();
                    if text.is_empty() {
                        continue;
                    }
                    return Some(self.parse_line(text));
                }
                Err(e) => return Some(Err(e.into())),
            }
        }
    }
}

/// Parses a whole JSONL stream, stopping at the first bad line.
pub fn parse_events<R: BufRead>(reader: R) -> Result<Vec<ReportEvent>, IngestError> {
    EventReader::new(reader).collect()
}

pub fn write_events<W: Write>(mut w: W, events: &[ReportEvent]) -> Result<(), IngestError> {
    for e in events {
        serde_json::to_writer(&mut w, e).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}
