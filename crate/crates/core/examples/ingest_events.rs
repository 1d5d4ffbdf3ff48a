//! Round-trips a report stream through JSONL, aggregates it into per-item
//! category counts and clips the heaviest items.
//!
//! ```text
//! cargo run --release --example ingest_events [events.jsonl]
//! ```
//!
//! Without an argument a small synthetic stream is used.

use std::fs::File;
use std::io::BufReader;

use reportsignal::ingest::{
    aggregate_features, clip_outliers, parse_events, write_events, ReportCategory, Window,
};
use reportsignal::pipeline::default_window_start;
use reportsignal::synth::{generate, preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let events = match std::env::args().nth(1) {
        Some(path) => parse_events(BufReader::new(File::open(path)?))?,
        None => {
            let mut cfg = preset("ig-us").expect("shipped preset");
            cfg.n_content = 500;
            cfg.n_reporters = 5_000;
            let mut buf = Vec::new();
            write_events(&mut buf, &generate(&cfg)?.events)?;
            parse_events(&buf[..])?
        }
    };
    let start = default_window_start(&events).ok_or("no events")?;
    let features = aggregate_features(&events, Window::from_days(start, 90));
    println!("{} events over {} items", events.len(), features.len());

    let vectors: Vec<_> = features.values().cloned().collect();
    for q in [1.0, 0.999, 0.99] {
        let clip = clip_outliers(&vectors, q)?;
        println!("q={q:<6} threshold {:>5}  excluded {}", clip.threshold, clip.excluded.len());
    }

    let mut heaviest = vectors.clone();
    heaviest.sort_by_key(|v| std::cmp::Reverse(v.total));
    for v in heaviest.iter().take(5) {
        println!(
            "{:<14} total {:>5}  false_news {:>4}  spam {:>4}",
            v.content_id,
            v.total,
            v.count(ReportCategory::FalseNews),
            v.count(ReportCategory::Spam)
        );
    }
    Ok(())
}
