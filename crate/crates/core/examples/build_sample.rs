//! Draws a review sample balanced across reporter country, gender and age
//! band from a two-country synthetic population.
//!
//! ```text
//! cargo run --release --example build_sample
//! ```

use std::collections::BTreeMap;

use reportsignal::ingest::{build_sample, SampleOptions};
use reportsignal::synth::{generate, preset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = preset("ig-us").expect("shipped preset");
    let fr = preset("ig-fr").expect("shipped preset");
    cfg.cells[0].content_share = 0.6;
    let mut fr_cell = fr.cells[0].clone();
    fr_cell.content_share = 0.4;
    cfg.cells.push(fr_cell);
    cfg.n_content = 2_000;
    cfg.n_reporters = 10_000;
    let d = generate(&cfg)?;

    let sample = build_sample(&d.contents, &d.events, 600, SampleOptions { seed: 7, strict: false })?;
    let mut cells: BTreeMap<String, usize> = BTreeMap::new();
    for r in &sample {
        let gender = r.reporter_gender.map_or("?".to_string(), |g| g.to_string());
        let age = r.reporter_age_band.map_or("?".to_string(), |a| a.0.to_string());
        *cells.entry(format!("{} {gender:<5} age {age}", r.country)).or_default() += 1;
    }
    println!("{} items drawn from {}", sample.len(), d.contents.len());
    for (cell, n) in cells {
        println!("{cell:<20} {n:>4}");
    }
    Ok(())
}
