//! Generates a preset and prints how close the realised marginals land to
//! their targets.
//!
//! ```text
//! cargo run --release --example synthesize -- ig-fr 3
//! ```

use reportsignal::pipeline::synthesize;
use reportsignal::synth::{calibration_report, preset, PRESET_NAMES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "ig-us".into());
    let seed: u64 = std::env::args().nth(2).map_or(Ok(0), |s| s.parse())?;
    let Some(cfg) = preset(&name) else {
        return Err(format!("unknown preset {name}; try one of {PRESET_NAMES:?}").into());
    };
    let d = synthesize(&cfg, seed)?;
    println!(
        "{name} seed {seed}: {} items, {} reporters, {} events",
        d.contents.len(),
        d.reporters.len(),
        d.events.len()
    );
    print!("{}", calibration_report(&d));
    Ok(())
}
