//! Splits reporting inaccuracy into its noise buckets for each preset and
//! shows the per-class distribution of the first one.
//!
//! ```text
//! cargo run --release --example noise_decomposition
//! ```

use reportsignal::metrics::{decompose, distribution_table};
use reportsignal::pipeline::synthesize;
use reportsignal::synth::{expected_noise, preset, PRESET_NAMES};
use reportsignal::taxonomy::NoiseType;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<6} {:>10} {:>8} {:>8} {:>8} {:>8}", "preset", "inaccuracy", "false", "quasi", "soft", "hard");
    for name in PRESET_NAMES {
        let cfg = preset(name).expect("shipped preset");
        let d = decompose(&synthesize(&cfg, 0)?.contents)?;
        println!(
            "{name:<6} {:>10.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            d.inaccuracy(),
            d.false_noise,
            d.quasi_noise,
            d.soft_noise,
            d.hard_noise
        );
        let e = expected_noise(&cfg);
        println!(
            "{:<6} {:>10.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            "  exp",
            1.0 - e[&NoiseType::Accurate],
            e[&NoiseType::FalseNoise],
            e[&NoiseType::QuasiNoise],
            e[&NoiseType::SoftNoise],
            e[&NoiseType::HardNoise]
        );
    }

    let d = synthesize(&preset("ig-us").expect("shipped preset"), 0)?;
    let table = distribution_table(&d.contents)?;
    println!();
    for r in table.rows.iter().filter(|r| r.count > 0) {
        println!("{} {} {:<3} {:>5} {:.3}", r.platform, r.country, r.class.as_str(), r.count, r.share);
    }
    Ok(())
}
