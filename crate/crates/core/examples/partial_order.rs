//! Orders aggregated classes by report volume after clipping and prints the
//! test battery behind it. Pass a file name to also write the DOT graph.
//!
//! ```text
//! cargo run --release --example partial_order -- 0 order.dot
//! ```

use reportsignal::pipeline::{analyze, synthesize, AnalyzeOptions};
use reportsignal::synth::preset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let d = synthesize(&preset("ig-us").expect("shipped preset"), seed)?;
    let a = analyze(&d.events, &d.contents, &AnalyzeOptions::default())?;

    println!("clipped {} items above {}", a.clip.excluded.len(), a.clip.threshold);
    for (class, s) in &a.samples {
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        println!("{class:<3} n={:<5} mean reports {mean:.1}", s.len());
    }
    println!();
    for row in &a.normality {
        match &row.result {
            Some(r) => println!("normality {:<3} K2={:.1} p={:.2e}", row.class, r.statistic, r.p_value),
            None => println!("normality {:<3} skipped", row.class),
        }
    }
    for k in &a.ks {
        println!("ks {}-{} D={:.3} p={:.2e}", k.a, k.b, k.statistic, k.p_value);
    }
    println!();
    for e in &a.order.edges {
        println!("{} > {}  {} p={:.2e}", e.greater, e.lesser, e.strength.as_str(), e.p_value);
    }
    if let Some(path) = std::env::args().nth(2) {
        std::fs::write(&path, a.order.to_dot())?;
        println!("wrote {path}");
    }
    Ok(())
}
