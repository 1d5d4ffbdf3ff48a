//! Trains the four-way router on a preset, compares it with the majority
//! baseline and reloads the saved model.
//!
//! ```text
//! cargo run --release --example train_classifier -- ig-fr
//! ```

use reportsignal::gbdt::{GbdtModel, ALL_SLICE};
use reportsignal::ingest::{aggregate_features, Window};
use reportsignal::pipeline::{synthesize, train_eval, TrainEvalOptions};
use reportsignal::synth::preset;
use reportsignal::taxonomy::TargetClass;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "ig-us".into());
    let cfg = preset(&name).ok_or("unknown preset")?;
    let d = synthesize(&cfg, 0)?;
    let features = aggregate_features(&d.events, Window::from_days(cfg.start_ts, cfg.window_days));
    let run = train_eval(&features, &d.contents, &TrainEvalOptions::default(), 0)?;
    let r = &run.report;

    for (class, f1) in &r.f1 {
        println!("F1 {class}/not-{class}: {f1:.3}");
    }
    let baseline = r.baseline.as_ref().expect("attached by train_eval");
    println!("macro F1 {:.3}, always-{} baseline {:.3}", r.macro_f1, baseline.class, baseline.macro_f1);
    println!("confusion (rows actual): {:?}", r.confusion);
    for f in r.ranked_features().iter().take(4) {
        println!("  {f}");
    }

    if let Some(curve) = r.curve(TargetClass::C, ALL_SLICE) {
        println!("C precision-recall, {} points, prevalence {:.3}", curve.points.len(), curve.prevalence);
        let step = (curve.points.len() / 5).max(1);
        for p in curve.points.iter().step_by(step) {
            println!("  t={:.3} precision {:.3} recall {:.3}", p.threshold, p.precision, p.recall);
        }
    }

    let mut buf = Vec::new();
    run.model.to_json(&mut buf)?;
    let back = GbdtModel::from_json(&buf[..])?;
    assert_eq!(back.digest(), run.model.digest());
    println!("model {} bytes, digest {}", buf.len(), &back.digest()[..16]);
    Ok(())
}
