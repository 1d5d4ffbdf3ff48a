use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{read_input, FileDigest, OutDir};
use super::{AnalyzeArgs, Cli, CliError, Format, ReproduceArgs, SynthArgs, TrainEvalArgs};
use crate::gbdt::Hyperparams;
use crate::ingest::{
    parse_events, read_contents, read_features, reporting_rate, write_contents, write_events,
    write_features, Country, ReportEvent,
};
use crate::metrics::NoiseDecomposition;
use crate::pipeline::{
    self, check_run, summarize, Analysis, AnalyzeOptions, Outcome, SweepRow, TrainEval, TrainEvalOptions,
};
use crate::seed::sha256_hex;
use crate::synth::{calibration_report, preset, CalibrationReport, Check, GeneratorConfig, SynthDataset};

fn env<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Env(e.to_string())
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn json_digest<T: Serialize>(value: &T) -> String {
    sha256_hex(&serde_json::to_vec(value).expect("plain data serialises"))
}

fn load_config(source: &str, inputs: &mut Vec<FileDigest>) -> Result<GeneratorConfig, CliError> {
    let config = match preset(source) {
        Some(c) => c,
        None => {
            let path = Path::new(source);
            if !path.is_file() {
                return Err(CliError::Config(format!("{source:?} is neither a preset name nor a config file")));
            }
            let bytes = read_input(path, inputs)?;
            GeneratorConfig::from_json(&bytes[..]).map_err(|e| CliError::Config(format!("{source}: {e}")))?
        }
    };
    config.validate().map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| format!("  {e}")).collect();
        CliError::Config(format!("invalid generator config:\n{}", lines.join("\n")))
    })?;
    Ok(config)
}

pub fn synth(cli: &Cli, args: &SynthArgs) -> Result<(), CliError> {
    let mut inputs = Vec::new();
    let config = load_config(&args.config, &mut inputs)?;
    let dataset = pipeline::synthesize(&config, cli.seed)?;
    let mut out = OutDir::create(&cli.out)?;
    let report = write_synth(&mut out, &dataset, cli.format)?;
    print!("{report}");
    out.finish("synth", json_digest(&dataset.config), cli.seed, inputs)
}

fn calibration_csv(report: &CalibrationReport) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "achieved", "target", "tolerance", "minimum", "pass"]).map_err(env)?;
    for r in &report.rows {
        let (target, tolerance, minimum) = match r.check {
            Check::Within { target, tolerance } => (target.to_string(), tolerance.to_string(), String::new()),
            Check::AtLeast { minimum } => (String::new(), String::new(), minimum.to_string()),
            Check::Info => Default::default(),
        };
        let pass = r.pass().map(|p| p.to_string()).unwrap_or_default();
        w.write_record([r.metric.clone(), r.achieved.to_string(), target, tolerance, minimum, pass])
            .map_err(env)?;
    }
    w.into_inner().map_err(env)
}

fn write_synth(out: &mut OutDir, dataset: &SynthDataset, format: Format) -> Result<CalibrationReport, CliError> {
    let mut buf = Vec::new();
    write_events(&mut buf, &dataset.events).map_err(env)?;
    out.write("events.jsonl", &buf)?;
    let mut buf = Vec::new();
    write_contents(&mut buf, &dataset.contents).map_err(env)?;
    out.write("contents.csv", &buf)?;
    out.write_json("config.json", &dataset.config)?;
    let report = calibration_report(dataset);
    match format {
        Format::Json => out.write_json("calibration.json", &report)?,
        Format::Csv => out.write("calibration.csv", &calibration_csv(&report)?)?,
    };
    Ok(report)
}

fn parse_mau(pairs: &[String]) -> Result<BTreeMap<Country, u64>, CliError> {
    pairs
        .iter()
        .map(|s| {
            let bad = || CliError::Config(format!("--mau expects COUNTRY=N, got {s:?}"));
            let (c, n) = s.split_once('=').ok_or_else(bad)?;
            Ok((c.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?))
        })
        .collect()
}

#[derive(Serialize)]
struct MetricsDoc {
    #[serde(flatten)]
    decomposition: NoiseDecomposition,
    inaccuracy: f64,
}

#[derive(Serialize)]
struct ClippingDoc<'a> {
    quantile: f64,
    threshold: u64,
    items: usize,
    excluded: Vec<(&'a str, u64)>,
}

#[derive(Serialize)]
struct TestsDoc<'a> {
    welch: &'a [crate::stats::PairComparison],
    normality: &'a [pipeline::NormalityRow],
    ks: &'a [pipeline::KsRow],
}

#[derive(Serialize)]
struct AnalyzeConfig {
    window_start: i64,
    window_end: i64,
    quantile: f64,
    alpha_strong: f64,
    alpha_weak: f64,
}

fn metrics_csv(doc: &MetricsDoc) -> Result<Vec<u8>, CliError> {
    let d = &doc.decomposition;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "accurate", "false_noise", "quasi_noise", "soft_noise", "hard_noise", "inaccuracy"])
        .map_err(env)?;
    w.write_record(
        [d.n as f64, d.accurate, d.false_noise, d.quasi_noise, d.soft_noise, d.hard_noise, doc.inaccuracy]
            .iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { d.n.to_string() } else { v.to_string() }),
    )
    .map_err(env)?;
    w.into_inner().map_err(env)
}

fn write_analysis(
    out: &mut OutDir,
    a: &Analysis,
    opts: &AnalyzeOptions,
    events: &[ReportEvent],
    mau: &BTreeMap<Country, u64>,
    format: Format,
) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write_features(&mut buf, a.features.values()).map_err(env)?;
    out.write("features.csv", &buf)?;

    out.write_json(
        "clipping.json",
        &ClippingDoc {
            quantile: opts.quantile,
            threshold: a.clip.threshold,
            items: a.clip.kept.len() + a.clip.excluded.len(),
            excluded: a.clip.excluded.iter().map(|v| (v.content_id.as_str(), v.total)).collect(),
        },
    )?;

    let doc = MetricsDoc { decomposition: a.decomposition, inaccuracy: a.decomposition.inaccuracy() };
    match format {
        Format::Json => out.write_json("metrics.json", &doc)?,
        Format::Csv => out.write("metrics.csv", &metrics_csv(&doc)?)?,
    };

    let mut buf = Vec::new();
    a.distribution.write_csv(&mut buf).map_err(env)?;
    out.write("distribution.csv", &buf)?;
    out.write("partial_order.dot", a.order.to_dot().as_bytes())?;
    let mut buf = Vec::new();
    a.order.write_csv(&mut buf).map_err(env)?;
    out.write("partial_order.csv", &buf)?;
    out.write_json("tests.json", &TestsDoc { welch: &a.order.comparisons, normality: &a.normality, ks: &a.ks })?;

    if !mau.is_empty() {
        let rates = reporting_rate(events, mau).map_err(data)?;
        out.write_json("reporting_rates.json", &rates)?;
    }

    let d = &a.decomposition;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "clipped {} of {} items at q={} (threshold {})",
        a.clip.excluded.len(),
        a.clip.kept.len() + a.clip.excluded.len(),
        opts.quantile,
        a.clip.threshold
    );
    let _ = writeln!(
        s,
        "n={} inaccuracy={:.4} false={:.4} quasi={:.4} soft={:.4} hard={:.4}",
        d.n,
        d.inaccuracy(),
        d.false_noise,
        d.quasi_noise,
        d.soft_noise,
        d.hard_noise
    );
    for e in &a.order.edges {
        let _ = writeln!(s, "{} > {} ({}, p={:.3e})", e.greater, e.lesser, e.strength.as_str(), e.p_value);
    }
    Ok(s)
}

fn analyze_config(a: &Analysis, opts: &AnalyzeOptions) -> String {
    json_digest(&AnalyzeConfig {
        window_start: a.window.start,
        window_end: a.window.end,
        quantile: opts.quantile,
        alpha_strong: opts.alpha_strong,
        alpha_weak: opts.alpha_weak,
    })
}

pub fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<(), CliError> {
    if !(args.quantile > 0.0 && args.quantile <= 1.0) {
        return Err(CliError::Config(format!("--quantile {} is outside (0, 1]", args.quantile)));
    }
    if args.window_days == 0 {
        return Err(CliError::Config("--window-days must be at least 1".into()));
    }
    let mau = parse_mau(&args.mau)?;
    let mut inputs = Vec::new();
    let events = parse_events(&read_input(&args.events, &mut inputs)?[..])
        .map_err(|e| CliError::Data(format!("{}: {e}", args.events.display())))?;
    let contents = read_contents(&read_input(&args.contents, &mut inputs)?[..])
        .map_err(|e| CliError::Data(format!("{}: {e}", args.contents.display())))?;
    let opts = AnalyzeOptions {
        window_days: args.window_days,
        quantile: args.quantile,
        window_start: args.window_start,
        ..AnalyzeOptions::default()
    };
    let analysis = pipeline::analyze(&events, &contents, &opts)?;
    let mut out = OutDir::create(&cli.out)?;
    let summary = write_analysis(&mut out, &analysis, &opts, &events, &mau, cli.format)?;
    print!("{summary}");
    out.finish("analyze", analyze_config(&analysis, &opts), cli.seed, inputs)
}

#[derive(Serialize)]
struct TrainEvalConfig {
    test_fraction: f64,
    hyperparams: Hyperparams,
}

fn eval_csv(te: &TrainEval) -> Result<Vec<u8>, CliError> {
    let r = &te.report;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["class", "f1", "baseline_f1"]).map_err(env)?;
    for (class, f1) in &r.f1 {
        let base = r.baseline.as_ref().map(|b| b.f1[class].to_string()).unwrap_or_default();
        w.write_record([class.as_str().to_string(), f1.to_string(), base]).map_err(env)?;
    }
    let base = r.baseline.as_ref().map(|b| b.macro_f1.to_string()).unwrap_or_default();
    w.write_record(["macro".to_string(), r.macro_f1.to_string(), base]).map_err(env)?;
    w.into_inner().map_err(env)
}

fn write_train_eval(out: &mut OutDir, te: &TrainEval, format: Format) -> Result<String, CliError> {
    let mut buf = Vec::new();
    te.model.to_json(&mut buf).map_err(env)?;
    buf.push(b'\n');
    out.write("model.json", &buf)?;
    match format {
        Format::Json => out.write_json("eval.json", &te.report)?,
        Format::Csv => out.write("eval.csv", &eval_csv(te)?)?,
    };
    for c in &te.report.pr_curves {
        let mut buf = Vec::new();
        c.write_csv(&mut buf).map_err(env)?;
        out.write(&format!("pr_{}_{}.csv", c.class, c.slice), &buf)?;
    }

    let r = &te.report;
    let mut s = String::new();
    let _ = writeln!(s, "train {} test {} accuracy {:.4}", te.n_train, r.n_test, r.accuracy);
    for (class, f1) in &r.f1 {
        let _ = writeln!(s, "F1 {class}/not-{class}: {f1:.4}");
    }
    let base = r.baseline.as_ref().map_or(f64::NAN, |b| b.macro_f1);
    let _ = writeln!(s, "macro F1 {:.4} (majority baseline {:.4})", r.macro_f1, base);
    let top: Vec<&str> = r.ranked_features().into_iter().take(4).collect();
    let _ = writeln!(s, "top features: {}", top.join(", "));
    let _ = writeln!(s, "model digest {}", te.model.digest());
    Ok(s)
}

pub fn train_eval(cli: &Cli, args: &TrainEvalArgs) -> Result<(), CliError> {
    let opts = TrainEvalOptions {
        test_fraction: args.test_fraction,
        hyperparams: Hyperparams {
            n_trees: args.trees,
            max_depth: args.depth,
            learning_rate: args.learning_rate,
            min_leaf: args.min_leaf,
        },
    };
    if !(opts.test_fraction > 0.0 && opts.test_fraction < 1.0) {
        return Err(CliError::Config(format!("--test-fraction {} is outside (0, 1)", opts.test_fraction)));
    }
    opts.hyperparams.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut inputs = Vec::new();
    let features = read_features(&read_input(&args.features, &mut inputs)?[..], args.window_days)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.features.display())))?;
    let contents = read_contents(&read_input(&args.contents, &mut inputs)?[..])
        .map_err(|e| CliError::Data(format!("{}: {e}", args.contents.display())))?;
    let te = pipeline::train_eval(&features, &contents, &opts, cli.seed)?;
    let mut out = OutDir::create(&cli.out)?;
    let summary = write_train_eval(&mut out, &te, cli.format)?;
    print!("{summary}");
    let cfg = TrainEvalConfig { test_fraction: opts.test_fraction, hyperparams: opts.hyperparams };
    out.finish("train-eval", json_digest(&cfg), cli.seed, inputs)
}

fn format_values(values: &[f64]) -> String {
    let fmt = |v: f64| if v.abs() < 1e-3 && v != 0.0 { format!("{v:.2e}") } else { format!("{v:.4}") };
    match values {
        [v] => fmt(*v),
        _ => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            format!("{} .. {}", fmt(lo), fmt(hi))
        }
    }
}

pub fn render_table(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<26} {:<16} {:>7}  {:<4}  values", "check", "target", "passed", "");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<26} {:<16} {:>3}/{:<3}  {:<4}  {}",
            r.check,
            r.target,
            r.passed,
            r.values.len(),
            if r.pass() { "PASS" } else { "FAIL" },
            format_values(&r.values)
        );
    }
    s
}

fn table_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "target", "passed", "runs", "required", "pass", "values"]).map_err(env)?;
    for r in rows {
        let values: Vec<String> = r.values.iter().map(|v| v.to_string()).collect();
        w.write_record([
            r.check.to_string(),
            r.target.to_string(),
            r.passed.to_string(),
            r.values.len().to_string(),
            r.required.to_string(),
            r.pass().to_string(),
            values.join(" "),
        ])
        .map_err(env)?;
    }
    w.into_inner().map_err(env)
}

pub fn reproduce(cli: &Cli, args: &ReproduceArgs) -> Result<(), CliError> {
    let mut out = OutDir::create(&cli.out)?;
    if args.seeds == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..args.seeds).map(|i| cli.seed.wrapping_add(i)).collect();
    let first = pipeline::run(seeds[0])?;
    let mut outcomes: Vec<Vec<Outcome>> = vec![check_run(&first)];
    let rest: Result<Vec<Vec<Outcome>>, CliError> = seeds[1..]
        .par_iter()
        .map(|&s| Ok(check_run(&pipeline::run(s)?)))
        .collect();
    outcomes.extend(rest?);

    let base = cli.out.as_path();
    let mut synth_out = OutDir::create(&base.join("synth"))?;
    write_synth(&mut synth_out, &first.dataset, cli.format)?;
    let synth_files = synth_out.written().to_vec();
    synth_out.finish("reproduce synth", json_digest(&first.dataset.config), first.seed, Vec::new())?;

    let opts = AnalyzeOptions::default();
    let mut analyze_out = OutDir::create(&base.join("analyze"))?;
    write_analysis(&mut analyze_out, &first.analysis, &opts, &first.dataset.events, &BTreeMap::new(), cli.format)?;
    let features_file = analyze_out.written().iter().find(|f| f.path == "features.csv").cloned();
    analyze_out.finish(
        "reproduce analyze",
        analyze_config(&first.analysis, &opts),
        first.seed,
        synth_files
            .iter()
            .filter(|f| f.path == "events.jsonl" || f.path == "contents.csv")
            .map(|f| FileDigest { path: format!("../synth/{}", f.path), sha256: f.sha256.clone() })
            .collect(),
    )?;

    let mut train_out = OutDir::create(&base.join("train-eval"))?;
    write_train_eval(&mut train_out, &first.train_eval, cli.format)?;
    let te_opts = TrainEvalOptions::default();
    let mut te_inputs: Vec<FileDigest> = features_file
        .into_iter()
        .map(|f| FileDigest { path: format!("../analyze/{}", f.path), sha256: f.sha256 })
        .collect();
    te_inputs.extend(
        synth_files
            .iter()
            .filter(|f| f.path == "contents.csv")
            .map(|f| FileDigest { path: format!("../synth/{}", f.path), sha256: f.sha256.clone() }),
    );
    train_out.finish(
        "reproduce train-eval",
        json_digest(&TrainEvalConfig { test_fraction: te_opts.test_fraction, hyperparams: te_opts.hyperparams }),
        first.seed,
        te_inputs,
    )?;

    let rows = summarize(&outcomes);
    match cli.format {
        Format::Json => out.write_json("reproduce.json", &rows)?,
        Format::Csv => out.write("reproduce.csv", &table_csv(&rows)?)?,
    };
    print!("{}", render_table(&rows));
    out.finish("reproduce", json_digest(&seeds), cli.seed, Vec::new())?;

    let failed = rows.iter().filter(|r| !r.pass()).count();
    if failed > 0 {
        return Err(CliError::TargetsMissed(failed));
    }
    Ok(())
}
