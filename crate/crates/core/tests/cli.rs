use std::fs;
use std::path::{Path, PathBuf};

use reportsignal::cli::{run, CliError, RunManifest, MANIFEST};
use tempfile::TempDir;

fn cli(out: &Path, args: &[&str]) -> Result<(), CliError> {
    let mut argv = vec!["reportsignal".to_string(), "--out".into(), out.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(argv)
}

fn code(r: Result<(), CliError>) -> u8 {
    r.map_or_else(|e| e.exit_code(), |_| 0)
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_slice(&fs::read(dir.join(MANIFEST)).unwrap()).unwrap()
}

fn synth(tmp: &TempDir, name: &str, seed: &str) -> PathBuf {
    let out = tmp.path().join(name);
    cli(&out, &["--seed", seed, "synth", "--config", "ig-us"]).unwrap();
    out
}

fn analyze(tmp: &TempDir, synth_dir: &Path, extra: &[&str]) -> PathBuf {
    let out = tmp.path().join("analyze");
    let events = synth_dir.join("events.jsonl").display().to_string();
    let contents = synth_dir.join("contents.csv").display().to_string();
    let mut args = vec!["analyze", "--events", &events, "--contents", &contents];
    args.extend_from_slice(extra);
    cli(&out, &args).unwrap();
    out
}

#[test]
fn synth_writes_artifacts_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = synth(&tmp, "s", "3");
    for f in ["events.jsonl", "contents.csv", "config.json", "calibration.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let m = manifest(&out);
    assert_eq!(m.command, "synth");
    assert_eq!(m.seed, 3);
    assert_eq!(m.outputs.len(), 4);
    let leftovers: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn same_seed_same_digests() {
    let tmp = TempDir::new().unwrap();
    let a = manifest(&synth(&tmp, "a", "11"));
    let b = manifest(&synth(&tmp, "b", "11"));
    let c = manifest(&synth(&tmp, "c", "12"));
    assert_eq!(a.outputs, b.outputs);
    assert_ne!(a.outputs, c.outputs);
}

#[test]
fn bad_config_exits_2_without_output() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("never");
    assert_eq!(code(cli(&out, &["synth", "--config", "no-such-preset"])), 2);

    let cfg = tmp.path().join("bad.json");
    let mut value: serde_json::Value =
        serde_json::from_slice(&fs::read(synth(&tmp, "s", "0").join("config.json")).unwrap()).unwrap();
    value["n_content"] = 0.into();
    fs::write(&cfg, serde_json::to_vec(&value).unwrap()).unwrap();
    assert_eq!(code(cli(&out, &["synth", "--config", cfg.to_str().unwrap()])), 2);
    assert!(!out.exists());

    assert_eq!(code(cli(&out, &["synth", "--bogus-flag"])), 2);
}

#[test]
fn config_file_round_trips() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "5");
    let cfg = s.join("config.json");
    let again = tmp.path().join("again");
    cli(&again, &["--seed", "5", "synth", "--config", cfg.to_str().unwrap()]).unwrap();
    assert_eq!(fs::read(s.join("events.jsonl")).unwrap(), fs::read(again.join("events.jsonl")).unwrap());
}

#[test]
fn analyze_quantile_one_keeps_everything() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "0");
    let out = analyze(&tmp, &s, &["--quantile", "1.0", "--mau", "US=1000000"]);
    let clip: serde_json::Value = serde_json::from_slice(&fs::read(out.join("clipping.json")).unwrap()).unwrap();
    assert_eq!(clip["excluded"].as_array().unwrap().len(), 0);
    for f in ["features.csv", "metrics.json", "distribution.csv", "partial_order.dot", "tests.json", "reporting_rates.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert_eq!(manifest(&out).inputs.len(), 2);
}

#[test]
fn analyze_rejects_bad_arguments() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "0");
    let events = s.join("events.jsonl").display().to_string();
    let contents = s.join("contents.csv").display().to_string();
    let out = tmp.path().join("a");
    let base = ["analyze", "--events", &events, "--contents", &contents];
    let with = |extra: &[&str]| {
        let mut v = base.to_vec();
        v.extend_from_slice(extra);
        code(cli(&out, &v))
    };
    assert_eq!(with(&["--quantile", "0"]), 2);
    assert_eq!(with(&["--window-days", "0"]), 2);
    assert_eq!(with(&["--mau", "US"]), 2);
    let missing = tmp.path().join("missing.jsonl").display().to_string();
    assert_eq!(code(cli(&out, &["analyze", "--events", &missing, "--contents", &contents])), 1);
}

#[test]
fn unlabelled_records_exit_3() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "0");
    let csv = fs::read_to_string(s.join("contents.csv")).unwrap();
    let mut lines: Vec<String> = csv.lines().map(str::to_string).collect();
    let idx = lines.iter().position(|l| l.split(',').nth(4) == Some("")).unwrap();
    let mut cols: Vec<&str> = lines[idx].split(',').collect();
    cols[3] = "";
    lines[idx] = cols.join(",");
    let broken = tmp.path().join("contents.csv");
    fs::write(&broken, lines.join("\n") + "\n").unwrap();
    let events = s.join("events.jsonl").display().to_string();
    let r = cli(&tmp.path().join("a"), &["analyze", "--events", &events, "--contents", broken.to_str().unwrap()]);
    assert_eq!(code(r), 3);

    let garbage = tmp.path().join("events.jsonl");
    fs::write(&garbage, "{not json}\n").unwrap();
    let r = cli(
        &tmp.path().join("b"),
        &["analyze", "--events", garbage.to_str().unwrap(), "--contents", s.join("contents.csv").to_str().unwrap()],
    );
    assert_eq!(code(r), 3);
}

#[test]
fn train_eval_writes_curves_and_is_deterministic() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "1");
    let a = analyze(&tmp, &s, &[]);
    let features = a.join("features.csv").display().to_string();
    let contents = s.join("contents.csv").display().to_string();
    let args = ["--seed", "1", "--format", "csv", "train-eval", "--features", &features, "--contents", &contents, "--trees", "40"];
    let t1 = tmp.path().join("t1");
    let t2 = tmp.path().join("t2");
    cli(&t1, &args).unwrap();
    cli(&t2, &args).unwrap();
    for f in ["model.json", "eval.csv", "pr_C_all.csv", "pr_C_US.csv", "pr_M_all.csv"] {
        assert!(t1.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read(t1.join("model.json")).unwrap(), fs::read(t2.join("model.json")).unwrap());
    assert_eq!(manifest(&t1).outputs, manifest(&t2).outputs);

    assert_eq!(code(cli(&t1, &["train-eval", "--features", &features, "--contents", &contents, "--depth", "0"])), 2);
    assert_eq!(code(cli(&t1, &["train-eval", "--features", &features, "--contents", &contents, "--test-fraction", "1.5"])), 2);
}

#[test]
fn single_class_training_set_exits_4() {
    let tmp = TempDir::new().unwrap();
    let s = synth(&tmp, "s", "2");
    let a = analyze(&tmp, &s, &[]);
    let csv = fs::read_to_string(s.join("contents.csv")).unwrap();
    let mut out = String::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 {
            out.push_str(line);
        } else {
            let mut cols: Vec<&str> = line.split(',').collect();
            cols[3] = "C1";
            cols[4] = "";
            out.push_str(&cols.join(","));
        }
        out.push('\n');
    }
    let contents = tmp.path().join("one.csv");
    fs::write(&contents, out).unwrap();
    let features = a.join("features.csv").display().to_string();
    let r = cli(&tmp.path().join("t"), &["train-eval", "--features", &features, "--contents", contents.to_str().unwrap()]);
    assert_eq!(code(r), 4);
}

#[test]
fn reproduce_writes_stage_directories() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("r");
    let r = cli(&out, &["reproduce"]);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("reproduce.json")).unwrap()).unwrap();
    let rows = report.as_array().unwrap();
    assert!(rows.len() >= 8);
    let failed = rows.iter().filter(|r| r["passed"].as_u64() < r["required"].as_u64()).count();
    assert_eq!(code(r), if failed == 0 { 0 } else { 5 });
    for d in ["synth", "analyze", "train-eval"] {
        assert!(out.join(d).join(MANIFEST).is_file(), "{d}");
    }
    assert!(out.join(MANIFEST).is_file());
}

#[test]
fn unwritable_output_exits_1() {
    let tmp = TempDir::new().unwrap();
    let file = tmp.path().join("plain");
    fs::write(&file, b"x").unwrap();
    assert_eq!(code(cli(&file.join("sub"), &["reproduce"])), 1);
    assert_eq!(code(cli(&file.join("sub"), &["synth"])), 1);
}

#[test]
fn zero_seeds_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(cli(&tmp.path().join("r"), &["reproduce", "--seeds", "0"])), 2);
}
