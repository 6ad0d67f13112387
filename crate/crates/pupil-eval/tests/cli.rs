//! End-to-end checks of the `pupil-eval` binary: synthesize a suite,
//! evaluate it, benchmark it, sweep a parameter, convert annotations, and
//! verify output formats and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pupil-eval"))
}

fn fresh_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pupil_eval_cli_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn synthesize(dir: &Path, class: &str, n: usize, seed: u64) {
    run_ok(bin().args([
        "synth",
        "--class",
        class,
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ]));
}

#[test]
fn synth_eval_detect_roundtrip() {
    let dir = fresh_dir("roundtrip");
    synthesize(&dir, "clean", 8, 5);
    assert!(dir.join("gt.csv").exists());
    assert!(dir.join("00000.pgm").exists());

    // Full evaluation with reports.
    let out_dir = dir.join("report");
    let out = run_ok(bin().args([
        "eval",
        "--images",
        dir.to_str().unwrap(),
        "--gt",
        dir.join("gt.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("rate@5px"), "stdout: {stdout}");
    for file in ["rates.csv", "aggregate.csv", "curves.dat", "per_image.csv"] {
        assert!(out_dir.join(file).exists(), "{file} missing");
    }
    let rates = std::fs::read_to_string(out_dir.join("rates.csv")).unwrap();
    assert!(rates.starts_with("dataset,error_px,rate\n"));
    assert_eq!(rates.lines().count(), 1 + 16);

    // Single-image detection prints `x y stage valid`.
    let out = run_ok(bin().args(["detect", dir.join("00000.pgm").to_str().unwrap()]));
    let line = String::from_utf8_lossy(&out.stdout);
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields.len(), 4, "line: {line}");
    let x: f64 = fields[0].parse().unwrap();
    let y: f64 = fields[1].parse().unwrap();
    assert!(x.is_finite() && y.is_finite());
    assert!(["edge", "coarse", "none"].contains(&fields[2]));
    assert!(["true", "false"].contains(&fields[3]));

    // Detection against the label from gt.csv.
    let gt = std::fs::read_to_string(dir.join("gt.csv")).unwrap();
    let row = gt.lines().nth(1).unwrap();
    let mut cells = row.split(',');
    let _name = cells.next().unwrap();
    let tx: f64 = cells.next().unwrap().parse().unwrap();
    let ty: f64 = cells.next().unwrap().parse().unwrap();
    let err = ((x - tx).powi(2) + (y - ty).powi(2)).sqrt();
    assert!(err <= 5.0, "detect error {err:.2} px");
}

#[test]
fn detect_debug_writes_artifacts() {
    let dir = fresh_dir("debug");
    synthesize(&dir, "clean", 1, 9);
    let debug_dir = dir.join("stages");
    run_ok(bin().args([
        "detect",
        dir.join("00000.pgm").to_str().unwrap(),
        "--debug",
        debug_dir.to_str().unwrap(),
    ]));
    let count = std::fs::read_dir(&debug_dir).unwrap().count();
    assert!(count >= 6, "expected >= 6 artifacts, found {count}");
    assert!(debug_dir.join("normalized.pgm").exists());
    assert!(debug_dir.join("candidates.csv").exists());
}

#[test]
fn closed_eye_suite_reports_false_positives() {
    let dir = fresh_dir("closed");
    synthesize(&dir, "closed-eye", 6, 3);
    let gt = std::fs::read_to_string(dir.join("gt.csv")).unwrap();
    assert!(gt.lines().skip(1).all(|l| l.ends_with(",,")));
    // Mix in labeled frames so the dataset has a rate curve too.
    let clean = fresh_dir("closed_clean");
    synthesize(&clean, "clean", 4, 3);
    for entry in std::fs::read_dir(&clean).unwrap() {
        let entry = entry.unwrap();
        if entry.file_name().to_string_lossy().ends_with(".pgm") {
            let to = dir.join(format!("c_{}", entry.file_name().to_string_lossy()));
            std::fs::copy(entry.path(), to).unwrap();
        }
    }
    let mut merged = std::fs::read_to_string(dir.join("gt.csv")).unwrap();
    for line in std::fs::read_to_string(clean.join("gt.csv"))
        .unwrap()
        .lines()
        .skip(1)
    {
        merged.push_str(&format!("c_{line}\n"));
    }
    std::fs::write(dir.join("gt.csv"), merged).unwrap();

    let out = run_ok(bin().args([
        "eval",
        "--images",
        dir.to_str().unwrap(),
        "--gt",
        dir.join("gt.csv").to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("4 labeled image(s)"), "stdout: {stdout}");
    assert!(stdout.contains("unlabeled: 6 image(s)"), "stdout: {stdout}");
}

#[test]
fn bench_reports_order_statistics() {
    let dir = fresh_dir("bench");
    synthesize(&dir, "clean", 3, 7);
    let out = run_ok(bin().args([
        "bench",
        "--images",
        dir.to_str().unwrap(),
        "--reps",
        "2",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 frame(s) x 2 rep(s)"), "stdout: {stdout}");
    assert!(stdout.contains("p95"), "stdout: {stdout}");
}

#[test]
fn sweep_prints_one_line_per_value() {
    let dir = fresh_dir("sweep");
    synthesize(&dir, "clean", 4, 11);
    let out = run_ok(bin().args([
        "sweep",
        "--images",
        dir.to_str().unwrap(),
        "--gt",
        dir.join("gt.csv").to_str().unwrap(),
        "--param",
        "min_mean_line_dist",
        "--values",
        "1,3,6",
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("min_mean_line_dist="))
        .collect();
    assert_eq!(lines.len(), 3, "stdout: {stdout}");
}

#[test]
fn convert_gt_roundtrips_into_eval() {
    let dir = fresh_dir("convert");
    synthesize(&dir, "clean", 3, 13);
    // Rebuild the annotation in the whitespace-separated layout.
    let gt = std::fs::read_to_string(dir.join("gt.csv")).unwrap();
    let mut raw = String::new();
    for line in gt.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let stem = cells[0].trim_end_matches(".pgm");
        raw.push_str(&format!("{stem} {} {}\n", cells[1], cells[2]));
    }
    let raw_path = dir.join("labels.txt");
    std::fs::write(&raw_path, raw).unwrap();

    let converted = dir.join("converted.csv");
    run_ok(bin().args([
        "convert-gt",
        raw_path.to_str().unwrap(),
        "--out",
        converted.to_str().unwrap(),
    ]));
    let out = run_ok(bin().args([
        "eval",
        "--images",
        dir.to_str().unwrap(),
        "--gt",
        converted.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3 labeled image(s)"), "stdout: {stdout}");
}

#[test]
fn baseline_comparison_table() {
    let dir = fresh_dir("baselines");
    synthesize(&dir, "clean", 4, 17);
    let baselines = dir.join("baselines.csv");
    std::fs::write(
        &baselines,
        format!("dataset,algorithm,rate\n{},alpha,0.42\n", dir.file_name().unwrap().to_string_lossy()),
    )
    .unwrap();
    let out_dir = dir.join("report");
    run_ok(bin().args([
        "eval",
        "--images",
        dir.to_str().unwrap(),
        "--gt",
        dir.join("gt.csv").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--baselines",
        baselines.to_str().unwrap(),
    ]));
    let cmp = std::fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    assert!(cmp.starts_with("dataset,alpha,ours\n"));
    assert_eq!(cmp.lines().count(), 2);
}

#[test]
fn exit_codes() {
    // Usage errors exit 1.
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin()
        .args(["synth", "--class", "sideways", "--n", "1", "--out", "/tmp/x"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // Data errors exit 2.
    let dir = fresh_dir("exitcodes");
    synthesize(&dir, "clean", 1, 19);
    std::fs::write(dir.join("bad.csv"), "filename,x,y\na,b\n").unwrap();
    let out = bin()
        .args([
            "eval",
            "--images",
            dir.to_str().unwrap(),
            "--gt",
            dir.join("bad.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");

    let out = bin().args(["detect", "/no/such/file.pgm"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Help exits 0.
    let out = bin().args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn params_file_and_deterministic_eval() {
    let dir = fresh_dir("params");
    synthesize(&dir, "clean", 4, 23);
    let params = dir.join("params.conf");
    std::fs::write(&params, "# tuned\nradius_scale=4\nvalidity_threshold=12\n").unwrap();
    let run = || {
        let out = run_ok(bin().args([
            "eval",
            "--images",
            dir.to_str().unwrap(),
            "--gt",
            dir.join("gt.csv").to_str().unwrap(),
            "--params",
            params.to_str().unwrap(),
        ]));
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    assert_eq!(run(), run(), "evaluation must be deterministic");

    // Bad parameter file is a usage error.
    std::fs::write(&params, "no_such_knob=1\n").unwrap();
    let out = bin()
        .args([
            "eval",
            "--images",
            dir.to_str().unwrap(),
            "--gt",
            dir.join("gt.csv").to_str().unwrap(),
            "--params",
            params.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
