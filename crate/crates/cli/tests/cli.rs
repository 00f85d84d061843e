use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use chrono::NaiveDate;
use tempfile::TempDir;
use trajmode::ingest::{read_archive, write_archive};
use trajmode::trajfeat::{column_names, FeatureMatrix, N_FEATURES};
use trajmode::{GpsPoint, TrajectorySample};

fn trajmode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajmode"))
        .args(args)
        .env_remove("TRAJMODE_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = trajmode(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = trajmode(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_user(root: &Path, user: &str, plt: &str, labels: &str) {
    let dir = root.join("Data").join(user).join("Trajectory");
    fs::create_dir_all(&dir).unwrap();
    fs::write(dir.join("20081023055305.plt"), plt).unwrap();
    fs::write(root.join("Data").join(user).join("labels.txt"), labels).unwrap();
}

fn plt_with(lines: &[String]) -> String {
    let mut s = String::from(
        "Geolife trajectory\nWGS 84\nAltitude is in Feet\nReserved 3\n0,2,255,My Track,0,0,2,8421376\n0\n",
    );
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    s
}

fn walk_lines(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            format!(
                "39.9,{:.6},0,492,39744.2,2008-10-23,05:53:{:02}",
                116.3 + i as f64 * 1e-5,
                i
            )
        })
        .collect()
}

const LABELS: &str = "Start Time\tEnd Time\tTransportation Mode\n2008/10/23 05:53:00\t2008/10/23 05:54:00\twalk\n";

#[test]
fn ingest_of_empty_directory_fails_with_stage_name() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("a.jsonl");
    let err = fails(&["ingest", "--data-dir", p(dir.path()), "--out", p(&out)]);
    assert!(err.contains("ingest"), "{err}");
}

#[test]
fn ingest_reads_data_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    write_user(dir.path(), "000", &plt_with(&walk_lines(12)), LABELS);
    let out = dir.path().join("a.jsonl");
    let run = Command::new(env!("CARGO_BIN_EXE_trajmode"))
        .args(["ingest", "--out", p(&out)])
        .env("TRAJMODE_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stdout).contains("walk"));
}

#[test]
fn strict_aborts_and_lenient_skips_bad_records() {
    let dir = TempDir::new().unwrap();
    let mut lines = walk_lines(12);
    lines.insert(5, "not,a,record".to_string());
    write_user(dir.path(), "007", &plt_with(&lines), LABELS);
    let out = dir.path().join("a.jsonl");

    let err = fails(&["ingest", "--data-dir", p(dir.path()), "--out", p(&out), "--strict"]);
    assert!(err.contains("20081023055305.plt"), "{err}");

    let stdout = ok(&["ingest", "--data-dir", p(dir.path()), "--out", p(&out)]);
    assert!(stdout.contains("1 skipped"), "{stdout}");
    let samples = read_archive(fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!(samples.len(), 1);
    assert_eq!(samples[0].len(), 12);
}

#[test]
fn synthetic_plt_tree_round_trips_through_ingest() {
    let dir = TempDir::new().unwrap();
    let synth = dir.path().join("synth.jsonl");
    let geo = dir.path().join("geo");
    let back = dir.path().join("back.jsonl");
    ok(&["synth", "--seed", "11", "--out", p(&synth), "--emit-plt", p(&geo)]);
    ok(&["ingest", "--data-dir", p(&geo), "--out", p(&back)]);
    let a = read_archive(fs::read(&synth).unwrap().as_slice()).unwrap();
    let b = read_archive(fs::read(&back).unwrap().as_slice()).unwrap();
    assert_eq!(a, b);
}

fn constant_march() -> TrajectorySample {
    let user: Arc<str> = Arc::from("042");
    let t0 = NaiveDate::from_ymd_opt(2010, 3, 1)
        .unwrap()
        .and_hms_opt(9, 0, 0)
        .unwrap();
    // Dyadic longitude steps keep every segment length bit-identical.
    let points = (0..20)
        .map(|i| {
            GpsPoint::new(
                user.clone(),
                0.0,
                i as f64 / 4096.0,
                0.0,
                t0 + chrono::Duration::seconds(i),
            )
            .unwrap()
        })
        .collect();
    TrajectorySample::new("bike", points).unwrap()
}

#[test]
fn featurize_header_rows_and_constant_motion() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("a.jsonl");
    let csv = dir.path().join("f.csv");
    let mut samples = vec![constant_march()];
    ok(&["synth", "--seed", "5", "--out", p(&archive)]);
    samples.extend(
        read_archive(fs::read(&archive).unwrap().as_slice())
            .unwrap()
            .into_iter()
            .take(9),
    );
    let mut buf = Vec::new();
    write_archive(&samples, &mut buf).unwrap();
    fs::write(&archive, buf).unwrap();

    ok(&["featurize", "--archive", p(&archive), "--out", p(&csv)]);
    let text = fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    let mut expected = vec!["user_id".to_string(), "mode".to_string()];
    expected.extend(column_names());
    assert_eq!(header, expected.join(","));
    assert!(header
        .starts_with("user_id,mode,distance_min,distance_max,distance_mean,distance_median,distance_std,distance_p10"));
    assert!(header.ends_with("bearing_rate_rate_p75,bearing_rate_rate_p90"));
    assert_eq!(text.lines().count(), 1 + samples.len());

    let m = FeatureMatrix::read_csv(text.as_bytes()).unwrap();
    assert_eq!(m.rows[0].values.len(), N_FEATURES);
    let block = &m.rows[0].values[20..40];
    assert!(block.iter().all(|&v| v == 0.0), "{block:?}");
    assert_eq!(m.rows[0].get("bearing", "mean"), Some(90.0));
}

#[test]
fn evaluate_rejects_unknown_subset_and_missing_seed() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("a.jsonl");
    let csv = dir.path().join("f.csv");
    let report = dir.path().join("r.json");
    ok(&["synth", "--seed", "1", "--out", p(&archive)]);
    ok(&["featurize", "--archive", p(&archive), "--out", p(&csv)]);

    let err = fails(&["evaluate", "--features", p(&csv), "--out", p(&report)]);
    assert!(err.contains("--seed"), "{err}");
    let err = fails(&[
        "evaluate",
        "--features",
        p(&csv),
        "--out",
        p(&report),
        "--seed",
        "1",
        "--subset",
        "nonesuch",
    ]);
    assert!(err.contains("nonesuch") && err.contains("zheng"), "{err}");
    let err = fails(&["synth", "--out", p(&archive)]);
    assert!(err.contains("--seed"), "{err}");
}

#[test]
fn denoise_writes_sidecar() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("a.jsonl");
    let csv = dir.path().join("f.csv");
    let clean = dir.path().join("c.csv");
    let side = dir.path().join("removed.json");
    ok(&["synth", "--seed", "2", "--corrupt", "0.1", "--out", p(&archive)]);
    ok(&["featurize", "--archive", p(&archive), "--out", p(&csv)]);
    ok(&[
        "denoise",
        "--features",
        p(&csv),
        "--out",
        p(&clean),
        "--report",
        p(&side),
    ]);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&side).unwrap()).unwrap();
    for key in ["removed", "threshold", "median", "median_difference"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let removed = report["removed"].as_array().unwrap().len();
    let rows = fs::read_to_string(&clean).unwrap().lines().count() - 1;
    assert_eq!(rows + removed, 800);
}

#[test]
fn train_then_predict() {
    let dir = TempDir::new().unwrap();
    let archive = dir.path().join("a.jsonl");
    let csv = dir.path().join("f.csv");
    let model = dir.path().join("m.json");
    let pred = dir.path().join("p.csv");
    ok(&["synth", "--seed", "4", "--out", p(&archive)]);
    ok(&["featurize", "--archive", p(&archive), "--out", p(&csv)]);
    ok(&[
        "train",
        "--features",
        p(&csv),
        "--classifier",
        "dt",
        "--seed",
        "4",
        "--out",
        p(&model),
    ]);
    ok(&[
        "predict",
        "--model",
        p(&model),
        "--features",
        p(&csv),
        "--out",
        p(&pred),
    ]);
    let text = fs::read_to_string(&pred).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 800);
    let right = rows
        .iter()
        .filter(|r| {
            let f: Vec<&str> = r.split(',').collect();
            f[1] == f[2]
        })
        .count();
    assert!(right >= 760, "{right}");
}
