use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlab"))
        .current_dir(dir)
        .env_remove("WLAB_THREADS")
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn archives_are_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let base = ["sample", "--N", "40", "--samples", "6", "--seed", "11"];
    assert!(wlab(d, &[&base[..], &["--output", "a.csv", "--threads", "1"]].concat())
        .status
        .success());
    assert!(wlab(d, &[&base[..], &["--output", "b.csv", "--threads", "3"]].concat())
        .status
        .success());
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    let other = wlab(
        d,
        &[
            "sample",
            "--N",
            "40",
            "--samples",
            "6",
            "--seed",
            "12",
            "--output",
            "c.csv",
        ],
    );
    assert!(other.status.success());
    assert_ne!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("c.csv")).unwrap());
}

#[test]
fn manifest_records_hashes_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(wlab(
        d,
        &[
            "sample",
            "--N",
            "30",
            "--samples",
            "3",
            "--seed",
            "5",
            "--output",
            "a.csv"
        ]
    )
    .status
    .success());
    let m = json(&d.join("a.csv.manifest.json"));
    assert_eq!(m["seeds"]["base_seed"], 5);
    assert_eq!(m["seeds"]["streams"], 3);
    assert_eq!(m["config"]["N"], 30);
    assert_eq!(m["outputs"][0]["sha256"].as_str().unwrap().len(), 64);

    // replaying with a different output reproduces the same file
    let r = wlab(d, &["sample", "--manifest", "a.csv.manifest.json", "--output", "b.csv"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
    let m2 = json(&d.join("b.csv.manifest.json"));
    assert_eq!(m["outputs"][0]["sha256"], m2["outputs"][0]["sha256"]);
}

#[test]
fn vandermonde_writes_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = wlab(d, &["vandermonde", "--N", "50", "--samples", "4", "--eta", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&d.join("vandermonde.json"));
    assert_eq!(v["N"], 50);
    assert_eq!(v["eta"], 0.0);
    assert!(v["statistic"]["mean"].as_f64().unwrap().is_finite());
    assert!(v["semicircle_constants"]["combo"].is_number());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(wlab(d, &["--help"]).status.code(), Some(0));
    assert_eq!(wlab(d, &["--version"]).status.code(), Some(0));
    assert_eq!(wlab(d, &["sample", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(wlab(d, &["frobnicate"]).status.code(), Some(1));
    assert_eq!(wlab(d, &["sample", "--N", "0"]).status.code(), Some(1));
    assert_eq!(wlab(d, &["window", "--n", "10"]).status.code(), Some(1));
    assert_eq!(wlab(d, &["sample", "--samples", "many"]).status.code(), Some(1));
    // two eigenvalues 1e-14 apart: the Dyson drift cannot be resolved by
    // step halving, which is a numerical failure
    fs::write(d.join("tight.csv"), "3,1,x\n-1.0,0.0,1e-14\n").unwrap();
    let bad = wlab(d, &["evolve", "--archive", "tight.csv", "--t", "0.1", "--dt", "0.1"]);
    assert_eq!(bad.status.code(), Some(2));
    // nothing is written when validation fails
    assert!(!d.join("sample.json").exists() && !d.join("archive.csv").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("run.cfg"), "# small run\nN = 25\nsamples = 2\nseed = 4\n").unwrap();
    let out = wlab(d, &["sample", "--config", "run.cfg", "--samples", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = json(&d.join("archive.csv.manifest.json"));
    assert_eq!(m["config"]["N"], 25);
    assert_eq!(m["config"]["samples"], 3);
    assert_eq!(m["config"]["seed"], 4);
}

#[test]
fn malformed_inputs_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.cfg"), "N = 25\n\nwidth = 3\n").unwrap();
    let out = wlab(d, &["sample", "--config", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    fs::write(d.join("bad.csv"), "3,2,x\n-1.0,0.0,1.0\n-1.0,oops,1.0\n").unwrap();
    let out = wlab(d, &["semicircle", "--archive", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn report_merges_records() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("r.jsonl"),
        "{\"statistic\":\"a\",\"N\":10,\"samples\":2,\"value\":0.1,\"threshold\":0.2,\"pass\":true}\n\
         {\"statistic\":\"b\",\"N\":10,\"samples\":2,\"value\":0.3,\"threshold\":0.2,\"pass\":false}\n",
    )
    .unwrap();
    let out = wlab(d, &["report", "r.jsonl"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("PASS a") && text.contains("FAIL b") && text.contains("1 failing"));
    assert_eq!(fs::read_to_string(d.join("report.json")).unwrap().lines().count(), 2);
}

#[test]
fn evolution_at_time_zero_keeps_the_archive() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(wlab(d, &["sample", "--N", "20", "--samples", "2", "--output", "a.csv"])
        .status
        .success());
    let out = wlab(
        d,
        &[
            "evolve",
            "--archive",
            "a.csv",
            "--t",
            "0",
            "--output",
            "b.csv",
            "--label",
            "gue",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), fs::read(d.join("b.csv")).unwrap());
}
