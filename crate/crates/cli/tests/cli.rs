mod common;

use std::path::Path;

use biphoton::io::csv::{load_map_csv, save_map_csv};
use biphoton::io::frames::read_frames;
use common::*;

fn with_coarse<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&COARSE);
    v
}

#[test]
fn missing_config_fails_with_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = biphoton(&["model", "--config", "/nonexistent/cfg.json", "--out-dir", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cannot read config"), "{err}");
}

#[test]
fn unknown_config_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"crystal": {"foo": 1}}"#).unwrap();
    let out = biphoton(&["schmidt", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));
}

#[test]
fn zero_frames_gives_valid_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    biphoton_ok(&with_coarse(&["simulate", "--frames", "0", "--out-dir", s(dir.path())]));
    let r = read_frames(&dir.path().join("frames.bpfr")).unwrap();
    assert_eq!(r.header.n_frames, 0);
    assert_eq!(r.count(), 0);
}

#[test]
fn reruns_and_thread_counts_give_identical_bytes() {
    let base = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let d = base.path().join(name);
        biphoton_ok(&with_coarse(&[
            "simulate", "--frames", "50000", "--seed", "4", "--threads", threads, "--out-dir", s(&d),
        ]));
        manifest_hash(&d, "frames.bpfr")
    };
    let a = run("a", "1");
    assert_eq!(a, run("b", "1"));
    assert_eq!(a, run("c", "8"));
    let d = base.path().join("d");
    biphoton_ok(&with_coarse(&["simulate", "--frames", "50000", "--seed", "5", "--out-dir", s(&d)]));
    assert_ne!(a, manifest_hash(&d, "frames.bpfr"));
}

#[test]
fn simulate_prints_mean_photons() {
    let dir = tempfile::tempdir().unwrap();
    let out = biphoton_ok(&with_coarse(&["simulate", "--frames", "20000", "--out-dir", s(dir.path())]));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mean photons/frame"));
    let rep = json(&dir.path().join("simulate_report.json"));
    let m = rep["mean_photons_per_frame"]["value"].as_f64().unwrap();
    let e = rep["mean_photons_per_frame"]["error"].as_f64().unwrap();
    assert!((m - 0.12).abs() < 5.0 * e, "{m} +- {e}");
}

#[test]
fn independent_fixture_is_flat_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    biphoton_ok(&with_coarse(&["simulate", "--frames", "100000", "--independent-arms", "--out-dir", s(d)]));
    let frames = d.join("frames.bpfr");
    let out = biphoton(&with_coarse(&["analyze", "--frames", s(&frames), "--out-dir", s(d)]));
    let rep = json(&d.join("analysis_report.json"));
    let eta = &rep["efficiency"];
    assert!(eta["value"].as_f64().unwrap().abs() < 5.0 * eta["error"].as_f64().unwrap());
    let g2 = &rep["g2_peak"];
    assert!((g2["value"].as_f64().unwrap() - 1.0).abs() < 5.0 * g2["error"].as_f64().unwrap());
    // a flat g² has no peak to fit; the report records that and the exit code says so
    let errors = rep["errors"].as_array().unwrap();
    assert_eq!(out.status.success(), errors.is_empty());
}

#[test]
fn output_may_not_overwrite_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    biphoton_ok(&with_coarse(&["simulate", "--frames", "10", "--out-dir", s(d)]));
    let frames = d.join("frames.bpfr");
    let out = biphoton(&with_coarse(&["simulate", "--frames", "10", "--out-dir", s(d), "--config", s(&frames)]));
    assert!(!out.status.success());
    let before = std::fs::read(&frames).unwrap();
    let out = biphoton(&with_coarse(&["analyze", "--frames", s(&frames), "--out-dir", s(d)]));
    assert!(out.status.code().is_some());
    assert_eq!(std::fs::read(&frames).unwrap(), before);
}

fn copy_panels(from: &Path, to: &Path, f: impl Fn(&mut biphoton::Map2)) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let p = e.unwrap().path();
        let name = p.file_name().unwrap().to_str().unwrap().to_string();
        if name.starts_with("panel_") && name.ends_with(".csv") {
            let mut m = load_map_csv(&p).unwrap();
            f(&mut m);
            save_map_csv(&m, &to.join(name)).unwrap();
        }
    }
}

#[test]
fn report_identical_and_shuffled_maps() {
    let dir = tempfile::tempdir().unwrap();
    let theory = dir.path().join("theory");
    biphoton_ok(&with_coarse(&["model", "--no-grid", "--out-dir", s(&theory)]));

    let same = dir.path().join("same");
    copy_panels(&theory, &same, |_| {});
    biphoton_ok(&["report", "--theory", s(&theory), "--experiment", s(&same), "--out-dir", s(&dir.path().join("r1"))]);
    let rep = json(&dir.path().join("r1/comparison_report.json"));
    for p in rep["panels"].as_array().unwrap() {
        if let Some(c) = p["correlation"].as_f64() {
            assert!((c - 1.0).abs() < 1e-12, "{p}");
        }
    }

    // reverse the cell order: structure no longer lines up
    let shuffled = dir.path().join("shuffled");
    copy_panels(&theory, &shuffled, |m| {
        let mut v = m.values.clone();
        let n = v.len();
        for i in 0..n {
            v[i] = m.values[(i * 7 + 3) % n];
        }
        m.values = v;
    });
    let out = biphoton(&["report", "--theory", s(&theory), "--experiment", s(&shuffled), "--out-dir", s(&dir.path().join("r2"))]);
    assert_eq!(out.status.code(), Some(3));
    let rep = json(&dir.path().join("r2/comparison_report.json"));
    assert_eq!(rep["all_pass"], false);
}

#[test]
fn report_grid_mismatch_is_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    biphoton_ok(&with_coarse(&["model", "--no-grid", "--out-dir", s(&a)]));
    copy_panels(&a, &b, |m| {
        m.rows -= 1;
        m.row_coords.pop();
        m.values.truncate(m.rows * m.cols);
    });
    let out = biphoton(&["report", "--theory", s(&a), "--experiment", s(&b), "--out-dir", s(&dir.path().join("r"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn model_writes_grid_panels_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    biphoton_ok(&with_coarse(&["model", "--bandwidth-trend", "1,8", "--out-dir", s(d)]));
    let grid = biphoton::io::tensor::load_grid(&d.join("amplitude.bpag")).unwrap();
    assert_eq!(grid.grid.n_k, 14);
    let rep = json(&d.join("model_report.json"));
    assert!(rep["schmidt_number"].as_f64().unwrap() >= 1.0);
    assert_eq!(rep["bandwidth_trend"].as_array().unwrap().len(), 2);
    assert!(rep["trend_towards_separable"].is_boolean());
    assert!(d.join("panel_kk_s0_i3.pgm.txt").exists());
    let m = json(&d.join("manifest.json"));
    let names: Vec<&str> = m["artifacts"].as_array().unwrap().iter().map(|e| e["path"].as_str().unwrap()).collect();
    assert!(names.contains(&"amplitude.bpag"));
    assert!(names.contains(&"model_report.json"));
    assert_eq!(names.len(), 2 * 3 * 16 + 2 + 3 + 1);

    // the stored grid reproduces the Schmidt number
    biphoton_ok(&with_coarse(&["schmidt", "--grid", s(&d.join("amplitude.bpag")), "--out-dir", s(&d.join("s"))]));
    let sch = json(&d.join("s/schmidt.json"));
    assert!((sch["schmidt_number"].as_f64().unwrap() - rep["schmidt_number"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn ring_command_finds_root() {
    let dir = tempfile::tempdir().unwrap();
    biphoton_ok(&["ring", "--points", "41", "--out-dir", s(dir.path())]);
    let rep = json(&dir.path().join("ring_report.json"));
    let root = rep["ring_radius"].as_f64().unwrap();
    let peak = rep["profile_peak_radius"].as_f64().unwrap();
    let step = 2.0 * rep["k_max"].as_f64().unwrap() / 40.0;
    assert!((root - peak).abs() <= step, "{root} vs {peak}");
}
