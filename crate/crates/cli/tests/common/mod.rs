#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// 14 × 8 bins per arm spanning the reference window.
pub const COARSE: [&str; 8] = [
    "--set",
    "grid.n_k=14",
    "--set",
    "grid.n_lambda=8",
    "--set",
    "grid.k_step=29.75",
    "--set",
    "grid.lambda_step=0.635",
];

pub fn biphoton(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biphoton"))
        .args(args)
        .env_remove("BIPHOTON_THREADS")
        .output()
        .expect("binary runs")
}

pub fn biphoton_ok(args: &[&str]) -> Output {
    let out = biphoton(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn manifest_hash(dir: &Path, name: &str) -> String {
    let m = json(&dir.join("manifest.json"));
    m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["path"] == name)
        .unwrap_or_else(|| panic!("{name} not in manifest"))["sha256"]
        .as_str()
        .unwrap()
        .to_string()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
