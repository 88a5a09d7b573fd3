//! Regression against a stored `stats` document. Regenerate with
//! `RANCHER_BLESS=1 cargo test --test golden`.

mod common;

use std::process::Command;

use serde_json::Value;

const REL_TOL: f64 = 1e-9;

fn close(a: &Value, b: &Value, path: &str, diffs: &mut Vec<String>) {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() > REL_TOL * x.abs().max(y.abs()).max(1e-300) {
                diffs.push(format!("{path}: {x} vs {y}"));
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (p, q)) in x.iter().zip(y).enumerate() {
                close(p, q, &format!("{path}[{i}]"), diffs);
            }
        }
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => {
            for (k, p) in x {
                match y.get(k) {
                    Some(q) => close(p, q, &format!("{path}.{k}"), diffs),
                    None => diffs.push(format!("{path}.{k}: missing")),
                }
            }
        }
        _ if a == b => {}
        _ => diffs.push(format!("{path}: {a} vs {b}")),
    }
}

#[test]
fn stats_document_matches_golden() {
    let path = common::golden_dir().join("stats_seed1_runs100_steps10000.json");
    let out = Command::new(env!("CARGO_BIN_EXE_rancher"))
        .args(["stats", "--seed", "1", "--runs", "100", "--steps", "10000"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut now: Value = serde_json::from_slice(&out.stdout).unwrap();
    // the version string changes on release without changing any number
    now["version"] = Value::Null;
    if common::blessing() {
        std::fs::create_dir_all(common::golden_dir()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(&now).unwrap() + "\n").unwrap();
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
    let golden: Value = serde_json::from_str(&text).unwrap();
    let mut diffs = Vec::new();
    close(&golden, &now, "$", &mut diffs);
    assert!(diffs.is_empty(), "{} differences, first: {:?}", diffs.len(), &diffs[..diffs.len().min(10)]);
}
