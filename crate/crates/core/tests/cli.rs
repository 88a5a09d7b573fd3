use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rancher(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rancher")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_is_deterministic() {
    let a = rancher(&["simulate", "--steps", "500", "--seed", "9", "--mode", "rejection"]);
    let b = rancher(&["simulate", "--steps", "500", "--seed", "9", "--mode", "rejection"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = rancher(&["simulate", "--steps", "500", "--seed", "10", "--mode", "rejection"]);
    assert_ne!(a.stdout, c.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("# rancher trajectory\n"));
    assert!(text.contains("\nn,x,y,d,hull_size,arc_len,trials,is_ladder\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 502);
}

#[test]
fn zero_steps_writes_the_origin() {
    let o = rancher(&["simulate", "--steps", "0"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,1,"), "{last}");
}

#[test]
fn verify_accepts_healthy_files_and_rejects_tampered_ones() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("walk.csv");
    let o = rancher(&["simulate", "--steps", "2000", "--seed", "4", "--out", path_str(&csv)]);
    assert_eq!(code(&o), 0);
    let o = rancher(&["verify", path_str(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["ok"], true);

    // push one point off the unit circle around its predecessor
    let text = std::fs::read_to_string(&csv).unwrap();
    let tampered: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("1000,") {
                let mut f: Vec<String> = l.split(',').map(String::from).collect();
                let x: f64 = f[1].parse().unwrap();
                f[1] = format!("{:.16e}", x + 1e-3);
                f.join(",")
            } else {
                l.to_string()
            }
        })
        .collect();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, tampered.join("\n") + "\n").unwrap();
    let o = rancher(&["verify", path_str(&bad)]);
    assert_eq!(code(&o), 1);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["ok"], false);
    assert!(!doc["failed_checks"].as_array().unwrap().is_empty());
}

#[test]
fn verify_without_input_simulates() {
    let o = rancher(&["verify", "--runs", "3", "--steps", "1000", "--mode", "rejection"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["trajectories"], 3);
    assert_eq!(doc["source"], "simulated");
}

#[test]
fn tiny_stats_run_reports_insufficient_data() {
    let o = rancher(&["stats", "--runs", "1", "--steps", "200"]);
    assert_eq!(code(&o), 3);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!doc["speed"].as_array().unwrap().is_empty());
    assert_eq!(doc["tails"]["status"], "insufficient_data");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&rancher(&["simulate", "--bogus"])), 2);
    assert_eq!(code(&rancher(&["simulate", "--mode", "sideways"])), 2);
    assert_eq!(code(&rancher(&["simulate", "--steps", "-4"])), 2);
    assert_eq!(code(&rancher(&["stats", "--checkpoints", "5,3"])), 2);
    assert_eq!(code(&rancher(&["render"])), 2);
    assert_eq!(code(&rancher(&["verify", "/nonexistent/walk.csv"])), 2);
    assert_eq!(code(&rancher(&["frobnicate"])), 2);
    assert_eq!(code(&rancher(&["--help"])), 0);
}

#[test]
fn config_file_defaults_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# defaults\nsteps = 40\nseed = 5\nmode = rejection\n").unwrap();
    let from_file = rancher(&["simulate", "--config", path_str(&cfg)]);
    let explicit = rancher(&["simulate", "--steps", "40", "--seed", "5", "--mode", "rejection"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, explicit.stdout);

    let overridden = rancher(&["simulate", "--config", path_str(&cfg), "--seed", "6"]);
    let direct = rancher(&["simulate", "--steps", "40", "--seed", "6", "--mode", "rejection"]);
    assert_eq!(overridden.stdout, direct.stdout);

    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "steps = 40\nspeed = 3\n").unwrap();
    let o = rancher(&["simulate", "--config", path_str(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn render_and_simulate_write_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("w.csv");
    let svg = dir.path().join("w.svg");
    let svg2 = dir.path().join("direct.svg");
    assert_eq!(
        code(&rancher(&["simulate", "--steps", "300", "--out", path_str(&csv), "--svg", path_str(&svg2)])),
        0
    );
    assert_eq!(code(&rancher(&["render", path_str(&csv), "--svg", path_str(&svg)])), 0);
    let a = std::fs::read_to_string(&svg).unwrap();
    assert!(a.starts_with("<svg") || a.starts_with("<?xml"));
    assert!(a.contains("id=\"hull\"") && a.contains("id=\"walk\""));
    assert_eq!(a, std::fs::read_to_string(&svg2).unwrap());
}

#[test]
fn constants_print_and_verify() {
    let o = rancher(&["constants"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let beta: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("beta = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((beta - (1.0 + 4.0 * std::f64::consts::PI * 8f64.sqrt())).abs() < 1e-12);
    assert!(text.contains("verified = true"));
}

#[test]
fn stats_do_not_depend_on_thread_count() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_rancher"))
            .args(["stats", "--runs", "12", "--steps", "3000", "--seed", "21", "--mode", "rejection"])
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}
