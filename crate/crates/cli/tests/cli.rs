use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn inflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inflow")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Case {
    dir: tempfile::TempDir,
}

impl Case {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, config: &Path, rest: &[&str]) -> Output {
        let out = self.out();
        let mut args = vec!["--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend(rest);
        inflow(&args)
    }
}

fn standard(v_plus: f64, u_minus: f64, beta: f64, t_end: f64, extra: &str) -> String {
    format!(
        r#"
[gas]
gamma = 2.0
mu = 1.0

[states]
v_minus = 1.0
u_minus = {u_minus}
v_plus = {v_plus}
{extra}

[perturbation]
beta = {beta}

[grid]
L = 40.0
N = 400

[run]
t_end = {t_end}
snapshot_cadence = 0.25
"#
    )
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn profile_writes_files_and_reports_rates() {
    let c = Case::new();
    let cfg = c.config("std.toml", &standard(2.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["profile"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!((value_after(&text, "c-") - 1.4434).abs() < 1e-4, "{text}");
    assert!((value_after(&text, "c+") - 1.1547).abs() < 1e-4, "{text}");
    assert!(text.contains("monotone  = true"));
    let csv = std::fs::read_to_string(c.out().join("profile.csv")).unwrap();
    assert!(csv.starts_with("# {"));
    assert_eq!(csv.lines().count(), 2 + 2001);
    assert!(c.out().join("profile.json").exists());
}

#[test]
fn quiet_silences_stdout() {
    let c = Case::new();
    let cfg = c.config("q.toml", &standard(2.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["--quiet", "profile"]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(c.out().join("profile.csv").exists());
}

#[test]
fn degenerate_shock_is_reported() {
    let c = Case::new();
    let cfg = c.config("deg.toml", &standard(1.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["profile"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degenerate shock"), "{}", stderr(&o));
}

#[test]
fn missing_config_prints_usage() {
    let o = inflow(&["--config", "/definitely/not/here.toml", "profile"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
    let o = inflow(&["classify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn unknown_keys_are_config_errors() {
    let c = Case::new();
    let cfg = c.config("bad.toml", &standard(2.0, 0.5, 6.0, 1.0, "w_plus = 3.0"));
    let o = c.run(&cfg, &["simulate"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn classify_standard_pair() {
    let c = Case::new();
    let cfg = c.config("c.toml", &standard(2.0, 0.5, 6.0, 1.0, "u_plus = -0.366025403784"));
    let o = c.run(&cfg, &["classify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("w- = (1, 0.5)  region: Subsonic"), "{text}");
    let s2 = text.lines().find(|l| l.contains("S2(w-)")).unwrap();
    assert!(s2.trim_start().starts_with("on"), "{s2}");
    let d: f64 = s2.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(d < 1e-6);
    assert!(text.contains("sonic point w* = (2.0000000000, 1.0000000000)"));
}

#[test]
fn classify_special_cases() {
    let c = Case::new();
    let same = c.config("same.toml", &standard(1.0, 0.5, 6.0, 1.0, "u_plus = 0.5"));
    let o = c.run(&same, &["classify"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("coincides with the anchor"));

    let fast = c.config("fast.toml", &standard(2.0, 2.0, 6.0, 1.0, ""));
    let o = c.run(&fast, &["classify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("w- = (1, 2)  region: Supersonic"));

    let outflow = c.config("out.toml", &standard(2.0, -0.5, 6.0, 1.0, ""));
    let o = c.run(&outflow, &["classify"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("u_- > 0"));
}

#[test]
fn simulate_writes_a_complete_run_directory() {
    let c = Case::new();
    let cfg = c.config("sim.toml", &standard(2.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["simulate", "--tag", "a"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = c.out().join("run_a");
    for f in ["manifest.json", "initial.csv", "diagnostics.csv", "report.json", "snap_00000.csv", "snap_00004.csv"] {
        assert!(dir.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap();
    let verdict = report["stability"]["verdict"].as_str().unwrap();
    assert!(verdict == "decaying" || verdict == "flat", "{verdict}");
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["profile_options"]["ode_tol"].is_number());

    // identical config, identical diagnostics
    let o = c.run(&cfg, &["simulate", "--tag", "b"]);
    assert!(o.status.success());
    let a = std::fs::read(dir.join("diagnostics.csv")).unwrap();
    let b = std::fs::read(c.out().join("run_b/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn zero_horizon_gives_one_snapshot() {
    let c = Case::new();
    let cfg = c.config("t0.toml", &standard(2.0, 0.5, 6.0, 0.0, ""));
    let o = c.run(&cfg, &["simulate", "--tag", "z"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = c.out().join("run_z");
    assert!(dir.join("snap_00000.csv").exists());
    assert!(!dir.join("snap_00001.csv").exists());
}

#[test]
fn exhausted_budget_exits_with_timeout_code() {
    let c = Case::new();
    let text = standard(2.0, 0.5, 6.0, 1e4, "").replace("snapshot_cadence = 0.25", "snapshot_cadence = 1.0\nwall_clock_seconds = 0.2");
    let cfg = c.config("slow.toml", &text);
    let o = c.run(&cfg, &["simulate", "--tag", "slow"]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(c.out().join("run_slow/manifest.json").exists());
}

#[test]
fn beta_sweep_tracks_the_boundary_rate() {
    let c = Case::new();
    let cfg = c.config("sw.toml", &standard(2.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["--jobs", "2", "sweep", "--axis", "beta", "--values", "4,5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(c.out().join("sweep_beta.json")).unwrap()).unwrap();
    let fit = &summary["beta_fit"];
    let ratio = fit["pair_ratios"][0][0].as_f64().unwrap();
    let expected = fit["expected_ratios"][0].as_f64().unwrap();
    assert!((ratio / expected - 1.0).abs() < 0.15, "{ratio} vs {expected}");
    let csv = std::fs::read_to_string(c.out().join("sweep_beta.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn grid_sweep_is_second_order() {
    let c = Case::new();
    let cfg = c.config("g.toml", &standard(2.0, 0.5, 14.0, 1.0, "").replace("N = 400", "N = 200"));
    let o = c.run(&cfg, &["sweep", "--axis", "grid", "--values", "200,400"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(c.out().join("sweep_grid.json")).unwrap()).unwrap();
    let rows = summary["rows"].as_array().unwrap();
    let ratio = rows[0]["final_sup_dev"].as_f64().unwrap() / rows[1]["final_sup_dev"].as_f64().unwrap();
    assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
}

#[test]
fn sweep_needs_two_values() {
    let c = Case::new();
    let cfg = c.config("one.toml", &standard(2.0, 0.5, 6.0, 1.0, ""));
    let o = c.run(&cfg, &["sweep", "--axis", "beta", "--values", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sweep needs >= 2 values"));
}
