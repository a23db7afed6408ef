use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use torus_nf::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torus-nf"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("torus-nf-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn dual_of_the_square_torus() {
    let o = run(&["--preset", "square-2d", "dual"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1 0\n0 1\nr = 0.5\n");
}

#[test]
fn expand_with_zero_potential_is_all_zero() {
    let dir = scratch("expand");
    let mut cfg = RunConfig::preset("mathieu-1d").unwrap();
    cfg.operator.terms.clear();
    let path = dir.join("free.toml");
    cfg.save(&path).unwrap();
    let out = dir.join("out");
    let o = run(&["--config", path.to_str().unwrap(), "--out", out.to_str().unwrap(), "expand", "--xi", "3;10;-25"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("z_table.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("xi,re_z0,im_z0,re_z1,im_z1,lambda"));
    for (line, xi) in lines.zip([3.0f64, 10.0, -25.0]) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], xi);
        assert!(cols[1..5].iter().all(|z| *z == 0.0));
        assert_eq!(cols[5], xi * xi);
    }
    assert!(out.join("nf_state.json").exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn census_is_byte_stable() {
    let dir = scratch("census");
    let read = |sub: &str| {
        let out = dir.join(sub);
        let o = run(&["--preset", "square-2d", "--seed", "42", "--out", out.to_str().unwrap(), "census"]);
        assert!(o.status.success());
        fs::read(out.join("census.csv")).unwrap()
    };
    let a = read("a");
    let b = read("b");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("R,total,nonres,fraction,vacuous_count,seed\n"));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",42")));
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_config_gives_machine_readable_diagnostics() {
    let dir = scratch("invalid");
    let mut cfg = RunConfig::preset("square-2d").unwrap();
    cfg.nf.gamma = 0.9;
    let path = dir.join("bad.toml");
    fs::write(&path, toml_text(&cfg)).unwrap();
    let o = run(&["--config", path.to_str().unwrap(), "dual"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "invalid_params");
    assert!(diag["message"].as_str().unwrap().contains("γ"));

    let o = run(&["--preset", "nope", "dual"]);
    assert_eq!(o.status.code(), Some(2));
    let diag: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["error"], "config");
    fs::remove_dir_all(dir).unwrap();
}

/// Serializes without validation, so invalid values reach the binary.
fn toml_text(cfg: &RunConfig) -> String {
    let mut ok = cfg.clone();
    ok.nf.gamma = 0.4;
    ok.to_toml().unwrap().replace("gamma = 0.4", &format!("gamma = {}", cfg.nf.gamma))
}

#[test]
fn spectrum_and_quasimode_write_tables() {
    let dir = scratch("spectrum");
    let out = dir.join("out");
    let o = run(&["--preset", "mathieu-1d", "--out", out.to_str().unwrap(), "--threads", "1", "spectrum"]);
    assert!(o.status.success());
    let spec = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(spec.lines().count(), 258);
    let o = run(&["--preset", "mathieu-1d", "--out", out.to_str().unwrap(), "quasimode"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let q = fs::read_to_string(out.join("quasimode.csv")).unwrap();
    assert!(q.starts_with("xi,mode,lambda_pred,lambda_matched,overlap,residual,nonresonant,ambiguous,cluster\n"));
    assert!(q.lines().count() > 100);
    assert!(out.join("splitting.csv").exists());
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_reports_every_criterion() {
    let dir = scratch("verify");
    let out = dir.join("out");
    let o = run(&["--preset", "mathieu-1d", "--out", out.to_str().unwrap(), "verify"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    let criteria = report["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 13);
    for (i, c) in criteria.iter().enumerate() {
        assert_eq!(c["id"].as_u64(), Some(i as u64 + 1));
        assert!(c["pass"].is_boolean());
        assert!(c["detail"].is_object());
    }
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("criterion")).count(), 13);
    fs::remove_dir_all(dir).unwrap();
}

#[test]
fn config_command_prints_loadable_toml() {
    let o = run(&["--preset", "unbounded-2d", "config"]);
    assert!(o.status.success());
    let cfg = RunConfig::from_toml(&stdout(&o)).unwrap();
    assert_eq!(cfg, RunConfig::preset("unbounded-2d").unwrap());
}
