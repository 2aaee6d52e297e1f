use std::process::{Command, Output};

fn qlmass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qlmass")).args(args).output().expect("binary runs")
}

const KERR: [&str; 6] = ["--set", "metric=kerr_slice m=1 a=0.5", "--set", "schedule=10,20,40", "-L", "8"];

fn with(extra: &[&'static str]) -> Vec<&'static str> {
    extra.iter().chain(KERR.iter()).copied().collect()
}

#[test]
fn masses_csv_has_header_and_one_row_per_radius() {
    let out = qlmass(&with(&["masses"]));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "r,area,hawking,brown_york,adm_reference,embed_residual,flags");
    assert_eq!(body.len(), 4);
    assert!(text.contains("# metric = kerr_slice"));
}

#[test]
fn json_reports_parse() {
    for sub in ["masses", "verify", "adm", "rate"] {
        let out = qlmass(&with(&[sub, "-f", "json"]));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{sub}: {e}"));
        assert_eq!(v["metadata"]["command"], sub);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = qlmass(&with(&["verify", "-f", "json"]));
    let b = Command::new(env!("CARGO_BIN_EXE_qlmass"))
        .args(with(&["verify", "-f", "json"]))
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn exit_codes_follow_the_contract() {
    assert_eq!(qlmass(&with(&["adm"])).status.code(), Some(0));
    assert_eq!(qlmass(&with(&["verify", "--set", "inject_fault=check"])).status.code(), Some(1));
    assert_eq!(qlmass(&with(&["masses", "--set", "inject_fault=solver"])).status.code(), Some(3));
    assert_eq!(qlmass(&["masses", "-L", "6"]).status.code(), Some(2));
    assert_eq!(qlmass(&["masses", "--set", "schedule=10,10,20"]).status.code(), Some(2));
    assert_eq!(qlmass(&["masses", "--set", "metric=kerr_slice m=1 a=2"]).status.code(), Some(2));
    assert_eq!(qlmass(&["masses", "--config", "/nonexistent/study.cfg"]).status.code(), Some(2));
    assert_eq!(qlmass(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn underresolved_off_center_kerr_is_flagged() {
    let out = qlmass(&["verify", "--set", "metric=kerr_slice m=1 a=0.5", "--set", "family=coordinate-spheres cx=3 cy=0 cz=2", "--set", "schedule=10,20,40", "-L", "8"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("gauss_bonnet") && l.contains(",underresolved,")), "{text}");
}

#[test]
fn config_file_and_outputs_are_written() {
    let dir = std::env::temp_dir().join(format!("qlmass-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("study.cfg");
    std::fs::write(&cfg, "# isotropic study\nmetric = schwarzschild_isotropic m=1\nschedule = 10,20,40\nband_limit = 8\n").unwrap();
    let report = dir.join("masses.csv");
    let out = qlmass(&["masses", "-c", cfg.to_str().unwrap(), "-o", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(std::fs::read_to_string(&report).unwrap().contains("schwarzschild_isotropic"));

    let obj = dir.join("sphere.obj");
    let out = qlmass(&["embed", "-c", cfg.to_str().unwrap(), "--radius", "20", "--obj", obj.to_str().unwrap(), "-f", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["minkowski"]["rho1"].as_f64().unwrap() < 1e-10);
    let mesh = std::fs::read_to_string(&obj).unwrap();
    assert!(mesh.lines().any(|l| l.starts_with("v ")) && mesh.lines().any(|l| l.starts_with("f ")));
    std::fs::remove_dir_all(&dir).ok();
}
