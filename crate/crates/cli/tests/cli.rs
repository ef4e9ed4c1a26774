use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ep_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ep-lab"))
        .args(args)
        .env_remove("EP_LAB_THREADS")
        .output()
        .expect("failed to spawn ep-lab")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect()
}

#[test]
fn sweep_writes_csv_plot_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nested/out");
    let res = ep_lab(&["sweep", "--preset", "fig2_left", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));

    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "a,E1,E2,G1_half,G2_half,b11sq,b12sq,b21sq,b22sq,r1_abs,r2_abs,Z_abs,defect,e1_bare,e2_bare"
    );
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 602);

    let rows = csv_rows(&out.join("sweep.csv"));
    let row = rows.iter().find(|r| (r[0] - 0.06).abs() < 1e-12).expect("a = 0.06 on the grid");
    assert!(row[3].abs() < 1e-10 && row[4].abs() < 1e-10);

    let svg = fs::read_to_string(out.join("plot.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<rect x=").count(), 3, "three stacked panels");

    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["config"]["name"], "fig2_left");
    assert!(manifest["timestamp"].is_string());
    assert_eq!(manifest["outputs"], serde_json::json!(["sweep.csv", "plot.svg", "manifest.json"]));
}

#[test]
fn fig1_left_defect_on_grid_through_two_thirds() {
    // 901 points put fl(2/3) exactly on the grid
    let dir = tempfile::tempdir().unwrap();
    let res = ep_lab(&["sweep", "--preset", "fig1_left", "--grid", "901", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    let nearest = rows
        .iter()
        .min_by(|x, y| (x[0] - 2.0 / 3.0).abs().total_cmp(&(y[0] - 2.0 / 3.0).abs()))
        .unwrap();
    assert_eq!(nearest[12], 1.0);
    assert_eq!(rows.iter().filter(|r| r[12] == 1.0).count(), 1);
}

#[test]
fn manifest_round_trip_reproduces_csv() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert_eq!(code(&ep_lab(&["sweep", "--preset", "fig1_right", "-o", first.to_str().unwrap()])), 0);
    let manifest = first.join("manifest.json");
    assert_eq!(
        code(&ep_lab(&["sweep", "--config", manifest.to_str().unwrap(), "-o", second.to_str().unwrap()])),
        0
    );
    assert_eq!(fs::read(first.join("sweep.csv")).unwrap(), fs::read(second.join("sweep.csv")).unwrap());
}

#[test]
fn preset_wins_over_config_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let mut value = serde_json::to_value(ep_lab_core::preset("fig2_right").unwrap()).unwrap();
    value["name"] = "custom".into();
    fs::write(&cfg, value.to_string()).unwrap();
    let res = ep_lab(&[
        "sweep",
        "--preset",
        "fig2_left",
        "--config",
        cfg.to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stderr).contains("warning"));
    let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"fig2_left\""));
}

#[test]
fn gnuplot_pair_replaces_svg() {
    let dir = tempfile::tempdir().unwrap();
    let res = ep_lab(&["sweep", "--preset", "fig2_right", "--gnuplot", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    assert!(dir.path().join("sweep.dat").exists());
    assert!(dir.path().join("sweep.gp").exists());
    assert!(!dir.path().join("plot.svg").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let unwritable = blocker.join("sub");
    assert_eq!(code(&ep_lab(&["sweep", "--preset", "fig2_left", "-o", unwritable.to_str().unwrap()])), 2);
    assert_eq!(code(&ep_lab(&["sweep", "--preset", "fig3"])), 2);
    assert_eq!(code(&ep_lab(&["sweep", "--preset", "fig2_left", "--grid", "1"])), 2);
    assert_eq!(code(&ep_lab(&["sweep"])), 2);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"name\": 3}").unwrap();
    assert_eq!(code(&ep_lab(&["sweep", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn find_ep_fig1_left() {
    let res = ep_lab(&["find-ep", "--preset", "fig1_left", "--unknowns", "a,omega_r"]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let sol: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!((sol["params"]["a"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-6);
    assert!((sol["params"]["omega_r"].as_f64().unwrap() - 0.055).abs() < 1e-6);
    assert!(sol["residual"].as_f64().unwrap() < 1e-10);
    assert!(sol["kind"].is_string() && sol["branch_context"].is_string());
}

#[test]
fn find_ep_fig2_right_reports_certificate() {
    let res = ep_lab(&["find-ep", "--preset", "fig2_right", "--unknowns", "a,omega_i"]);
    assert_eq!(code(&res), 4);
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("no EP"), "{err}");
}

#[test]
fn find_ep_malformed_unknowns_exit_2() {
    for bad in ["a", "a,a", "a,omega", "a,omega_r,omega_i"] {
        assert_eq!(code(&ep_lab(&["find-ep", "--preset", "fig1_left", "--unknowns", bad])), 2, "{bad}");
    }
}

#[test]
fn smatrix_single_resonance_peak() {
    let dir = tempfile::tempdir().unwrap();
    let res = ep_lab(&[
        "smatrix", "--resonance", "E=0.5", "G=-0.01", "--range", "0.4,0.6", "--points", "1001", "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(dir.path().join("sigma.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "E,sigma,S_re,S_im");
    let rows = csv_rows(&dir.path().join("sigma.csv"));
    let peak = rows.iter().find(|r| r[0] == 0.5).unwrap();
    assert_eq!(peak[1], 4.0);
    let features: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("features.json")).unwrap()).unwrap();
    assert_eq!(features["peaks"].as_array().unwrap().len(), 1);
}

#[test]
fn smatrix_double_pole_dip() {
    let dir = tempfile::tempdir().unwrap();
    let res = ep_lab(&[
        "smatrix", "--double-pole", "E_d=0", "G_d=-0.2", "--range", "-1,1", "--points", "1001", "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let rows = csv_rows(&dir.path().join("sigma.csv"));
    let at_pole = rows.iter().find(|r| r[0] == 0.0).unwrap();
    assert!(at_pole[1] < 1e-12);
}

#[test]
fn smatrix_from_sweep_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let res = ep_lab(&["smatrix", "--preset", "fig1_left", "--from-sweep", "--at", "0.3", "-o", d]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let features: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("features.json")).unwrap()).unwrap();
    assert_eq!(features["peaks"].as_array().unwrap().len(), 2);

    // empty range
    assert_eq!(code(&ep_lab(&["smatrix", "--resonance", "E=0", "G=-0.1", "--range", "1,1", "-o", d])), 2);
    assert_eq!(code(&ep_lab(&["smatrix", "--resonance", "E=0", "G=-0.1", "--points", "1", "-o", d])), 2);
    // three resonances
    assert_eq!(
        code(&ep_lab(&[
            "smatrix", "--resonance", "E=0", "G=-0.1", "--resonance", "E=1", "G=-0.1", "--resonance", "E=2", "G=-0.1",
            "-o", d
        ])),
        2
    );
    // zero-width pole hit exactly by the energy grid
    assert_eq!(
        code(&ep_lab(&["smatrix", "--resonance", "E=0.5", "G=0", "--range", "0,1", "--points", "3", "-o", d])),
        3
    );
}

#[test]
fn bad_thread_env_is_a_config_error() {
    let res = Command::new(env!("CARGO_BIN_EXE_ep-lab"))
        .args(["sweep", "--preset", "fig2_left", "-o"])
        .arg(tempfile::tempdir().unwrap().path())
        .env("EP_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&res), 2);
}
