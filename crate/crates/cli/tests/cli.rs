use std::path::Path;
use std::process::{Command, Output};

fn wco(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wco"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("WCO_OUT_DIR")
        .env_remove("WCO_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let h = wco(&["classify", "--phi", "mobius:0.5,0.5,0,1"], dir.path());
    assert_eq!(h.status.code(), Some(0));
    assert_eq!(json(&h)["klass"], "boundary-hyperbolic");
    let p = wco(&["classify", "--phi", "mobius:0,1,-1,2"], dir.path());
    assert_eq!(json(&p)["klass"], "boundary-parabolic");
    let id = wco(&["classify", "--phi", "identity"], dir.path());
    assert_eq!(id.status.code(), Some(2));
}

#[test]
fn classify_reads_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"phi": "mobius:0.5,0.5,0,1", "tolerance": 1e-10}"#).unwrap();
    let r = wco(&["classify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(json(&r)["klass"], "boundary-hyperbolic");
    std::fs::write(&cfg, r#"{"phi": "identity", "degree": 9999}"#).unwrap();
    assert_eq!(wco(&["classify", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn uci_semigroup_rate_table() {
    let dir = tempfile::tempdir().unwrap();
    let r = wco(&["uci", "--phi", "semigroup:2", "--nmax", "32"], dir.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("uci_certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["verdict"], "certified");
    let csv = std::fs::read_to_string(dir.path().join("uci_sups.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 32);
    for row in rows {
        let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[2] - 1.0 / f[0]).abs() < 1e-12);
        assert!(f[1] <= f[2] + 1e-9);
    }
}

#[test]
fn spectrum_writes_pseudospectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let r = wco(
        &["spectrum", "--psi", "exp:poly:2,-1", "--phi", "mobius:0.5,0.5,0,1", "--grid", "circle:1.2,16", "--degree", "64"],
        dir.path(),
    );
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(dir.path().join("pseudospectrum.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("lambda_re,lambda_im,s_min"));
    assert_eq!(csv.lines().count(), 17);
    let radius = 1.2 * 2f64.sqrt() * std::f64::consts::E;
    for row in csv.lines().skip(1) {
        let f: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!((f[0].hypot(f[1]) - radius).abs() < 1e-9);
        assert!(f[2] > 1e-3);
    }
    assert!(dir.path().join("spectrum_model.json").exists());
}

#[test]
fn eigen_and_normality_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let r = wco(&["eigen", "--psi", "exp:poly:2,-1", "--phi", "mobius:0.5,0.5,0,1", "--lift", "1,2"], dir.path());
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["eigen_certificate.json", "eigen_coefficients.csv", "eigen_lift_1.json", "eigen_lift_2.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let p = wco(&["eigen", "--psi", "kernel:0.5", "--phi", "mobius:0,1,-1,2"], dir.path());
    assert_eq!(p.status.code(), Some(2));

    let n = wco(&["normality", "--psi", "kernel:0.5", "--phi", "mobius:0,1,-1,2", "--degree", "32"], dir.path());
    assert_eq!(n.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("normality_report.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "consistent-with-normal");
}

#[test]
fn degree_guard() {
    let dir = tempfile::tempdir().unwrap();
    let r = wco(&["spectrum", "--psi", "const:1", "--phi", "mobius:0.5,0,0,1", "--degree", "5000"], dir.path());
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("4096"));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_wco"))
        .args(["uci", "--phi", "mobius:0.5,0.5,0,1", "--nmax", "4"])
        .env("WCO_OUT_DIR", dir.path())
        .env("WCO_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert!(dir.path().join("uci_certificate.json").exists());
}

#[test]
fn unwritable_output_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, b"not a directory").unwrap();
    let r = wco(&["uci", "--phi", "semigroup:2", "--nmax", "4"], &blocker.join("sub"));
    assert_eq!(r.status.code(), Some(1));
    assert_eq!(std::fs::read(&blocker).unwrap(), b"not a directory");
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn killed_run_leaves_only_complete_files() {
    let dir = tempfile::tempdir().unwrap();
    for delay_ms in [50u64, 400, 1500] {
        let mut child = Command::new(env!("CARGO_BIN_EXE_wco"))
            .args(["reproduce-paper", "--out"])
            .arg(dir.path())
            .stdout(std::process::Stdio::null())
            .stderr(std::process::Stdio::null())
            .spawn()
            .unwrap();
        std::thread::sleep(std::time::Duration::from_millis(delay_ms));
        let _ = child.kill();
        let _ = child.wait();
        if let Ok(text) = std::fs::read_to_string(dir.path().join("reproduce_table.txt")) {
            assert!(text.ends_with("criteria passed\n"));
        }
        if let Ok(text) = std::fs::read_to_string(dir.path().join("reproduce.json")) {
            serde_json::from_str::<serde_json::Value>(&text).expect("complete JSON");
        }
        for entry in std::fs::read_dir(dir.path()).unwrap() {
            let name = entry.unwrap().file_name().into_string().unwrap();
            if name.ends_with(".csv") {
                let text = std::fs::read_to_string(dir.path().join(&name)).unwrap();
                assert!(text.ends_with('\n'), "{name} truncated");
            }
        }
    }
}
