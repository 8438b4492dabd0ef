use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gamma-finite"))
}

#[test]
fn verify_small_case_succeeds() {
    let out = bin()
        .args(["verify", "--q", "3", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["q"], 3);
    assert_eq!(report["n"], 2);
    assert_eq!(report["psi"], "exp(2*pi*i*x/q)");
    assert_eq!(report["records"].as_array().unwrap().len(), 6);
    assert_eq!(report["failures"], 0);
}

#[test]
fn nonprime_field_exits_2_with_message() {
    let out = bin()
        .args(["verify", "--q", "9", "--n", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("q must be prime <= 7"), "stderr: {err}");
}

#[test]
fn oversized_case_needs_allow_slow() {
    // rank 3 over F_3 has an induced space of dimension 416
    let out = bin()
        .args(["verify", "--q", "3", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_cap_exits_2() {
    // GL_4(F_3) exceeds the enumeration cap outright
    let out = bin()
        .args(["verify", "--q", "3", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let run = || {
        bin()
            .args(["verify", "--q", "2", "--n", "3", "--seed", "7"])
            .output()
            .unwrap()
    };
    let a = run();
    let b = run();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--q", "3", "--n", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let file = std::fs::read(&path).unwrap();
    assert_eq!(file, out.stdout);
}

#[test]
fn cache_dir_round_trip_matches() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        bin()
            .args(["verify", "--q", "3", "--n", "2", "--cache-dir"])
            .arg(dir.path())
            .output()
            .unwrap()
    };
    let cold = run();
    assert!(cold.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
    let warm = run();
    assert_eq!(cold.stdout, warm.stdout);
}

#[test]
fn decompose_lists_components() {
    let out = bin()
        .args(["decompose", "--q", "3", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["space_dim"], 16);
    let comps = report["components"].as_array().unwrap();
    assert_eq!(comps.len(), 6);
    let cusp = comps.iter().filter(|c| c["cuspidal"] == true).count();
    assert_eq!(cusp, 3);
}

#[test]
fn table_includes_both_ranks() {
    let out = bin()
        .args(["table", "--q", "3", "--n", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let comps = report["components"].as_array().unwrap();
    assert!(comps.iter().any(|c| c["rank"] == 2));
    assert!(comps.iter().any(|c| c["rank"] == 1));
    assert_eq!(report["records"].as_array().unwrap().len(), 6);
}

#[test]
fn psi_conjugate_is_reported() {
    let out = bin()
        .args(["verify", "--q", "3", "--n", "2", "--psi-conjugate"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["psi"], "exp(-2*pi*i*x/q)");
    assert_eq!(report["failures"], 0);
}
