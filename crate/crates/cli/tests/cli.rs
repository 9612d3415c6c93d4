use std::path::Path;
use std::process::{Command, Output};

use su11_cli::io::{read_state, StateJson};
use su11_core::{
    build_family, build_rho, enumerate_bipartitions, scan_lmu, FamilyTag, GaussianState, Grid,
    InterferometerParams, ScanSpec,
};
use tempfile::TempDir;

fn su11(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su11"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

#[test]
fn build_without_second_gain_is_vacuum() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "s.json");
    let o = su11(&[
        "build", "--family", "su11", "--modes", "2", "--r1", "0.8", "--r2", "0", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let state = read_state(Path::new(&out)).unwrap();
    assert!(
        state
            .max_deviation(&GaussianState::vacuum(2).unwrap())
            .unwrap()
            < 1e-15
    );

    let raw = json(Path::new(&out));
    let keys: Vec<&String> = raw.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["A", "B", "m"]);
    assert_eq!(raw["A"][0][0]["re"], 1.0);
}

#[test]
fn beam_splitter_pair_is_vacuum() {
    let o = su11(&[
        "build", "--family", "bs", "--modes", "2", "--r1", "1.1", "--r2", "0.3", "--phi", "-0.4",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let parsed: StateJson = serde_json::from_slice(&o.stdout).unwrap();
    let state = parsed.to_state().unwrap();
    assert!(
        state
            .max_deviation(&GaussianState::vacuum(2).unwrap())
            .unwrap()
            < 1e-12
    );
}

#[test]
fn build_round_trips_exactly() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "rho8.json");
    let o = su11(&[
        "build", "--family", "su11", "--modes", "8", "--r1", "0.9", "--r2", "0.6", "--theta",
        "0.4", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = InterferometerParams::new(0.9, 0.6, 0.4, 0.0).unwrap();
    let expected = build_rho(8, &p).unwrap();
    assert!(
        read_state(Path::new(&out))
            .unwrap()
            .max_deviation(&expected)
            .unwrap()
            <= 1e-15
    );
}

#[test]
fn alternating_photon_sum_is_noiseless() {
    let o = su11(&[
        "photon-stats",
        "--family",
        "su11",
        "--modes",
        "4",
        "--r1",
        "0.7",
        "--r2",
        "1.2",
        "--theta",
        "2",
        "--weights",
        "alternating",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["m"], 4);
    assert!(v["lc_variance"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn sub_chain_alternating_sum_matches_pair_noise() {
    let r1 = 0.6f64;
    let o = su11(&[
        "photon-stats",
        "--family",
        "su11-sub",
        "--modes",
        "6",
        "--r1",
        "0.6",
        "--r2",
        "0.9",
        "--weights",
        "1,-1,1,-1,1,-1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let expected = 2.0 * r1.cosh().powi(2) * r1.sinh().powi(2);
    let got = v["lc_variance"].as_f64().unwrap();
    assert!(
        (got - expected).abs() < 1e-10 * expected,
        "{got} vs {expected}"
    );
}

#[test]
fn photon_stats_csv_layout() {
    let o = su11(&[
        "photon-stats",
        "--family",
        "bs",
        "--modes",
        "3",
        "--r1",
        "0.5",
        "--r2",
        "0.5",
        "--format",
        "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "i,j,K_ij");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("1,1,"));
}

#[test]
fn vacuum_photon_covariance_is_zero() {
    let o = su11(&[
        "photon-stats",
        "--family",
        "bs",
        "--modes",
        "2",
        "--r1",
        "0.5",
        "--r2",
        "0.5",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for row in v["K"].as_array().unwrap() {
        for x in row.as_array().unwrap() {
            assert!(x.as_f64().unwrap().abs() < 1e-15);
        }
    }
}

#[test]
fn validation_errors_exit_with_one() {
    let o = su11(&[
        "photon-stats",
        "--family",
        "su11",
        "--modes",
        "4",
        "--r1",
        "1",
        "--r2",
        "1",
        "--weights",
        "1,2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("expected 4 weights"));

    let o = su11(&[
        "build", "--family", "su12", "--modes", "4", "--r1", "1", "--r2", "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--family"));

    let o = su11(&["build", "--modes", "4"]);
    assert_eq!(o.status.code(), Some(1));

    let o = su11(&["no-such-command"]);
    assert_eq!(o.status.code(), Some(1));

    assert_eq!(su11(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_point_at_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("scan.toml");
    std::fs::write(
        &cfg,
        "family = \"su11-sub\"\nmodes = 6\n\n[grid]\nr1_min = 2.0\nr1_max = 0.1\nr1_steps = 5\n",
    )
    .unwrap();
    let o = su11(&["ppt-scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(
        msg.contains("scan.toml:5:10") && msg.contains("grid.r1_min"),
        "{msg}"
    );

    std::fs::write(&cfg, "family = \"su11-sub\"\nmodes = [6\n").unwrap();
    let msg = stderr(&su11(&["ppt-scan", "--config", cfg.to_str().unwrap()]));
    assert!(msg.contains("scan.toml:2:"), "{msg}");
}

#[test]
fn io_errors_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("missing").join("x.json");
    let o = su11(&[
        "build",
        "--family",
        "su11",
        "--modes",
        "2",
        "--r1",
        "1",
        "--r2",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let o = su11(&[
        "ppt-scan",
        "--config",
        dir.path().join("nope.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn single_point_grid_gives_one_row_per_bipartition() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "one.csv");
    let o = su11(&[
        "ppt-scan",
        "--family",
        "su11-sub",
        "--modes",
        "4",
        "--grid",
        "0.7",
        "--bipartitions",
        "cover-all",
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 7);
    let verdicts = std::fs::read_to_string(dir.path().join("one.verdicts.csv")).unwrap();
    assert_eq!(verdicts.lines().next(), Some("bipartition_id,A,B,verdict"));
    assert_eq!(verdicts.lines().count(), 1 + 7);
}

#[test]
fn scan_output_is_deterministic_and_ordered() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "family = \"su11\"\nmodes = 5\ntheta = 0.3\nbipartitions = [\"A={1}|B={2}\", \"A={2,3}|B={5}\"]\n\
         [grid]\nr1_min = 0.1\nr1_max = 1.0\nr1_steps = 3\nr2_min = 0.2\nr2_max = 0.4\nr2_steps = 2\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = path_str(&dir, name);
        let o = su11(&["ppt-scan", "--config", cfg.to_str().unwrap(), "--out", &out]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read_to_string(out).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));
    let keys: Vec<(String, String, String)> = csv::Reader::from_reader(first.as_bytes())
        .records()
        .map(|r| r.unwrap())
        .map(|r| (r[0].to_string(), r[1].to_string(), r[2].to_string()))
        .collect();
    assert_eq!(keys.len(), 12);
    assert_eq!(keys[0], ("0.1".into(), "0.2".into(), "A={1}|B={2}".into()));
    assert_eq!(keys[1].2, "A={2,3}|B={5}");
    assert_eq!(keys[2].1, "0.4");
    assert_eq!(keys[4].0, "0.55");
}

#[test]
fn balanced_benchmark_is_always_entangled() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "fig3a.csv");
    let o = su11(&[
        "ppt-scan", "--family", "balanced", "--grid", "0.1:2:50", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let values: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[3].parse().unwrap())
        .collect();
    assert_eq!(values.len(), 2500);
    assert!(values.iter().all(|&l| l < 0.0));
}

#[test]
fn verdict_summary_covers_all_sub_chain_bipartitions() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "scan.json");
    let verdicts = path_str(&dir, "v.csv");
    let o = su11(&[
        "ppt-scan",
        "--family",
        "su11-sub",
        "--modes",
        "6",
        "--format",
        "json",
        "--out",
        &out,
        "--verdicts",
        &verdicts,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(&verdicts).unwrap();
    let rows: Vec<(String, String)> = rdr
        .records()
        .map(|r| r.unwrap())
        .map(|r| (r[0].to_string(), r[3].to_string()))
        .collect();
    assert_eq!(rows.len(), 301);

    let bips = enumerate_bipartitions(6, false).unwrap();
    let scan = scan_lmu(
        &ScanSpec::family(FamilyTag::Su11Sub, 6, 0.0, 0.0),
        &bips,
        &Grid::default_ppt(),
    )
    .unwrap();
    for ((id, verdict), expected) in rows.iter().zip(scan.verdicts()) {
        assert_eq!(id, &expected.bipartition.id());
        assert_eq!(verdict, expected.verdict.as_str());
    }
    let doc = json(Path::new(&out));
    assert_eq!(doc["rows"].as_array().unwrap().len(), 400 * 301);
    assert_eq!(doc["verdicts"].as_array().unwrap().len(), 301);
}

#[test]
fn verify_reports_every_suite() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "report.json");
    let o = su11(&[
        "verify",
        "--draws",
        "2",
        "--fock-max-modes",
        "2",
        "--seed",
        "9",
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(Path::new(&out));
    assert_eq!(report["passed"], true);
    let suites = report["suites"].as_array().unwrap();
    let names: Vec<&str> = suites.iter().map(|s| s["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "analytic-crosscheck",
            "subsystem-identity",
            "photon-identities",
            "photon-closed-form",
            "fock-oracle"
        ]
    );
    let fock = &suites[4]["fock_deficits"];
    assert_eq!(fock.as_array().unwrap().len(), 4);
    assert!(fock[0]["max_deficit"].as_f64().unwrap() < 1e-6);
}

#[test]
fn corrupted_closed_forms_fail_verification() {
    let dir = TempDir::new().unwrap();
    let out = path_str(&dir, "report.json");
    let o = su11(&[
        "verify",
        "--draws",
        "1",
        "--fock-max-modes",
        "2",
        "--corrupt-analytic",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("verification failed: analytic-crosscheck"));
    let report = json(Path::new(&out));
    assert_eq!(report["passed"], false);
    assert_eq!(report["suites"][0]["passed"], false);
}

#[test]
fn families_build_for_all_mode_counts() {
    let p = InterferometerParams::new(0.4, 0.5, 0.0, 0.0).unwrap();
    for tag in FamilyTag::ALL {
        let state = build_family(tag, 5, &p).unwrap();
        let text = serde_json::to_string(&StateJson::from_state(&state)).unwrap();
        assert!(text.starts_with("{\"m\":5,\"A\":"));
    }
}
