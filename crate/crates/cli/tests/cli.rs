use std::path::PathBuf;
use std::process::{Command, Output};

fn latgreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latgreen"))
        .args(args)
        .env_remove("GREEN_NODES")
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Value column of the CSV row at `(μ, ν)`.
fn csv_value(text: &str, mu: i64, nu: i64) -> (f64, f64) {
    let prefix = format!("{mu},{nu},");
    let line = text.lines().find(|l| l.starts_with(&prefix)).expect("row present");
    let cols: Vec<&str> = line.split(',').collect();
    (cols[4].parse().unwrap(), cols[5].parse().unwrap())
}

#[test]
fn green_table_row_count() {
    let o = latgreen(&["green-table", "--lambda", "2+2i", "--window", "4", "--target", "0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("mu,nu,mu_t,nu_t,re,im"));
    assert_eq!(text.lines().count() - 1, 9 * 9);
}

#[test]
fn explicit_window_bounds() {
    let o = latgreen(&["green-table", "--window", "-1:2,0:0", "--nodes", "64"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count() - 1, 4);
}

#[test]
fn g0_value_at_m2_n_minus2() {
    let o = latgreen(&["green-table", "--g0", "--target", "0,0", "--window", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // (m, n) = (2, −2) is (μ, ν) = (0, −2) with m = μ − ν, n = μ + ν
    let (re, im) = csv_value(&stdout(&o), 0, -2);
    assert!((re - 2.0).abs() < 1e-10 && im.abs() < 1e-10, "{re} {im}");
}

#[test]
fn degenerate_lambda_exits_2() {
    for lambda in ["i", "-i"] {
        let o = latgreen(&["green-table", "--lambda", lambda]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("degenerate contour"), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn invalid_config_exits_2() {
    for args in [
        &["green-table", "--nodes", "8"][..],
        &["green-table", "--tol", "0"],
        &["green-table", "--lambda", "abc"],
        &["green-table", "--target", "1"],
        &["green-table", "--window", "3:1,0:0"],
        &["green-table", "--format", "xml"],
    ] {
        assert_eq!(latgreen(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn env_var_sets_default_nodes() {
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["green-table", "--window", "1", "--format", "json"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_latgreen"))
            .args(&args)
            .env("GREEN_NODES", env)
            .output()
            .unwrap()
    };
    let o = run("96", &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"nodes\": 96"));
    let o = run("96", &["--nodes", "128"]);
    assert!(stdout(&o).contains("\"nodes\": 128"));
    assert_eq!(run("4", &[]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("t{k}.csv"))).collect();
    for p in &paths {
        let o = latgreen(&["green-table", "--lambda", "1+0.5i", "--window", "3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn json_table_metadata() {
    let o = latgreen(&["green-table", "--lambda", "3", "--window", "1", "--format", "json", "--target", "1,-1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("\"kind\": \"G\""));
    assert!(text.contains("\"one_sided_limit\": true"));
    assert!(text.contains("\"mu_t\": 1"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing/table.csv");
    let o = latgreen(&["green-table", "--window", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn missing_backend_file_exits_3() {
    let o = latgreen(&["verify", "--backend", "/no/such/data.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn verify_sphere_defaults_pass() {
    let o = latgreen(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().count() >= 10);
    assert!(text.lines().all(|l| l.starts_with("ok ")), "{text}");
}

#[test]
fn verify_flipped_orientation_exits_1() {
    let o = latgreen(&["verify", "--flip-orientation", "--window", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL orientation"));
    assert!(stderr(&o).contains("failed: orientation"));
}

#[test]
fn verify_json_report() {
    let o = latgreen(&["verify", "--window", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"passed\": true"));
}

#[test]
fn verify_theta_data() {
    let o = latgreen(&["verify", "--backend", &data("genus2.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("theta quasi-periodicity"));
}

#[test]
fn nonsymmetric_riemann_matrix_exits_2() {
    let o = latgreen(&["verify", "--backend", &data("nonsymmetric.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("not symmetric"));
}

#[test]
fn green_table_rejects_theta_backend() {
    let o = latgreen(&["green-table", "--backend", &data("genus2.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quasimomentum_map_grid_and_poles() {
    let o = latgreen(&["quasimomentum-map", "--contour", "0.5", "--samples", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let at = |re: &str, im: &str| rows.iter().find(|r| r[0] == "grid" && r[3] == re && r[4] == im).unwrap();
    assert_eq!(at("0.0", "0.0")[6].parse::<f64>().unwrap(), 0.0);
    assert_eq!(at("0.0", "1.0")[7], "true");
    assert_eq!(at("0.0", "-1.0")[7], "true");
    let contour: Vec<_> = rows.iter().filter(|r| r[0] == "contour").collect();
    assert_eq!(contour.len(), 32);
    // real λ: the level set is the real axis
    assert!(contour.iter().all(|r| r[4].parse::<f64>().unwrap().abs() < 1e-12));
}

#[test]
fn quasimomentum_map_degenerate_contour_exits_2() {
    let o = latgreen(&["quasimomentum-map", "--contour", "i"]);
    assert_eq!(o.status.code(), Some(2));
}
