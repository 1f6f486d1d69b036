use std::process::{Command, Output};

use serde_json::Value;

fn heatode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatode")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn ode_print_displays() {
    let out = heatode(&["ode", "print", "--n", "2", "--p", "c4=24"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "h''' + 12*h*h'' - 18*h'^2 = 0\n");
    assert_eq!(stdout(&heatode(&["ode", "print", "--n", "1"])), "h'' + 6*h*h' + 4*h^3 = 0\n");
    let v = json(&heatode(&["ode", "print", "--n", "3", "--p", "c5=48", "--json"]));
    assert_eq!(v["P"], "48*x2*x3");
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["ode", "print", "--n", "2", "--p", "c4=bad"][..],
        &["ode", "print", "--n", "2", "--p", "c5=1"],
        &["series", "phi", "--n", "1", "--delta", "2"],
        &["integrate", "--n", "1", "--h0", "0.5"],
        &["verify", "no-such-suite"],
        &["sl2", "orbit", "--mobius", "2,1,1,2"],
        &["sl2", "orbit", "--mobius", "1,0,0"],
        &["frobnicate"],
    ] {
        let out = heatode(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn ode_basis_lists_names() {
    let out = stdout(&heatode(&["ode", "basis", "--n", "4"]));
    assert_eq!(out, "c62\tp3000\tx2^3\nc63\tp0200\tx3^2\nc64\tp1010\tx2*x4\n");
    assert_eq!(stdout(&heatode(&["ode", "basis", "--n", "1"])), "V_1 is zero\n");
}

#[test]
fn det_matches_for_n3() {
    let v = json(&heatode(&["ode", "det", "--n", "3", "--json"]));
    assert_eq!(v["b"], "4/1");
    assert_eq!(v["P"], "-16*x2*x3");
}

#[test]
fn verify_rational_is_exact_and_deterministic() {
    let a = heatode(&["verify", "rational", "--n", "4", "--seed", "7"]);
    assert!(a.status.success());
    let v = json(&a);
    assert_eq!(v["passed"], true);
    let residuals = v["checks"][0]["detail"]["residuals"].as_array().unwrap();
    assert_eq!(residuals.len(), 20);
    assert!(residuals.iter().all(|r| r == "0/1"));
    let b = heatode(&["verify", "rational", "--n", "4", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let c = heatode(&["verify", "rational", "--n", "4", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn verify_dims_and_detmatch() {
    let v = json(&heatode(&["verify", "dims", "--max-n", "12"]));
    let rows = v["checks"][0]["detail"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[12]["dim"], 33);
    let v = json(&heatode(&["verify", "detmatch", "--n", "5"]));
    assert_eq!(v["checks"][0]["detail"]["b"], "6/1");
    assert!(v["checks"][0]["detail"]["match"].is_boolean());
}

#[test]
fn series_outputs() {
    let v = json(&heatode(&["series", "phi", "--n", "1", "--delta", "0", "--K", "6"]));
    let polys: Vec<&str> = v["coeffs"].as_array().unwrap().iter().map(|c| c["poly"].as_str().unwrap()).collect();
    assert_eq!(polys, ["-2*x2", "0", "60*x2^2", "0", "-5400*x2^3"]);

    let v = json(&heatode(&["series", "table", "--n", "2", "--c", "2", "--delta", "0", "--p", "p20=1", "--K", "8"]));
    let entries = v["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        let a = e["a"].as_str().unwrap();
        let (num, den) = a.split_once('/').unwrap();
        assert_eq!(den, "1", "{a}");
        assert!(!num.starts_with('-'), "{a}");
    }

    let v = json(&heatode(&["series", "sigma", "--K", "6"]));
    assert_eq!(v["coeffs"][6]["order"], 13);
    assert_eq!(v["coeffs"][2]["poly"], "-1/2*g2");
    let v = json(&heatode(&["series", "psi", "--K", "3"]));
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 3);
}

#[test]
fn integrate_float_tracks_closed_form() {
    let out = heatode(&["integrate", "--n", "0", "--h0", "1", "--t-end", "1", "--step", "0.01", "--mode", "float"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r,h"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((f[2] - 1.0 / (f[0] + 1.0)).abs() < 1e-9);
        rows += 1;
    }
    assert_eq!(rows, 101);
}

#[test]
fn integrate_exact_and_json() {
    let out = heatode(&["integrate", "--n", "2", "--p", "c4=24", "--h0", "1/2", "--x0", "1,-1", "--t-end", "1/2", "--step", "1/2"]);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "t,r,h,x2,x3");
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("1/2,"));
    let v = json(&heatode(&["integrate", "--n", "1", "--h0", "1/4", "--step", "1/4", "--t-end", "1/2", "--json", "--mode", "exact"]));
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["columns"].as_array().unwrap().len(), 4);
}

#[test]
fn integrate_reports_blow_up() {
    let out = heatode(&["integrate", "--n", "0", "--h0", "-1", "--t-end", "2", "--step", "0.01", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(1));
    let t = json(&out)["blow_up"]["t"].as_f64().unwrap();
    assert!((0.99..1.05).contains(&t));
}

#[test]
fn sl2_orbit_keeps_solutions() {
    let out = heatode(&["sl2", "orbit", "--mobius", "2,1,1,1", "--poles", "0,1,-1", "--t", "1/2,2", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["n"], 2);
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["residual"], "0/1");
    }
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("heatode-cli-{}.json", std::process::id()));
    let out = heatode(&["series", "sigma", "--K", "2", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["K"], 2);
    std::fs::remove_file(path).ok();
}
