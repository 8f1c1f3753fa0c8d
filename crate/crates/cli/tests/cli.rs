use std::fs;
use std::process::{Command, Output};

fn cbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbi"))
        .args(args)
        .output()
        .expect("spawn cbi")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parsed CSV as header plus rows.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn zero_doubt_assessment_matches_iid() {
    let o = cbi(&[
        "assess",
        "--prior",
        "beta:1,10000",
        "--b",
        "1e-4",
        "--n",
        "10000",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let cons: f64 = rows[0][column(&h, "conservative")].parse().unwrap();
    let iid: f64 = rows[0][column(&h, "iid")].parse().unwrap();
    let expect = 1.0 - (1.0f64 - 1e-4).powi(20_000);
    assert!((cons - expect).abs() < 1e-6, "{cons}");
    assert!((cons - iid).abs() < 1e-9);
    assert!((cons - 0.8647).abs() < 1e-4);
    assert_eq!(rows[0][column(&h, "status")], "ok");
}

#[test]
fn pk4_violation_exits_2() {
    let o = cbi(&[
        "assess",
        "--prior",
        "beta:2,20000",
        "--b",
        "1e-4",
        "--n",
        "1000",
        "--phi1",
        "0.7",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PK4 violated"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn too_few_demands_rejected_with_hint() {
    let o = cbi(&[
        "assess",
        "--prior",
        "beta:2,20000",
        "--b",
        "1e-4",
        "--n",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n >= 2"));
    assert!(stderr(&o).contains("--iid-only"));

    let o = cbi(&[
        "assess",
        "--prior",
        "beta:2,20000",
        "--b",
        "1e-4",
        "--n",
        "0",
        "--iid-only",
    ]);
    assert!(o.status.success());
    let (h, rows) = table(&stdout(&o));
    let iid: f64 = rows[0][column(&h, "iid")].parse().unwrap();
    assert!((iid - 0.594).abs() < 1e-3);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(cbi(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        cbi(&["assess", "--b", "1e-4", "--n", "10"]).status.code(),
        Some(1)
    );
    assert_eq!(
        cbi(&["assess", "--prior", "gamma:1,2", "--b", "1e-4", "--n", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cbi(&["--help"]).status.code(), Some(0));
    assert_eq!(cbi(&["--version"]).status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "prior = { kind = \"beta\", alpha = 1.0, beta = 10000.0 }\nb = 1e-4\nn = 100\nphi1 = 0.05\nphi2 = 0.05\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = cbi(&["assess", "--config", cfg, "--n", "10000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows[0][column(&h, "n")], "10000");
    assert_eq!(rows[0][column(&h, "phi1")], "0.05");

    fs::write(dir.path().join("bad.toml"), "b = \"x\"").unwrap();
    let bad = dir.path().join("bad.toml");
    let o = cbi(&["assess", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_is_ordered_deterministic_and_flags_failures() {
    let args = [
        "sweep",
        "--prior",
        "beta:1,10000",
        "--prior",
        "beta:2,20000",
        "--b",
        "1e-4",
        "--phi1",
        "0.05",
        "--phi2",
        "0.05",
        "--axis",
        "n",
        "--logspace",
        "1e2,1e7,11",
    ];
    let a = cbi(&args);
    let b = cbi(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let (h, rows) = table(&stdout(&a));
    assert_eq!(rows.len(), 22);
    let (ni, ci, ii) = (
        column(&h, "n"),
        column(&h, "conservative"),
        column(&h, "iid"),
    );
    let ns: Vec<u64> = rows[..11].iter().map(|r| r[ni].parse().unwrap()).collect();
    assert!(ns.windows(2).all(|w| w[0] < w[1]));
    let cons: Vec<f64> = rows[..11].iter().map(|r| r[ci].parse().unwrap()).collect();
    let peak = cons.iter().cloned().fold(0.0, f64::max);
    assert!(cons[0] < peak && cons[10] < peak);
    let iid_last: f64 = rows[10][ii].parse().unwrap();
    assert!(iid_last > 0.999);

    let o = cbi(&[
        "sweep",
        "--prior",
        "beta:2,20000",
        "--b",
        "1e-4",
        "--n",
        "1000",
        "--phi2",
        "0.05",
        "--axis",
        "phi1",
        "--values",
        "0.1,0.7,0.2",
    ]);
    assert!(o.status.success());
    let (h, rows) = table(&stdout(&o));
    let s = column(&h, "status");
    assert_eq!(rows[0][s], "ok");
    assert!(rows[1][s].contains("PK4 violated"));
    assert_eq!(rows[2][s], "ok");
    assert_eq!(rows[1][column(&h, "phi1")], "0.7");
}

#[test]
fn sweep_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phi2.csv");
    let o = cbi(&[
        "sweep",
        "--prior",
        "beta:1,10000",
        "--b",
        "1e-4",
        "--n",
        "100000",
        "--axis",
        "phi2",
        "--values",
        "0,0.05,0.1,0.2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let (h, rows) = table(&fs::read_to_string(&out).unwrap());
    let c: Vec<f64> = rows
        .iter()
        .map(|r| r[column(&h, "conservative")].parse().unwrap())
        .collect();
    assert!(c.windows(2).all(|w| w[1] <= w[0]), "{c:?}");
}

#[test]
fn cutpoints_decrease_with_n() {
    let o = cbi(&[
        "cutpoints",
        "--prior",
        "beta:1,10000",
        "--b",
        "1e-4",
        "--phi1",
        "0.05",
        "--phi2",
        "0.05",
        "--logspace",
        "1e3,1e7,9",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 9);
    for name in ["c1_low", "c2_low", "c1_high", "c2_high"] {
        let i = column(&h, name);
        let v: Vec<f64> = rows.iter().map(|r| r[i].parse().unwrap()).collect();
        // equal up to the solver's mass tolerance where an end is pinned
        assert!(
            v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6)),
            "{name}: {v:?}"
        );
    }
    let m = column(&h, "lower_mass_residual");
    assert!(rows.iter().all(|r| r[m].parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn gdump_maxima_match_argmax() {
    let o = cbi(&["gdump", "--n", "10000", "--points", "2001"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(h, ["x", "g_lower", "g_upper"]);
    let x: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let step = x[1] - x[0];
    let peak = |col: usize| {
        rows.iter()
            .zip(&x)
            .filter(|(r, _)| !r[col].is_empty())
            .max_by(|a, b| {
                a.0[col]
                    .parse::<f64>()
                    .unwrap()
                    .total_cmp(&b.0[col].parse::<f64>().unwrap())
            })
            .map(|(_, &x)| x)
            .unwrap()
    };
    // maximisers of (1-x)^n (1 - (1 - r^2)^(n-1)), r = x/(1-x), and (1-x) - (1-x)^n,
    // located by a dense independent scan
    let scan = |f: &dyn Fn(f64) -> f64| {
        (1..200_000)
            .map(|i| i as f64 * 5e-9)
            .max_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    };
    let n = 10_000.0;
    let gl = |x: f64| {
        let r = x / (1.0 - x);
        (1.0 - x).powf(n) * (1.0 - (1.0 - r * r).powf(n - 1.0))
    };
    let gu = |x: f64| (1.0 - x) - (1.0 - x).powf(n);
    assert!((peak(1) - scan(&gl)).abs() <= step);
    assert!((peak(2) - scan(&gu)).abs() <= step);
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate", "--x", "0.3", "--lambda", "0.8", "--n", "40", "--chains", "4", "--seed", "9",
    ];
    let a = cbi(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, cbi(&args).stdout);
    let (h, rows) = table(&stdout(&a));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[column(&h, "trials")].len() == 40));

    let o = cbi(&[
        "simulate", "--x", "0.3", "--lambda", "0.8", "--n", "5", "--runs", "200000", "--seed", "2",
    ]);
    let (h, rows) = table(&stdout(&o));
    let z: f64 = rows[0][column(&h, "z_score")].parse().unwrap();
    assert!(z <= 3.0);

    let o = cbi(&["simulate", "--x", "0.8", "--lambda", "0.1", "--n", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle_check_passes() {
    let o = cbi(&["oracle-check"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("PASS"));
    let (h, rows) = table(&stdout(&o));
    let p = column(&h, "passed");
    let det_failures = rows
        .iter()
        .filter(|r| r[0] != "monte-carlo" && r[p] != "true")
        .count();
    assert_eq!(det_failures, 0);
}
