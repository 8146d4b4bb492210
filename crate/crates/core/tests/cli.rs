use vcluster::cli::{parse_config_file, run, EXIT_OK, EXIT_USAGE, EXIT_ZERO_ACCEPTED};

fn vcluster(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("vcluster").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn csv_body(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn selftest_passes() {
    let (code, out, err) = vcluster(&["selftest", "--format", "csv"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let rows = csv_body(&out);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[1] == "true"), "{out}");
}

#[test]
fn sweep_is_increasing_and_below_threshold_through_two_percent() {
    let (code, out, _) = vcluster(&["sweep"]);
    assert_eq!(code, EXIT_OK);
    let header = out.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "p,L,tau,p_q0,p_q1,p_s,p_fail,q,verdict,kappa,R,N,K,C,CR"
    );
    let rows = csv_body(&out);
    assert_eq!(rows.len(), 7);
    let q: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    assert!(q.windows(2).all(|w| w[0] < w[1]), "{q:?}");
    assert_eq!(rows.last().unwrap()[0], "0.02");
    assert!(rows.iter().all(|r| r[8] == "true"));
}

#[test]
fn sweep_with_fixed_leaves_is_increasing() {
    let (code, out, _) = vcluster(&["sweep", "--L", "9", "--p-grid", "0.005,0.01,0.015,0.02"]);
    assert_eq!(code, EXIT_OK);
    let q: Vec<f64> = csv_body(&out)
        .iter()
        .map(|r| r[7].parse().unwrap())
        .collect();
    assert!(q.windows(2).all(|w| w[0] < w[1]), "{q:?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "channel",
        "--p-grid",
        "0.01,0.02",
        "--trials",
        "5000",
        "--seed",
        "9",
        "--format",
        "csv",
    ];
    let (c1, a, _) = vcluster(&args);
    let (c2, b, _) = vcluster(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(a, b);
    let mut more = args.to_vec();
    more.extend(["--workers", "3"]);
    assert_eq!(vcluster(&more).1, a);
}

#[test]
fn worker_count_does_not_change_connect_artifacts() {
    let base = [
        "connect", "--p", "0.02", "--L", "5", "--trials", "40", "--source", "pair",
    ];
    let one = vcluster(&[&base[..], &["--workers", "1"]].concat());
    let two = vcluster(&[&base[..], &["--workers", "2"]].concat());
    assert_eq!(one.0, EXIT_OK, "{}", one.2);
    assert_eq!(one.1, two.1);
}

#[test]
fn artifacts_embed_config_seed_and_version() {
    let (code, out, _) = vcluster(&[
        "logical-error",
        "--p",
        "0.02",
        "--trials",
        "2000",
        "--seed",
        "42",
    ]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["command"], "logical-error");
    assert_eq!(v["config"]["trials"], 2000);
    assert!(v["config"].get("workers").is_none());
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    let out = dir.path().join("out.json");
    std::fs::write(
        &conf,
        "# readout\ntrials = 300\nseed = 5\np-grid = 0.01, 0.02\n",
    )
    .unwrap();
    let code = vcluster(&[
        "logical-error",
        "--config",
        conf.to_str().unwrap(),
        "--seed",
        "6",
        "--out",
        out.to_str().unwrap(),
    ])
    .0;
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["trials"], 300);
    assert_eq!(v["config"]["seed"], 6);
    assert_eq!(v["config"]["p"], serde_json::json!([0.01, 0.02]));
    // A single --p overrides a grid from the file.
    let (code, text, _) = vcluster(&[
        "logical-error",
        "--config",
        conf.to_str().unwrap(),
        "--p",
        "0.005",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&text).unwrap()["config"]["p"],
        serde_json::json!([0.005])
    );
}

#[test]
fn config_file_rejects_unknown_keys() {
    assert!(parse_config_file("trials = 3\nspeed = 9\n").is_err());
    assert!(parse_config_file("trials 3\n").is_err());
    assert!(parse_config_file("seed = 1\nseed = 2\n").is_err());
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "colour = blue\n").unwrap();
    assert_eq!(
        vcluster(&["sweep", "--config", conf.to_str().unwrap()]).0,
        EXIT_USAGE
    );
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(vcluster(&["sweep", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(vcluster(&["sweep", "--code", "golay"]).0, EXIT_USAGE);
    assert_eq!(vcluster(&["sweep", "--p", "1.5"]).0, EXIT_USAGE);
    assert_eq!(vcluster(&["channel", "--trials", "0"]).0, EXIT_USAGE);
    assert_eq!(
        vcluster(&["sweep", "--p", "0.01", "--p-grid", "0.01,0.02"]).0,
        EXIT_USAGE
    );
    assert_eq!(vcluster(&["connect", "--source", "tree"]).0, EXIT_USAGE);
    assert_eq!(vcluster(&[]).0, EXIT_USAGE);
    assert_eq!(vcluster(&["--help"]).0, EXIT_OK);
}

#[test]
fn zero_acceptance_exits_three() {
    let (code, _, err) = vcluster(&["channel", "--p", "0.9", "--trials", "3"]);
    assert_eq!(code, EXIT_ZERO_ACCEPTED, "{err}");
}

#[test]
fn resources_and_star_reports() {
    let (code, out, _) = vcluster(&["resources", "--p", "0.01"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let point = &v["results"]["points"][0];
    assert_eq!(point["count"]["k"], 1009);
    assert!(point["estimate"]["cr"].as_f64().unwrap() > 0.0);
    let (code, out, _) = vcluster(&[
        "star", "--p", "0.01", "--L", "3", "--trials", "20", "--format", "csv",
    ]);
    assert_eq!(code, EXIT_OK);
    let rows = csv_body(&out);
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][3], "root");
}
