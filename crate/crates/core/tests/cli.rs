use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netdecide(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netdecide"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn simulate_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = netdecide(
        &["simulate", "--preset", "fig5", "--replicas", "2", "--iterations", "200", "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let msd = fs::read_to_string(out.join("msd.csv")).unwrap();
    assert_eq!(msd.lines().next().unwrap(), "iteration,msd0_db,msd1_db,agreement_fraction");
    assert_eq!(msd.lines().count(), 202);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["iterations"], 200);
    assert!(meta["version"].is_string());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["replicas"], 2);
}

#[test]
fn analyze_chain_reports_decreasing_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("chain.json");
    fs::write(&cfg, r#"{"kind": "chain_sweep", "chain": {"agents": [6], "k_max": 5}}"#).unwrap();
    let o = netdecide(&["analyze-chain", "--config", "chain.json", "--out", "sweep"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("sweep/chain_sweep.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (chain, n, k, rho) = (col("chain"), col("N"), col("K"), col("rho_q"));
    let rows: Vec<(u32, f64)> = rdr
        .records()
        .map(|r| r.unwrap())
        .filter(|r| &r[chain] == "mean_field" && &r[n] == "6")
        .map(|r| (r[k].parse().unwrap(), r[rho].parse().unwrap()))
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1), "{rows:?}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("N = 6: rho(Q) strictly decreasing in K: true"));
}

#[test]
fn unstable_step_size_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"mu": 1.5}"#).unwrap();
    let o = netdecide(&["simulate", "--config", "bad.json", "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("mu") && e.contains("rho(R_u)"), "{e}");
    assert!(!dir.path().join("x").exists());
}

#[test]
fn bad_inputs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = netdecide(&["simulate", "--preset", "fig99"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown preset"));

    let o = netdecide(&["simulate", "--config", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read"));

    fs::write(dir.path().join("typo.json"), r#"{"agentz": 3}"#).unwrap();
    let o = netdecide(&["simulate", "--config", "typo.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("agentz"));

    let o = netdecide(&["fish", "--preset", "fig5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("taken"), "a file").unwrap();
    let o = netdecide(&["simulate", "--replicas", "1", "--iterations", "20", "--out", "taken"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn classify_bench_and_fish_run() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bench.json"),
        r#"{"kind": "classify_bench", "bench": {"samples": 2000, "tau_samples": 10000, "oracle_trials": 10000}}"#,
    )
    .unwrap();
    let o = netdecide(&["classify-bench", "--config", "bench.json", "--out", "b"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let bench: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(bench["tau_hat"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("b/classify_bench.json").exists());

    let o = netdecide(&["fish", "--iterations", "100", "--out", "f"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let traj = fs::read_to_string(dir.path().join("f/trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next().unwrap(), "step,agent,x1,x2,v1,v2,g_global,msd_to_target");
}
