use std::path::Path;

use npeskin_cli::{run, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK};

fn npeskin(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["npeskin".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    argv.push("--out-dir".into());
    argv.push(out.display().to_string());
    run(argv)
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn simulate_writes_trace_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--init", "0.01*cos(2*s)", "--n", "32", "--dt", "0.01", "--t-end", "0.5"];
    assert_eq!(npeskin(&args, dir.path()), EXIT_OK);

    let trace = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,sup_h,sup_hprime,l2_hprime_sq,hhalf_hprime_sq,h32_norm,M_x,M_y,mean_h"
    );
    let sup_hprime: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(sup_hprime.len(), 6);
    assert!(sup_hprime.windows(2).all(|w| w[1] <= w[0]));

    let snap = std::fs::read_to_string(dir.path().join("snapshots/h_00000.csv")).unwrap();
    assert_eq!(snap.lines().count(), 33);

    let m = manifest(dir.path());
    assert_eq!(m["status"], "pass");
    assert_eq!(m["config"]["n"], 32);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 1 + 6 + 1);
    for f in files {
        assert!(dir.path().join(f.as_str().unwrap()).is_file(), "{f}");
    }
    assert!(m["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn identical_runs_give_identical_csv_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["simulate", "--init", "2:0.02:0.3 5:0.004", "--n", "32", "--t-end", "0.3", "--snapshot-stride", "5"];
    assert_eq!(npeskin(&args, a.path()), EXIT_OK);
    assert_eq!(npeskin(&args, b.path()), EXIT_OK);
    for name in ["diagnostics.csv", "snapshots/h_00000.csv", "snapshots/h_00006.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn = 16\nt_end = 0.1\ninit = 0.01*sin(s)\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(npeskin(&["simulate", "--config", cfg.to_str().unwrap(), "--n", "32"], &out), EXIT_OK);
    let m = manifest(&out);
    assert_eq!(m["config"]["n"], 32);
    assert_eq!(m["config"]["t_end"], 0.1);
    assert_eq!(m["config"]["init"], "0.01*sin(s)");
}

#[test]
fn verify_lemma_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(npeskin(&["verify", "--suite", "lemmas", "--seed", "7"], dir.path()), EXIT_OK);
    let m = manifest(dir.path());
    assert_eq!(m["checks"][0]["name"], "lemmas");
    assert_eq!(m["checks"][0]["detail"], "50/50 functions pass all four checks");
}

#[test]
fn verify_all_suites() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(npeskin(&["verify", "--n", "64"], dir.path()), EXIT_OK);
    assert_eq!(manifest(dir.path())["checks"].as_array().unwrap().len(), 5);
}

#[test]
fn oracle_matches_contour_solver() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(npeskin(&["oracle", "--n", "256", "--amplitude", "0.1"], dir.path()), EXIT_OK);
    let rows = std::fs::read_to_string(dir.path().join("oracle.csv")).unwrap();
    for line in rows.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - v[3]).abs() < 1e-6);
    }
}

#[test]
fn linear_and_sweep_pass_on_small_data() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(npeskin(&["linear", "--n", "32", "--t-end", "2"], &dir.path().join("lin")), EXIT_OK);
    let sweep = ["sweep", "--n", "32", "--t-end", "1", "--epsilon", "0.1,0.05,0.025"];
    assert_eq!(npeskin(&sweep, &dir.path().join("sweep")), EXIT_OK);
    let table = std::fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["linear", "--init", "0.4*cos(2*s)", "--n", "32", "--t-end", "5"];
    assert_eq!(npeskin(&args, dir.path()), EXIT_CHECK_FAILED);
    assert_eq!(manifest(dir.path())["status"], "fail");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(npeskin(&["simulate", "--bogus", "1"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--scheme", "euler"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--n", "48"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--init", "0.1*cos("], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--init=-1.5+0*s"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--scheme", "explicit-rk4", "--dt", "1"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["sweep", "--epsilon", "0.01,0.1"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["verify", "--suite", "nonsense"], out), EXIT_CONFIG);
    assert_eq!(npeskin(&["simulate", "--config", "/nonexistent/run.cfg"], out), EXIT_CONFIG);
    assert_eq!(run(["npeskin", "launch"]), EXIT_CONFIG);

    let blocker = out.join("file");
    std::fs::write(&blocker, "x").unwrap();
    assert_eq!(npeskin(&["verify", "--suite", "klein-gordon"], &blocker.join("sub")), EXIT_CONFIG);
}
