use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qaoae(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qaoae")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn small_sweep(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "randomized",
        "--graph",
        "complete",
        "--sizes",
        "4,6",
        "--depth",
        "4",
        "--problems",
        "3",
        "--seed",
        "7",
        "--set",
        "spectrum=true",
        "--output",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    qaoae(&args)
}

#[test]
fn sweep_writes_artifacts_and_replays_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let out = small_sweep(&first, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(first.join("records.csv")).unwrap();
    assert!(csv.starts_with("mode,graph_kind,problem_id,N,p_or_T,layer_or_time,S,r_mean,cost,seed\n"));
    // 2 sizes x 3 problems x 5 layers
    assert_eq!(csv.lines().count(), 1 + 2 * 3 * 5);
    assert!(first.join("summary.json").exists());

    let replay = tmp.path().join("replay");
    let manifest = first.join("manifest.json");
    let out = qaoae(&["randomized", "--config", manifest.to_str().unwrap(), "--output", replay.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(first.join("records.csv")).unwrap(), fs::read(replay.join("records.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    let one = tmp.path().join("one");
    let three = tmp.path().join("three");
    assert_eq!(code(&small_sweep(&one, &["--threads", "1"])), 0);
    let out = Command::new(env!("CARGO_BIN_EXE_qaoae"))
        .env("QAOAE_THREADS", "3")
        .args(["randomized", "--graph", "complete", "--sizes", "4,6", "--depth", "4", "--problems", "3"])
        .args(["--seed", "7", "--set", "spectrum=true", "--output", three.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(fs::read(one.join("records.csv")).unwrap(), fs::read(three.join("records.csv")).unwrap());
}

#[test]
fn error_categories_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    assert_eq!(code(&qaoae(&["randomized", "--no-such-flag"])), 2);
    assert_eq!(code(&qaoae(&["randomized", "--graph", "complete", "--sizes", "4", "--set", "depht=3"])), 2);
    let odd = qaoae(&["randomized", "--graph", "complete", "--sizes", "5", "--output", dir]);
    assert_eq!(code(&odd), 3);
    assert!(String::from_utf8_lossy(&odd.stderr).starts_with("validation error:"));
    let missing = qaoae(&["analyze", "--fit", "page", "--input", tmp.path().join("nope.csv").to_str().unwrap()]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn config_mode_must_match_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"mode":"annealing","graph_kind":"linear","sizes":[4],"times":[1.0]}"#).unwrap();
    assert_eq!(code(&qaoae(&["randomized", "--config", cfg.to_str().unwrap()])), 3);
    let out = tmp.path().join("out");
    let ok = qaoae(&["anneal", "--config", cfg.to_str().unwrap(), "--problems", "2", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    // 11 observations per trajectory, t = 0 included
    assert_eq!(fs::read_to_string(out.join("records.csv")).unwrap().lines().count(), 1 + 2 * 11);
}

#[test]
fn analyze_fits_and_figures() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = tmp.path().join("sweep");
    assert_eq!(code(&small_sweep(&sweep, &[])), 0);

    let records = sweep.join("records.csv");
    let out = qaoae(&["analyze", "--fit", "page", "--input", records.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(fit["kind"], "linear");
    assert_eq!(fit["n_points"], 2);
    assert!(fit["slope"].as_f64().unwrap() > 0.0);

    let summary = sweep.join("summary.json");
    let figs = tmp.path().join("figs");
    let run = |fig: &str| {
        qaoae(&["analyze", "--figure", fig, "--summary", summary.to_str().unwrap(), "--output", figs.to_str().unwrap()])
    };
    assert_eq!(code(&run("fig2b")), 0);
    let fig2b = fs::read_to_string(figs.join("fig2b_N6.csv")).unwrap();
    assert!(fig2b.starts_with("ell,S_mean,S_stderr\n"));
    assert_eq!(fig2b.lines().count(), 1 + 5);
    assert_eq!(code(&run("fig3d")), 0);
    assert!(fs::read_to_string(figs.join("fig3d_N6.csv")).unwrap().starts_with("x,scaled_lambda2_mean,mp_reference\n"));
    assert_eq!(code(&run("fig3b")), 0);
    assert!(fs::read_to_string(figs.join("fig3b_N6.csv")).unwrap().starts_with("r,P_r,poisson_reference\n"));
    // wrong graph kind, wrong mode, unknown id
    assert_eq!(code(&run("fig2a")), 3);
    assert_eq!(code(&run("fig5g")), 3);
    assert_eq!(code(&run("fig9z")), 2);
}

#[test]
fn annealing_figures_include_decay_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("anneal");
    let run = qaoae(&[
        "anneal", "--graph", "complete", "--sizes", "4,6,8", "--time-list", "1,2,4", "--dt", "0.1", "--problems", "2",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let figs = tmp.path().join("figs");
    let summary = out.join("summary.json");
    let fig = qaoae(&["analyze", "--figure", "fig5g", "--summary", summary.to_str().unwrap(), "--output", figs.to_str().unwrap()]);
    assert_eq!(code(&fig), 0, "{}", String::from_utf8_lossy(&fig.stderr));
    assert!(fs::read_to_string(figs.join("fig5g.csv")).unwrap().starts_with("T,b_of_T\n"));
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(figs.join("fig5g_meta.json")).unwrap()).unwrap();
    assert!(meta["powerfit_alpha"].is_f64());
    let decay = qaoae(&["analyze", "--fit", "decay", "--input", out.join("records.csv").to_str().unwrap()]);
    assert_eq!(code(&decay), 0);
}

#[test]
fn graphs_and_stats() {
    let tmp = tempfile::tempdir().unwrap();
    let out = qaoae(&["gen-graphs", "--graph", "regular3", "--sizes", "8", "--problems", "2", "--output", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let graph = tmp.path().join("graphs/regular3_N8_1.json");
    let stats = qaoae(&["graph-stats", "--input", graph.to_str().unwrap()]);
    assert_eq!(code(&stats), 0);
    let v: serde_json::Value = serde_json::from_slice(&stats.stdout).unwrap();
    assert_eq!(v["n_edges"], 12);
    assert_eq!(v["degrees"], serde_json::json!([3, 3, 3, 3, 3, 3, 3, 3]));
    let ens = qaoae(&["graph-stats", "--sizes", "8,10", "--problems", "5"]);
    assert_eq!(code(&ens), 0);
    assert!(String::from_utf8_lossy(&ens.stdout).starts_with("N,avg_shortest_path_mean,avg_shortest_path_stderr\n"));
}

#[test]
fn selftest_passes() {
    let out = qaoae(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("oracle equivalence") && !table.contains("FAIL"));
}
