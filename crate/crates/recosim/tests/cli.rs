//! End-to-end tests of the thin CLI: run a config, query oracles, process a
//! graph file, and exercise the acceptance entry point.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recosim"))
}

#[test]
fn run_subcommand_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    std::fs::write(
        &config,
        "setting = finite\n\
         graph = complete_bipartite(4, 8)\n\
         reward = planted(1)\n\
         policy = bpexp\n\
         policy = idexp\n\
         r = 1\n\
         trials = 500\n\
         seed = 3\n",
    )
    .unwrap();

    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--per-trial", "--jobs", "1"])
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["aggregate.csv", "trials.csv"] {
        let a = std::fs::read(out_a.join(file)).unwrap();
        let b = std::fs::read(out_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
    let agg = std::fs::read_to_string(out_a.join("aggregate.csv")).unwrap();
    assert!(agg.starts_with("policy,"));
    assert_eq!(agg.lines().count(), 3, "header + one row per policy");
}

#[test]
fn run_subcommand_seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    std::fs::write(
        &config,
        "setting = finite\n\
         graph = complete_bipartite(3, 5)\n\
         reward = planted(1)\n\
         policy = uniform_explore\n\
         trials = 400\n\
         seed = 1\n",
    )
    .unwrap();
    let run = |seed: &str| {
        let out = bin()
            .args(["run"])
            .arg(&config)
            .args(["--seed", seed])
            .output()
            .unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
}

#[test]
fn invalid_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    std::fs::write(&config, "setting = finite\nwat = 1\n").unwrap();
    let out = bin().args(["run"]).arg(&config).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn accept_rejects_unknown_suite() {
    let out = bin().args(["accept", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown suite"));
    assert!(stderr.contains("oracle-exact"));
}

#[test]
fn accept_runs_fast_suite() {
    let out = bin().args(["accept", "run-lengths"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

#[test]
fn oracle_subcommands_print_csv() {
    let out = bin()
        .args(["oracle", "search-game", "--users", "2", "--items", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("3/2,3/2,3/2"), "{stdout}");

    let out = bin()
        .args(["oracle", "run-lengths", "--reds", "3", "--blues", "1"])
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("2,2.5"), "{stdout}");
    assert!(stdout.contains("max 5/2"), "{stdout}");
}

#[test]
fn makespan_oracle_reads_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    // Two users, five items, full connectivity: makespan 3.
    let mut text = String::from("# demo graph\n2 5\n");
    for u in 0..2 {
        for i in 0..5 {
            text.push_str(&format!("{u} {i}\n"));
        }
    }
    std::fs::write(&graph, text).unwrap();
    let out = bin().args(["oracle", "makespan"]).arg(&graph).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("# makespan 3"), "{stdout}");
    // One owner line per item.
    assert_eq!(stdout.lines().count(), 6);
}

#[test]
fn shipped_configs_parse_and_run_briefly() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for (name, trials) in [("finite_bpexp.cfg", "50"), ("infinite_ulexp.cfg", "2")] {
        let out = bin()
            .args(["run"])
            .arg(root.join(name))
            .args(["--trials", trials])
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{name}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
