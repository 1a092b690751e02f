use std::path::Path;
use std::process::{Command, Output};

fn rpqv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpqv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn simulate_writes_zero_started_path() {
    let out = rpqv(&["simulate", "--H", "0.75", "--n", "1024", "--T", "1", "--seed", "7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 1025);
    assert_eq!(rows[0], "0,0");
    assert!(rows[1024].starts_with("1,"));
    let again = rpqv(&["simulate", "--H", "0.75", "--n", "1024", "--T", "1", "--seed", "7"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn periodogram_at_zero_is_terminal_square() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("path.csv");
    let sim = rpqv(&["simulate", "--n", "256", "--seed", "3", "--out", path.to_str().unwrap()]);
    assert!(sim.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let last: f64 = data_rows(&text).last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    for source in [
        vec!["periodogram", "--lambda", "0", "--input", path.to_str().unwrap()],
        vec!["periodogram", "--lambda", "0", "--n", "256", "--seed", "3"],
    ] {
        let out = rpqv(&source);
        assert!(out.status.success(), "{}", stderr(&out));
        let value: f64 = stdout(&out).trim().parse().unwrap();
        assert_eq!(value, last * last);
    }
    let before = std::fs::read(&path).unwrap();
    let out = rpqv(&["periodogram", "--input", path.to_str().unwrap(), "--L-grid", "0,10,1000"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].split(',').nth(1).unwrap().parse::<f64>().unwrap(), last * last);
    assert!(rows[2].ends_with(",exact"));
    assert_eq!(std::fs::read(&path).unwrap(), before, "input must not be modified");
}

#[test]
fn converge_is_reproducible_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "# small run\nexperiment = convergence\nn = 512\nreplicates = 8\nL-grid = 1, 10, 100\n").unwrap();
    let cfg_before = std::fs::read(&cfg).unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "4")] {
        let target = dir.path().join(name);
        let out = rpqv(&[
            "converge",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "42",
            "--threads",
            threads,
            "--out",
            target.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let summary = target.with_file_name(format!("{}.summary.csv", name.trim_end_matches(".csv")));
        let moments = target.with_file_name(format!("{}.moments.csv", name.trim_end_matches(".csv")));
        outputs.push([
            std::fs::read(&target).unwrap(),
            std::fs::read(summary).unwrap(),
            std::fs::read(moments).unwrap(),
        ]);
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let records = String::from_utf8(outputs[0][0].clone()).unwrap();
    assert!(records.starts_with("# experiment = convergence\n# seed = 42\n"));
    assert_eq!(data_rows(&records).len(), 8 * 3);
    assert_eq!(std::fs::read(&cfg).unwrap(), cfg_before);
}

#[test]
fn flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    std::fs::write(&cfg, "seed = 1\nn = 64\nreplicates = 2\n").unwrap();
    let out = rpqv(&["refine", "--config", cfg.to_str().unwrap(), "--n", "128", "--n-min", "32"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# n = 128\n") && text.contains("# n-min = 32\n"));
}

fn assert_config_error(args: &[&str], key: &str) {
    let out = rpqv(args);
    assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    assert!(stderr(&out).contains(&format!("`{key}`")), "{args:?}: {}", stderr(&out));
}

#[test]
fn config_errors_exit_two_and_name_the_key() {
    assert_config_error(&["converge", "--n", "64"], "seed");
    assert_config_error(&["simulate", "--n", "64"], "seed");
    assert_config_error(&["converge", "--seed", "1", "--H", "0.3"], "H");
    assert_config_error(&["converge", "--seed", "1", "--L-grid", "10,1"], "L-grid");
    assert_config_error(&["bias", "--seed", "1", "--n", "24"], "n");
    assert_config_error(&["converge", "--seed", "1", "--xi", "cauchy:1"], "xi");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = 1\nwidth = 3\n").unwrap();
    assert_config_error(&["fubini", "--config", cfg.to_str().unwrap()], "width");
}

#[test]
fn usage_errors_exit_two() {
    for args in [vec!["converge", "--seed", "1", "--bogus"], vec!["frobnicate"], vec![]] {
        let out = rpqv(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains("Usage"), "{args:?}");
    }
}

#[test]
fn help_lists_every_flag() {
    let out = rpqv(&["converge", "--help"]);
    assert!(out.status.success());
    let help = stdout(&out);
    for flag in [
        "--config",
        "--seed",
        "--H",
        "--T",
        "--n",
        "--n-min",
        "--L-grid",
        "--replicates",
        "--xi",
        "--quad",
        "--quad-nodes",
        "--process",
        "--threads",
        "--out",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
    let top = stdout(&rpqv(&["--help"]));
    for sub in ["simulate", "periodogram", "converge", "bias", "variance", "fubini", "refine"] {
        assert!(top.contains(sub), "{sub} missing");
    }
}

#[test]
fn experiment_subcommands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["bias", "--seed", "5", "--replicates", "200", "--n", "16"],
        &["bias", "--estimator", "randomized", "--seed", "5", "--replicates", "20", "--n", "256"],
        &["variance", "--seed", "5", "--replicates", "200"],
        &["fubini", "--seed", "5", "--replicates", "3", "--n", "64"],
        &["refine", "--seed", "5", "--replicates", "3", "--n", "256"],
    ];
    for args in cases {
        let target = dir.path().join("run.csv");
        let mut full = args.to_vec();
        full.extend(["--out", target.to_str().unwrap()]);
        let out = rpqv(&full);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        assert!(Path::new(&target).exists());
        assert!(dir.path().join("run.summary.csv").exists());
    }
}
