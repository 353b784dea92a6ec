use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = "\
# small but complete experiment
partition.n1 = 1
partition.n2 = 2
n_e = 3
evolution.t_max = 40
evolution.n_samples = 9
search.max_iterations = 200
";

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_decolab"));
    cmd.env_remove("DECOLAB_SEED");
    cmd
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_config(dir.path(), "good.cfg", SMALL);
    let out = run(bin().args(["validate", "--config"]).arg(&good));
    assert_eq!(out.status.code(), Some(0));

    let bad = write_config(dir.path(), "bad.cfg", "lambda = 0.1\ncoupling = 2\n");
    let out = run(bin().args(["validate", "--config"]).arg(&bad));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coupling"));

    let inconsistent = write_config(
        dir.path(),
        "gap.cfg",
        "energy.env.lo = 6\nenergy.env.hi = 7\n",
    );
    assert_eq!(
        run(bin().args(["validate", "--config"]).arg(&inconsistent))
            .status
            .code(),
        Some(2)
    );

    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        run(bin().args(["validate", "--config"]).arg(&missing))
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(bin().arg("run")).status.code(), Some(2));
    assert_eq!(
        run(bin().args(["run", "--config", "x", "--format", "xml"]))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn run_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(bin()
            .args(["run", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out));
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let csv = std::fs::read(&a).unwrap();
    assert_eq!(csv, std::fs::read(&b).unwrap());
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("time,dist_eq6,dist_eq7,min_ppt_eig,n_negative_ppt\n"));
    assert_eq!(text.lines().count(), 10);
    assert!(!text.contains('\r'));
}

#[test]
fn seed_priority() {
    let dir = tempfile::tempdir().unwrap();
    let no_seed = write_config(dir.path(), "a.cfg", SMALL);
    let seeded = write_config(dir.path(), "b.cfg", &format!("{SMALL}seed = 5\n"));
    let csv = |cmd: &mut Command| {
        let o = run(cmd);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        stdout(&o)
    };

    let default = csv(bin().args(["run", "--config"]).arg(&no_seed));
    let explicit_1 = csv(bin().args(["run", "--seed", "1", "--config"]).arg(&no_seed));
    let five = csv(bin().args(["run", "--config"]).arg(&seeded));
    assert_eq!(default, explicit_1);
    assert_ne!(default, five);

    // environment is the lowest-priority source
    let from_env = csv(bin()
        .env("DECOLAB_SEED", "5")
        .args(["run", "--config"])
        .arg(&no_seed));
    assert_eq!(from_env, five);
    let config_wins = csv(bin()
        .env("DECOLAB_SEED", "9")
        .args(["run", "--config"])
        .arg(&seeded));
    assert_eq!(config_wins, five);
    let flag_wins = csv(bin()
        .env("DECOLAB_SEED", "9")
        .args(["run", "--seed", "1", "--config"])
        .arg(&seeded));
    assert_eq!(flag_wins, default);

    let bad_env = run(bin()
        .env("DECOLAB_SEED", "abc")
        .args(["run", "--config"])
        .arg(&no_seed));
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn run_json_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let o = run(bin()
        .args(["run", "--format", "json", "--config"])
        .arg(&cfg));
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0]["time"], 0.0);
    assert_eq!(rows[0]["n_negative_ppt"], 1);
}

#[test]
fn config_output_path_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config.json");
    let cfg = write_config(
        dir.path(),
        "small.cfg",
        &format!(
            "{SMALL}output.path = {}\noutput.format = json\n",
            target.display()
        ),
    );
    let o = run(bin().args(["run", "--config"]).arg(&cfg));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let _: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();

    let unwritable = write_config(
        dir.path(),
        "bad_out.cfg",
        &format!(
            "{SMALL}output.path = {}\n",
            dir.path().join("missing/x.csv").display()
        ),
    );
    assert_eq!(
        run(bin().args(["run", "--config"]).arg(&unwritable))
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn search_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "small.cfg", SMALL);
    let o = run(bin().args(["search", "--config"]).arg(&cfg));
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in [
        "seed",
        "hs_dist",
        "fidelity_dist",
        "ensemble_size",
        "iterations",
        "hs_to_decohered",
        "fidelity_to_decohered",
        "target_hs_to_decohered",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let again = run(bin().args(["search", "--config"]).arg(&cfg));
    assert_eq!(stdout(&o), stdout(&again));

    let csv = run(bin()
        .args(["search", "--format", "csv", "--config"])
        .arg(&cfg));
    assert_eq!(csv.status.code(), Some(2));
}
