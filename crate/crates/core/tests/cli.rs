use std::path::Path;
use std::process::{Command, Output};

fn wstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wstate"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn written(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter_map(|l| l.strip_prefix("wrote "))
        .map(str::to_string)
        .collect()
}

#[test]
fn help_lists_every_scenario() {
    let o = wstate(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for cmd in [
        "measure-only",
        "feedback",
        "sweep",
        "decay-sets",
        "no-feedback-decay",
        "filter-mismatch",
        "oracle-check",
    ] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn measure_only_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = wstate(&[
        "measure-only",
        "--trajectories",
        "4",
        "--t-final",
        "1",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = written(&o);
    assert!(!files.is_empty());
    for f in &files {
        assert!(Path::new(f).starts_with(&out));
        assert!(std::fs::metadata(f).unwrap().len() > 0);
    }
    assert!(files.iter().any(|f| f.ends_with("provenance.toml")));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = wstate(&[
            "feedback",
            "--trajectories",
            "3",
            "--t-final",
            "2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let mut files: Vec<(String, Vec<u8>)> = written(&o)
            .into_iter()
            .filter(|f| !f.ends_with("provenance.toml"))
            .map(|f| {
                let name = Path::new(&f).file_name().unwrap().to_string_lossy().into_owned();
                (name, std::fs::read(&f).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn sweep_accepts_negative_grid() {
    let dir = tempfile::tempdir().unwrap();
    let o = wstate(&[
        "sweep",
        "--param",
        "chi",
        "--grid",
        "-0.3,-0.5",
        "--trajectories",
        "2",
        "--t-final",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files = written(&o);
    let csv = files.iter().find(|f| f.ends_with(".csv")).expect("a csv output");
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.contains("-0.3") && text.contains("-0.5"), "{text}");
}

#[test]
fn invalid_values_fail_cleanly() {
    let o = wstate(&["feedback", "--trajectories", "0"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error:"));

    let o = wstate(&["feedback", "--dt", "-1"]);
    assert!(!o.status.success());
}

#[test]
fn config_file_must_match_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "scenario = \"measure_only\"\nn_trajectories = 2\n").unwrap();
    let o = wstate(&["feedback", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("measure_only"));

    std::fs::write(&path, "scenario = \"feedback\"\nbogus = 1\n").unwrap();
    let o = wstate(&["feedback", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}
