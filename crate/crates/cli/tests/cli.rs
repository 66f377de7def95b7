use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_revsynth");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, function: &str) -> String {
    let path = dir.join("exp.toml");
    fs::write(
        &path,
        format!(
            r#"function = "{function}"
seed = 11
runs = 3

[params]
d = 4
l = 6
s = 6
f = 6
g = 20
b = 16

[noise]
enabled = true
trials = 64

[sweep]
gates = [2, 3]
lambdas = [0.0, 1.0, 10.0]
"#
        ),
    )
    .unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn unknown_function_exits_2_and_lists_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "nosuch");
    let out = dir.path().join("o");
    let o = run(&["--config", &cfg, "--out", out.to_str().unwrap(), "synth"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("xor5") && err.contains("9sym"), "{err}");
}

#[test]
fn eval_reports_and_width_mismatch_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("empty.circuit");
    fs::write(&c, "lines 6\n").unwrap();
    let o = run(&["eval", c.to_str().unwrap(), "--function", "xor5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["err"], 0.5);
    fs::write(&c, "lines 3\n").unwrap();
    let o = run(&["eval", c.to_str().unwrap(), "--function", "xor5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_config_and_bad_usage_exit_2() {
    assert_eq!(run(&["synth"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--config", "/nonexistent/x.toml", "synth"]).status.code(), Some(2));
}

#[test]
fn cost_and_export_real() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.circuit");
    fs::write(&c, "lines 3\ntoffoli 1 2 3\ncnot 1 2\n").unwrap();
    let o = run(&["cost", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["qc"], 6);
    let o = run(&["export-real", c.to_str().unwrap()]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("t3 x1 x2 x3") && text.contains("t2 x1 x2"), "{text}");
    let r = dir.path().join("c.real");
    fs::write(&r, &text).unwrap();
    let o = run(&["cost", r.to_str().unwrap()]);
    let w: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(w["qc"], 6);
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "5mod5");
    let mut seen = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let out = out.to_str().unwrap();
        for cmd in ["synth", "sweep-gates"] {
            let o = run(&["--threads", threads, "--config", &cfg, "--out", out, cmd]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        }
        let circuit = Path::new(out).join("synth.circuit");
        let o = run(&[
            "--threads",
            threads,
            "--config",
            &cfg,
            "--out",
            out,
            "sweep-noise",
            circuit.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        seen.push(files(Path::new(out)));
    }
    assert_eq!(seen[0].len(), 5);
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn seed_flag_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "2of5");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&["--seed", "1", "--config", &cfg, "--out", a.to_str().unwrap(), "synth"]);
    run(&["--seed", "1", "--config", &cfg, "--out", b.to_str().unwrap(), "synth"]);
    assert_eq!(fs::read(a.join("synth.json")).unwrap(), fs::read(b.join("synth.json")).unwrap());
    let v: serde_json::Value = serde_json::from_slice(&fs::read(a.join("synth.json")).unwrap()).unwrap();
    assert_eq!(v["params"]["master_seed"], 1);
}
