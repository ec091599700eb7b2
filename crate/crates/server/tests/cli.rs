//! The `gamwb` binary: exit codes, output files and diagnostics.

use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use gamwb_core::interop::{load_bundle, load_model, model_to_bytes};

const MODEL: &str = r#"{"version":1,"task":"classification","link":"logit","intercept":-0.3,
 "features":[
  {"name":"age","type":"continuous","bin_edges":[18,30,45,65,80],"scores":[-0.6,-0.2,0.1,0.5,0.9],"counts":[30,40,40,30,10]},
  {"name":"asthma","type":"categorical","levels":["yes","no"],"scores":[-0.2,0.05],"counts":[20,130]}]}"#;

const CSV: &str = "age,asthma,died\n20,yes,0\n35,no,0\n50,no,1\n70,yes,1\n82,no,1\n25,no,0\n60,yes,0\n";

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("model.json"), MODEL).unwrap();
        fs::write(dir.path().join("data.csv"), CSV).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_gamwb"))
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("GAMWB_PORT")
            .output()
            .unwrap()
    }

    fn apply(&self, script: &str) -> Output {
        self.write("script.json", script);
        self.run(&[
            "apply", "--model", "model.json", "--data", "data.csv", "--label", "died",
            "--script", "script.json", "--out", "out.json",
        ])
    }
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn original_model_bytes() -> Vec<u8> {
    model_to_bytes(&load_model(MODEL.as_bytes()).unwrap())
}

#[test]
fn empty_script_keeps_the_model() {
    let fx = Fixture::new();
    let out = fx.apply(r#"{"version":1,"edits":[]}"#);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = stdout_json(&out);
    assert_eq!(summary["commits"], 0);
    for key in ["accuracy", "auc", "tp", "fn"] {
        assert_eq!(summary["original"][key], summary["final"][key], "{key}");
    }
    let bundle = load_bundle(&fs::read(fx.path("out.json")).unwrap()).unwrap();
    assert_eq!(bundle.session.len(), 1);
    assert_eq!(model_to_bytes(bundle.session.last()), original_model_bytes());

    let out = fx.run(&["export", "--bundle", "out.json", "--out", "head.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(fs::read(fx.path("head.json")).unwrap(), original_model_bytes());
}

#[test]
fn set_constant_then_export() {
    let fx = Fixture::new();
    let out = fx.apply(
        r#"{"version":1,"edits":[
            {"feature":"asthma","selection":{"levels":["yes"]},"tool":"set_constant","params":{"value":0},"message":"no protection"},
            {"feature":"age","selection":{"bins":[3,4]},"tool":"align_left"}]}"#,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["commits"], 2);

    let bundle = load_bundle(&fs::read(fx.path("out.json")).unwrap()).unwrap();
    let commits = bundle.session.commits();
    assert_eq!(commits.len(), 3);
    assert_eq!(commits[1].message(), "batch: no protection");
    assert!(commits[2].message().starts_with("batch: align_left on age [3-4]"));
    assert!(commits.iter().all(|c| c.confirmed()));

    let out = fx.run(&["export", "--bundle", "out.json", "--out", "head.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // loading would re-center, so inspect the written scores directly
    let head: Value = serde_json::from_slice(&fs::read(fx.path("head.json")).unwrap()).unwrap();
    let features = head["features"].as_array().unwrap();
    let scores = |name: &str| {
        features.iter().find(|f| f["name"] == name).unwrap()["scores"].clone()
    };
    assert_eq!(scores("asthma")[0], 0.0);
    let ages = scores("age");
    assert_eq!(ages[3], ages[2]);
    assert_eq!(ages[4], ages[2]);
    assert_eq!(model_to_bytes(bundle.session.last()), fs::read(fx.path("head.json")).unwrap());
}

#[test]
fn invalid_entry_aborts_without_output() {
    let fx = Fixture::new();
    let out = fx.apply(
        r#"{"version":1,"edits":[
            {"feature":"age","selection":{"bins":[0,1]},"tool":"move","params":{"delta":0.1}},
            {"feature":"age","selection":{"bins":[0,9]},"tool":"move","params":{"delta":0.1}},
            {"feature":"age","selection":{"bins":[2,3]},"tool":"interpolate"}]}"#,
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("script.json") && err.contains("edits[1]"), "{err}");
    assert!(!fx.path("out.json").exists());

    // tool errors found while applying abort the same way
    let out = fx.apply(
        r#"{"version":1,"edits":[
            {"feature":"age","selection":{"bins":[0,1]},"tool":"move","params":{"delta":0.1}},
            {"feature":"age","selection":{"bins":[0,0]},"tool":"align_left"}]}"#,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("edits[1]"), "{}", stderr(&out));
    assert!(!fx.path("out.json").exists());
}

#[test]
fn metrics_scopes() {
    let fx = Fixture::new();
    let run = |scope: &str| {
        fx.run(&[
            "metrics", "--model", "model.json", "--data", "data.csv", "--label", "died",
            "--scope", scope,
        ])
    };
    let out = run("global");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    assert_eq!(v["reports"][0]["sample_count"], 7);

    let yes = stdout_json(&run("slice:asthma=yes"))["reports"][0]["sample_count"].as_u64().unwrap();
    let no = stdout_json(&run("slice:asthma=no"))["reports"][0]["sample_count"].as_u64().unwrap();
    assert_eq!((yes, no), (3, 4));
    let old = stdout_json(&run("selected:age=3-4"));
    assert_eq!(old["reports"][0]["sample_count"], 2);

    let out = run("slice:age=3");
    assert_eq!(out.status.code(), Some(2));
    let out = run("everything");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_model_reports_path() {
    let fx = Fixture::new();
    fx.write("bad.json", &MODEL.replace(r#""scores":[-0.2,0.05]"#, r#""scores":[-0.2]"#));
    let out = fx.run(&[
        "metrics", "--model", "bad.json", "--data", "data.csv", "--label", "died",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.json") && err.contains("features[1].scores"), "{err}");

    let out = fx.run(&[
        "metrics", "--model", "missing.json", "--data", "data.csv", "--label", "died",
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = fx.run(&[
        "metrics", "--model", "model.json", "--data", "data.csv", "--label", "outcome",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("outcome"), "{}", stderr(&out));
}

#[test]
fn unknown_levels_warn() {
    let fx = Fixture::new();
    fx.write("data.csv", &format!("{CSV}40,maybe,1\n"));
    let out = fx.run(&[
        "metrics", "--model", "model.json", "--data", "data.csv", "--label", "died",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("maybe"), "{}", stderr(&out));
}

#[test]
fn tampered_bundle_is_refused() {
    let fx = Fixture::new();
    assert_eq!(
        fx.apply(r#"{"version":1,"edits":[{"feature":"age","selection":{"bins":[0,0]},"tool":"set_constant","params":{"value":0}}]}"#)
            .status
            .code(),
        Some(0)
    );
    let bytes = fs::read_to_string(fx.path("out.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&bytes).unwrap();
    doc["history"][1]["parent"] = Value::String("ffffffff".into());
    fx.write("out.json", &doc.to_string());
    let out = fx.run(&["export", "--bundle", "out.json", "--out", "head.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("history[1].parent"), "{}", stderr(&out));
    assert!(!Path::new(&fx.path("head.json")).exists());
}

#[test]
fn port_in_use() {
    let fx = Fixture::new();
    let taken = TcpListener::bind("127.0.0.1:0").unwrap();
    let port = taken.local_addr().unwrap().port().to_string();
    let out = fx.run(&[
        "serve", "--model", "model.json", "--data", "data.csv", "--label", "died",
        "--port", &port,
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("address in use"), "{}", stderr(&out));
}
