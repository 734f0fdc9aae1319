use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use adaptive_abc::output::{Manifest, DIAGNOSTICS, MANIFEST, RMSE};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_adaptive-abc"));
    c.env_remove("ADAPTIVE_ABC_OUTPUT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn smoke_config(dir: &Path, extra: &str) -> PathBuf {
    fs::write(dir.join("obs.json"), r#"{"summaries": [0.0, 0.0], "truth": [0.0]}"#).unwrap();
    let path = dir.join("smoke.json");
    fs::write(
        &path,
        format!(
            r#"{{
  "model": {{"id": "normal"}},
  "algorithms": ["pmc", "pmc-adapt-prev", "pmc-adapt-curr", "rejection"],
  "population_size": 500,
  "alpha": 0.5,
  "budget": 10000,
  "seed": 7,
  "dataset": {{"observed_file": "obs.json"}},
  "shared_tuning": true{extra}
}}"#
        ),
    )
    .unwrap();
    path
}

fn csv_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_reports_config_errors_with_exit_2() {
    let tmp = TempDir::new().unwrap();
    let good = smoke_config(tmp.path(), "");
    let o = run(&["validate", good.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = fs::read_to_string(&good).unwrap();
    let cases = [
        (text.replace("\"alpha\": 0.5", "\"alpha\": 1.0"), "alpha < 1"),
        (text.replace("\"dataset\": {\"observed_file\": \"obs.json\"}", "\"dataset\": {}"), "exactly one of"),
        (text.replace("\"seed\": 7", "\"seeds\": 7"), "unknown field"),
        (text.replace("\"budget\": 10000", "\"budget\": 10"), "smaller than population_size"),
    ];
    for (src, needle) in cases {
        let p = tmp.path().join("bad.json");
        fs::write(&p, src).unwrap();
        let o = run(&["validate", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2));
        let err = stderr(&o);
        assert!(err.contains(needle), "{err}");
        assert!(err.contains("line "), "{err}");
    }
    let o = run(&["validate", tmp.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn smoke_run_outputs_and_reproduces() {
    let tmp = TempDir::new().unwrap();
    let cfg = smoke_config(tmp.path(), ",\n  \"output_dir\": \"a\"");
    let start = Instant::now();
    let o = run(&["run", cfg.to_str().unwrap()]);
    let elapsed = start.elapsed();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(elapsed.as_secs_f64() < 5.0, "{elapsed:?}");
    let a = tmp.path().join("a");
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(a.join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(manifest.workers, 1);
    assert_eq!(manifest.runs.len(), 4);
    for r in manifest.runs.iter().filter(|r| r.algorithm.id() != "rejection") {
        assert!(r.iterations >= 4, "{}: {} iterations", r.dir, r.iterations);
        assert!(r.simulations_used <= 10_000);
    }

    // diagnostics recomputed from the records are byte-identical
    let again = tmp.path().join("again");
    let o = run(&["diagnostics", a.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [DIAGNOSTICS, RMSE] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }

    // re-running the manifest's config elsewhere reproduces every CSV
    let mut rerun = manifest.config.clone();
    rerun.output_dir = Some(tmp.path().join("b"));
    let p = tmp.path().join("rerun.json");
    fs::write(&p, serde_json::to_string_pretty(&rerun).unwrap()).unwrap();
    assert!(run(&["run", p.to_str().unwrap()]).status.success());
    assert_eq!(csv_files(&a), csv_files(&tmp.path().join("b")));

    // more workers, same numbers
    rerun.output_dir = Some(tmp.path().join("c"));
    fs::write(&p, serde_json::to_string_pretty(&rerun).unwrap()).unwrap();
    let o = run(&["run", p.to_str().unwrap(), "--workers", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_files(&a), csv_files(&tmp.path().join("c")));
    let m3: Manifest = serde_json::from_str(&fs::read_to_string(tmp.path().join("c").join(MANIFEST)).unwrap()).unwrap();
    assert_eq!(m3.workers, 3);

    let o = run(&["region-export", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let regions = fs::read_to_string(a.join("regions.csv")).unwrap();
    assert!(regions.starts_with("algorithm,dataset,replicate,iteration,stage,threshold,summary,weight,observed"));
    // nested rules list every accumulated stage
    assert!(regions.lines().any(|l| l.starts_with("pmc-adapt-curr,0,0,4,3,")));
}

#[test]
fn output_root_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = smoke_config(tmp.path(), "");
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ADAPTIVE_ABC_OUTPUT"));
    let root = tmp.path().join("root");
    let o = bin().args(["run", cfg.to_str().unwrap()]).env("ADAPTIVE_ABC_OUTPUT", &root).output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(root.join("smoke").join(MANIFEST).exists());
}

#[test]
fn budget_too_small_for_a_population_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = smoke_config(tmp.path(), ",\n  \"output_dir\": \"out\"");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("\"budget\": 10000", "\"budget\": 600")
        .replace("[\"pmc\", \"pmc-adapt-prev\", \"pmc-adapt-curr\", \"rejection\"]", "[\"pmc-adapt-curr\"]")
        .replace("\"shared_tuning\": true", "\"shared_tuning\": false");
    fs::write(&cfg, text).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("before the first population"));
}

#[test]
fn unwritable_output_exits_4() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("blocker"), "not a directory").unwrap();
    let cfg = smoke_config(tmp.path(), ",\n  \"output_dir\": \"blocker/out\"");
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["smoke.json", "normal.json", "gk.json", "lotka-volterra.json"] {
        let o = run(&["validate", dir.join(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", stderr(&o));
    }
}
