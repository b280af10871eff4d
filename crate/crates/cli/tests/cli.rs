use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ccus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccus")).args(args).output().unwrap()
}

fn scenario() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/default/scenario.txt")
        .to_str()
        .unwrap()
        .to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_shipped_scenario() {
    let o = ccus(&["validate", "--scenario", &scenario()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("ok: 200 sources, 20 sinks"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = ccus(&["run", "--scenario", &scenario(), "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_exits_zero() {
    assert!(ccus(&["--help"]).status.success());
    assert!(ccus(&["sweep", "--help"]).status.success());
}

#[test]
fn missing_scenario_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ccus(&["run", "--scenario", "/nonexistent/scenario.txt", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn malformed_sources_exit_one_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let src = Path::new(&scenario()).parent().unwrap().to_path_buf();
    for f in fs::read_dir(&src).unwrap() {
        let f = f.unwrap().path();
        fs::copy(&f, dir.join(f.file_name().unwrap())).unwrap();
    }
    fs::write(dir.join("sources.csv"), "id,type,lon,lat,annual_tonnes\nS1,Cement,-90,30,lots\n").unwrap();
    let o = ccus(&["validate", "--scenario", path(&dir.join("scenario.txt"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("annual_tonnes"), "{err}");
}

#[test]
fn unwritable_output_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = ccus(&["run", "--scenario", &scenario(), "--out", path(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn batch_of_thirty_replications() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("batch");
    let o = ccus(&["run", "--scenario", &scenario(), "--reps", "30", "--out", path(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let reps: Vec<PathBuf> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .collect();
    assert_eq!(reps.len(), 30);
    for r in &reps {
        for f in ["connections.csv", "annual.csv", "summary.json"] {
            assert!(r.join(f).is_file(), "{}", r.join(f).display());
        }
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("batch_summary.json")).unwrap()).unwrap();
    assert!(summary["stats"]["total_tonnes"]["mean"].as_f64().unwrap() > 0.0, "{summary}");
    let rows = fs::read_to_string(out.join("replications.csv")).unwrap();
    assert_eq!(rows.lines().count(), 31);
}

#[test]
fn cost_sweep_writes_one_row_per_factor_and_target() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ccus(&[
        "sweep",
        "--kind",
        "cost",
        "--scenario",
        &scenario(),
        "--targets",
        "capture,rail",
        "--reps",
        "2",
        "--out",
        path(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r.starts_with("capture_multiplier,")).count(), 10);
    assert!(tmp.path().join("sweep_params.csv").is_file());
}

#[test]
fn duration_below_credit_years_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ccus(&["sweep", "--kind", "duration", "--scenario", &scenario(), "--values", "10,12", "--out", path(tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generated_scenario_validates_and_feeds_site_generation() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("gen");
    let o = ccus(&["gen-scenario", "--out", path(&dir), "--sources", "30", "--sinks", "4", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sc = dir.join("scenario.txt");
    assert!(ccus(&["validate", "--scenario", path(&sc)]).status.success());

    fs::write(tmp.path().join("pop.csv"), "lon,lat,daytime_count,nighttime_count\n-90,35,50,40\n").unwrap();
    let sites = tmp.path().join("sites.csv");
    let o = ccus(&[
        "gen-sites",
        "--scenario",
        path(&sc),
        "--population",
        path(&tmp.path().join("pop.csv")),
        "--out",
        path(&sites),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&sites).unwrap();
    assert!(text.starts_with("id,category,"));
    assert!(text.lines().count() > 1);
}
