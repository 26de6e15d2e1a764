use std::fs;
use std::process::{Command, Output};

fn clickbounds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clickbounds"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .env_remove("CLICKBOUNDS_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Rows of the named CSV table, without its header line.
fn csv_rows(text: &str, table: &str) -> Vec<Vec<String>> {
    let marker = format!("# table: {table}");
    text.lines()
        .skip_while(|l| *l != marker)
        .skip(2)
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn vacuum_file_always_gives_no_clicks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vac.txt");
    fs::write(&path, "1\n").unwrap();
    let spec = format!("file:{}", path.display());
    let o = clickbounds(&["clicks", "--state", &spec, "--channels", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o), "clicks");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0], ["0", "1"]);
    assert!(rows[1..].iter().all(|r| r[1] == "0"));
}

#[test]
fn reruns_are_byte_identical() {
    for format in ["csv", "json"] {
        let args = ["--format", format, "bounds", "--state", "thermal:nbar=2", "-M", "6", "--target", "p0,p3,nbar"];
        let a = clickbounds(&args);
        let b = clickbounds(&args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
}

#[test]
fn replay_reproduces_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let o = clickbounds(&[
        "--format",
        "json",
        "-o",
        first.to_str().unwrap(),
        "estimator",
        "-M",
        "5",
        "--eta",
        "0.7",
        "--cutoff",
        "20",
    ]);
    assert!(o.status.success());
    let o = clickbounds(&["-o", second.to_str().unwrap(), "replay", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());

    let doc: serde_json::Value = serde_json::from_slice(&fs::read(&first).unwrap()).unwrap();
    assert_eq!(doc["run"]["tool"], "clickbounds");
    assert_eq!(doc["run"]["config"]["command"]["name"], "estimator");
    assert!(doc["run"].get("timestamp").is_none());
}

#[test]
fn timestamp_comes_from_source_date_epoch() {
    let o = Command::new(env!("CARGO_BIN_EXE_clickbounds"))
        .args(["state", "--state", "coherent:nbar=1", "--cutoff", "3"])
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("# timestamp: 1970-01-01T00:00:00Z"));
}

#[test]
fn photon_subtracted_thermal_has_negative_wigner_bound() {
    let o = clickbounds(&["bounds", "--state", "subtracted:nbar=3", "--channels", "10", "--target", "wigner"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().find(|l| l.starts_with("family,")).unwrap().split(',').collect();
    let row = &csv_rows(&text, "bounds")[0];
    let z_max: f64 = row[header.iter().position(|c| *c == "z_max").unwrap()].parse().unwrap();
    assert!(z_max < 0.0, "{z_max}");
    assert_eq!(row[header.iter().position(|c| *c == "certified").unwrap()], "true");
}

#[test]
fn sweep_streams_one_row_per_point() {
    let o = clickbounds(&[
        "sweep",
        "--families",
        "thermal,coherent",
        "--nbars",
        "1:2:1",
        "--channels",
        "4,8",
        "--target",
        "p0,p2",
    ]);
    assert!(o.status.success());
    assert_eq!(csv_rows(&stdout(&o), "bounds").len(), 2 * 2 * 2 * 2);
}

#[test]
fn hbt_bounds_hold_for_thermal_light() {
    let o = clickbounds(&["hbt2", "--state", "thermal:nbar=0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let bound: f64 = csv_rows(&text, "hbt2")[0][12].parse().unwrap();
    let p11: f64 = csv_rows(&text, "reference")[0][0].parse().unwrap();
    assert!(bound > 0.0 && bound <= p11);

    let o = clickbounds(&["hbt1", "--p0", "0.3", "--q0", "0.5", "--lp"]);
    assert!(o.status.success());
    let row = &csv_rows(&stdout(&o), "hbt1")[0];
    assert_eq!(row[2], "0.1");
    assert_eq!(row[3], "0.4");
}

#[test]
fn exit_codes() {
    assert_eq!(clickbounds(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(clickbounds(&["bounds", "--state", "thermal:nbar=1", "--eta", "1.5"]).status.code(), Some(1));
    assert_eq!(clickbounds(&["hbt1", "--p0", "0.5", "--q0", "0.9"]).status.code(), Some(2));
    assert_eq!(clickbounds(&["replay", "/nonexistent/run.json"]).status.code(), Some(2));
    assert_eq!(clickbounds(&["--help"]).status.code(), Some(0));
}
