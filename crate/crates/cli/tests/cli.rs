use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flowgrid::fixtures::{crowding_fixture, Fixture, US_STATES_CSV};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flowgrid"))
}

fn fixture_csv(f: &Fixture) -> String {
    let o = f.nodes.origin;
    let mut s = format!("id,x,y,volume,role\n{},{},{},,origin\n", f.nodes.origin_id, o.x, o.y);
    for d in &f.nodes.destinations {
        s.push_str(&format!("{},{},{},{},destination\n", d.id, d.position.x, d.position.y, d.volume));
    }
    s
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn new(nodes: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("nodes.csv"), nodes).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, extra: &[&str]) -> Output {
        let mut cmd = bin();
        cmd.arg("run")
            .arg("--nodes")
            .arg(self.path("nodes.csv"))
            .arg("--out")
            .arg(self.path("map.svg"))
            .arg("--metrics")
            .arg(self.path("metrics.json"))
            .arg("--log")
            .arg(self.path("run.jsonl"))
            .args(extra);
        cmd.output().unwrap()
    }

    fn metrics(&self) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(self.path("metrics.json")).unwrap()).unwrap()
    }
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn minimal_run_writes_all_outputs() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,-4000,0,5,destination\n");
    let out = r.run(&[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m = r.metrics();
    assert_eq!(m["TL"], 4000.0);
    assert_eq!(m["C_o"], 0);
    let svg = fs::read_to_string(r.path("map.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(r.path("map.svg.edges.json").exists());
    assert_eq!(fs::read_to_string(r.path("run.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn disabling_exclusion_creates_overlaps() {
    let r = Run::new(&fixture_csv(&crowding_fixture()));
    let out = r.run(&["--config", "rs=10", "--st6=off"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(r.metrics()["C_o"].as_u64().unwrap() > 0);
    let out = r.run(&["--config", "rs=10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(r.metrics()["C_o"], 0);
}

#[test]
fn config_file_and_pairs_apply_in_order() {
    let r = Run::new(&fixture_csv(&crowding_fixture()));
    fs::write(r.path("run.toml"), "rs = 10.0\nomega = 1.0\n").unwrap();
    let cfg = r.path("run.toml");
    let out = r.run(&["--config", cfg.to_str().unwrap(), "--config", "omega=0.35", "--table"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(r.metrics()["resolution"], 10.0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("C_aa"));
}

#[test]
fn outputs_identical_across_threads() {
    let r = Run::new(US_STATES_CSV);
    let read = |r: &Run| {
        ["map.svg", "metrics.json", "run.jsonl", "map.svg.edges.json"]
            .map(|f| fs::read(r.path(f)).unwrap())
    };
    assert!(r.run(&["--threads", "1"]).status.success());
    let one = read(&r);
    assert!(r.run(&["--threads", "4"]).status.success());
    assert_eq!(one, read(&r));
}

#[test]
fn two_origins_named_error() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\np,5,5,,origin\n");
    let out = r.run(&[]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("exactly one origin required"));
}

#[test]
fn coarse_resolution_named_error() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,1,0,5,destination\nb,100,0,5,destination\n");
    let out = r.run(&["--config", "rs=50"]);
    assert!(!out.status.success());
    assert!(stderr(&out).to_lowercase().contains("resolution too coarse"), "{}", stderr(&out));
}

fn write_regions(dir: &Path, features: &str) -> PathBuf {
    let p = dir.join("regions.geojson");
    fs::write(&p, format!(r#"{{"type":"FeatureCollection","features":[{features}]}}"#)).unwrap();
    p
}

#[test]
fn point_in_obstacle_named_error() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,100,0,5,destination\n");
    let regions = write_regions(
        r.dir.path(),
        r#"{"type":"Feature","properties":{"kind":"obstacle"},"geometry":{"type":"Polygon","coordinates":[[[90,-10],[110,-10],[110,10],[90,10],[90,-10]]]}}"#,
    );
    let out = r.run(&["--regions", regions.to_str().unwrap(), "--config", "rs=10"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("obstacle"), "{}", stderr(&out));
}

#[test]
fn unreachable_destination_named_error() {
    // A closed ring of obstacle around the destination.
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,100,0,5,destination\n");
    let ring = r#"[[80,-20],[120,-20],[120,20],[80,20],[80,-20]]"#;
    let regions = write_regions(
        r.dir.path(),
        &format!(r#"{{"type":"Feature","properties":{{"kind":"obstacle"}},"geometry":{{"type":"LineString","coordinates":{ring}}}}}"#),
    );
    let out = r.run(&["--regions", regions.to_str().unwrap(), "--config", "rs=10"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.contains("unreachable") && err.contains('a'), "{err}");
}

#[test]
fn malformed_geojson_reports_feature() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,100,0,5,destination\n");
    let regions = write_regions(
        r.dir.path(),
        r#"{"type":"Feature","properties":{"kind":"lake"},"geometry":{"type":"Point","coordinates":[0,0]}}"#,
    );
    let out = r.run(&["--regions", regions.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("feature 0"), "{}", stderr(&out));
}

#[test]
fn bad_switch_value_rejected() {
    let r = Run::new("id,x,y,volume,role\no,0,0,,origin\na,100,0,5,destination\n");
    let out = r.run(&["--st3", "sideways"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("st3"));
}

#[test]
fn ablate_prints_matrix() {
    let r = Run::new(&fixture_csv(&crowding_fixture()));
    let out = bin()
        .args(["ablate", "--nodes"])
        .arg(r.path("nodes.csv"))
        .args(["--config", "rs=10"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("config\tTL"));
    let st6 = rows.iter().find(|l| l.starts_with("st6=off")).unwrap();
    let c_o: usize = st6.split('\t').next_back().unwrap().parse().unwrap();
    assert!(c_o > 0, "{st6}");
}
