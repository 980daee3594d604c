use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn folocal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folocal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Self {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    fn gen(&self, name: &str, family: &str, params: &str, seed: &str) -> String {
        let p = self.path(name).display().to_string();
        let out = folocal(&["gen", "--family", family, "--params", params, "--seed", seed, "-o", &p]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        p
    }
}

fn leaf(r: usize, m: usize, psi: &str) -> String {
    format!(r#"{{"op":"leaf","leaf":{{"r":{r},"m":{m},"psi":"{psi}"}}}}"#)
}

#[test]
fn single_cell_grid() {
    let dir = Scratch::new();
    let p = dir.gen("g.json", "grid", "width=1,height=1", "0");
    let text = fs::read_to_string(p).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["universe"], 1);
    assert_eq!(v["relations"]["E"].as_array().unwrap().len(), 0);
}

#[test]
fn grid_edge_tuples() {
    let dir = Scratch::new();
    for (w, h) in [(2, 3), (5, 4)] {
        let p = dir.gen("g.json", "grid", &format!("width={w},height={h}"), "0");
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(v["relations"]["E"].as_array().unwrap().len(), 2 * (2 * w * h - w - h));
    }
}

#[test]
fn rand_deg_is_deterministic() {
    let dir = Scratch::new();
    let a = dir.gen("a.json", "rand-deg", "n=100,deg=3", "7");
    let b = dir.gen("b.json", "rand-deg", "n=100,deg=3", "7");
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
    let c = dir.gen("c.json", "rand-deg", "n=100,deg=3", "8");
    assert_ne!(fs::read(&c).unwrap(), fs::read(dir.path("a.json")).unwrap());
}

#[test]
fn bad_generator_parameters_exit_2() {
    let dir = Scratch::new();
    let p = dir.path("x.json").display().to_string();
    let out = folocal(&["gen", "--family", "rand-deg", "--params", "n=4,deg=4", "-o", &p]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("error"));
}

#[test]
fn check_and_oracle_verdicts() {
    let dir = Scratch::new();
    let grid = dir.gen("g.json", "grid", "width=4,height=3", "0");
    let edgeless = dir.write("e.json", r#"{"vocabulary":[{"name":"E","arity":2}],"universe":3}"#);
    let trivial = dir.write("t.gnf.json", &leaf(1, 1, "x = x"));
    let neighbor = data("has_neighbor.gnf.json");
    let corners = data("corners.gnf.json");
    let cases = [
        (&grid, &trivial, 0),
        (&edgeless, &trivial, 0),
        (&edgeless, &neighbor, 1),
        (&grid, &neighbor, 0),
        (&grid, &corners, 0),
    ];
    for (s, g, expected) in cases {
        for strategy in [["--strategy", "bfs-layers"], ["--strategy", "peleg"]] {
            let mut args = vec!["check", "--structure", s, "--gnf", g];
            args.extend(strategy);
            args.extend(["--k", "2"]);
            let out = folocal(&args);
            assert_eq!(code(&out), expected, "{s} {g}: {}", stderr(&out));
            let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
            assert_eq!(report["verdict"], expected == 0);
        }
        let out = folocal(&["check", "--structure", s, "--gnf", g, "--parallel"]);
        assert_eq!(code(&out), expected);
        let out = folocal(&["oracle", "--structure", s, "--gnf", g]);
        assert_eq!(code(&out), expected);
        assert_eq!(stdout(&out).trim(), if expected == 0 { "true" } else { "false" });
    }
}

#[test]
fn oracle_on_formulas() {
    let dir = Scratch::new();
    let edgeless = dir.write("e.json", r#"{"vocabulary":[{"name":"E","arity":2}],"universe":4}"#);
    let edge = dir.write("f.txt", "exists x (exists y (E(x, y)))");
    let out = folocal(&["oracle", "--structure", &edgeless, "--formula", &edge]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "false");

    let sc = dir.gen("sc.json", "setcover", "ground=6,sets=5,freq=3,cover=2", "3");
    let phi2 = dir.write("phi2.txt", "exists x1 (exists x2 (forall y (P(y) -> E(y, x1) or E(y, x2))))");
    let phi1 = dir.write("phi1.txt", "exists x1 (forall y (P(y) -> E(y, x1)))");
    assert_eq!(code(&folocal(&["oracle", "--structure", &sc, "--formula", &phi2])), 0);
    assert_eq!(code(&folocal(&["oracle", "--structure", &sc, "--formula", &phi1])), 1);
}

#[test]
fn parse_errors_report_positions() {
    let dir = Scratch::new();
    let s = dir.gen("g.json", "grid", "width=2,height=2", "0");
    let bad = dir.write("bad.txt", "exists x (E(x, x)\n  and )");
    let out = folocal(&["oracle", "--structure", &s, "--formula", &bad]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2:7"), "{}", stderr(&out));

    let nonlocal = dir.write("n.gnf.json", &leaf(1, 1, "exists y (E(x, y))"));
    let out = folocal(&["check", "--structure", &s, "--gnf", &nonlocal]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("local"), "{}", stderr(&out));

    let broken = dir.write("b.json", "{\"vocabulary\": [],\n \"universe\": }");
    let out = folocal(&["check", "--structure", &broken, "--gnf", &nonlocal]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

fn csv_summary(text: &str) -> (Vec<String>, Vec<String>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let values = lines.next().unwrap().split(',').map(String::from).collect();
    (header, values)
}

fn field(summary: &(Vec<String>, Vec<String>), name: &str) -> String {
    let i = summary.0.iter().position(|h| h == name).unwrap();
    summary.1[i].clone()
}

#[test]
fn covers_reports() {
    let dir = Scratch::new();
    let grid = dir.gen("g.json", "grid", "width=16,height=16", "0");
    let out = folocal(&["covers", "--structure", &grid, "--r", "1", "--strategy", "peleg", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let summary = csv_summary(&text);
    assert_eq!(field(&summary, "valid"), "true");
    assert!(field(&summary, "total_size").parse::<usize>().unwrap() <= 4096);
    let pieces: usize = field(&summary, "pieces").parse().unwrap();
    // summary, blank line, piece header, one row per piece
    assert_eq!(text.lines().count(), 4 + pieces);

    let rd = dir.gen("r.json", "rand-deg", "n=80,deg=3", "2");
    for r in 0..=2usize {
        let rs = r.to_string();
        let out = folocal(&["covers", "--structure", &rd, "--r", &rs, "--strategy", "bfs-layers"]);
        assert_eq!(code(&out), 0);
        let summary = csv_summary(&stdout(&out));
        assert!(field(&summary, "total_size").parse::<usize>().unwrap() <= (2 * r + 1) * 80);
    }

    let single = dir.write("one.json", r#"{"vocabulary":[{"name":"E","arity":2}],"universe":1}"#);
    let out = folocal(&["covers", "--structure", &single, "--r", "1", "--strategy", "peleg", "--k", "1"]);
    assert_eq!(code(&out), 0);
    let summary = csv_summary(&stdout(&out));
    assert_eq!(field(&summary, "pieces"), "1");
}

#[test]
fn bench_single_size() {
    let dir = Scratch::new();
    let csv = dir.path("b.csv").display().to_string();
    let corners = data("corners.gnf.json");
    let out = folocal(&["bench", "--family", "grid", "--sizes", "6", "--gnf", &corners, "--out", &csv, "--reps", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(summary["rows"], 1);
    assert!(summary["slope"].is_null());
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert!(rows.lines().nth(1).unwrap().starts_with("grid,6,36,"));

    let out = folocal(&["bench", "--family", "grid", "--sizes", "8,4", "--gnf", &corners, "--out", &csv]);
    assert_eq!(code(&out), 2);
}
