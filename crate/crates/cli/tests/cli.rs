use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EX1: &str = "TRIP 1
3 3
1
3
0 2
-2 100 -2.1
-2 100 100
100 100 100
0 0 0
0 0 0
0 0 0
";

const EX2: &str = "TRIP 1\n2 2\n1\n1\n0 1\n-0.5 -0.5\n-0.5 -0.5\n0 0\n0 0\n";

fn trip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trip"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

#[test]
fn solve_ex1() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex1.trip", EX1);
    let out = trip(&["solve", s(&p), "--show-step"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,tools,status,objective,bound,gap,nodes,cuts_fc,cuts_box,heur_improves,seconds"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    assert_eq!(&row[..4], &["ex1", "p-b-c", "optimal", "-1.1"]);

    let oracle = stdout(&trip(&["oracle", s(&p)]));
    assert_eq!(field(&oracle, "objective"), "-1.1");
}

#[test]
fn solve_with_flags_and_trace() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex1.trip", EX1);
    let trace = dir.path().join("trace.csv");
    let out = trip(&[
        "solve",
        s(&p),
        "--cuts",
        "none",
        "--heuristic",
        "off",
        "--branch",
        "most-frac",
        "--gap",
        "0",
        "--trace",
        s(&trace),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[1..4], &["none", "optimal", "-1.1"]);
    let trace = std::fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("node,depth,bound,incumbent,action\n"));
    assert!(trace.lines().count() > 1);
}

#[test]
fn lr_ex2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex2.trip", EX2);
    let out = trip(&["lr", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "bound"), "-0.5");
    assert!(text.lines().any(|l| l.starts_with("p ")));
    assert!(text.lines().any(|l| l.starts_with("guaranteed ")));
}

#[test]
fn lp_and_dd_ex2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex2.trip", EX2);
    let lp = stdout(&trip(&["lp", s(&p)]));
    assert!((field(&lp, "objective").parse::<f64>().unwrap() + 0.5).abs() < 1e-9);
    assert_eq!(field(&lp, "integral"), "false");
    let dd = stdout(&trip(&["dd", s(&p), "--iters", "1"]));
    assert_eq!(field(&dd, "bound"), "0");
    assert_eq!(field(&dd, "certified"), "true");
}

#[test]
fn cuts_report_violation() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "a.trip", "");
    let gen = trip(&[
        "gen",
        "--seed",
        "1",
        "--rows",
        "3",
        "--cols",
        "3",
        "--delta",
        "2",
        "-o",
        s(&p),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let text = stdout(&trip(&["cuts", s(&p)]));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "family,violation,separating,rhs,support,cut"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "fully_connected");
    assert!(row[1].parse::<f64>().unwrap() > 1e-7);
}

#[test]
fn improve_from_warm_start() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ex1.trip", EX1);
    let start = write(&dir, "d0.txt", "# three changes\n0 0 0\n0 1 0\n1 1 0\n");
    let text = stdout(&trip(&["improve", s(&p), "--start", s(&start)]));
    assert_eq!(field(&text, "start_objective"), "305");
    let obj = field(&text, "objective");
    assert!(obj.parse::<f64>().unwrap() < 305.0);
    assert_eq!(field(&text, "converged"), "true");
}

#[test]
fn gen_is_deterministic_and_readable() {
    let a = stdout(&trip(&[
        "gen", "--seed", "7", "--rows", "3", "--cols", "4", "--xi-hi", "2", "--delta", "2",
    ]));
    let b = stdout(&trip(&[
        "gen", "--seed", "7", "--rows", "3", "--cols", "4", "--xi-hi", "2", "--delta", "2",
    ]));
    assert_eq!(a, b);
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "g.trip", &a);
    assert_eq!(trip(&["oracle", s(&p)]).status.code(), Some(0));
}

#[test]
fn slip_reaches_target() {
    let dir = TempDir::new().unwrap();
    let target = write(&dir, "target.txt", "0 1 1\n0 1 1\n0 0 0\n");
    let out = trip(&["slip", "--target", s(&target), "--delta0", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("outer,inner,delta,pr,ared,action\n"));
    assert!(text.trim_end().ends_with("terminate"));
    assert_eq!(
        String::from_utf8_lossy(&out.stderr),
        "0 1 1\n0 1 1\n0 0 0\n"
    );
}

#[test]
fn bench_small_golden() {
    let out = trip(&[
        "bench", "--suite", "small", "--seeds", "20", "--table", "nodes",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("bench_small_s20_nodes.csv"));
}

#[test]
fn bench_rows_schema() {
    let out = trip(&["bench", "--suite", "small", "--seeds", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 8);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 11));
}

/// Several minutes single-threaded.
#[test]
#[ignore]
fn bench_random16_golden() {
    let out = trip(&[
        "bench", "--suite", "random16", "--seeds", "10", "--table", "nodes",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), golden("bench_random16_s10_nodes.csv"));
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.trip");
    assert_eq!(trip(&["solve", s(&missing)]).status.code(), Some(1));
    assert_eq!(trip(&["solve"]).status.code(), Some(2));
    assert_eq!(
        trip(&["solve", "x", "--heuristic", "maybe"]).status.code(),
        Some(2)
    );

    let bad = write(
        &dir,
        "bad.trip",
        "TRIP 1\n2 2\n1\n1\n0 1\n-0.5 x\n-0.5 -0.5\n0 0\n0 0\n",
    );
    let out = trip(&["solve", s(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot parse number"));
    let outside = write(&dir, "outside.trip", "TRIP 1\n1 2\n1\n1\n0 1\n1 1\n0 3\n");
    assert_eq!(trip(&["lp", s(&outside)]).status.code(), Some(3));

    let tern = write(&dir, "tern.trip", "TRIP 1\n1 2\n1\n1\n0 2\n1 1\n0 0\n");
    assert_eq!(trip(&["lr", s(&tern)]).status.code(), Some(5));
    let ex1 = write(&dir, "ex1.trip", EX1);
    assert_eq!(
        trip(&["solve", s(&ex1), "--cuts", "gomory"]).status.code(),
        Some(5)
    );

    let big = dir.path().join("big.trip");
    trip(&[
        "gen",
        "--rows",
        "12",
        "--cols",
        "12",
        "--delta",
        "20",
        "-o",
        s(&big),
    ]);
    assert_eq!(trip(&["oracle", s(&big)]).status.code(), Some(6));
}

#[test]
fn node_limit_exits_with_limit_code() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("s12.trip");
    trip(&[
        "gen",
        "--seed",
        "12",
        "--rows",
        "4",
        "--cols",
        "4",
        "--delta",
        "2",
        "--cost-scale",
        "3",
        "-o",
        s(&p),
    ]);
    let out = trip(&[
        "solve",
        s(&p),
        "--nodes",
        "1",
        "--cuts",
        "none",
        "--heuristic",
        "off",
        "--gap",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let row = stdout(&out);
    assert_eq!(
        row.lines().nth(1).unwrap().split(',').nth(2),
        Some("node_limit")
    );
    let full = trip(&[
        "solve",
        s(&p),
        "--cuts",
        "none",
        "--heuristic",
        "off",
        "--gap",
        "0",
    ]);
    assert_eq!(full.status.code(), Some(0));
}
