use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scbgd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scbgd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn iterations(line: &str) -> usize {
    line.split_whitespace().nth(3).unwrap().parse().unwrap()
}

#[test]
fn solve_broyden_gd() {
    let o = scbgd(&["solve", "--problem", "broyden", "--n", "200", "--method", "gd"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let fields: Vec<&str> = out.split_whitespace().collect();
    assert_eq!(fields.len(), 7);
    assert_eq!(&fields[..3], ["gd", "broyden", "200"]);
    assert!(iterations(&out).abs_diff(201) <= 3);
    assert!(fields[4].parse::<f64>().unwrap() <= 1e-6);
    assert_eq!(fields[6], "true");
}

#[test]
fn full_block_matches_gd() {
    let gd = scbgd(&["solve", "--problem", "broyden", "--n", "200", "--method", "gd"]);
    let full = scbgd(&[
        "solve",
        "--problem",
        "broyden",
        "--n",
        "200",
        "--method",
        "scbgd",
        "--q",
        "200",
        "--delta",
        "1",
        "--seed",
        "7",
    ]);
    assert_eq!(full.status.code(), Some(0));
    assert_eq!(iterations(&stdout(&gd)), iterations(&stdout(&full)));
}

#[test]
fn seeded_solves_repeat_except_for_time() {
    let args = [
        "solve",
        "--problem",
        "li-tridiagonal",
        "--n",
        "30",
        "--method",
        "scbgd",
        "--q",
        "5",
        "--seed",
        "3",
    ];
    let strip = |o: Output| {
        let mut f: Vec<String> = stdout(&o).split_whitespace().map(String::from).collect();
        f.remove(5);
        f
    };
    assert_eq!(strip(scbgd(&args)), strip(scbgd(&args)));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["solve", "--n", "200", "--method", "gd"][..],
        &["solve", "--problem", "nope", "--n", "20", "--method", "gd"],
        &["solve", "--problem", "broyden", "--n", "20", "--method", "sideways"],
        &[
            "solve",
            "--problem",
            "broyden",
            "--n",
            "20",
            "--method",
            "scbgd",
            "--delta",
            "2",
        ],
        &[
            "solve",
            "--problem",
            "broyden",
            "--n",
            "5",
            "--method",
            "scbgd",
            "--q",
            "6",
        ],
        &[
            "solve",
            "--problem",
            "broyden",
            "--n",
            "20",
            "--method",
            "gd",
            "--bogus",
        ],
        &["verify", "--suite", "nope"],
        &[],
    ] {
        assert_eq!(scbgd(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn nonconvergence_exits_1() {
    let o = scbgd(&[
        "solve",
        "--problem",
        "broyden",
        "--n",
        "50",
        "--method",
        "gd",
        "--max-iter",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).trim_end().ends_with("false"));
}

#[test]
fn help_documents_every_flag() {
    let expected: [(&str, &[&str]); 4] = [
        (
            "solve",
            &[
                "--problem",
                "--n",
                "--method",
                "--q",
                "--delta",
                "--tol",
                "--max-iter",
                "--seed",
            ],
        ),
        ("bench", &["--config", "--csv", "--table", "--workers"]),
        ("verify", &["--suite", "--seed"]),
        ("trace", &["--problem", "--n", "--method", "--out"]),
    ];
    for (cmd, flags) in expected {
        let o = scbgd(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        for flag in flags {
            assert!(text.contains(flag), "{cmd} --help lacks {flag}");
        }
    }
    assert_eq!(scbgd(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_suites_pass() {
    let o = scbgd(&["verify", "--suite", "descent"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("1000/1000").count(), 4);

    let o = scbgd(&["verify", "--suite", "expectation"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("tau=28"));

    let o = scbgd(&["verify", "--suite", "jacobian"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("broyden") && stdout(&o).contains("li-tridiagonal"));

    let o = scbgd(&["verify", "--suite", "bounds"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

fn trace_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn trace_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("identity.csv");
    let o = scbgd(&[
        "trace",
        "--problem",
        "identity",
        "--n",
        "4",
        "--method",
        "gd",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("iteration,residual_norm,cumulative_seconds\n"));
    assert_eq!(trace_rows(&out).len(), 2);

    let out = dir.path().join("broyden.csv");
    let o = scbgd(&[
        "trace",
        "--problem",
        "broyden",
        "--n",
        "600",
        "--method",
        "scbgd",
        "--q",
        "10",
        "--delta",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = trace_rows(&out);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(rows.last().unwrap()[1] <= 1e-6);

    let o = scbgd(&[
        "trace",
        "--problem",
        "identity",
        "--n",
        "4",
        "--method",
        "gd",
        "--out",
        "/nonexistent-dir/t.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let o = scbgd(&["bench", "--config", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "[experiment]\nproblem = broyden\ndims = 20, twenty\n").unwrap();
    let o = scbgd(&["bench", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = scbgd(&["bench", "--config", dir.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_writes_csv_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(
        &cfg,
        "[experiment]\nproblem = broyden\ndims = 20, 40\nrepetitions = 3\n\n[method]\nname = gd\n\n[method]\nname = scbgd\nq = 4\n",
    )
    .unwrap();
    let csv = dir.path().join("runs.csv");
    let table = dir.path().join("table.txt");
    let o = scbgd(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv_text = fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(fs::read_to_string(&table).unwrap(), stdout(&o));
    assert!(stdout(&o).contains("SCBGD (q=4, δ=1)"));
}

#[test]
fn shipped_broyden_config_reproduces_reference_counts() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/table1.cfg");
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t1.csv");
    let table = dir.path().join("t1.txt");
    let o = scbgd(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let row = |prefix: &str| -> Vec<f64> {
        let line = text.lines().find(|l| l.starts_with(prefix)).unwrap();
        line.split("IT")
            .nth(1)
            .unwrap()
            .split_whitespace()
            .map(|v| v.parse().unwrap())
            .collect()
    };
    let gd = row("GD ");
    for (got, want) in gd.iter().zip([201.0, 203.0, 205.0, 206.0, 208.0]) {
        assert!((got - want).abs() <= 3.0, "gd {got} vs {want}");
    }
    let sc = row("SCBGD");
    for (got, want) in sc.iter().zip([3509.0, 7220.0, 10963.0, 14783.0, 18612.0]) {
        assert!((got - want).abs() <= 0.2 * want, "scbgd {got} vs {want}");
    }
}
