use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pucell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pucell")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_arguments_prints_usage() {
    let o = pucell(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn bad_flags_are_usage_errors() {
    for args in [
        &["accuracy", "--n", "0"][..],
        &["accuracy", "--bogus"],
        &["accuracy", "--kernel"],
        &["accuracy", "--shape", "0"],
        &["frobnicate"],
    ] {
        let o = pucell(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = pucell(&["accuracy", "--n", "0"]);
    assert!(stderr(&o).contains("--n"));
}

#[test]
fn non_square_subdomain_count_is_rejected() {
    let o = pucell(&["accuracy", "--n", "100", "--d", "10"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn gen_then_fit_round_trips_points() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let model = dir.path().join("model.txt");
    let o = pucell(&["gen", "--n", "10", "--out", path(&nodes)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = fs::read_to_string(&nodes).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    let expected = pucell::halton::<f64>(10);
    for (row, p) in rows.iter().zip(&expected) {
        assert_eq!(row.len(), 3);
        assert_eq!((row[0], row[1]), (p.x, p.y));
        assert_eq!(row[2], pucell::franke_at(p));
    }

    let o = pucell(&["fit", "--nodes", path(&nodes), "--d", "4", "--out", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let saved = fs::read_to_string(&model).unwrap();
    let reread: Vec<(f64, f64)> = saved
        .lines()
        .skip_while(|l| !l.starts_with("nodes "))
        .skip(1)
        .take(10)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|f| f.parse().unwrap()).collect();
            (v[0], v[1])
        })
        .collect();
    assert_eq!(reread, expected.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>());
}

#[test]
fn fit_then_eval_reports_rmse() {
    let dir = tempfile::tempdir().unwrap();
    let nodes = dir.path().join("nodes.csv");
    let model = dir.path().join("model.txt");
    let values = dir.path().join("values.csv");
    // Two-column input plus --franke.
    let xy: String = pucell::halton::<f64>(1000)
        .iter()
        .map(|p| format!("{},{}\n", p.x, p.y))
        .collect();
    fs::write(&nodes, xy).unwrap();
    let o = pucell(&["fit", "--nodes", path(&nodes), "--d", "256", "--out", path(&model)]);
    assert_eq!(o.status.code(), Some(3), "two columns without --franke");

    let o = pucell(&["fit", "--nodes", path(&nodes), "--franke", "--d", "256", "--out", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = pucell(&["eval", "--model", path(&model), "--side", "11", "--out", path(&values)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("rmse = "));
    let rows = fs::read_to_string(&values).unwrap();
    assert_eq!(rows.lines().count(), 121);
    assert!(rows.lines().all(|l| l.split(',').count() == 3));
}

#[test]
fn malformed_csv_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("cols.csv", "0.1,0.2,1\n0.3,0.4\n", ":2:"),
        ("nan.csv", "0.1,0.2,1\n0.3,0.4,1\nabc,0.5,1\n", ":3:"),
        ("outside.csv", "0.1,0.2,1\n1.5,0.4,1\n", ":2:"),
        ("wide.csv", "0.1,0.2,1,4\n", ":1:"),
    ];
    for (name, body, marker) in cases {
        let f = dir.path().join(name);
        fs::write(&f, body).unwrap();
        let o = pucell(&["fit", "--nodes", path(&f), "--d", "4"]);
        assert_eq!(o.status.code(), Some(3), "{name}");
        assert!(stderr(&o).contains(marker), "{name}: {}", stderr(&o));
    }
    let o = pucell(&["fit", "--nodes", "/nonexistent/nodes.csv"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn duplicate_nodes_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("dup.csv");
    fs::write(&f, "0.5,0.5,1\n0.25,0.5,2\n0.5,0.5,3\n").unwrap();
    let o = pucell(&["fit", "--nodes", path(&f), "--d", "1"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn uncovered_points_follow_the_policy() {
    let dir = tempfile::tempdir().unwrap();
    // Four centres clustered near the origin: radius √(1/2) leaves (1,1) uncovered.
    let centers = dir.path().join("centers.csv");
    fs::write(&centers, "0.05,0.05\n0.1,0.05\n0.05,0.1\n0.1,0.1\n").unwrap();
    let model = dir.path().join("model.txt");
    let o = pucell(&["fit", "--n", "200", "--centers", path(&centers), "--out", path(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = pucell(&["eval", "--model", path(&model), "--side", "5", "--policy", "error"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));

    let o = pucell(&["eval", "--model", path(&model), "--side", "5", "--policy", "nearest"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let uncovered: usize = out
        .lines()
        .find_map(|l| l.split("uncovered = ").nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(uncovered > 0, "{out}");
}

#[test]
fn accuracy_defaults_print_scientific_rmse() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let o = pucell(&["accuracy", "--out", path(&report)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().find(|l| l.starts_with("rmse = ")).unwrap();
    let value = line.trim_start_matches("rmse = ");
    assert!(value.contains('e'), "{value}");
    assert!(value.parse::<f64>().unwrap() < 1e-3);
    let csv = fs::read_to_string(&report).unwrap();
    assert!(csv.starts_with("n,d,s,kernel,shape,rmse"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sweep_writes_one_row_per_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = pucell(&[
        "sweep", "--n", "1089", "--d", "256", "--kernel", "gaussian", "--sweep-min", "5", "--sweep-max", "50",
        "--sweep-count", "4", "--out", path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("shape,rmse,failed"));
    let shapes: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(shapes, vec![5.0, 20.0, 35.0, 50.0]);
}

#[test]
fn timing_reports_both_search_times_and_ratio() {
    let o = pucell(&["timing", "--n", "66049", "--d", "16384", "--repeats", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("search time (cell) = "), "{out}");
    assert!(out.contains("search time (brute force) = "), "{out}");
    assert!(out.contains("ratio = "), "{out}");
    assert!(out.contains("search paths agree = true"), "{out}");
}
