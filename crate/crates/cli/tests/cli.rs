use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use delcap::theorem1_bound;

fn delcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l:?}: {e}")))
        .collect()
}

/// Data rows of a CSV file with `#` header lines, split on commas.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let (comments, rest): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    let header = rest[0].split(',').map(String::from).collect();
    let rows = rest[1..]
        .iter()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (comments.into_iter().map(String::from).collect(), header, rows)
}

#[test]
fn coefficients() {
    let o = delcap(&["coefficient", "--in", &data("delsub_s003.csv")]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "0.3621");
    let o = delcap(&["coefficient", "--in", &data("deletion_anchors.csv")]);
    assert_eq!(stdout(&o).trim(), "0.4143");
}

#[test]
fn convexify_writes_ray() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = delcap(&[
        "convexify",
        "--in",
        &data("deletion_anchors.csv"),
        "--grid",
        "0.65:1:0.001",
        "--out",
        out.to_str().unwrap(),
        "--deterministic",
    ]);
    assert!(o.status.success(), "{o:?}");
    let (comments, header, rows) = csv_rows(&out);
    assert!(comments.iter().any(|c| c == "# seed=42"));
    assert!(comments.iter().all(|c| !c.contains("generated_unix")));
    assert_eq!(header, ["d", "value", "rule", "witness_anchors"]);
    assert_eq!(rows.len(), 351);
    for row in &rows {
        let d: f64 = row[0].parse().unwrap();
        let v: f64 = row[1].parse().unwrap();
        assert!((v - 0.4143 * (1.0 - d)).abs() <= 5e-5, "{row:?}");
        assert!(["anchor", "scale"].contains(&row[2].as_str()));
        assert_eq!(row[3], "0.65");
    }
    let report = &json_lines(&o)[0];
    assert_eq!(report["points"], 351);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, extra: &[&str]| {
        let path = dir.path().join(name);
        let mut args = vec![
            "simulate",
            "--n",
            "12",
            "--trials",
            "2000",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let o = delcap(&args);
        assert!(o.status.success(), "{o:?}");
        fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv", &["--deterministic"]);
    let b = run("b.csv", &["--deterministic"]);
    assert_eq!(a, b);
    let c = run("c.csv", &[]);
    assert!(c.lines().any(|l| l.starts_with("# generated_unix=")));
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.starts_with("# generated_unix="))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&c));
}

#[test]
fn simulate_trial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trials.csv");
    let o = delcap(&["simulate", "--trials", "20000", "--seed", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let (comments, header, rows) = csv_rows(&out);
    assert!(comments.iter().any(|c| c.starts_with("# rng=ChaCha8Rng")));
    assert_eq!(header, ["trial", "M1", "M2", "|y|"]);
    assert_eq!(rows.len(), 20_000);
    for r in rows.iter().take(100) {
        let v: Vec<usize> = r.iter().map(|x| x.parse().unwrap()).collect();
        assert_eq!(v[1] + v[2], v[3]);
    }
    let lines = json_lines(&o);
    assert_eq!(lines.last().unwrap()["check"], "simulate");
    assert_eq!(lines.last().unwrap()["pass"], true);
}

#[test]
fn verify_commands_pass() {
    let o = delcap(&["verify-lemma1", "--n", "6", "--grid-step", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let last = json_lines(&o).pop().unwrap();
    assert!(last["max_dev"].as_f64().unwrap() <= 1e-12);

    let o = delcap(&["verify-genie", "--n", "3", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = delcap(&["verify-appendix", "--n", "8", "--grid-step", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn combine_matches_library() {
    let o = delcap(&["combine", "--c1", "0.5", "--c2", "0.2", "--d1", "0.3", "--d2", "0.7", "--lambda", "0.4"]);
    assert!(o.status.success());
    let line = &json_lines(&o)[0];
    assert_eq!(line["rule"], "eq1");
    assert_eq!(line["value"].as_f64().unwrap(), theorem1_bound(0.5, 0.2, 0.3, 0.7, 0.4));
}

#[test]
fn crossing_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let low = dir.path().join("low.csv");
    fs::write(&low, "d,value,source\n0.05,0.01,test\n").unwrap();
    let out = dir.path().join("lb.csv");
    let o = delcap(&[
        "finite-n",
        "--n",
        "2",
        "--grid",
        "0.1:0.2:0.1",
        "--in",
        low.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let last = json_lines(&o).pop().unwrap();
    assert_eq!(last["check"], "no_crossing");
    assert_eq!(last["pass"], false);
}

#[test]
fn finite_n_against_shipped_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lb.csv");
    let o = delcap(&[
        "finite-n",
        "--n",
        "4",
        "--grid",
        "0.7:0.9:0.1",
        "--in",
        &data("deletion_anchors.csv"),
        "--out",
        out.to_str().unwrap(),
        "--tol",
        "1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (comments, header, rows) = csv_rows(&out);
    assert!(comments.iter().any(|c| c.starts_with("# tol=")));
    assert!(comments.iter().any(|c| c.starts_with("# validity=conditional")));
    assert_eq!(header[2], "lower_bound");
    assert_eq!(rows.len(), 3);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(delcap(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(delcap(&["law", "--d", "1.5"]).status.code(), Some(2));
    assert_eq!(delcap(&["verify-lemma1", "--n", "11"]).status.code(), Some(2));
    assert_eq!(delcap(&["convexify", "--in", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(
        delcap(&["convexify", "--in", &data("deletion_anchors.csv"), "--grid", "1:0:0.1"])
            .status
            .code(),
        Some(2)
    );
    let o = delcap(&["law", "--d", "1.5"]);
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("probability"));
}

#[test]
fn law_rows_are_distributions() {
    let o = delcap(&["law", "--n", "3", "--d", "0.4", "--s", "0.1", "--deterministic"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut sums = std::collections::BTreeMap::new();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next(), Some("x,y,probability"));
    for l in lines {
        let f: Vec<&str> = l.split(',').collect();
        *sums.entry(f[0].to_string()).or_insert(0.0) += f[2].parse::<f64>().unwrap();
    }
    assert_eq!(sums.len(), 8);
    for s in sums.values() {
        assert!((s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn figure_columns() {
    let o = delcap(&["figure", "--in", &data("deletion_anchors.csv"), "--grid", "0.6:0.7:0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "d,input,improved,rule,witness_anchors,lower_reference");
    // 0.6 lies below the only anchor and is skipped
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("0.65,0.145,0.145,anchor,0.65,"));
    let cols: Vec<&str> = rows[2].split(',').collect();
    assert_eq!(cols[1], "");
    assert_eq!(cols[3], "scale");
    let reference: f64 = cols[5].parse().unwrap();
    assert!((reference - 0.1185 * 0.3).abs() < 1e-12);

    let o = delcap(&["figure", "--in", &data("delsub_s003.csv"), "--grid", "0.6:0.7:0.1"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("0.7,") && l.contains(",eq15,") && l.ends_with(',')));
}
