use std::path::Path;
use std::process::Command;

use lagerstrom::asymptotics::{c_asym, CaseId};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lagerstrom"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let headers = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (headers, rows)
}

#[test]
fn solve_writes_monotone_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let (code, err) = run(&[
        "solve",
        "--n",
        "3",
        "--k",
        "0",
        "--eps",
        "0.1",
        "--tol",
        "1e-8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (headers, rows) = read_csv(&out);
    assert_eq!(headers, ["r", "u", "du_dr", "w"]);
    assert!(rows.len() > 10);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1] && w[1][0] > w[0][0]));
    assert_eq!(rows[0][1], 0.0);
}

#[test]
fn identities_report_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("id.json");
    let (code, err) = run(&["identities", "--tol", "1e-8", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn sweep_matches_expansion_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let (code, err) = run(&[
        "sweep",
        "--case",
        "3,0",
        "--eps-grid",
        "0.05,0.02,0.01",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (headers, rows) = read_csv(&out);
    assert_eq!(headers, ["eps", "c_star", "C", "C_ie", "C_asym", "Phi"]);
    assert_eq!(rows.len(), 3);
    for row in rows {
        let eps: f64 = row[0];
        let h = eps * eps.ln();
        assert!((row[2] - c_asym(CaseId::N3K0, eps, 3).unwrap()).abs() <= 10.0 * h * h);
        assert!((row[2] - row[3]).abs() <= 1e-7 * row[3]);
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["solve", "--n", "2", "--k", "1", "--eps", "0.05"],
        &["ie", "--n", "3", "--k", "0", "--eps", "0.1", "--format", "json"],
        &["sweep", "--case", "2,0", "--eps-grid", "0.1,0.05,0.02"],
        &[
            "asym",
            "--case",
            "2,1",
            "--eps",
            "0.001",
            "--expansion",
            "outer",
            "--grid",
            "0.5:5:10",
        ],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("{i}_{rep}.out"));
            let mut full: Vec<&str> = args.to_vec();
            let p = path.to_str().unwrap().to_string();
            full.extend(["--out", &p]);
            let (code, err) = run(&full);
            assert_eq!(code, 0, "{args:?}: {err}");
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn verify_report_is_reproducible_with_fixed_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for rep in 0..2 {
        let path = dir.path().join(format!("v{rep}.json"));
        let out = bin()
            .args(["verify", "--case", "3,0", "--out", path.to_str().unwrap()])
            .env("SOURCE_DATE_EPOCH", "1700000000")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        files.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let v: serde_json::Value = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(v["metadata"]["timestamp"], "1700000000");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--n", "3"]).0, 2);
    assert_eq!(run(&["solve", "--eps", "0"]).0, 2);
    assert_eq!(run(&["sweep", "--eps-grid", "0.1", "--format", "xml"]).0, 2);
    assert_eq!(run(&["solve", "--eps", "0.1", "--k", "1", "--f-table", "x.csv"]).0, 2);
    // n < 2 is outside the integral-equation route.
    assert_eq!(run(&["ie", "--n", "1.5", "--eps", "0.1"]).0, 1);
    // An unattainable cross-solver tolerance is a verification failure.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v.csv");
    assert_eq!(
        run(&[
            "verify",
            "--case",
            "3,0",
            "--eps-grid",
            "0.1",
            "--tol",
            "1e-15",
            "--out",
            out.to_str().unwrap()
        ])
        .0,
        3
    );
}

#[test]
fn f_table_input() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("f.csv");
    let mut body = String::from("u,f\n");
    for i in 0..=32 {
        body.push_str(&format!("{},1\n", i as f64 / 32.0));
    }
    std::fs::write(&table, body).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let (code, err) = run(&[
        "solve",
        "--n",
        "2",
        "--eps",
        "0.1",
        "--f-table",
        table.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, err) = run(&[
        "solve",
        "--n",
        "2",
        "--eps",
        "0.1",
        "--k",
        "1",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let va: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&std::fs::read(&b).unwrap()).unwrap();
    let ca = va["summary"]["c_star"].as_f64().unwrap();
    let cb = vb["summary"]["c_star"].as_f64().unwrap();
    assert!((ca - cb).abs() <= 1e-8, "{ca} vs {cb}");
}
