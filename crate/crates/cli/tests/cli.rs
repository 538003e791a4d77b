use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use schmearlab::limsetmap::ObstructionWitness;
use schmearlab::schmear::AveragingReport;
use schmearlab::sequences::LimitReport;
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schmearlab"))
        .args(args)
        .env("SCHMEARLAB_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    v["report"].clone()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn slope_is_exact() {
    let r = report(&run(&[
        "slope",
        "--action",
        &fixture("twisted.json"),
        "--element",
        "a^4 b^16",
    ]));
    assert_eq!(r["m"][0]["exact"], "4/5 + 0 r2");
    assert_eq!(r["m"][0]["numeric"], 0.8);
    assert_eq!(r["horizontal"]["exact"], "20 + 0 r2");
}

#[test]
fn slope_on_a_diagonal() {
    let r = report(&run(&[
        "slope",
        "--action",
        &fixture("gamma.json"),
        "--action2",
        &fixture("gamma_prime.json"),
        "--element",
        "b^3",
    ]));
    assert_eq!(r["diagonal"]["nu"]["exact"], "2 + 0 r2");
    assert_eq!(r["diagonal"]["slope"], 2.0);
}

#[test]
fn oracle_reports_both_values() {
    let r = report(&run(&["oracle", "--word", "ab", "--mesh", "64"]));
    assert_eq!(r["closed_form"]["exact"], "2 + 1 r2");
    let delta = r["delta"].as_f64().unwrap();
    assert!(delta.abs() < 0.05, "{delta}");
}

#[test]
fn witness_names_the_twisting_pair() {
    let r = report(&run(&[
        "witness",
        "--action1",
        &fixture("product.json"),
        "--action2",
        &fixture("twisted.json"),
        "--families",
        &fixture("std.txt"),
    ]));
    assert_eq!(r["found"], true);
    let w: ObstructionWitness = serde_json::from_value(r["witness"].clone()).unwrap();
    assert_eq!((w.fam1.as_str(), w.fam2.as_str()), ("a^n", "a^n b^{n^2}"));
}

#[test]
fn limit_report_reparses() {
    let r = report(&run(&[
        "limit",
        "--action",
        &fixture("stretched.json"),
        "--family",
        "a^n b^{n^2} c^{n^2}",
        "--schedule",
        "4:11",
    ]));
    let lim: LimitReport = serde_json::from_value(r).unwrap();
    assert!(lim.is_converged());
    assert!((lim.m_limit[0] - 0.5).abs() < 1e-3);
    assert_eq!(lim.evidence.len(), 8);
}

#[test]
fn average_report_reparses() {
    let r = report(&run(&[
        "average",
        "--action1",
        &fixture("product.json"),
        "--action2",
        &fixture("star.json"),
        "--fam-a",
        "a^n b^{n^2}",
        "--fam-b",
        "a^n b^{-n^2}",
    ]));
    let avg: AveragingReport = serde_json::from_value(r).unwrap();
    assert!(avg.pass);
    assert_eq!(avg.checks.len(), 7);
}

#[test]
fn convexity_over_fan_seeds() {
    let r = report(&run(&[
        "convexity",
        "--action1",
        &fixture("product.json"),
        "--action2",
        &fixture("star.json"),
        "--seeds",
        &fixture("table3d.txt"),
        "--rounds",
        "1",
    ]));
    assert_eq!(r["pass"], true);
    assert_eq!(r["hull_dimension"], 2);
    assert_eq!(r["points"].as_array().unwrap().len(), 6);
}

#[test]
fn schmear_csv_and_json() {
    let args = [
        "schmear",
        "--action1",
        &fixture("gamma.json"),
        "--action2",
        &fixture("gamma_prime.json"),
        "--radius",
        "3",
    ];
    let out = run(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eta_prefix,nu_inv,source"));
    assert_eq!(lines.count(), 52);
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    assert_eq!(report(&run(&json_args)).as_array().unwrap().len(), 52);
}

#[test]
fn output_file_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<String> = (0..2)
        .map(|i| {
            dir.path()
                .join(format!("w{i}.json"))
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    for p in &paths {
        let out = run(&[
            "witness",
            "--action1",
            &fixture("product.json"),
            "--action2",
            &fixture("stretched.json"),
            "--families",
            &fixture("std.txt"),
            "--out",
            p,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn family_syntax_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "a^n\n# comment\nb^n a^{n^}\n").unwrap();
    let out = run(&[
        "witness",
        "--action1",
        &fixture("product.json"),
        "--action2",
        &fixture("twisted.json"),
        "--families",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.txt:3:10: "), "{err}");
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"m\": 2,\n  \"d\": ,\n}\n").unwrap();
    let out = run(&[
        "slope",
        "--action",
        path.to_str().unwrap(),
        "--element",
        "a",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.json") && err.contains("line 3"), "{err}");
}

#[test]
fn domain_errors_exit_1() {
    let out = run(&[
        "average",
        "--action1",
        &fixture("product.json"),
        "--action2",
        &fixture("star.json"),
        "--fam-a",
        "a^n",
        "--fam-b",
        "b^n",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not in a common fiber"));
    let out = run(&[
        "slope",
        "--action",
        &fixture("gamma.json"),
        "--action2",
        &fixture("gamma_prime.json"),
        "--element",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["oracle", "--word", "ab", "--mesh", "2"])
            .status
            .code(),
        Some(2)
    );
    let out = run(&[
        "schmear",
        "--action1",
        &fixture("gamma.json"),
        "--action2",
        &fixture("gamma.json"),
        "--radius",
        "13",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "limit",
        "--action",
        &fixture("product.json"),
        "--family",
        "a^n",
        "--schedule",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_schmearlab"))
        .args(["oracle", "--word", "ab"])
        .env("SCHMEARLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
