use std::fs;
use std::process::{Command, Output};

fn gh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gh"))
        .args(args)
        .output()
        .expect("run gh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_string))
        .unwrap_or_else(|| panic!("no {key} in {}", stdout(o)))
}

#[test]
fn build_eq_serial_reports_size() {
    let o = gh(&["build", "--function", "eq-serial", "--n", "8"]);
    assert!(o.status.success());
    assert!(field(&o, "pipes").parse::<usize>().unwrap() <= 25);
}

#[test]
fn build_pj_csv_columns() {
    let o = gh(&[
        "build",
        "--function",
        "pj",
        "--n",
        "4",
        "--k",
        "3",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "function,n,k,b,t,m,variant,seed,pipes,alice_bits,bob_bits,max_time,bounds,size_ratio"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(row[8].parse::<usize>().unwrap() <= 12);
}

#[test]
fn build_dmaj_reports_ratio() {
    let o = gh(&[
        "build",
        "--function",
        "dmaj",
        "--n",
        "64",
        "--variant",
        "st97",
    ]);
    assert!(o.status.success());
    assert!(field(&o, "size_ratio").parse::<f64>().unwrap() > 0.0);
}

#[test]
fn randomized_build_needs_seed() {
    let o = gh(&["build", "--function", "pub-eq", "--n", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn verify_eq_serial_exhaustive() {
    let o = gh(&["verify", "--function", "eq-serial", "--n", "6"]);
    assert!(o.status.success());
    assert_eq!(field(&o, "verdict"), "pass");
    assert_eq!(field(&o, "inputs"), "4096");
}

#[test]
fn verify_dmaj_sampled() {
    let o = gh(&[
        "verify",
        "--function",
        "dmaj",
        "--n",
        "256",
        "--variant",
        "st97",
        "--seed",
        "1",
        "--samples",
        "300",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert_eq!(field(&o, "mode"), "sampled");
}

#[test]
fn verify_randomized_equality() {
    let o = gh(&[
        "verify",
        "--function",
        "pub-eq",
        "--n",
        "8",
        "--seed",
        "4",
        "--samples",
        "2000",
    ]);
    assert!(o.status.success());
    assert_eq!(field(&o, "equal_errors"), "0");
}

#[test]
fn corrupted_instance_is_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("inst");
    let o = gh(&[
        "build",
        "--function",
        "eq-serial",
        "--n",
        "3",
        "--seed",
        "9",
        "--samples",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let mut corrupted = 0;
    for i in 0..8 {
        let path = out.join(format!("instance-{i}.txt"));
        let ok = gh(&["verify", "--instance", path.to_str().unwrap()]);
        assert!(ok.status.success());
        let text = fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap();
        let x = header
            .split_whitespace()
            .find_map(|f| f.strip_prefix("x="))
            .unwrap();
        let y = header
            .split_whitespace()
            .find_map(|f| f.strip_prefix("y="))
            .unwrap();
        if x != y {
            continue;
        }
        let broken: String = text
            .lines()
            .map(|l| if l.starts_with("tap ") { "tap open" } else { l })
            .collect::<Vec<_>>()
            .join("\n");
        fs::write(&path, broken).unwrap();
        let bad = gh(&["verify", "--instance", path.to_str().unwrap()]);
        assert_eq!(bad.status.code(), Some(1));
        assert_eq!(field(&bad, "verdict"), "counterexample");
        assert_eq!(field(&bad, "x"), x);
        corrupted += 1;
    }
    assert!(corrupted > 0);
}

#[test]
fn compile_formula_verifies() {
    let o = gh(&[
        "compile",
        "--formula",
        "XOR(AND(x1,y1),AND(x2,y2))",
        "--verify",
    ]);
    assert!(o.status.success());
    assert_eq!(field(&o, "verdict"), "pass");
}

#[test]
fn malformed_formula_exits_2_with_offset() {
    let o = gh(&["compile", "--formula", "XOR(AND(x1,y1),AND(x2 y2))"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("offset 22"));
}

#[test]
fn compile_tree_within_edge_count() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq1.sexp");
    fs::write(
        &path,
        r#"(A ("0" (B ("0" (ACCEPT)) ("1" (REJECT)))) ("1" (B ("0" (REJECT)) ("1" (ACCEPT)))))"#,
    )
    .unwrap();
    let o = gh(&["compile", "--tree", path.to_str().unwrap(), "--verify"]);
    assert!(o.status.success());
    let pipes: usize = field(&o, "pipes").parse().unwrap();
    assert!(pipes <= field(&o, "edges").parse().unwrap());
}

#[test]
fn oracle_commands() {
    let o = gh(&["oracle", "--ghs", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 2));

    let dir = tempfile::tempdir().unwrap();
    let eq1 = dir.path().join("eq1.tt");
    fs::write(&eq1, "alice_bits=1 bob_bits=1\n10\n01\n").unwrap();
    let o = gh(&["oracle", "--min-gh", eq1.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&o, "min_gh"), "3");
    let o = gh(&["oracle", "--min-gh", eq1.to_str().unwrap(), "--s-max", "2"]);
    assert_eq!(o.status.code(), Some(1));

    let ip2 = dir.path().join("ip2.tt");
    fs::write(&ip2, "alice_bits=2 bob_bits=2\n0000\n0101\n0011\n0110\n").unwrap();
    let o = gh(&["oracle", "--covers", ip2.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&o, "c0"), "3");
    assert_eq!(field(&o, "c1"), "3");
}

#[test]
fn identical_config_gives_identical_output() {
    let args = [
        "verify",
        "--function",
        "pri-eq",
        "--n",
        "8",
        "--seed",
        "5",
        "--samples",
        "500",
    ];
    assert_eq!(gh(&args).stdout, gh(&args).stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        gh(&["build", "--function", "nope", "--n", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gh(&["build", "--function", "eq-serial"]).status.code(),
        Some(2)
    );
    assert_eq!(gh(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        gh(&[
            "build",
            "--function",
            "eq-serial",
            "--n",
            "8",
            "--budget-pipes",
            "10"
        ])
        .status
        .code(),
        Some(2)
    );
}
