use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuntzlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(name: &str) -> String {
    spec(name).display().to_string()
}

#[test]
fn cdim_prints_levels_and_status() {
    let o = run(&["cdim", &s("sub_cuntz_12.json"), "--max-level", "8"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "cdim = 2 (stabilized at level 1; ranks 1, 2, 2)\n"
    );
    let o = run(&[
        "cdim",
        &s("grid.json"),
        "--max-level",
        "4",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "lower_bound");
    assert_eq!(v["levels"], serde_json::json!([1, 2, 3, 4, 5]));
}

#[test]
fn conjugate_sub_cuntz_specs_are_equivalent() {
    let o = run(&["equiv", &s("sub_cuntz_12.json"), &s("sub_cuntz_21.json")]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("Equivalent (sub-Cuntz conjugacy)\n"),
        "{}",
        stdout(&o)
    );
    let o = run(&["equiv", &s("sub_cuntz_12.json"), &s("sub_cuntz_11_12.json")]);
    assert!(stdout(&o).starts_with("Inequivalent"));
}

#[test]
fn dyadic_sandwich_kappa() {
    // full Gram ranks of this state are 1, 3, 6, 8, 10, 12, 14 at levels 0..6
    let o = run(&["kappa", &s("sandwich_dyadic.json"), "--max-level", "6"]);
    assert!(o.status.success());
    assert!(
        stdout(&o).starts_with("κ=1 (EquivalentToCuntz); cdim lower bound 14 at level 6\n"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn supplied_equivalence_resolves_kappa() {
    let o = run(&["kappa", &s("sandwich_s2.json")]);
    assert!(stdout(&o).starts_with("κ ∈ [1, 2] unresolved; cdim 2"));
    let o = run(&["kappa", &s("sandwich_s2.json"), "--strict"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["kappa", &s("sandwich_s2_assumed.json"), "--strict"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("κ=1 (EquivalentToCuntz; asserted equivalence)"));
}

#[test]
fn malformed_norm_is_a_schema_error() {
    let o = run(&["kappa", &s("bad_norm.json")]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("schema error at z"), "{err}");
}

#[test]
fn unknown_exits_nonzero_only_when_strict() {
    let args = ["equiv", &s("grid.json"), &s("thue_morse.json")];
    let o = run(&args);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("Unknown"));
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(run(&strict).status.code(), Some(3));
}

#[test]
fn thue_morse_is_infinite_on_evidence() {
    let o = run(&["report", &s("thue_morse.json")]);
    assert!(
        stdout(&o).contains("- bucket: ∞ (evidence, cutoff 12)"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn single_cuntz_state_report() {
    let o = run(&["report", &s("cuntz_e1.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["bucket"], 1);
    assert_eq!(v["cdim"]["value"], 1);
    assert_eq!(v["cdim"]["status"], "stabilized");
    assert_eq!(v["kappa"]["certificate"], "minimal");
    assert_eq!(v["pure"], true);
}

#[test]
fn reports_are_byte_identical() {
    let args = [
        "report",
        &s("sub_cuntz_12.json"),
        &s("induced_product.json"),
        &s("shift_1_12.json"),
        &s("geometric_progression.json"),
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn rho_c_batch_is_pairwise_inequivalent() {
    let dir = tempfile::tempdir().unwrap();
    // phases ((1-t²) + 2ti)/(1+t²) for t = 0..7
    let mut files = Vec::new();
    for t in 0i64..8 {
        let den = 1 + t * t;
        let path = dir.path().join(format!("rho_{t}.json"));
        let body = format!(
            r#"{{"family":"rho_c","d":3,"c":["{}/{den}","{}/{den}"]}}"#,
            1 - t * t,
            2 * t
        );
        std::fs::write(&path, body).unwrap();
        files.push(path.display().to_string());
    }
    let mut args = vec!["report", "--format", "json"];
    args.extend(files.iter().map(String::as_str));
    let o = run(&args);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let m = v["equivalence"].as_array().unwrap();
    for (i, row) in m.iter().enumerate() {
        for (j, d) in row.as_array().unwrap().iter().enumerate() {
            let want = if i == j { "Equivalent" } else { "Inequivalent" };
            assert_eq!(d["verdict"], want, "({i}, {j})");
        }
    }
}

#[test]
fn moments_table() {
    let o = run(&[
        "moments",
        &s("sub_cuntz_12.json"),
        "--level",
        "2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let hit = v["moments"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["J"] == serde_json::json!([1, 2]) && m["K"] == serde_json::json!([]))
        .unwrap();
    assert_eq!(hit["value"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn fcs_and_rep_commands() {
    let o = run(&["fcs", &s("rho_c_3.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["d"], 3);
    let o = run(&["fcs", &s("grid.json"), "--max-level", "3"]);
    assert_eq!(
        stdout(&o),
        "no finite presentation found: cdim ≥ 4 at level 3\n"
    );
    let o = run(&["rep", &s("rep_shift_112.json")]);
    assert!(stdout(&o).contains("powers index 2"));
    assert!(stdout(&o).contains("κ=3"));
    let o = run(&["rep", &s("cuntz_e1.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn float_mode_matches_exact() {
    let e = run(&["kappa", &s("sub_cuntz_11_12.json")]);
    let f = run(&["kappa", &s("sub_cuntz_11_12.json"), "--mode", "float"]);
    assert_eq!(stdout(&e).lines().next(), stdout(&f).lines().next());
}

#[test]
fn selftest_exit_code_reflects_criteria() {
    let o = run(&["selftest"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().filter(|l| l.starts_with("criterion")).collect();
    assert_eq!(lines.len(), 10);
    let all_pass = lines.iter().all(|l| l.contains("[PASS]"));
    assert_eq!(o.status.success(), all_pass);
}
