use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ca-backtrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn evolve_draws_the_expanding_pattern() {
    let out = run(&[
        "evolve",
        "--rule",
        "254",
        "--initial",
        "00000100000",
        "--steps",
        "4",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4], "01111111110");
    let diagram = stderr(&out);
    assert!(diagram.starts_with(".....#.....\n....###....\n"));
    assert!(diagram.contains(".#########."));
}

#[test]
fn evolve_zero_steps_is_the_initial_row() {
    let out = run(&[
        "evolve",
        "--rule",
        "30",
        "--initial",
        "0110",
        "--steps",
        "0",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["rows"], serde_json::json!(["0110"]));
}

#[test]
fn evolve_rule_zero_clears_everything() {
    let out = run(&["evolve", "--rule", "0", "--initial", "111", "--steps", "1"]);
    assert_eq!(json(&out)["rows"][1], "000");
}

#[test]
fn malformed_bitstring_names_the_position() {
    let out = run(&[
        "evolve",
        "--rule",
        "254",
        "--initial",
        "01x1",
        "--steps",
        "1",
    ]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("position 3"), "{err}");
    assert!(err.contains("'x'"), "{err}");
}

#[test]
fn bad_rule_and_width_mismatch_are_usage_errors() {
    let out = run(&["evolve", "--rule", "256", "--initial", "01", "--steps", "1"]);
    assert_eq!(code(&out), 2);
    let out = run(&[
        "evolve",
        "--rule",
        "254",
        "--initial",
        "01",
        "--steps",
        "1",
        "--width",
        "3",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn preimage_of_the_width_eleven_target() {
    let out = run(&[
        "preimage",
        "--rule",
        "254",
        "--target",
        "01111111110",
        "--steps",
        "4",
        "--width",
        "11",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["preimages"], serde_json::json!(["00000100000"]));
    assert_eq!(v["count"], 1);
    assert!(stderr(&out).contains(" s, found 1"));
}

#[test]
fn preimage_lists_all_five_for_111() {
    let out = run(&[
        "preimage", "--rule", "254", "--target", "111", "--steps", "1", "--width", "3",
    ]);
    assert_eq!(
        json(&out)["preimages"],
        serde_json::json!(["010", "011", "101", "110", "111"])
    );
}

#[test]
fn unreachable_target_has_no_preimages() {
    let out = run(&[
        "preimage", "--rule", "254", "--target", "00010000", "--steps", "1",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["preimages"], serde_json::json!([]));
    assert_eq!(json(&out)["count"], 0);
}

#[test]
fn preimage_over_the_width_cap_is_a_resource_error() {
    let target = "0".repeat(25);
    let out = run(&[
        "preimage", "--rule", "254", "--target", &target, "--steps", "1",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("backtrack"));
}

#[test]
fn preimage_needs_at_least_one_step() {
    let out = run(&[
        "preimage", "--rule", "254", "--target", "111", "--steps", "0",
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn backtrack_mark_postselect_recovers_the_single_cell() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "01111111110",
        "--steps",
        "4",
        "--width",
        "11",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["preimages"], serde_json::json!(["00000100000"]));
    assert_eq!(v["verified"], true);
    assert_eq!(v["qubits"], 12);
    assert_eq!(v["mode"], "mark_postselect");
    assert_eq!(v["marked"], serde_json::json!([32]));
    assert_eq!(v["acceptance_probability"], 1.0 / 2048.0);
    assert_eq!(v["histogram"], serde_json::json!({"00000100000": 1024}));
    for key in ["instance", "index_marginal", "extracted_orders"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn backtrack_full_paper_on_a_constant_oracle() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "00010000",
        "--steps",
        "1",
        "--base",
        "7",
        "--modulus",
        "15",
        "--mode",
        "full_paper",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let support: Vec<usize> = v["index_marginal"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.as_f64().unwrap() > 1e-9)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(support, [0, 64, 128, 192]);
    for i in support {
        assert!((v["index_marginal"][i].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
    let orders = v["extracted_orders"].as_object().unwrap();
    let histogram = v["histogram"].as_object().unwrap();
    let successes: u64 = ["01000000", "11000000"]
        .iter()
        .filter_map(|k| histogram.get(*k))
        .map(|c| c.as_u64().unwrap())
        .sum();
    assert_eq!(orders["4"].as_u64().unwrap(), successes);
    assert_eq!(
        orders["4"].as_u64().unwrap() + orders["none"].as_u64().unwrap(),
        1024
    );
    assert_eq!(v["extraction_success_probability"], 0.5);
    assert_eq!(v["qubits"], 13);
    assert_eq!(v["preimages"], serde_json::json!([]));
}

#[test]
fn backtrack_full_paper_with_a_marked_preimage() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "00111000",
        "--steps",
        "1",
        "--base",
        "7",
        "--modulus",
        "15",
        "--mode",
        "full_paper",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["preimages"], serde_json::json!(["00010000"]));
    assert_eq!(v["verified"], true);
    assert_eq!(v["order"], 4);
    assert_eq!(v["fourier_postselect_hit_probability"], 1.0 / 256.0);
}

#[test]
fn garden_of_eden_target_in_mark_mode_measures_nothing() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "00010000",
        "--steps",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["outcome"], "nothing_in_measurement");
    assert_eq!(v["preimages"], serde_json::json!([]));
    assert_eq!(v["acceptance_probability"], 0.0);
    assert!(stderr(&out).contains("nothing in measurement"));
}

#[test]
fn non_coprime_base_is_a_usage_error() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "00111000",
        "--steps",
        "1",
        "--base",
        "6",
        "--modulus",
        "15",
        "--mode",
        "full_paper",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("gcd = 3"));
}

#[test]
fn width_coupling_violation_names_the_coupling() {
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        "001110001",
        "--steps",
        "1",
        "--base",
        "7",
        "--modulus",
        "15",
        "--mode",
        "full_paper",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("ceil(log2(N^2)) = 8"));
}

#[test]
fn backtrack_over_the_qubit_cap_is_a_resource_error() {
    let target = "0".repeat(20);
    let out = run(&[
        "backtrack",
        "--rule",
        "254",
        "--target",
        &target,
        "--steps",
        "1",
        "--max-qubits",
        "16",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let args = [
        "backtrack",
        "--rule",
        "254",
        "--target",
        "00111000",
        "--steps",
        "1",
        "--base",
        "7",
        "--modulus",
        "15",
        "--mode",
        "full_paper",
        "--seed",
        "99",
        "--shots",
        "500",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let reparsed: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(ca_backtrack::json::render(&reparsed), text);
}

#[test]
fn order_examples() {
    assert_eq!(
        json(&run(&["order", "--base", "7", "--modulus", "15"]))["order"],
        4
    );
    assert_eq!(
        json(&run(&["order", "--base", "2", "--modulus", "15"]))["order"],
        4
    );
    let out = run(&["order", "--base", "1", "--modulus", "9"]);
    assert_eq!(code(&out), 2);
    let out = run(&["order", "--base", "6", "--modulus", "15"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn order_with_width_reports_the_extraction_probability() {
    let v = json(&run(&[
        "order",
        "--base",
        "7",
        "--modulus",
        "15",
        "--width",
        "8",
    ]));
    assert_eq!(v["method"], "brute_force");
    assert_eq!(v["extraction_success_probability"], 0.5);
    assert_eq!(v["qubits"], 13);
}

#[test]
fn output_flag_writes_the_file_instead_of_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.json");
    let out = run(&[
        "evolve",
        "--rule",
        "254",
        "--initial",
        "010",
        "--steps",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        written,
        "{\"rows\":[\"010\",\"111\"],\"rule\":254,\"steps\":1,\"width\":3}\n"
    );
}

#[test]
fn unwritable_output_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.json");
    let out = run(&[
        "order",
        "--base",
        "7",
        "--modulus",
        "15",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_ne!(code(&out), 0);
}

#[test]
fn unknown_flags_are_usage_errors() {
    assert_eq!(code(&run(&["evolve", "--bogus"])), 2);
    assert_eq!(
        code(&run(&[
            "backtrack",
            "--rule",
            "254",
            "--target",
            "01",
            "--steps",
            "1",
            "--mode",
            "grover"
        ])),
        2
    );
}

#[test]
fn selftest_passes_by_default() {
    let out = run(&["selftest"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["passed"], true);
    assert_eq!(
        stderr(&out)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        10
    );
}

#[test]
fn selftest_perturbation_fails_normalization() {
    let out = run(&["selftest", "--perturb", "1e-3"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["passed"], false);
    let failed: Vec<&str> = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["normalization"]);
}

#[test]
fn selftest_width_over_the_cap_is_a_resource_error() {
    let out = run(&["selftest", "--width", "26"]);
    assert_eq!(code(&out), 3);
    let out = run(&["selftest", "--width", "20", "--max-qubits", "16"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn selftest_runs_an_extra_width_that_fits() {
    let out = run(&["selftest", "--width", "14"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["criteria"].as_array().unwrap().len(), 11);
}
