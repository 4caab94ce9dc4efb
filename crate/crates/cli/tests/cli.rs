use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    stdout: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout)
            .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", self.stdout))
    }

    fn keys(&self) -> BTreeSet<String> {
        self.json()
            .as_object()
            .expect("object")
            .keys()
            .cloned()
            .collect()
    }
}

fn ncp(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ncp"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
    }
}

fn keys(list: &[&str]) -> BTreeSet<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("{key} missing in {v}"))
}

const ERROR_KEYS: &[&str] = &["class", "error", "exit_code"];

#[test]
fn validate_exit_codes() {
    let cases = [
        ("pair2.json", 0),
        ("trivial2.json", 0),
        ("z3.json", 0),
        ("state_mixed.json", 0),
        ("state_pure.json", 0),
        ("state_random.json", 0),
        ("kernel_random.json", 0),
        ("kraus_random.json", 0),
        ("kraus_depolarizing.json", 0),
        ("stochastic_random.json", 0),
        ("coin_model.json", 0),
        ("qubit_model.json", 0),
        ("pm_half.json", 0),
        ("pipeline.json", 0),
        ("bad_inverse.json", 1),
        ("state_not_psd.json", 1),
        ("stochastic_bad.json", 1),
        ("kraus_not_tp.json", 1),
        ("transpose.json", 1),
        ("pipeline_positivity_loss.json", 1),
        ("bad_fmt.json", 2),
        ("bad_json.json", 2),
        ("unknown_element.json", 2),
        ("does_not_exist.json", 2),
    ];
    for (file, code) in cases {
        let r = ncp(&["validate", &fixture(file), "--json"]);
        assert_eq!(r.code, code, "{file}: {}", r.stdout);
        let v = r.json();
        if code == 2 {
            assert_eq!(r.keys(), keys(ERROR_KEYS), "{file}");
        } else {
            assert_eq!(v["pass"], Value::Bool(code == 0), "{file}");
            assert!(v["kind"].is_string());
        }
    }
}

#[test]
fn validate_report_schemas() {
    let r = ncp(&["validate", &fixture("pair2.json"), "--json"]);
    assert_eq!(
        r.keys(),
        keys(&["elements", "kind", "outcomes", "pass", "unimodular"])
    );
    let r = ncp(&["validate", &fixture("state_random.json"), "--json"]);
    assert_eq!(
        r.keys(),
        keys(&[
            "failing_fiber",
            "fiber_min_eigenvalues",
            "kind",
            "normalization_deficit",
            "normalized",
            "pass",
            "positive",
            "symmetric",
            "symmetry_deficit",
        ])
    );
    let r = ncp(&["validate", &fixture("kernel_random.json"), "--json"]);
    assert_eq!(
        r.keys(),
        keys(&[
            "failing_fiber",
            "hermitian",
            "hermiticity_deficit",
            "kind",
            "min_joint_eigenvalue",
            "min_section_eigenvalue",
            "normalization_deficit",
            "normalized",
            "pass",
            "positive",
        ])
    );
}

#[test]
fn validation_failures_name_the_violation() {
    for file in [
        "bad_inverse.json",
        "stochastic_bad.json",
        "kraus_not_tp.json",
        "pipeline_mismatch.json",
    ] {
        let r = ncp(&["validate", &fixture(file), "--json"]);
        assert_eq!(r.code, 1, "{file}");
        assert_eq!(r.keys(), keys(&["kind", "pass", "violation"]), "{file}");
    }
}

#[test]
fn crb_on_coin_with_half_estimator() {
    let r = ncp(&[
        "crb",
        &fixture("coin_model.json"),
        "--estimator",
        &fixture("pm_half.json"),
        "--json",
    ]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert_eq!(
        r.keys(),
        keys(&[
            "bound",
            "fisher",
            "max_bias",
            "saturated",
            "second_moment",
            "slack",
            "unbiased"
        ])
    );
    assert!((num(&v, "bound") - 0.25).abs() < 1e-8);
    assert!((num(&v, "second_moment") - 0.25).abs() < 1e-12);
    assert_eq!(v["saturated"], Value::Bool(true));
}

#[test]
fn crb_exit_codes() {
    let r = ncp(&["crb", &fixture("qubit_model.json"), "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.keys(), keys(&["bound", "fisher"]));
    assert!((num(&r.json(), "bound") - 1.0).abs() < 1e-6);

    let r = ncp(&[
        "crb",
        &fixture("coin_model.json"),
        "--estimator",
        &fixture("zero_estimator.json"),
        "--json",
    ]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["unbiased"], Value::Bool(false));

    for model in ["folium_model.json", "constant_model.json"] {
        let r = ncp(&["crb", &fixture(model), "--json"]);
        assert_eq!(r.code, 3, "{model}");
        assert_eq!(r.keys(), keys(ERROR_KEYS));
        assert_eq!(r.json()["class"], "numerical");
    }
}

#[test]
fn fisher_reports_classical_agreement() {
    let r = ncp(&["fisher", &fixture("coin_model.json"), "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        r.keys(),
        keys(&[
            "agreement_deficit",
            "classical_fisher_rao",
            "fisher",
            "folium_residual",
            "h",
            "imaginary_part",
            "s0",
        ])
    );
    let v = r.json();
    assert!((num(&v, "fisher") - 4.0).abs() < 1e-4);
    assert!(num(&v, "agreement_deficit") < 1e-6);

    let r = ncp(&[
        "fisher",
        &fixture("qubit_model.json"),
        "--json",
        "--h",
        "1e-4",
    ]);
    assert_eq!(r.code, 0);
    let v = r.json();
    assert!(v["classical_fisher_rao"].is_null());
    assert!((num(&v, "fisher") - 1.0).abs() < 1e-4);
    assert_eq!(num(&v, "h"), 1e-4);

    let r = ncp(&["fisher", &fixture("folium_model.json")]);
    assert_eq!(r.code, 3);
}

#[test]
fn cp_verdicts() {
    let r = ncp(&["cp", &fixture("transpose.json"), "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.keys(), keys(&["is_cp", "min_choi_eigenvalue"]));
    assert_eq!(r.json()["is_cp"], Value::Bool(false));
    assert!(num(&r.json(), "min_choi_eigenvalue") < -0.5);

    let r = ncp(&["cp", &fixture("kraus_depolarizing.json"), "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["is_cp"], Value::Bool(true));

    let r = ncp(&["cp", &fixture("stochastic_random.json"), "--json"]);
    assert_eq!(r.code, 1);
}

#[test]
fn gns_dimensions() {
    for (file, dim, ideal) in [("state_mixed.json", 4, 0), ("state_pure.json", 2, 2)] {
        let r = ncp(&["gns", &fixture(file), "--json"]);
        assert_eq!(r.code, 0);
        assert_eq!(
            r.keys(),
            keys(&["dim", "elements", "gram_spectrum", "ideal_dim"])
        );
        let v = r.json();
        assert_eq!(v["dim"], dim);
        assert_eq!(v["ideal_dim"], ideal);
        assert_eq!(v["gram_spectrum"].as_array().unwrap().len(), 4);
    }
    assert_eq!(ncp(&["gns", &fixture("state_not_psd.json")]).code, 1);
}

#[test]
fn push_pull_compose_write_usable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| dir.path().join(name).to_string_lossy().into_owned();

    let r = ncp(&[
        "push",
        &fixture("state_random.json"),
        &fixture("kernel_random.json"),
        "-o",
        &out("pushed.json"),
        "--json",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.keys(), keys(&["outcome_distribution", "output"]));
    // the groupoid reference was made absolute, so the file validates from elsewhere
    assert_eq!(ncp(&["validate", &out("pushed.json")]).code, 0);

    let r = ncp(&[
        "compose",
        &fixture("kernel_random.json"),
        &fixture("kraus_depolarizing.json"),
        "-o",
        &out("composed.json"),
        "--json",
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["pass"], Value::Bool(true));
    assert_eq!(ncp(&["validate", &out("composed.json")]).code, 0);
    assert_eq!(
        ncp(&["cp", &out("composed.json"), "--json"]).json()["is_cp"],
        Value::Bool(true)
    );

    let r = ncp(&[
        "pull",
        &fixture("kernel_random.json"),
        &fixture("observable_random.json"),
        "-o",
        &out("pulled.json"),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(ncp(&["validate", &out("pulled.json")]).code, 0);

    // without -o the document itself goes to stdout
    let r = ncp(&[
        "push",
        &fixture("state_mixed.json"),
        &fixture("kraus_depolarizing.json"),
    ]);
    assert_eq!(r.code, 0);
    assert_eq!(r.json()["fmt"], "cencov-ncp/1");

    let r = ncp(&[
        "push",
        &fixture("state_mixed.json"),
        &fixture("kernel_positivity_loss.json"),
        "--json",
    ]);
    assert_eq!(r.code, 1);
    assert_eq!(r.keys(), keys(ERROR_KEYS));
}

#[test]
fn pipelines() {
    let r = ncp(&["pipeline", &fixture("pipeline.json"), "--json"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        r.keys(),
        keys(&["final_state", "outcome_distribution", "pass", "stages"])
    );
    let v = r.json();
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    for s in stages {
        let k: BTreeSet<String> = s.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            k,
            keys(&[
                "kernel",
                "kernel_pass",
                "min_fiber_eigenvalue",
                "normalization_deficit",
                "normalized",
                "pass",
                "positive",
                "stage",
            ])
        );
    }
    let p: f64 = v["outcome_distribution"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((p - 1.0).abs() < 1e-12);

    let r = ncp(&[
        "pipeline",
        &fixture("pipeline_positivity_loss.json"),
        "--json",
    ]);
    assert_eq!(r.code, 1);
    let v = r.json();
    assert_eq!(v["pass"], Value::Bool(false));
    assert_eq!(v["stages"][0]["pass"], Value::Bool(true));
    assert_eq!(v["stages"][1]["positive"], Value::Bool(false));

    assert_eq!(
        ncp(&["pipeline", &fixture("pipeline_mismatch.json")]).code,
        1
    );
}

#[test]
fn corpus_is_deterministic_and_valid() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let r = ncp(&[
            "corpus",
            &d.path().to_string_lossy(),
            "--seed",
            "42",
            "--json",
        ]);
        assert_eq!(r.code, 0);
        assert_eq!(r.keys(), keys(&["seed", "written"]));
    }
    let written = ncp(&[
        "corpus",
        &a.path().to_string_lossy(),
        "--seed",
        "42",
        "--json",
    ])
    .json()["written"]
        .as_array()
        .unwrap()
        .clone();
    for name in &written {
        let name = name.as_str().unwrap();
        let fa = std::fs::read(a.path().join(name)).unwrap();
        let fb = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between runs");
        let expected = if name == "transpose.json" { 1 } else { 0 };
        let path = a.path().join(name);
        assert_eq!(
            ncp(&["validate", &path.to_string_lossy()]).code,
            expected,
            "{name}"
        );
    }
}

#[test]
fn human_output_is_key_value_lines() {
    let r = ncp(&["cp", &fixture("transpose.json")]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.lines().any(|l| l == "is_cp: false"));
}
