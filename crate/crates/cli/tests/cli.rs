use std::process::{Command, Output};

use levy_cli::RunConfig;
use levy_core::{LevyTriplet, ModelConfig};
use proptest::prelude::*;

const BM: &str = r#"{"model":"pure_diffusion","a":1.0}"#;

fn levy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levy")).args(args).output().expect("levy runs")
}

#[test]
fn survive_prints_a_header_and_one_row_per_time() {
    let o = levy(&["survive", "--model", BM, "--domain", "-1,1", "--tmax", "2", "--nt", "8", "--n", "101"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p,method");
    assert_eq!(lines.len(), 9);
    assert!(lines[1..].iter().all(|l| l.ends_with(",laplace") && l.split(',').count() == 3));
    assert!(!text.contains('\r'));
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        vec!["survive", "--model", BM, "--domain", "1,-1"],
        vec!["density", "--model", r#"{"model":"stable","alpha":2.5,"c1":1,"c2":1}"#],
        vec!["survive", "--bogus"],
        vec!["verify", "--suite", "nonexistent"],
    ] {
        let o = levy(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn validation_errors_name_their_kind() {
    let o = levy(&["survive", "--model", BM, "--domain", "1,-1"]);
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error kind=validation"));
}

#[test]
fn start_outside_the_domain_survives_with_probability_zero() {
    let o = levy(&["survive", "--model", BM, "--domain", "-1,1", "--x0", "3", "--nt", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")), "{text}");
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(levy(&["--help"]).status.code(), Some(0));
}

#[test]
fn model_can_be_read_from_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, r#"{"model":"stable","alpha":1.5,"c1":1.0,"c2":1.0}"#).unwrap();
    let o = levy(&["kernel", "--model", path.to_str().unwrap(), "--n", "5", "--ymin", "-1", "--ymax", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().nth(5).unwrap().starts_with("1,1.33333333333,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_config_round_trips(
        alpha in 0.2f64..1.95,
        n in proptest::option::of(5usize..5000),
        tmax in proptest::option::of(0.01f64..100.0),
        x0 in proptest::option::of(-1.0f64..1.0),
        seed in proptest::option::of(any::<u64>()),
        method in proptest::option::of(prop_oneof![Just("laplace".to_string()), Just("penalized".to_string())]),
    ) {
        let model = ModelConfig::from_triplet(&LevyTriplet::stable(alpha, 1.0, 0.5)).unwrap();
        let cfg = RunConfig { model: Some(model), domain: Some("-1,0.5;1,2".into()), n, tmax, x0, seed, method, ..Default::default() };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn unknown_config_fields_are_rejected() {
    assert!(RunConfig::from_json(r#"{"n": 10, "grid": 3}"#).is_err());
}
