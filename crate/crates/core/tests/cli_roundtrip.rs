//! End-to-end checks of the command-line binary: exit codes, error
//! reporting with field paths, output files, and bit-for-bit agreement
//! between results.json and the in-process API.

use std::path::Path;
use std::process::{Command, Output};

use levywh::models::{Family, LevyModel};
use levywh::pricing::{self, PricingRequest, Product};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levywh"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const BROWNIAN_TOUCH: &str = r#"{
    "model": {"family": "brownian", "params": {"c": 0.04}, "drift": "auto"},
    "market": {"s0": 100.0, "r": 0.0},
    "products": [{"type": "one_touch_up", "barrier": 115.0, "maturity": 0.5}]
}"#;

#[test]
fn validate_accepts_a_good_job() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "job.json", BROWNIAN_TOUCH);
    let out = run(&["validate", "--config", "job.json"], dir.path());
    assert!(out.status.success(), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}

#[test]
fn validate_reports_schema_path_and_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "job.json",
        r#"{
            "model": {"params": {"c": 0.04}, "drift": "auto"},
            "market": {"s0": 100.0},
            "products": [{"type": "one_touch_up", "barrier": 115.0, "maturity": 0.5}]
        }"#,
    );
    let out = run(&["validate", "--config", "job.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model.family"), "{err}");
}

#[test]
fn validate_gates_touch_products_on_path_type() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "job.json",
        r#"{
            "model": {"family": "cgmy", "params": {"c": 0.5, "g": 6.0, "m": 9.0, "y": -0.5}, "drift": "auto"},
            "market": {"s0": 100.0},
            "products": [{"type": "one_touch_up", "barrier": 115.0, "maturity": 0.5}]
        }"#,
    );
    let out = run(&["validate", "--config", "job.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("regular upwards"), "{err}");
}

#[test]
fn identity_only_job_writes_residual_and_no_prices() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "job.json",
        r#"{
            "model": {"family": "brownian", "params": {"c": 0.04}, "drift": "auto"},
            "market": {"s0": 100.0},
            "validation": {"wh_identity": true}
        }"#,
    );
    let out = run(&["price", "--config", "job.json", "--out", "res"], dir.path());
    assert!(out.status.success(), "{out:?}");
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/results.json")).unwrap())
            .unwrap();
    let residual = results["validation"]["wh_identity_residual"].as_f64().unwrap();
    assert!(residual < 1e-3, "residual {residual}");
    assert_eq!(results["points"].as_array().unwrap().len(), 0);
    let csv = std::fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    assert_eq!(csv, "product,grid_param,grid_value,price,numerical_error\n");
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/run_meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn prices_match_the_library_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "job.json", BROWNIAN_TOUCH);
    let out = run(&["price", "--config", "job.json", "--out", "res"], dir.path());
    assert!(out.status.success(), "{out:?}");

    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/results.json")).unwrap())
            .unwrap();
    let point = &results["points"][0];
    assert_eq!(point["product"], "one_touch_up");
    assert_eq!(point["grid_param"], "barrier");

    let api = pricing::price(&PricingRequest {
        model: LevyModel::new(Family::Brownian, 0.0, 0.04)
            .unwrap()
            .martingale_adjust()
            .unwrap(),
        s0: 100.0,
        t: 0.5,
        product: Product::OneTouchUp { b: 115.0 },
        r_damp: None,
        contour: None,
        discount_r: 0.0,
    })
    .unwrap();
    assert_eq!(point["price"].as_f64().unwrap().to_bits(), api.price.to_bits());
    assert_eq!(
        point["numerical_error"].as_f64().unwrap().to_bits(),
        api.numerical_error.to_bits()
    );

    // The CSV row round-trips to the same bits.
    let csv = std::fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let price_field: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
    assert_eq!(price_field.to_bits(), api.price.to_bits());
}

#[test]
fn engine_errors_are_recorded_per_point_with_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    // The swap barrier at spot passes the schema but the engine rejects it;
    // the touch point before it must still price.
    write(
        dir.path(),
        "job.json",
        r#"{
            "model": {"family": "brownian", "params": {"c": 0.04}, "drift": "auto"},
            "market": {"s0": 100.0},
            "products": [
                {"type": "one_touch_up", "barrier": 115.0, "maturity": 0.5},
                {"type": "eds", "barrier": 100.0, "recovery": 0.4, "premium_dates": [0.5, 1.0]}
            ]
        }"#,
    );
    let out = run(&["price", "--config", "job.json", "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let results: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("res/results.json")).unwrap())
            .unwrap();
    let points = results["points"].as_array().unwrap();
    assert!(points[0]["price"].is_number());
    assert!(points[1]["error"].as_str().unwrap().contains("degenerate"));
    // The failed point is absent from the curves file.
    let csv = std::fs::read_to_string(dir.path().join("res/curves.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}
