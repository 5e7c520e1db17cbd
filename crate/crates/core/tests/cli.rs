use std::process::{Command, Output};

use eprsim::cli::parse_csv;

fn eprsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eprsim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn summary(text: &str, key: &str) -> f64 {
    let (meta, _, _) = parse_csv(text);
    meta.iter()
        .find(|(k, _)| k == &format!("summary.{key}"))
        .map(|(_, v)| v.parse().unwrap())
        .unwrap_or_else(|| panic!("no summary.{key}"))
}

#[test]
fn pattern_default_focal() {
    let o = eprsim(&["pattern", "--alice", "focal"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (meta, cols, rows) = parse_csv(&text);
    assert_eq!(cols, vec!["z_m", "rate_raw", "rate_unit_integral"]);
    assert_eq!(rows.len(), 201);
    assert!(meta.iter().any(|(k, _)| k == "geometry_hash"));
    assert!(summary(&text, "visibility") > 0.999);
}

#[test]
fn pattern_offfocal_sum_is_constant() {
    let o = eprsim(&["pattern", "--alice", "offfocal_sum", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 201);
    let vals: Vec<f64> = rows.iter().map(|r| r[1].as_f64().unwrap()).collect();
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let min = vals.iter().copied().fold(f64::MAX, f64::min);
    assert!(max / min - 1.0 < 1e-12);
}

#[test]
fn config_errors_exit_two() {
    let o = eprsim(&["pattern", "--config", "/nonexistent/eprsim.conf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "wavelength = seven hundred\n").unwrap();
    assert_eq!(eprsim(&["marginals", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&bad, "colour = blue\n").unwrap();
    assert_eq!(eprsim(&["compare", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_parameters_exit_three() {
    assert_eq!(eprsim(&["pattern", "--alice", "sideways"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let zero = dir.path().join("zero.conf");
    std::fs::write(&zero, "n_bins = 0\n").unwrap();
    assert_eq!(eprsim(&["compare", "--config", zero.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(eprsim(&["pattern", "--format", "xml"]).status.code(), Some(3));
    let g = dir.path().join("g.conf");
    std::fs::write(&g, "focal_offset = 0.5\n").unwrap();
    assert_eq!(eprsim(&["pattern", "--config", g.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn invalid_runs_exit_four() {
    assert_eq!(eprsim(&["run", "--rule", "CoherentFocal", "--trials", "0"]).status.code(), Some(4));
    assert_eq!(eprsim(&["run", "--rule", "Telepathic"]).status.code(), Some(4));
    assert_eq!(eprsim(&["run"]).status.code(), Some(4));
    assert_eq!(eprsim(&["run", "--rule", "CoherentFocal", "--seed", "-3"]).status.code(), Some(4));
    assert_eq!(eprsim(&["run", "--rule", "CoherentFocal", "--events", "0"]).status.code(), Some(4));
}

#[test]
fn marginals_default_and_product() {
    let text = stdout(&eprsim(&["marginals"]));
    assert!((summary(&text, "trace_dist") - 0.5).abs() < 1e-12);
    assert!((summary(&text, "helstrom_success") - 0.75).abs() < 1e-12);
    let text = stdout(&eprsim(&["marginals", "--state", "product"]));
    assert!(summary(&text, "trace_dist").abs() < 1e-15);
}

#[test]
fn compare_default() {
    let o = eprsim(&["compare"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(summary(&text, "max_rel_dev_coherent") < 1e-9);
    assert!(summary(&text, "lueders_spread") < 1e-12);
}

#[test]
fn run_is_byte_reproducible_with_event_logs() {
    let dir = tempfile::tempdir().unwrap();
    let go = |sub: &str| {
        let events = dir.path().join(sub);
        let out = dir.path().join(format!("{sub}.csv"));
        let o = eprsim(&[
            "run",
            "--rule",
            "CoherentFocal",
            "--events",
            "300",
            "--seed",
            "2718",
            "--trials",
            "3",
            "--background",
            "0.1",
            "--events-dir",
            events.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let mut logs = Vec::new();
        for t in 0..3 {
            logs.push(std::fs::read(events.join(format!("trial_{t:04}.csv"))).unwrap());
        }
        (std::fs::read(out).unwrap(), logs)
    };
    let (a_out, a_logs) = go("a");
    let (b_out, b_logs) = go("b");
    assert_eq!(a_out, b_out);
    assert_eq!(a_logs, b_logs);
    let header = String::from_utf8(a_logs[0].clone()).unwrap();
    assert!(header.contains("# seed=2718\n"));
    assert!(header.contains("# rule=CoherentFocal\n"));
    assert!(header.contains("# geometry_hash="));
    assert!(header.contains("# index,alice_outcome,bob_bin,is_background\n"));
}

#[test]
fn csv_values_round_trip_bit_exactly() {
    let csv = stdout(&eprsim(&["pattern"]));
    let json: serde_json::Value = serde_json::from_slice(&eprsim(&["pattern", "--format", "json"]).stdout).unwrap();
    let (_, _, rows) = parse_csv(&csv);
    for (row, jrow) in rows.iter().zip(json["rows"].as_array().unwrap()) {
        for (x, j) in row.iter().zip(jrow.as_array().unwrap()) {
            assert_eq!(x.to_bits(), j.as_f64().unwrap().to_bits());
        }
    }
}

#[test]
fn header_reproduces_the_output() {
    // rebuild a config file from the emitted header and run again
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.conf");
    std::fs::write(&src, "slit_separation = 150e-6\nepsilon = 0.05\nn_bins = 101\n").unwrap();
    let first = stdout(&eprsim(&["pattern", "--config", src.to_str().unwrap(), "--alice", "focal"]));
    let (meta, _, _) = parse_csv(&first);
    let conf: String = meta
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("config.").map(|k| format!("{k} = {v}\n")))
        .collect();
    let rebuilt = dir.path().join("rebuilt.conf");
    std::fs::write(&rebuilt, conf).unwrap();
    let second = stdout(&eprsim(&["pattern", "--config", rebuilt.to_str().unwrap(), "--alice", "focal"]));
    assert_eq!(first, second);
}
