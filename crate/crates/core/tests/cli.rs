use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64;
use serde_json::Value;

use invivo_channel::io::{sweep_from_response, write_touchstone, DataFormat, FrequencyUnit, TouchstoneOptions};
use invivo_channel::multipath::synthesize_frequency_response;

const NS: f64 = 1e-9;

fn invivo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invivo")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = invivo(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn records(v: &Value) -> &Vec<Value> {
    v["records"].as_array().unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn tmp(name: &str, contents: &[u8]) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn s2p(name: &str, taps: &[(f64, f64)], f_start: f64, f_step: f64, n: usize) -> PathBuf {
    let taps: Vec<_> = taps.iter().map(|&(d, a)| (d, Complex64::new(a, 0.0))).collect();
    let fr = synthesize_frequency_response(&taps, f_start, f_step, n).unwrap();
    let opts = TouchstoneOptions { freq_unit: FrequencyUnit::Hz, format: DataFormat::RealImaginary, reference_ohms: 50.0 };
    tmp(name, write_touchstone(&sweep_from_response(&fr, opts)).as_bytes())
}

#[test]
fn predict_at_reference_depth_is_intercept_plus_slope() {
    let v = ok_json(&["predict", "--band", "915MHz", "--depth", "10mm", "1cm"]);
    let rows = records(&v);
    assert_eq!(rows.len(), 2);
    assert!((num(&rows[0], "mean_pl_db") - (27.6 + 4.05)).abs() < 1e-12);
    assert_eq!(rows[0], rows[1]);
    assert_eq!(v["run"]["command"], "predict");
}

#[test]
fn predict_sweep_covers_valid_range() {
    let v = ok_json(&["predict", "--band", "2.4GHz", "--sweep"]);
    let depths: Vec<f64> = records(&v).iter().map(|r| num(r, "depth_mm")).collect();
    assert_eq!(depths, (1..=10).map(|k| 10.0 * k as f64).collect::<Vec<_>>());
}

#[test]
fn exit_codes() {
    // missing required flag
    assert_eq!(invivo(&["predict", "--depth", "20mm"]).status.code(), Some(2));
    // stochastic command without a seed
    assert_eq!(invivo(&["sample", "--band", "915MHz", "--depth", "20mm"]).status.code(), Some(2));
    // bad unit
    assert_eq!(invivo(&["predict", "--band", "915MHz", "--depth", "20 furlongs"]).status.code(), Some(2));
    // missing file
    assert_eq!(invivo(&["pdp", "--s2p", "/nonexistent/x.s2p"]).status.code(), Some(3));
    // malformed file
    let bad = tmp("bad.s2p", b"# MHZ S RI R 50\n1 0 0 1 0\n");
    let out = invivo(&["pdp", "--s2p", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    // depth outside the validity range
    let out = invivo(&["predict", "--band", "915MHz", "--depth", "150mm"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
    // unknown context
    assert_eq!(invivo(&["predict", "--band", "915MHz", "--region", "heart", "--direction", "left", "--depth", "20mm"]).status.code(), Some(2));
}

#[test]
fn csv_report_has_header_block_and_rows() {
    let out = invivo(&["outage", "--band", "915MHz", "--depth", "40mm", "--max-pl", "50dB", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().starts_with("# "));
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].contains("outage_probability"));
}

#[test]
fn zero_distance_link_budget_reduces_to_in_body_loss() {
    let lb = ok_json(&["linkbudget", "--band", "2.4GHz", "--depth", "70mm", "--pt", "10dBm", "--sensitivity", "-80dBm"]);
    let p = ok_json(&["predict", "--band", "2.4GHz", "--depth", "70mm"]);
    let r = &records(&lb)[0];
    let mean = num(&records(&p)[0], "mean_pl_db");
    assert_eq!(num(r, "external_pl_db"), 0.0);
    assert!((num(r, "total_pl_db") - mean).abs() < 1e-12);
    assert!((num(r, "rx_power_dbm") - (10.0 - mean)).abs() < 1e-12);
    assert!((num(r, "margin_db") - (10.0 - mean + 80.0)).abs() < 1e-12);
}

#[test]
fn classify_paths_agree() {
    let a = ok_json(&["classify", "--signal-bw", "500MHz", "--sigma-tau", "2.76ns"]);
    let b = ok_json(&["classify", "--signal-bw", "500MHz", "--bc", "7.2464MHz"]);
    assert_eq!(records(&a)[0]["channel_class"], "frequency_selective");
    assert_eq!(records(&b)[0]["channel_class"], "frequency_selective");
    let flat = ok_json(&["classify", "--signal-bw", "1MHz", "--sigma-tau", "2.76ns"]);
    assert_eq!(records(&flat)[0]["channel_class"], "flat");
    assert_eq!(invivo(&["classify", "--signal-bw", "1MHz"]).status.code(), Some(2));
}

#[test]
fn stats_on_two_tap_sweep() {
    // two equal taps 5.52 ns apart: sigma_tau = 2.76 ns
    let path = s2p("two_tap.s2p", &[(0.0, 1.0), (5.52 * NS, 1.0)], 0.5e9, 10e6, 2001);
    let v = ok_json(&["stats", "--s2p", path.to_str().unwrap(), "--signal-bw", "500MHz"]);
    let r = &records(&v)[0];
    assert!((num(r, "rms_delay_spread_ns") - 2.76).abs() / 2.76 < 0.01);
    assert!((num(r, "coherence_bandwidth_mhz") - 7.25).abs() / 7.25 < 0.01);
    assert_eq!(r["channel_class"], "frequency_selective");
    assert_eq!(r["coherence_bandwidth_defined"], true);
    assert_eq!(num(r, "points"), 2001.0);

    let c = ok_json(&["classify", "--signal-bw", "500MHz", "--s2p", path.to_str().unwrap()]);
    assert!((num(&records(&c)[0], "coherence_bandwidth_mhz") - num(r, "coherence_bandwidth_mhz")).abs() < 1e-9);
}

#[test]
fn stats_delay_offset_invariance() {
    // offset of 4 delay bins; t_step = 1/(8 * 2001 * 10 MHz)
    let t_step = 1.0 / (8.0 * 2001.0 * 10e6);
    let base = s2p("off0.s2p", &[(0.0, 1.0), (5.52 * NS, 0.8)], 0.5e9, 10e6, 2001);
    let shifted = s2p("off1.s2p", &[(4.0 * t_step, 1.0), (4.0 * t_step + 5.52 * NS, 0.8)], 0.5e9, 10e6, 2001);
    let a = ok_json(&["stats", "--s2p", base.to_str().unwrap()]);
    let b = ok_json(&["stats", "--s2p", shifted.to_str().unwrap()]);
    let (ra, rb) = (&records(&a)[0], &records(&b)[0]);
    for key in ["rms_delay_spread_ns", "mean_excess_delay_ns"] {
        assert!((num(ra, key) - num(rb, key)).abs() < 1e-9, "{key}");
    }
}

#[test]
fn single_tap_has_no_coherence_bandwidth() {
    let path = s2p("one_tap.s2p", &[(0.0, 0.3)], 905e6, 100e3, 201);
    let v = ok_json(&["stats", "--s2p", path.to_str().unwrap(), "--pad", "1"]);
    let r = &records(&v)[0];
    assert_eq!(num(r, "rms_delay_spread_ns"), 0.0);
    assert_eq!(r["coherence_bandwidth_defined"], false);
    assert!(r["coherence_bandwidth_mhz"].is_null());
    assert!((num(r, "band_average_pl_db") - 20.0 * (1.0f64 / 0.3).log10()).abs() < 1e-9);

    let pdp = ok_json(&["pdp", "--s2p", path.to_str().unwrap(), "--pad", "1"]);
    assert_eq!(records(&pdp).len(), 1);
    assert!((num(&records(&pdp)[0], "power_linear") - 1.0).abs() < 1e-12);
    assert_eq!(invivo(&["classify", "--signal-bw", "1MHz", "--s2p", path.to_str().unwrap(), "--pad", "1"]).status.code(), Some(4));
}

#[test]
fn invalid_pipeline_flags_are_usage_errors() {
    let path = s2p("flags.s2p", &[(0.0, 1.0)], 905e6, 100e3, 21);
    assert_eq!(invivo(&["pdp", "--s2p", path.to_str().unwrap(), "--pad", "0"]).status.code(), Some(2));
    assert_eq!(invivo(&["pdp", "--s2p", path.to_str().unwrap(), "--floor", "-3dB"]).status.code(), Some(2));
}

fn synthetic_csv(name: &str) -> PathBuf {
    // deterministic +-1 dB pattern: zero mean within every depth bin
    let mut text = String::from("region,direction,depth_mm,band,pl_db,source\n");
    for (band, pl0, m) in [("915MHz", 27.0, 4.0), ("2.4GHz", 31.0, 8.0)] {
        for k in 1..=10 {
            for (j, e) in [1.0, -1.0, 0.5, -0.5].iter().enumerate() {
                let d = 10.0 * k as f64;
                let src = if j % 2 == 0 { "simulation" } else { "experiment" };
                text += &format!("torso,,{d},{band},{},{src}\n", pl0 + m * d / 10.0 + e);
            }
        }
    }
    tmp(name, text.as_bytes())
}

#[test]
fn fit_recovers_generator_per_band() {
    let csv = synthetic_csv("fit.csv");
    let v = ok_json(&["fit", "--csv", csv.to_str().unwrap(), "--by-band"]);
    let rows = records(&v);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (pl0, m) = if r["band"] == "915MHz" { (27.0, 4.0) } else { (31.0, 8.0) };
        assert!((num(r, "pl0_db") - pl0).abs() < 1e-9);
        assert!((num(r, "m_db") - m).abs() < 1e-9);
        assert_eq!(num(r, "n_samples"), 40.0);
        assert!(r["region"].is_null());
    }

    let sh = ok_json(&["fit", "--csv", csv.to_str().unwrap(), "--by-band", "--table", "shadowing"]);
    // residuals {1,-1,0.5,-0.5}: unbiased variance 2.5/3
    for r in records(&sh) {
        assert!((num(r, "variance_db2") - 2.5 / 3.0).abs() < 1e-9);
    }
    assert_eq!(records(&sh).len(), 20);
}

#[test]
fn compare_ratio_from_csv_and_bundle() {
    let csv = synthetic_csv("cmp.csv");
    let v = ok_json(&["compare", "--csv", csv.to_str().unwrap(), "--a", "band=2.4GHz", "--b", "band=915MHz"]);
    let r = &records(&v)[0];
    assert!((num(r, "decay_rate_ratio") - 2.0).abs() < 1e-9);
    assert!((num(r, "delta_pl0_db") - 4.0).abs() < 1e-9);

    let v = ok_json(&["compare", "--a", "band=2.4GHz,region=torso", "--b", "band=915MHz,region=torso"]);
    let ratio = num(&records(&v)[0], "decay_rate_ratio");
    assert!((1.6..=2.4).contains(&ratio));

    // ambiguous selector when fitting by band and source
    let out = invivo(&["compare", "--csv", csv.to_str().unwrap(), "--by-band", "--by-source", "--a", "band=2.4GHz", "--b", "band=915MHz"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn lenient_ingest_skips_bad_rows() {
    let csv = tmp(
        "lenient.csv",
        b"region,depth_mm,band,pl_db\ntorso,20,915MHz,35.7\ntorso,250,915MHz,90\ntorso,30,915MHz,abc\ntorso,40,915MHz,43.8\n",
    );
    assert_eq!(invivo(&["ingest", "--csv", csv.to_str().unwrap()]).status.code(), Some(3));
    let out = invivo(&["ingest", "--csv", csv.to_str().unwrap(), "--lenient"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let r = &records(&v)[0];
    assert_eq!(num(r, "records"), 2.0);
    assert_eq!(r["skipped_lines"], "3;4");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn config_file_and_output_path() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let cfg = tmp("run.toml", b"format = \"csv\"\nseed = 12\n");
    let out_path = dir.join("sample_out.csv");
    let out = invivo(&[
        "--config", cfg.to_str().unwrap(), "sample", "--band", "915MHz", "--depth", "20mm", "-n", "3", "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("# seed: 12"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let bad_cfg = tmp("bad.toml", b"format = \"csv\"\nwindow = \"triangle\"\n");
    let out = invivo(&["--config", bad_cfg.to_str().unwrap(), "predict", "--band", "915MHz", "--depth", "20mm"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    // the report must not clobber an input
    let out = invivo(&["--config", cfg.to_str().unwrap(), "predict", "--band", "915MHz", "--depth", "20mm", "-o", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(std::fs::read_to_string(&cfg).unwrap().contains("seed = 12"));
}

#[test]
fn custom_parameter_file() {
    let params = tmp(
        "params.ini",
        b"[model 915MHz heart]\npl0_db = 20\nm_db = 5\nsigma_db = 2\n",
    );
    let v = ok_json(&["--params", params.to_str().unwrap(), "predict", "--band", "915MHz", "--region", "heart", "--depth", "30mm"]);
    let r = &records(&v)[0];
    assert!((num(r, "mean_pl_db") - 35.0).abs() < 1e-12);
    assert_eq!(num(r, "sigma_db"), 2.0);
    let out = invivo(&["--params", params.to_str().unwrap(), "predict", "--band", "2.4GHz", "--depth", "30mm"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn montecarlo_report_matches_closed_form_roughly() {
    let v = ok_json(&["montecarlo", "--band", "915MHz", "--depth", "50mm", "-n", "200000", "--seed", "3", "--threshold", "50dB"]);
    let r = &records(&v)[0];
    let rate = num(r, "outage_rate");
    let p = num(r, "closed_form_outage_probability");
    assert!((rate - p).abs() < 4.0 * (p * (1.0 - p) / 200000.0).sqrt());
    assert_eq!(v["run"]["seed"], 3);
    assert!(v["run"]["parameters"].get("workers").is_none());
}
