//! End-to-end tests driving the `hedimer` binary: exit codes, output
//! schemas, the statistics gate, and byte-level reproducibility.

use std::path::PathBuf;
use std::process::{Command, Output};

fn hedimer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hedimer"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tmp_file(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("hedimer-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn spectrum_reproduces_the_zero_u_plus_table() {
    let out = hedimer(&["spectrum", "--well", "0u+", "--j", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "well,J,v,E_MHz,eps_ret_MHz,eps_rad_MHz,R_min_a0,R_max_a0,mean_R_a0,near_threshold"
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 6, "six levels ending at v = 5");
    let last = &rows[5];
    assert_eq!(last[2], "5");
    let e5: f64 = last[3].parse().unwrap();
    assert!((e5 + 2.487).abs() <= 0.5f64.max(0.005 * 2.487), "v5 at {e5} MHz");
    let e0: f64 = rows[0][3].parse().unwrap();
    assert!((e0 + 1418.0).abs() <= 7.1, "v0 at {e0} MHz");
}

#[test]
fn forbidden_j_exits_with_usage_code_and_statistics_message() {
    let out = hedimer(&["spectrum", "--well", "0u+", "--j", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.starts_with("hedimer: error[statistics]:"), "{err}");
    assert!(err.contains("odd J"), "{err}");
}

#[test]
fn fit_gamma_recovers_the_decay_rate() {
    let input = tmp_file(
        "tableA.csv",
        "v, energy_mhz, sigma_mhz\n4, -18.2, 0.5\n3, -79.6, 0.5\n2, -253.3, 0.5\n\
         1, -648.5, 0.5\n0, -1430, 20\n",
    );
    let out = hedimer(&["fit-gamma", "--in", input.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let gamma = doc["gamma_mhz"].as_f64().unwrap();
    assert!((gamma - 1.625).abs() <= 0.003, "gamma = {gamma}");
    assert!(doc["gamma_sigma_mhz"].as_f64().unwrap() > 0.0);
    assert_eq!(doc["residuals_mhz"].as_array().unwrap().len(), 5);
}

#[test]
fn reduce_applies_the_affine_law() {
    // delta chosen so the corrections bring it to exactly -18.2 MHz:
    // 2µB₀/h = 5.598498 MHz/G at 0.2 G and 3k_BT/h at 5 µK.
    let input = tmp_file(
        "meas.csv",
        "v, delta_mhz, b0_gauss, t_uk, n_cm3\n4, -20.07, 0.2, 5.0, 8e13\n",
    );
    let out = hedimer(&[
        "reduce",
        "--in",
        input.to_str().unwrap(),
        "--scattering-length-nm",
        "20",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let rec = &doc["measurements"][0];
    let b = rec["binding_energy_mhz"].as_f64().unwrap();
    let budget = &rec["budget"];
    let applied = budget["zeeman_mhz"].as_f64().unwrap()
        + budget["thermal_trap_mhz"].as_f64().unwrap()
        + budget["thermal_kinetic_mhz"].as_f64().unwrap();
    assert!((b - (-20.07 + applied)).abs() < 1e-9);
    assert!((b + 18.2).abs() < 0.5, "consensus v4 value, got {b}");
    assert!(budget["mean_field_bound_mhz"].as_f64().unwrap() > 0.0);
}

#[test]
fn reduce_fits_a_raw_scan() {
    // Synthetic calorimetric scan: temperature peaks on resonance at
    // -20.07 MHz with a 2.8 MHz width over a 5 µK baseline.
    let mut rows = String::from("detuning_mhz, temperature_uk\n");
    for i in 0..41 {
        let x = -30.0f64 + i as f64 * 0.5;
        let y = 5.0 + 3.0 * 1.96 / ((x + 20.07) * (x + 20.07) + 1.96);
        rows.push_str(&format!("{x}, {y}\n"));
    }
    let input = tmp_file("scan.csv", &rows);
    let out = hedimer(&[
        "reduce",
        "--in",
        input.to_str().unwrap(),
        "--b0-gauss",
        "0.2",
        "--v-label",
        "4",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let fit = &doc["lorentzian_fit"];
    assert!((fit["center_mhz"].as_f64().unwrap() + 20.07).abs() < 1e-6);
    assert!((fit["width_mhz"].as_f64().unwrap() - 2.8).abs() < 1e-6);
    assert!((fit["offset"].as_f64().unwrap() - 5.0).abs() < 1e-6);
    // A scan without the field is unreducible.
    let out = hedimer(&["reduce", "--in", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_is_byte_identical_across_runs() {
    let args = [
        "budget",
        "--t-uk",
        "10",
        "--b0-gauss",
        "2",
        "--n-cm3",
        "1e14",
        "--scattering-length-nm",
        "20",
        "--verify-mc",
        "--samples",
        "200000",
        "--seed",
        "11",
    ];
    let a = hedimer(&args);
    let b = hedimer(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b), "identical invocations, identical bytes");
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let recoil = doc["budget"]["recoil_mhz"].as_f64().unwrap();
    assert!((recoil - 0.02124).abs() < 2e-4);
}

#[test]
fn basis_dump_lists_the_block_dimensions() {
    let out = hedimer(&["basis"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let dims: Vec<u64> = doc["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["dim"].as_u64().unwrap())
        .collect();
    assert_eq!(dims, vec![4, 3, 6, 3, 1]);
    let first = &doc["blocks"][0];
    assert_eq!(first["name"], "0u+");
    assert_eq!(first["labels"].as_array().unwrap().len(), 4);
}

#[test]
fn curves_csv_has_metadata_and_weight_columns() {
    let out = hedimer(&[
        "curves",
        "--block",
        "0u+",
        "--j",
        "1",
        "--r-min",
        "150",
        "--r-max",
        "400",
        "--step",
        "1.0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# block: 0u+"));
    assert!(text.contains("curve,R_a0,V_MHz,g_per_a0sq,w_1Sigma,w_3Pi,w_5Sigma,w_5Pi"));
    // J below Omega is a usage error.
    let out = hedimer(&["curves", "--block", "2u", "--j", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_override_file() {
    let good = tmp_file("constants.json", r#"{ "gamma_mhz": 1.6248 }"#);
    let out = hedimer(&[
        "--constants",
        good.to_str().unwrap(),
        "budget",
        "--t-uk",
        "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let bad = tmp_file("constants_bad.json", r#"{ "c3": 6.4 }"#);
    let out = hedimer(&[
        "--constants",
        bad.to_str().unwrap(),
        "budget",
        "--t-uk",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("hedimer: error[parse]:"));

    let conflicted = tmp_file(
        "constants_conflict.json",
        r#"{ "c3_au": 6.405, "gamma_mhz": 1.6248 }"#,
    );
    let out = hedimer(&[
        "--constants",
        conflicted.to_str().unwrap(),
        "budget",
        "--t-uk",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn spectrum_json_and_wavefunction_dump() {
    let dir = std::env::temp_dir().join("hedimer-cli-tests").join("wf");
    let _ = std::fs::remove_dir_all(&dir);
    let out = hedimer(&[
        "spectrum",
        "--well",
        "0u-",
        "--format",
        "json",
        "--dump-wavefunctions",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["well"], "0u-");
    assert_eq!(doc["j"], 2);
    let levels = doc["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 1);
    let e = levels[0]["energy_mhz"].as_f64().unwrap();
    assert!((e + 7.304).abs() < 0.5);
    let wf = dir.join("0um_J2_v0.csv");
    let text = std::fs::read_to_string(&wf).expect("wavefunction file exists");
    assert!(text.starts_with("R_a0,u\n"));
    assert!(text.lines().count() > 1000);
}
