use std::fs;
use std::path::PathBuf;
use std::process::Command;

use proptest::prelude::*;
use spinorbit::experiments::{ExperimentName, ModelChoice, SweepMetric, SweepSpec, DEVICE_KEYS};
use spinorbit_cli::config::{parse_config, serialize_config, ExperimentSettings, RunConfig};
use spinorbit_cli::{run, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_in_process(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("spinorbit").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn params_prints_spin_orbit_strength() {
    let cfg = config("single_electron.cfg");
    let (code, out, err) = run_in_process(&["params", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let line = out
        .lines()
        .find(|l| l.starts_with("omega_rad_per_s "))
        .expect("omega row");
    let omega: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((omega / 5.2e6 - 1.0).abs() < 0.05, "{line}");
    assert!(out.contains("omega_tilde_rad_per_s"));
}

#[test]
fn validate_empty_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.cfg");
    fs::write(&empty, "").unwrap();
    let (code, _, err) = run_in_process(&["validate", "--config", empty.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("wire_height_m"), "{err}");

    let (code, out, _) = run_in_process(&["validate", "--config", config("fig4.cfg").to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("ok"));

    let (code, _, _) = run_in_process(&["validate", "--config", "/nonexistent/x.cfg"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = run_in_process(&["frobnicate"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn fig3_binary_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3.csv");
    let status = Command::new(env!("CARGO_BIN_EXE_spinorbit"))
        .args(["fig3", "--config"])
        .arg(config("fig3.cfg"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["time_s", "occ_up1_0_0", "occ_down1_0_1", "model"]
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for model in ["full", "effective"] {
        assert_eq!(rows.iter().filter(|r| &r[3] == model).count(), 400);
    }
    for r in &rows {
        for cell in [&r[1], &r[2]] {
            let p: f64 = cell.parse().unwrap();
            assert!((-1e-12..=1.0 + 1e-9).contains(&p));
        }
        assert_eq!(r[0].split('e').next().unwrap().replace(['-', '.'], "").len(), 12);
    }
    let meta = fs::read_to_string(dir.path().join("fig3.csv.meta")).unwrap();
    assert!(meta.contains("omega_rad_per_s = 25000000.0"));
    assert!(meta.contains("# peak_transfer"));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.contains("frequency_ratio"));
}

#[test]
fn csv_output_is_deterministic() {
    let cfg = config("fig3.cfg");
    let a = run_in_process(&["fig3", "--config", cfg.to_str().unwrap()]);
    let b = run_in_process(&["fig3", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.0, EXIT_OK);
    assert_eq!(a.1, b.1);
    assert!(a.1.starts_with("time_s,occ_up1_0_0,occ_down1_0_1,model\r\n"));
}

#[test]
fn degenerate_spin_spin_fails_numerically_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("deg.cfg");
    // Omega = Omega_tilde makes gamma vanish under the symmetric choice
    fs::write(
        &cfg,
        fs::read_to_string(config("fig3.cfg")).unwrap().replace("name = fig3", "name = fig4"),
    )
    .unwrap();
    let out = dir.path().join("fig4.csv");
    let (code, _, err) = run_in_process(&[
        "fig4",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
    assert!(!out.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn gate_reports_and_sweep_rows() {
    let cfg = config("single_electron.cfg");
    let (code, out, err) = run_in_process(&["gate", "phase", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("fidelity 0.99"), "{out}");
    let (code, out, _) = run_in_process(&["gate", "cnot2", "--config", config("fig3.cfg").to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("mode b ground population"), "{out}");

    let (code, out, err) = run_in_process(&["sweep", "--config", config("sweep_delta.cfg").to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let devs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");

    let (code, _, err) = run_in_process(&["sweep", "--config", config("fig3.cfg").to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG, "{err}");
}

fn finite(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    lo..hi
}

prop_compose! {
    fn device()(
        base in prop::sample::select(vec![0usize, 1, 2]),
        h in finite(1e-7, 1e-5),
        i in finite(0.0, 1e-2),
        b in finite(0.0, 1.0),
        d in finite(1e-6, 1e-4),
        nu in finite(1e9, 1e11),
        delta in finite(1e7, 1e9),
        eps in finite(1.0001, 2.0),
        trap in prop::option::of((finite(1e-20, 1e-17), finite(1e-7, 1e-4))),
        big in prop::option::of(finite(1e7, 1e9)),
        ge in prop::option::of((finite(0.0, 1e6), finite(-1e6, 1e6))),
        w in prop::option::of(finite(0.0, 1e8)),
        temp in finite(1e-3, 1.0),
    ) -> spinorbit::DeviceParams {
        let mut p = [
            spinorbit::DeviceParams::reference_single_electron(),
            spinorbit::DeviceParams::reference_fig3(),
            spinorbit::DeviceParams::reference_fig4(),
        ][base].clone();
        p.wire_height = h;
        p.electrode_current = i;
        p.static_field = b;
        p.electron_distance = d;
        p.nu_1x = nu;
        p.nu_2x = nu * 1.1;
        p.delta = delta;
        p.constants = p.constants.with_dielectric(eps);
        p.trap_charge = trap.map(|t| t.0);
        p.trap_depth = trap.map(|t| t.1);
        p.big_delta = big;
        p.g = ge.map(|x| x.0);
        p.eta = ge.map(|x| x.1);
        p.omega_override = w;
        p.temperature = temp;
        p
    }
}

prop_compose! {
    fn settings()(
        name in prop::option::of(prop::sample::select(ExperimentName::ALL.to_vec())),
        model in prop::sample::select(vec![ModelChoice::Full, ModelChoice::Effective, ModelChoice::Both]),
        t in prop::option::of(finite(1e-9, 1e-3)),
        samples in 2usize..2000,
        fock in 2usize..12,
        spp in finite(1.0, 1e4),
        thr in finite(1e-3, 1.0),
        sweep in prop::option::of((
            prop::sample::select(DEVICE_KEYS.to_vec()),
            prop::collection::vec(finite(-1e9, 1e9), 1..6),
            prop::sample::select(vec![SweepMetric::Couplings, SweepMetric::MaxDeviation, SweepMetric::GateFidelity]),
        )),
    ) -> ExperimentSettings {
        ExperimentSettings {
            name,
            model,
            t_final: t,
            samples,
            fock_dim: fock,
            steps_per_period: spp,
            regime_threshold: thr,
            sweep: sweep.map(|(p, values, metric)| SweepSpec { param: p.to_string(), values, metric }),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn parse_inverts_serialize(device in device(), experiment in settings()) {
        let c = RunConfig { device, experiment };
        let text = serialize_config(&c);
        prop_assert_eq!(parse_config(&text), Ok(c), "{}", text);
    }
}
