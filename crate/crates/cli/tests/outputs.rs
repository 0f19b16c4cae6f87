//! Output files of every scenario: golden files, determinism and schema.
//!
//! Set `LIGHTCONE_UPDATE_GOLDEN=1` to rewrite the golden files.

use std::fs;
use std::path::{Path, PathBuf};

use lightcone_cli::{parse_config, run_scenario, RunSummary, Scenario};
use serde_json::Value;

fn config(scenario: Scenario) -> String {
    let body = match scenario {
        Scenario::Lightcone => "model.M = 20\nrun.s_list = [2.0, 3.0, 4.0, 5.0, 6.0]\n",
        Scenario::Rme => "model.M = 20\nmodel.kraus = \"directed_jump\"\nrun.s_list = [2.0, 3.0, 4.0, 6.0]\n",
        Scenario::Expansion => "model.M = 20\nrun.s_list = [2.0, 3.0, 4.0, 6.0]\nexpansion.offsets = [0.0, 1.5]\n",
        Scenario::Conjecture => "model.M = 5\nconjecture.trials = 4\nseed = 7\n",
        Scenario::Stationary => "model.M = 6\nmodel.kraus = \"directed_jump\"\nrun.t_final = 2.0\n",
        Scenario::Audit => "model.M = 6\nmodel.n = 4\nmodel.potential = \"random\"\nmodel.potential_amplitude = 0.5\nseed = 3\n",
    };
    format!("scenario = \"{scenario}\"\n{body}")
}

fn run(scenario: Scenario, dir: &Path) -> RunSummary {
    let cfg = parse_config(&config(scenario)).unwrap();
    run_scenario(&cfg, dir).unwrap()
}

fn golden_dir(scenario: Scenario) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(scenario.name())
}

/// Files compared against the golden copies; `summary.json` carries a
/// wall-clock time and is checked separately.
fn compared(summary: &RunSummary) -> Vec<String> {
    summary
        .artifacts
        .iter()
        .filter(|a| a.ends_with(".csv") || a.as_str() == "fits.json" || a.as_str() == "audit.json")
        .cloned()
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-8 * a.abs().max(b.abs()) + 1e-15
}

fn assert_csv_close(actual: &str, golden: &str, what: &str) {
    let (a, g): (Vec<&str>, Vec<&str>) = (actual.lines().collect(), golden.lines().collect());
    assert_eq!(a.first(), g.first(), "{what}: header");
    assert_eq!(a.len(), g.len(), "{what}: row count");
    for (row, (la, lg)) in a.iter().zip(&g).enumerate().skip(1) {
        let (ca, cg): (Vec<&str>, Vec<&str>) = (la.split(',').collect(), lg.split(',').collect());
        assert_eq!(ca.len(), cg.len(), "{what}: row {row}");
        for (x, y) in ca.iter().zip(&cg) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => assert!(close(u, v), "{what}: row {row}: {u} vs {v}"),
                _ => assert_eq!(x, y, "{what}: row {row}"),
            }
        }
    }
}

fn assert_json_close(a: &Value, g: &Value, path: &str) {
    match (a, g) {
        (Value::Number(u), Value::Number(v)) => {
            let (u, v) = (u.as_f64().unwrap(), v.as_f64().unwrap());
            assert!(close(u, v), "{path}: {u} vs {v}");
        }
        (Value::Object(u), Value::Object(v)) => {
            assert_eq!(u.keys().collect::<Vec<_>>(), v.keys().collect::<Vec<_>>(), "{path}: keys");
            for (k, x) in u {
                assert_json_close(x, &v[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(u), Value::Array(v)) => {
            assert_eq!(u.len(), v.len(), "{path}: length");
            for (k, (x, y)) in u.iter().zip(v).enumerate() {
                assert_json_close(x, y, &format!("{path}[{k}]"));
            }
        }
        _ => assert_eq!(a, g, "{path}"),
    }
}

#[test]
fn golden_files_per_scenario() {
    let update = std::env::var_os("LIGHTCONE_UPDATE_GOLDEN").is_some();
    for scenario in Scenario::ALL {
        let tmp = tempfile::tempdir().unwrap();
        let summary = run(scenario, tmp.path());
        let golden = golden_dir(scenario);
        for name in compared(&summary) {
            let actual = fs::read_to_string(tmp.path().join(&name)).unwrap();
            if update {
                fs::create_dir_all(&golden).unwrap();
                fs::write(golden.join(&name), &actual).unwrap();
                continue;
            }
            let expected = fs::read_to_string(golden.join(&name))
                .unwrap_or_else(|e| panic!("{scenario}/{name}: {e}; rerun with LIGHTCONE_UPDATE_GOLDEN=1"));
            let what = format!("{scenario}/{name}");
            if name.ends_with(".csv") {
                assert_csv_close(&actual, &expected, &what);
            } else {
                let (a, g): (Value, Value) = (
                    serde_json::from_str(&actual).unwrap(),
                    serde_json::from_str(&expected).unwrap(),
                );
                assert_json_close(&a, &g, &what);
            }
        }
    }
}

/// `summary.json` with the wall-clock time zeroed.
fn summary_without_clock(dir: &Path) -> String {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    v["wall_clock_seconds"] = Value::from(0.0);
    v.to_string()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let random = "scenario = \"lightcone\"\nseed = 11\nmodel.M = 16\nmodel.potential = \"random\"\n\
                  model.potential_amplitude = 0.3\nmodel.kraus = \"random_local\"\nmodel.g = 0.5\n\
                  run.s_list = [2.0, 3.0, 4.0]\n";
    let cfg = parse_config(random).unwrap();
    let scenarios = [config(Scenario::Conjecture), config(Scenario::Rme)];
    let configs = std::iter::once(cfg).chain(scenarios.iter().map(|t| parse_config(t).unwrap()));
    for cfg in configs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let sa = run_scenario(&cfg, a.path()).unwrap();
        // a different pool size must not change the bytes either
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let sb = pool.install(|| run_scenario(&cfg, b.path())).unwrap();
        assert_eq!(sa.artifacts, sb.artifacts);
        for name in sa.artifacts.iter().filter(|n| *n != "summary.json") {
            let (x, y) = (fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
            assert!(x == y, "{}/{name} differs between runs", cfg.scenario);
        }
        assert_eq!(summary_without_clock(a.path()), summary_without_clock(b.path()));
    }
}

#[test]
fn every_listed_artifact_exists() {
    for scenario in Scenario::ALL {
        let tmp = tempfile::tempdir().unwrap();
        let summary = run(scenario, tmp.path());
        let mut on_disk: Vec<String> = fs::read_dir(tmp.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        on_disk.sort();
        let mut listed = summary.artifacts.clone();
        listed.sort();
        assert_eq!(listed, on_disk, "{scenario}");
        for common in ["audit.json", "fits.json", "summary.json"] {
            assert!(listed.iter().any(|a| a == common), "{scenario}: {common}");
        }
        assert_eq!(listed.iter().any(|a| a == "plot.svg"), scenario.needs_scales(), "{scenario}");
    }
}

#[test]
fn leakage_csv_has_one_row_per_scale_and_radius() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&config(Scenario::Lightcone)).unwrap();
    run_scenario(&cfg, tmp.path()).unwrap();
    let text = fs::read_to_string(tmp.path().join("leakage.csv")).unwrap();
    let lines: Vec<&str> = text.split_inclusive('\n').collect();
    assert_eq!(lines[0], "s,t,eta,leakage,f_expectation\n");
    // 5 scales × 5 radii
    assert_eq!(lines.len() - 1, 25);
    assert!(!text.contains('\r') && text.ends_with('\n'));
    let first: Vec<f64> = lines[1].trim().split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!((first[0], first[1]), (2.0, 2.0));
}

#[test]
fn audit_lists_n_norms_per_family() {
    let tmp = tempfile::tempdir().unwrap();
    run(Scenario::Audit, tmp.path());
    let audit: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("audit.json")).unwrap()).unwrap();
    assert_eq!(audit["hamiltonian_norms"].as_array().unwrap().len(), 4);
    assert_eq!(audit["kraus_sums"].as_array().unwrap().len(), 4);
}

#[test]
fn auto_speeds_are_resolved_from_kappa() {
    let tmp = tempfile::tempdir().unwrap();
    let summary = run(Scenario::Rme, tmp.path());
    let (c, c_prime) = summary.cone_speeds.unwrap();
    assert!((c - 1.5 * summary.kappa).abs() < 1e-12);
    assert!((c_prime - 1.2 * summary.kappa).abs() < 1e-12);
}

#[test]
fn failed_runs_leave_no_partial_outputs() {
    // frozen dynamics: ⟨f_ts⟩ ≡ 0 admits no power-law fit
    let text = "scenario = \"lightcone\"\nmodel.M = 12\nmodel.J = 0.0\ncone.c = 2.0\ncone.c_prime = 1.0\n";
    let cfg = parse_config(text).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let err = run_scenario(&cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 4, "{err}");
    assert!(err.to_string().contains("lightcone"));
    assert!(!out.exists());

    let slow = "scenario = \"lightcone\"\nmodel.M = 12\ncone.c = 1.0\ncone.c_prime = 0.5\n";
    let err = run_scenario(&parse_config(slow).unwrap(), &out).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    assert!(err.to_string().contains("κ"));
    assert!(!out.exists());
}
