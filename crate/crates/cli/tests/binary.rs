//! The `lindblad-lightcone` executable: subcommands, flags and exit codes.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lindblad-lightcone"));
    cmd.env_remove(lightcone_cli::THREADS_ENV);
    cmd
}

#[test]
fn print_defaults_is_a_valid_config() {
    let out = bin().arg("print-defaults").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, lightcone_cli::DEFAULT_CONFIG);
    assert!(lightcone_cli::parse_config(&text).is_ok());
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = tmp.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let ok = write("ok.toml", "scenario = \"stationary\"\nmodel.M = 5\nrun.t_final = 1.0\n");
    let failing = write(
        "failing.toml",
        "scenario = \"rme\"\nmodel.M = 20\nrun.s_list = [2.0, 3.0, 4.0, 6.0]\n",
    );
    let bad = write("bad.toml", "scenario = \"rme\"\nmodel.M = -1\nbogus = 1\n");
    let numeric = write(
        "numeric.toml",
        "scenario = \"lightcone\"\nmodel.M = 8\nmodel.J = 0.0\ncone.c = 2.0\ncone.c_prime = 1.0\n",
    );
    let out_dir = tmp.path().join("out");
    let run = |cfg: &std::path::Path| {
        bin()
            .args(["run", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()])
            .output()
            .unwrap()
    };

    let out = run(&ok);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[pass] ‖L ρ_st‖"));
    assert!(out_dir.join("stationary.csv").exists());

    let out = run(&failing);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] rme residual slope"));

    let out = run(&bad);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model.M") && err.contains("unknown key 'bogus'"), "{err}");

    assert_eq!(run(&numeric).status.code(), Some(4));
    let missing = tmp.path().join("absent.toml");
    assert_eq!(run(&missing).status.code(), Some(1));
}

#[test]
fn audit_subcommand_overrides_the_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "scenario = \"lightcone\"\nmodel.M = 5\noutput_dir = \"ignored\"\n").unwrap();
    let out_dir = tmp.path().join("audit");
    let out = bin()
        .args(["audit", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap(), "--threads", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<String> = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(files, ["audit.json", "fits.json", "summary.json"]);
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn thread_variable_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "scenario = \"audit\"\nmodel.M = 3\n").unwrap();
    let out_dir = tmp.path().join("o");
    let run = |value: &str| {
        bin()
            .env(lightcone_cli::THREADS_ENV, value)
            .args(["run", cfg.to_str().unwrap(), "--threads", "1", "--output-dir", out_dir.to_str().unwrap()])
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    let out = run("many");
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains(lightcone_cli::THREADS_ENV));
}

#[test]
fn verbose_logs_progress() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "scenario = \"audit\"\nmodel.M = 3\n").unwrap();
    let out = bin()
        .args(["--verbose", "run", cfg.to_str().unwrap(), "--output-dir"])
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("κ ="));
}
