//! End-to-end runs of the `mumford` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mumford_core::io::{read_series, Report, TIMESTAMP_PREFIX};

fn mumford(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mumford"));
    cmd.args(args).env_remove("MUMFORD_OUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn mumford")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(dir: &Path, name: &str) -> Report {
    Report::parse(&fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&mumford(&["no-such-command"], &[])), 2);
    assert_eq!(code(&mumford(&["compare-numeric", "--precision", "7"], &[])), 2);
    assert_eq!(code(&mumford(&["expand-f1", "--genus", "1"], &[])), 2);
    assert_eq!(code(&mumford(&["genus1-delta", "--trunc", "-1"], &[])), 2);
}

#[test]
fn oversized_multipliers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let group = dir.path().join("group.toml");
    fs::write(
        &group,
        "genus = 2\n\
         [[generators]]\nattracting = [0.0, 0.0]\nrepelling = \"inf\"\nmultiplier = [0.5, 0.0]\n\
         [[generators]]\nattracting = [1.0, 0.0]\nrepelling = [-1.0, 0.0]\nmultiplier = [0.002, 0.0]\n",
    )
    .unwrap();
    let out = mumford(&["compare-numeric", "--trunc", "1", "--group-file", group.to_str().unwrap(), "--stdout"], &[]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));

    fs::write(&group, "genus = 2\ngenerators = 3\n").unwrap();
    let out = mumford(&["compare-numeric", "--group-file", group.to_str().unwrap(), "--stdout"], &[]);
    assert_eq!(code(&out), 2);
}

#[test]
fn corrupted_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "trunc = \"two\"\n").unwrap();
    assert_eq!(code(&mumford(&["expand-f1", "--config", cfg.to_str().unwrap(), "--stdout"], &[])), 2);
    fs::write(&cfg, "colour = 3\n").unwrap();
    assert_eq!(code(&mumford(&["expand-f1", "--config", cfg.to_str().unwrap(), "--stdout"], &[])), 2);
}

#[test]
fn repeated_runs_differ_only_in_timestamp() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = mumford(&["expand-det-lambda", "--genus", "2", "--trunc", "1", "--out", d.path().to_str().unwrap()], &[]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["lambda.matrix", "det_lambda.series", "det_lambda.report"] {
        let strip = |d: &Path| -> String {
            fs::read_to_string(d.join(name))
                .unwrap()
                .lines()
                .filter(|l| !l.starts_with(TIMESTAMP_PREFIX))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(a.path()), strip(b.path()), "{name}");
    }
    let det = read_series(&fs::read_to_string(a.path().join("det_lambda.series")).unwrap()).unwrap();
    assert!(!det.is_zero());
}

#[test]
fn flags_override_config_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("from-env");
    let cfg_out = dir.path().join("from-config");
    fs::create_dir_all(&env_out).unwrap();
    fs::create_dir_all(&cfg_out).unwrap();

    let out = mumford(&["expand-f1", "--trunc", "1"], &[("MUMFORD_OUT_DIR", &env_out)]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&env_out, "f1.report").get("parameters", "truncation"), Some("1"));

    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("trunc = 2\nout = {:?}\n", cfg_out.to_str().unwrap())).unwrap();
    let out = mumford(&["expand-f1", "--config", cfg.to_str().unwrap()], &[("MUMFORD_OUT_DIR", &env_out)]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&cfg_out, "f1.report").get("parameters", "truncation"), Some("2"));

    let out = mumford(&["expand-f1", "--config", cfg.to_str().unwrap(), "--trunc", "0"], &[]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&cfg_out, "f1.report").get("parameters", "truncation"), Some("0"));
}

#[test]
fn leading_term_check_passes_in_genus_three() {
    let out = mumford(&["verify-leading", "--genus", "3", "--trunc", "1", "--stdout"], &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{text}{}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("leading term: PASS"));
}

#[test]
fn discriminant_coefficients_are_printed() {
    let out = mumford(&["genus1-delta", "--trunc", "6"], &[]);
    assert_eq!(code(&out), 0);
    let got: Vec<i64> = String::from_utf8_lossy(&out.stdout).lines().map(|l| l.trim().parse().unwrap()).collect();
    assert_eq!(got, [1, -24, 252, -1472, 4830, -6048]);
}
