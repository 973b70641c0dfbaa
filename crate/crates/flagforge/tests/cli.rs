use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flagforge::{parse_circuit, parse_csv};

fn flagforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagforge")).args(args).env_remove("FLAGFORGE_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = vec!["build"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &path]);
    let o = flagforge(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path(), "t.circ", &["iceberg-rz", "--i", "1", "--l", "2", "--k", "2"]);
    parse_circuit(&fs::read_to_string(&f).unwrap()).unwrap();

    let ok = flagforge(&["verify-unitary", &f, "--against", "Z1", "1/4"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("pass"));

    let bad = flagforge(&["verify-unitary", &f, "--against", "Z1", "1/2"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).starts_with("fail"));

    let check = flagforge(&["parse-check", &f]);
    assert_eq!(check.status.code(), Some(0));
    assert!(stdout(&check).starts_with("ok: "));
}

#[test]
fn fault_distance_claims() {
    let dir = tempfile::tempdir().unwrap();
    let nonft = build(dir.path(), "n.circ", &["nonft-rzz", "--l", "1"]);
    let s = stdout(&flagforge(&["fault-distance", &nonft]));
    assert!(s.starts_with("distance 1"), "{s}");
    assert!(s.lines().any(|l| l.contains("Zq_1 Zq_b")), "{s}");

    let d3 = build(dir.path(), "d3.circ", &["steane-pi2-d3"]);
    let s = stdout(&flagforge(&["fault-distance", &d3, "--max-weight", "2"]));
    assert!(s.starts_with(">= 3"), "{s}");

    let flagged = build(dir.path(), "f.circ", &["iceberg-rz", "--l", "1"]);
    let s = stdout(&flagforge(&["fault-distance", &flagged, "--max-weight", "1"]));
    assert!(s.starts_with(">= 2"), "{s}");
}

#[test]
fn exit_codes() {
    assert_eq!(flagforge(&["build", "iceberg-rz", "--l", "0"]).status.code(), Some(2));
    assert_eq!(flagforge(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(flagforge(&["parse-check", "/nonexistent/x.circ"]).status.code(), Some(2));
    assert_eq!(flagforge(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let big = build(dir.path(), "s.circ", &["steane-prep", "--l", "3"]);
    assert_eq!(flagforge(&["verify-unitary", &big, "--against", "Z1", "1/8"]).status.code(), Some(3));

    let broken = dir.path().join("b.circ");
    fs::write(&broken, "QUBIT q0 data\nCX q0 q1\n").unwrap();
    let o = flagforge(&["parse-check", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn sweep_layers_flags_over_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.conf");
    let csv = dir.path().join("out.csv");
    fs::write(
        &cfg,
        format!("protocol = iceberg\nl = 1\np = 0.02, 0.05\nshots = 3000\nseed = 4\nout = {}\n", csv.display()),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = flagforge(&["--threads", "2", "sweep", "--config", cfg, "--shots", "2000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(&csv).unwrap();
    let points = parse_csv(&first).unwrap();
    assert_eq!(points.len(), 2);
    assert!(points.iter().all(|p| p.shots == 2000 && p.l == 1 && p.protocol == "iceberg"));

    let again = flagforge(&["--threads", "1", "sweep", "--config", cfg, "--shots", "2000"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&csv).unwrap(), first);

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "colour = blue\n").unwrap();
    assert_eq!(flagforge(&["sweep", "--config", bad.to_str().unwrap(), "--p", "0.01"]).status.code(), Some(2));
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_flagforge"));
        c.args(["sweep", "--l", "1", "--p", "0.05", "--shots", "3000"]).args(extra);
        match env {
            Some(s) => c.env("FLAGFORGE_SEED", s),
            None => c.env_remove("FLAGFORGE_SEED"),
        };
        let o = c.output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        stdout(&o)
    };
    assert_eq!(run(Some("7"), &[]), run(None, &["--seed", "7"]));
    assert_eq!(run(Some("8"), &["--seed", "7"]), run(None, &["--seed", "7"]));
    assert_ne!(run(Some("7"), &[]), run(Some("8"), &[]));
}
