use std::fs;
use std::process::Command;

fn sim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmw-sim"))
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let status = sim()
            .args(["ber-ebn0", "--ebn0", "5,7", "--max-bits", "100000", "--coding", "on", "--seed", seed, "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "3");
    let b = run("b.csv", "3");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("ebn0_db,"));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    let from_file = dir.path().join("file.csv");
    let from_flags = dir.path().join("flags.csv");
    fs::write(
        &cfg,
        format!(
            "mode = \"ber-distance\"\nseed = 11\nantennas = \"patch\"\nmax_bits = 50000\ndistances_m = [3.0, 6.0]\nout = {:?}\n",
            from_file
        ),
    )
    .unwrap();
    assert!(sim().arg("ber-distance").arg("--config").arg(&cfg).status().unwrap().success());
    let status = sim()
        .args(["ber-distance", "--seed", "11", "--antennas", "patch", "--max-bits", "50000", "--distances", "3,6", "--out"])
        .arg(&from_flags)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read(from_file).unwrap(), fs::read(from_flags).unwrap());
}

#[test]
fn frame_roundtrip_to_stdout() {
    let out = sim().args(["frame-roundtrip", "--frames", "5", "--seed", "2"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "frame,start_bit,preamble_score,descramble_corr,fec_corrected,payload_ok");
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r.ends_with(",32,64,0,1")));
}

#[test]
fn other_modes_run() {
    for args in [
        vec!["eye", "--traces", "100"],
        vec!["response", "--channel", "two-ray"],
        vec!["fifo-sim", "--capacities", "2", "--events", "10000"],
    ] {
        let out = sim().args(&args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.len() > 100);
    }
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "min_errors = 0\n").unwrap();
    let conflict = dir.path().join("eye.toml");
    fs::write(&conflict, "mode = \"eye\"\n").unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec!["ber-ebn0".into(), "--config".into(), bad.display().to_string()],
        vec!["ber-ebn0".into(), "--config".into(), conflict.display().to_string()],
        vec!["ber-ebn0".into(), "--config".into(), dir.path().join("missing.toml").display().to_string()],
        vec!["ber-ebn0".into(), "--antennas".into(), "dish".into()],
        vec!["ber-ebn0".into(), "--coding".into(), "maybe".into()],
        vec!["response".into(), "--channel".into(), "no-such-profile".into()],
        vec![
            "fifo-sim".into(),
            "--out".into(),
            dir.path().join("no/such/dir.csv").display().to_string(),
        ],
    ];
    for args in cases {
        let out = sim().args(&args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn shipped_configs_run() {
    let dir = tempfile::tempdir().unwrap();
    let configs = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    for entry in fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let mode = text
            .lines()
            .find_map(|l| l.strip_prefix("mode = "))
            .unwrap()
            .trim_matches('"')
            .to_string();
        let out = sim()
            .arg(&mode)
            .arg("--config")
            .arg(&path)
            .args(["--max-bits", "20000", "--out"])
            .arg(dir.path().join("o.csv"))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}
