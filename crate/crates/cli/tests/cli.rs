use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl3scatter"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn geometry_suite_passes_with_json_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = run(&["verify", "--suite", "geometry", "--seed", "7"], &out);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
    let ids: Vec<u64> = v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, [7, 8, 9, 10]);
    assert!(v["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn malformed_config_exits_2_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let out = dir.path().join("r");
    for text in [
        "[solve\nh = 0.1\n",
        "[solve]\nstep = 0.1\n",
        "version = 9\n",
    ] {
        std::fs::write(&cfg, text).unwrap();
        let o = run(&["geom", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists());
    }
    let o = run(&["verify", "--suite", "nonsense"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn solve_on_the_spectrum_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solve]\nlambda = [0.5, 0.0]\nh = 0.5\nr_max = 6.0\n").unwrap();
    let out = dir.path().join("r");
    let o = run(&["solve", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spectral parameter on spectrum"));
    assert!(!out.exists());
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[solve]\nh = 0.5\nr_max = 8.0\nshell = [3.0, 6.0]\ndecay_window = [3.0, 6.0]\n[spherical]\nh = 0.4\nr_max = 6.0\n").unwrap();
    let c = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for cmd in ["geom", "solve", "spherical", "atlas-check"] {
        for out in [&a, &b] {
            let o = run(&[cmd, "--config", c], out);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let mut names: Vec<_> = std::fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 8);
    for n in names {
        assert_eq!(
            std::fs::read(a.join(&n)).unwrap(),
            std::fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn csv_has_header_and_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    assert_eq!(run(&["geom"], &out).status.code(), Some(0));
    let text = std::fs::read_to_string(out.join("geom.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&header[..3], ["z1", "z2", "w1"]);
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    assert_eq!(row.len(), header.len());
    // w3 at z = (0.5, 0) is 1/6, printed with 17 significant digits.
    assert_eq!(row[4], "0.16666666666666666");
}
