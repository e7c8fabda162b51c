use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const COARSE: [&str; 8] = [
    "--set",
    "grid.half_width=30",
    "--set",
    "grid.h=0.5",
    "--set",
    "measure.window_min=-25",
    "--set",
    "measure.window_max=-10",
];

fn quench(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench"))
        .args(args)
        .env("QUENCH_OUTPUT_ROOT", root)
        .output()
        .unwrap()
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn profile_writes_listed_artifacts() {
    let root = tempfile::tempdir().unwrap();
    let out = ok(&quench(&["profile", "--output", "p", "--set", "profile.h=0.05"], root.path()));
    let listed: Vec<&str> = out.lines().collect();
    assert!(listed.len() >= 5);
    for f in &listed {
        assert!(Path::new(f).starts_with(root.path().join("p")), "{f}");
        assert!(Path::new(f).exists());
    }
    let txt = fs::read_to_string(root.path().join("p/profile.txt")).unwrap();
    assert!(txt.contains("u_top_at_0"));
}

#[test]
fn config_file_and_overrides_reach_manifest() {
    let root = tempfile::tempdir().unwrap();
    let cfg = root.path().join("run.cfg");
    fs::write(&cfg, "# spectrum at a slower quench\nmodel.c_x = 0.3\nprofile.h = 0.05\n").unwrap();
    ok(&quench(
        &["spectrum", "-c", cfg.to_str().unwrap(), "--output", "s", "--c-x", "0.4"],
        root.path(),
    ));
    let manifest = fs::read_to_string(root.path().join("s/manifest.txt")).unwrap();
    assert!(manifest.contains("model.c_x = 0.4"), "{manifest}");
    assert!(manifest.contains("run.mode = spectrum"));
    let spectrum = fs::read_to_string(root.path().join("s/spectrum.txt")).unwrap();
    assert!(spectrum.contains("max_real_eigenvalue"));
}

#[test]
fn sweep_then_compare() {
    let root = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--output", "sw", "--g-right", "1", "--alphas", "-0.1,0,0.1", "--threads", "3"];
    args.extend(COARSE);
    ok(&quench(&args, root.path()));
    let csv = root.path().join("sw/sweep.csv");
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 4);
    assert!(root.path().join("sw/melnikov.txt").exists());
    let report = ok(&quench(&["compare", csv.to_str().unwrap()], root.path()));
    assert!(report.contains("signs_agree = true"), "{report}");
    let path = root.path().join("cmp.txt");
    ok(&quench(&["compare", csv.to_str().unwrap(), "--report", path.to_str().unwrap()], root.path()));
    assert_eq!(fs::read_to_string(path).unwrap(), report);
}

#[test]
fn bad_input_fails_cleanly() {
    let root = tempfile::tempdir().unwrap();
    for args in [
        vec!["melnikov", "--set", "model.nonsense=1"],
        vec!["melnikov", "--set", "no-equals-sign"],
        vec!["simulate", "--c-x", "-1"],
        vec!["compare", "/nonexistent/sweep.csv"],
    ] {
        let o = quench(&args, root.path());
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"), "{args:?}");
    }
}
