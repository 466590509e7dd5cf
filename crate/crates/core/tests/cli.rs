use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_vmr");

fn synthetic() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic")
}

fn vmr(args: &[&str]) -> Command {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("VMR_FEATURE_ROOT").env_remove("VMR_EXTRACTOR");
    cmd
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn dataset() -> String {
    synthetic().join("dataset.jsonl").display().to_string()
}

#[test]
fn predict_with_env_root_matches_golden() {
    let mut cmd = vmr(&["predict", "--dataset", &dataset(), "--watershed"]);
    cmd.env("VMR_FEATURE_ROOT", synthetic().join("features"));
    let (code, stdout, stderr) = run(&mut cmd);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout, std::fs::read_to_string(synthetic().join("golden_predictions.jsonl")).unwrap());
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("vmr.toml");
    let root = synthetic().join("features");
    std::fs::write(&config, format!("feature_root = {:?}\ngamma = 0.7\nlambda = 32.0\n", root.display().to_string())).unwrap();
    let out = dir.path().join("p.jsonl");
    let args = ["--config", config.to_str().unwrap(), "predict", "--dataset", &dataset(), "--out", out.to_str().unwrap()];
    let (code, _, stderr) = run(&mut vmr(&args));
    assert_eq!(code, 0, "{stderr}");
    let golden = std::fs::read_to_string(synthetic().join("golden_predictions.jsonl")).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden);

    // A flag overrides the file.
    let mut with_flag = args.to_vec();
    with_flag.extend(["--gamma", "0.0"]);
    run(&mut vmr(&with_flag));
    assert_ne!(std::fs::read_to_string(&out).unwrap(), golden);

    std::fs::write(&config, "lamda = 3\n").unwrap();
    let (code, _, stderr) = run(&mut vmr(&args));
    assert_eq!(code, 1, "{stderr}");
}

#[test]
fn eval_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("golden.json");
    let golden = synthetic().join("golden_predictions.jsonl");
    let (code, stdout, stderr) = run(&mut vmr(&[
        "eval",
        "--predictions",
        golden.to_str().unwrap(),
        "--dataset",
        &dataset(),
        "--json",
        json.to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("R1@0.5"));
    let headline = stdout.lines().last().unwrap();
    assert_eq!(headline.split(' ').count(), 5);

    let (code, stdout, _) = run(&mut vmr(&["report", json.to_str().unwrap(), "--csv"]));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("method,r1@0.5"));
    assert!(stdout.lines().nth(1).unwrap().starts_with("golden,"));
}

#[test]
fn eval_only_predicted_uses_subset_denominators() {
    let dir = tempfile::tempdir().unwrap();
    let golden = std::fs::read_to_string(synthetic().join("golden_predictions.jsonl")).unwrap();
    let half: String = golden.lines().take(9).map(|l| format!("{l}\n")).collect();
    let preds = dir.path().join("half.jsonl");
    std::fs::write(&preds, half).unwrap();
    let args = |extra: &[&str]| {
        let mut a = vec!["eval", "--predictions", preds.to_str().unwrap(), "--dataset"];
        a.extend(extra);
        a.iter().map(|s| s.to_string()).collect::<Vec<_>>()
    };
    let ds = dataset();
    let full = run(&mut Command::new(BIN).args(args(&[&ds]))).1;
    let subset = run(&mut Command::new(BIN).args(args(&[&ds, "--only-predicted"]))).1;
    assert!(full.contains("queries: 18"));
    assert!(subset.contains("queries: 9"));
    assert_ne!(full.lines().last(), subset.lines().last());
}

#[test]
fn sweep_writes_csv() {
    let root = synthetic().join("features");
    let (code, stdout, stderr) = run(&mut vmr(&[
        "sweep",
        "--feature-root",
        root.to_str().unwrap(),
        "--dataset",
        &dataset(),
        "--param",
        "lambda",
        "--start",
        "20",
        "--stop",
        "70",
        "--step",
        "3",
    ]));
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(stdout.lines().count(), 18);
    assert!(stdout.starts_with("param,value,r1@0.5,r1@0.7,map@0.5,map@0.75,map_avg"));
    assert!(stderr.contains("best lambda"));
}

#[test]
fn staged_verbs_compose() {
    let dir = tempfile::tempdir().unwrap();
    let root = synthetic().join("features");
    let root = root.to_str().unwrap();
    let scored = dir.path().join("scored.jsonl");
    let merged = dir.path().join("merged.jsonl");
    let segments = dir.path().join("segments.jsonl");
    let ds = dataset();
    for args in [
        vec!["propose", "--feature-root", root, "--dataset", &ds, "--out", segments.to_str().unwrap()],
        vec!["score", "--feature-root", root, "--dataset", &ds, "--normalize", "per_video", "--lambda", "32", "--out", scored.to_str().unwrap()],
        vec!["watershed", scored.to_str().unwrap(), "--gamma", "0.7", "--out", merged.to_str().unwrap()],
    ] {
        let (code, _, stderr) = run(&mut vmr(&args));
        assert_eq!(code, 0, "{args:?}: {stderr}");
    }
    assert_eq!(std::fs::read_to_string(&segments).unwrap().lines().count(), 6);
    let scored = vmr_core::harness::jsonl::load_scored(&scored).unwrap();
    let merged = vmr_core::harness::jsonl::load_scored(&merged).unwrap();
    assert_eq!(scored.len(), 18);
    assert!(scored.iter().zip(&merged).all(|(s, m)| m.moments.len() <= s.moments.len()));

    let frames = synthetic().join("features/frames/syn00.vmrf");
    let (code, stdout, _) = run(&mut vmr(&["shots", frames.to_str().unwrap(), "--lambda", "32"]));
    assert_eq!(code, 0);
    assert!(stdout.starts_with("{\"vid\":\"syn00\""));
}

#[test]
fn oracle_verb_writes_both_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let root = synthetic().join("features");
    let (code, stdout, stderr) = run(&mut vmr(&[
        "oracle",
        "--feature-root",
        root.to_str().unwrap(),
        "--dataset",
        &dataset(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]));
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("oracle_scores") && stdout.contains("oracle_merge"));
    for f in ["oracle_scores.jsonl", "oracle_merge.jsonl", "oracle_scores.json", "oracle_merge.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn exit_codes() {
    // Usage errors.
    assert_eq!(run(&mut vmr(&[])).0, 1);
    assert_eq!(run(&mut vmr(&["predict"])).0, 1);
    assert_eq!(run(&mut vmr(&["predict", "--dataset", &dataset()])).0, 1, "no feature root");
    let root = synthetic().join("features");
    let r = root.to_str().unwrap();
    assert_eq!(run(&mut vmr(&["predict", "--feature-root", r, "--dataset", &dataset(), "--lambda", "-1"])).0, 1);
    assert_eq!(run(&mut vmr(&["predict", "--feature-root", r, "--dataset", &dataset(), "--proposal", "slidingwindow", "--watershed"])).0, 1);
    assert_eq!(run(&mut vmr(&["--help"])).0, 0);

    // Data errors.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"qid\": 1, \"query\": \"q\", \"vid\": \"a\", \"duration\": 10, \"relevant_windows\": [[4, 2]]}\n").unwrap();
    let (code, _, stderr) = run(&mut vmr(&["predict", "--feature-root", r, "--dataset", bad.to_str().unwrap()]));
    assert_eq!(code, 2);
    assert!(stderr.contains(":1:") && stderr.contains("relevant_windows[0]"), "{stderr}");
    assert_eq!(run(&mut vmr(&["shots", "/nonexistent.vmrf"])).0, 2);
    assert_eq!(run(&mut vmr(&["extract", "frames"])).0, 2, "extractor not configured");
}

fn write_fake_extractor(dir: &Path) -> PathBuf {
    // Stands in for the Python extractor: `frames --out FILE` writes a 10 s,
    // 30 fps, 4x2 VMRF track with one hard cut at 5 s.
    let script = dir.join("fake_extract.py");
    std::fs::write(
        &script,
        r#"import struct, sys
args = sys.argv[1:]
out = args[args.index("--out") + 1]
w, h, fps, n = 4, 2, 30.0, 300
with open(out, "wb") as f:
    f.write(b"VMRF" + struct.pack("<HHHfI", 1, w, h, fps, n))
    for i in range(n):
        v = 40 if i < 150 else 200
        f.write(bytes(w * h) * 2 + bytes([v]) * (w * h))
"#,
    )
    .unwrap();
    script
}

#[test]
fn extract_delegates_and_output_loads() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_fake_extractor(dir.path());
    let launcher = dir.path().join("extract.sh");
    std::fs::write(&launcher, format!("#!/bin/sh\nexec python3 {} \"$@\"\n", script.display())).unwrap();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(&launcher, std::fs::Permissions::from_mode(0o755)).unwrap();
    }
    let track = dir.path().join("clip.vmrf");
    let mut cmd = vmr(&["extract", "frames", "--out", track.to_str().unwrap()]);
    cmd.env("VMR_EXTRACTOR", &launcher);
    let (code, _, stderr) = run(&mut cmd);
    assert_eq!(code, 0, "{stderr}");

    let loaded = vmr_core::harness::features::load_frame_track(&track).unwrap();
    assert_eq!((loaded.frame_count(), loaded.fps()), (300, 30.0));
    let (code, stdout, _) = run(&mut vmr(&["shots", track.to_str().unwrap()]));
    assert_eq!(code, 0);
    assert_eq!(stdout, "{\"vid\":\"clip\",\"duration\":10.0,\"segments\":[[0.0,5.0],[5.0,10.0]]}\n");

    let mut failing = vmr(&["extract", "frames"]);
    failing.env("VMR_EXTRACTOR", &launcher);
    assert_eq!(run(&mut failing).0, 2);
}
