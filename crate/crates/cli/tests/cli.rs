use std::process::{Command, Output};

fn gpfsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpfsp"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = gpfsp(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn project_prints_the_simplex_point() {
    assert_eq!(stdout_ok(&["project", "0.5", "0.8", "-0.2"]).trim(), "0.35 0.65 0");
    assert_eq!(stdout_ok(&["project", "1,2,3"]).trim(), "0 0 1");
    assert!(!gpfsp(&["project", "1", "x"]).status.success());
}

#[test]
fn equity_enumerates_or_samples() {
    let exact = stdout_ok(&["equity", "AsAh"]);
    assert_eq!(field(&exact, "equity"), "0.8520");
    let mc = stdout_ok(&["equity", "AsKd", "QhJcTs2d", "--samples", "500"]);
    assert_eq!(field(&mc, "samples"), "500");
    assert!(!gpfsp(&["equity", "AsAs"]).status.success());
}

#[test]
fn always_fold_loses_the_small_blind_every_hand() {
    let out = stdout_ok(&[
        "eval",
        "--a",
        "call",
        "--b",
        "always-fold",
        "--games",
        "10",
        "--max-hands",
        "10",
        "--allow-free-fold",
    ]);
    assert_eq!(field(&out, "hands"), "100");
    assert_eq!(field(&out, "mbb_per_hand_a"), "750.00");
}

#[test]
fn eval_writes_hand_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("deltas.csv");
    stdout_ok(&["eval", "--a", "RANDOM", "--b", "CALL", "--games", "4", "--csv", csv.to_str().unwrap()]);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("hand,delta_a\n"));
    assert!(text.lines().count() > 4);
}

#[test]
fn kuhn_train_resume_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let trained = stdout_ok(&["train", "--game", "kuhn", "--set", "episodes=200", "--set", "metrics_every=100", "--out", out]);
    assert_eq!(field(&trained, "episodes"), "200");
    let ckpt = dir.path().join("checkpoint.bin");
    let ckpt = ckpt.to_str().unwrap();
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 3);
    assert!(std::fs::read_to_string(dir.path().join("config.txt")).unwrap().contains("game = kuhn"));

    let score: f64 = field(&stdout_ok(&["kuhn-exploitability", "--checkpoint", ckpt]), "exploitability")
        .parse()
        .unwrap();
    assert!(score > 0.0 && score < 2.0);

    let resumed = stdout_ok(&["resume", "--checkpoint", ckpt, "--episodes", "300"]);
    assert_eq!(field(&resumed, "episodes"), "300");
    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 4);

    // A Kuhn checkpoint cannot sit at a hold'em table.
    assert!(!gpfsp(&["eval", "--a", ckpt, "--b", "CALL", "--games", "2"]).status.success());
}

#[test]
fn bad_overrides_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(!gpfsp(&["train", "--game", "kuhn", "--set", "episodes", "--out", out]).status.success());
    assert!(!gpfsp(&["train", "--game", "kuhn", "--set", "warp=9", "--out", out]).status.success());
    assert!(!gpfsp(&["train", "--game", "chess", "--out", out]).status.success());
}
