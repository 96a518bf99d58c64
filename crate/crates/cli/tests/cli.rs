use std::path::Path;
use std::process::{Command, Output};

fn ftsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftsurf"))
        .args(args)
        .output()
        .expect("run ftsurf")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn default_config(dir: &Path, platform: &str) -> String {
    let path = dir.join(format!("{platform}.toml"));
    let p = path.to_str().unwrap().to_string();
    let o = ftsurf(&["default-config", "--platform", platform, "--out", &p]);
    assert!(o.status.success(), "{}", stderr(&o));
    p
}

#[test]
fn help_and_version_succeed() {
    assert!(ftsurf(&["--help"]).status.success());
    assert!(ftsurf(&["--version"]).status.success());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(ftsurf(&["train", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ftsurf(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn enumerates_fourteen_ucat_masks() {
    let o = ftsurf(&["enumerate-faults"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count(), 14);
}

#[test]
fn missing_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_config(dir.path(), "hovering");
    let text = std::fs::read_to_string(&p).unwrap();
    let cut: String = text.lines().filter(|l| !l.starts_with("gamma")).map(|l| format!("{l}\n")).collect();
    std::fs::write(&p, cut).unwrap();
    let o = ftsurf(&["train", "--config", &p, "--output", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_config(dir.path(), "torpedo");
    let mut text = std::fs::read_to_string(&p).unwrap();
    text = text.replacen("[train]\n", "[train]\nlearnig_rate = 0.1\n", 1);
    std::fs::write(&p, text).unwrap();
    let o = ftsurf(&["train", "--config", &p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("learnig_rate"), "{}", stderr(&o));
}

#[test]
fn invalid_mask_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_config(dir.path(), "ucat");
    let o = ftsurf(&["eval", "--config", &p, "--checkpoint", "missing.ckpt", "--mask", "XX"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn missing_checkpoint_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_config(dir.path(), "ucat");
    let o = ftsurf(&["replay", "--config", &p, "--checkpoint", dir.path().join("nope.ckpt").to_str().unwrap(), "--out", "t.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn platform_flag_must_agree_with_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = default_config(dir.path(), "ucat");
    let o = ftsurf(&["train", "--config", &p, "--platform", "torpedo"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}
