//! Running the `msync` binary and the ECG walkthrough script.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ecg")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

pub fn msync<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msync"))
        .args(args)
        .env_remove("MSYNC_PROJECT")
        .output()
        .expect("msync runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// One `msync` invocation of the walkthrough and its expected status.
#[derive(Debug)]
pub struct Step {
    pub args: Vec<String>,
    pub expect: i32,
}

/// The steps of `walkthrough.sh` with `$P` and `$F` substituted.
pub fn walkthrough(project: &Path) -> Vec<Step> {
    let script = std::fs::read_to_string(fixture("walkthrough.sh")).expect("walkthrough script");
    let dir = fixtures();
    script
        .lines()
        .filter_map(|line| line.strip_prefix("msync "))
        .map(|line| {
            let (cmd, expect) = match line.split_once("# exit") {
                Some((cmd, code)) => (cmd, code.trim().parse().expect("exit code")),
                None => (line, 0),
            };
            let args = cmd
                .split_whitespace()
                .map(|a| {
                    a.replace("$P", &project.display().to_string())
                        .replace("$F", &dir.display().to_string())
                })
                .collect();
            Step { args, expect }
        })
        .collect()
}

/// Run the first `count` steps (all when `None`), checking each status.
pub fn run_walkthrough(project: &Path, count: Option<usize>) -> Result<(), String> {
    let steps = walkthrough(project);
    let count = count.unwrap_or(steps.len());
    for step in steps.iter().take(count) {
        let out = msync(&step.args);
        let code = out.status.code().unwrap_or(-1);
        if code != step.expect {
            return Err(format!(
                "`msync {}` exited {code}, expected {}: {}",
                step.args.join(" "),
                step.expect,
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
    }
    Ok(())
}

/// Index just past the first `verify`: the state before the change.
pub fn steps_before_change(project: &Path) -> usize {
    walkthrough(project)
        .iter()
        .position(|s| s.args.last().map(String::as_str) == Some("verify"))
        .expect("walkthrough verifies")
        + 1
}
