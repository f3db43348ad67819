//! Running external tools with a wall-clock limit.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub success: bool,
    pub code: Option<i32>,
    pub stdout: String,
    pub stderr: String,
    pub timed_out: bool,
}

impl CommandOutput {
    /// `$ program args` followed by stdout and stderr.
    pub fn transcript(&self, program: &str, args: &[&str]) -> String {
        let mut s = format!("$ {program} {}\n", args.join(" "));
        s.push_str(&self.stdout);
        if !self.stdout.is_empty() && !self.stdout.ends_with('\n') {
            s.push('\n');
        }
        s.push_str(&self.stderr);
        if !self.stderr.is_empty() && !self.stderr.ends_with('\n') {
            s.push('\n');
        }
        if self.timed_out {
            s.push_str("[timeout] command exceeded the time limit and was killed\n");
        }
        s
    }
}

fn drain<R: Read + Send + 'static>(r: Option<R>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut r) = r {
            let _ = r.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs `program` in `cwd`, killing it after `timeout`. A program that
/// cannot be found is an environment error; any other outcome, including
/// a non-zero exit or a timeout, is returned for the caller to judge.
pub fn run_command(
    program: &str,
    args: &[&str],
    cwd: &Path,
    env: &[(&str, &str)],
    timeout: Duration,
) -> Result<CommandOutput, HarnessError> {
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(cwd)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    // own process group, so a timeout also stops any helpers it spawned
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }
    let mut child = cmd.spawn().map_err(|e| HarnessError::Environment {
        binary: program.to_string(),
        message: if e.kind() == std::io::ErrorKind::NotFound {
            "not found; install it or set its path in the validator config".into()
        } else {
            format!("could not be started: {e}")
        },
    })?;
    let out = drain(child.stdout.take());
    let err = drain(child.stderr.take());
    let status = child.wait_timeout(timeout).map_err(|e| HarnessError::Environment {
        binary: program.to_string(),
        message: format!("wait failed: {e}"),
    })?;
    let (status, timed_out) = match status {
        Some(s) => (Some(s), false),
        None => {
            #[cfg(unix)]
            if let Ok(pgid) = i32::try_from(child.id()) {
                // SAFETY: kill(2) has no memory-safety preconditions.
                unsafe {
                    libc::kill(-pgid, libc::SIGKILL);
                }
            }
            let _ = child.kill();
            (child.wait().ok(), true)
        }
    };
    Ok(CommandOutput {
        success: !timed_out && status.is_some_and(|s| s.success()),
        code: status.and_then(|s| s.code()),
        stdout: out.join().unwrap_or_default(),
        stderr: err.join().unwrap_or_default(),
        timed_out,
    })
}

/// Whether `program` can be started (a path that exists, or a name found
/// on `PATH`).
pub(crate) fn locate(program: &str) -> bool {
    let p = Path::new(program);
    if p.components().count() > 1 {
        return p.is_file();
    }
    std::env::var_os("PATH")
        .map(|paths| std::env::split_paths(&paths).any(|d| d.join(program).is_file()))
        .unwrap_or(false)
}
