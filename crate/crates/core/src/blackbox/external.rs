//! Adapter for blackboxes living in external executables.
//!
//! Protocol: the point is written to a file, one coordinate per line. The
//! executable is invoked as `command [args...] <point-file> <fidelity>`, the
//! fidelity formatted in scientific notation with 17 significant digits. It
//! prints one line `f c_1 ... c_m [time]` (`inf` accepted) and exits with 0.
//! When the optional trailing `time` token is absent, the wall-clock duration
//! of the child process is charged. Any other exit code, or an unparseable
//! line, is an evaluation failure.

use std::fs;
use std::path::PathBuf;
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{BlackboxDescriptor, MultiFidelityBlackbox};
use crate::domain::{EvalOutput, ExtReal, TrialPoint};

static POINT_FILE_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalConfig {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    pub descriptor: BlackboxDescriptor,
    /// Directory for point files; the system temp directory when absent.
    #[serde(default)]
    pub workdir: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ExternalBlackbox {
    config: ExternalConfig,
}

impl ExternalBlackbox {
    pub fn new(config: ExternalConfig) -> Self {
        ExternalBlackbox { config }
    }

    fn point_file(&self) -> PathBuf {
        let dir = self
            .config
            .workdir
            .clone()
            .unwrap_or_else(std::env::temp_dir);
        let k = POINT_FILE_COUNTER.fetch_add(1, Ordering::Relaxed);
        dir.join(format!("ficopt-point-{}-{k}.txt", std::process::id()))
    }
}

/// Formats a fidelity for the command line.
pub(crate) fn format_fidelity(fidelity: f64) -> String {
    format!("{fidelity:.16e}")
}

/// Parses `f c_1 .. c_m [time]`. Returns `None` on any malformed token.
pub(crate) fn parse_output_line(
    line: &str,
    m: usize,
) -> Option<(ExtReal, Vec<ExtReal>, Option<f64>)> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != m + 1 && tokens.len() != m + 2 {
        return None;
    }
    let values: Vec<f64> = tokens[..m + 1]
        .iter()
        .map(|t| t.parse::<f64>().ok())
        .collect::<Option<_>>()?;
    let time = match tokens.get(m + 1) {
        Some(t) => {
            let v = t.parse::<f64>().ok()?;
            if !(v.is_finite() && v >= 0.0) {
                return None;
            }
            Some(v)
        }
        None => None,
    };
    let f = ExtReal::new(values[0]);
    let c = values[1..].iter().map(|&v| ExtReal::new(v)).collect();
    Some((f, c, time))
}

impl MultiFidelityBlackbox for ExternalBlackbox {
    fn descriptor(&self) -> &BlackboxDescriptor {
        &self.config.descriptor
    }

    fn evaluate(&self, x: &TrialPoint, fidelity: f64) -> EvalOutput {
        let meta = &self.config.descriptor.constraints;
        let m = meta.count;
        let path = self.point_file();
        let body: String = x.iter().map(|v| format!("{v}\n")).collect();
        let start = Instant::now();
        if fs::write(&path, body).is_err() {
            return EvalOutput::failure(m, fidelity, start.elapsed().as_secs_f64());
        }
        let result = Command::new(&self.config.command)
            .args(&self.config.args)
            .arg(&path)
            .arg(format_fidelity(fidelity))
            .output();
        let wall = start.elapsed().as_secs_f64();
        let _ = fs::remove_file(&path);

        let Ok(output) = result else {
            return EvalOutput::failure(m, fidelity, wall);
        };
        if !output.status.success() {
            return EvalOutput::failure(m, fidelity, wall);
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let line = stdout.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        match parse_output_line(line, m) {
            Some((f, c, time)) => EvalOutput::screened(f, c, meta, fidelity, time.unwrap_or(wall)),
            None => EvalOutput::failure(m, fidelity, wall),
        }
    }
}
