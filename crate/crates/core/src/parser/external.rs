//! Running a third-party parser through files on disk.

use std::io::Read;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::conllu::{self, Treebank};
use crate::error::{Error, Result};

/// How to invoke an external parser. The command is run with `sh -c` after
/// `{input}`, `{output}` and `{model}` are replaced by paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExternalParserSpec {
    pub command: String,
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    #[serde(default)]
    pub workdir: Option<PathBuf>,
}

fn default_timeout() -> f64 {
    600.0
}

impl ExternalParserSpec {
    pub fn new(command: impl Into<String>) -> ExternalParserSpec {
        ExternalParserSpec {
            command: command.into(),
            model: None,
            timeout_secs: default_timeout(),
            workdir: None,
        }
    }

    fn render(&self, input: &str, output: &str) -> String {
        let model = self
            .model
            .as_ref()
            .map(|m| shell_quote(&m.to_string_lossy()))
            .unwrap_or_default();
        self.command
            .replace("{input}", &shell_quote(input))
            .replace("{output}", &shell_quote(output))
            .replace("{model}", &model)
    }
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

/// Writes `input` to a temporary file, runs the command and reads its output.
/// The returned time covers the subprocess only.
pub fn run_external(spec: &ExternalParserSpec, input: &Treebank) -> Result<(Treebank, f64)> {
    let bridge = |message: String, diagnostics: String| Error::Bridge { message, diagnostics };
    let dir = tempfile::tempdir()?;
    let in_path = dir.path().join("input.conllu");
    let out_path = dir.path().join("output.conllu");
    conllu::write_path(input, &in_path)?;
    let command = spec.render(&in_path.to_string_lossy(), &out_path.to_string_lossy());

    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(&command)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    if let Some(dir) = &spec.workdir {
        cmd.current_dir(dir);
    }

    let start = Instant::now();
    let mut child = cmd
        .spawn()
        .map_err(|e| bridge(format!("cannot start '{command}': {e}"), String::new()))?;
    // drain pipes on threads so a chatty parser cannot block on a full pipe
    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let timeout = Duration::from_secs_f64(spec.timeout_secs.max(0.0));
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(2));
    };
    let secs = start.elapsed().as_secs_f64();
    let Some(status) = status else {
        // grandchildren may still hold the pipes, so the readers are left behind
        return Err(bridge(
            format!("'{command}' timed out after {:.1}s", spec.timeout_secs),
            String::new(),
        ));
    };
    let diagnostics = {
        let out = out_reader.join().unwrap_or_default();
        let err = err_reader.join().unwrap_or_default();
        [out, err].into_iter().filter(|s| !s.trim().is_empty()).collect::<Vec<_>>().join("\n")
    };

    match status {
        status if !status.success() => {
            return Err(bridge(format!("'{command}' exited with {status}"), diagnostics));
        }
        _ => {}
    }

    let output = conllu::read_path_lenient(&out_path)
        .map_err(|e| bridge(format!("unreadable parser output: {e}"), diagnostics.clone()))?;
    check_alignment(input, &output).map_err(|m| bridge(m, diagnostics))?;
    Ok((output, secs))
}

/// Parser output must keep sentence count, tokenization and forms.
pub fn check_alignment(input: &Treebank, output: &Treebank) -> std::result::Result<(), String> {
    if input.len() != output.len() {
        return Err(format!(
            "alignment: output has {} sentences, input has {}",
            output.len(),
            input.len()
        ));
    }
    for (i, (a, b)) in input.sentences.iter().zip(&output.sentences).enumerate() {
        if a.len() != b.len() {
            return Err(format!(
                "alignment: sentence {} has {} words in output, {} in input",
                i + 1,
                b.len(),
                a.len()
            ));
        }
        if let Some(j) = a.tokens.iter().zip(&b.tokens).position(|(x, y)| x.form != y.form) {
            return Err(format!("alignment: sentence {}, token {}: form changed", i + 1, j + 1));
        }
        if let Some(t) = b.tokens.iter().find(|t| t.head.is_none()) {
            return Err(format!("alignment: sentence {}, token {}: no head assigned", i + 1, t.id));
        }
    }
    Ok(())
}
