use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Metadata written as `# key=value` lines at the top of every output file.
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &str, deterministic: bool) -> Self {
        let mut lines = vec![format!("delcap {} {command}", env!("CARGO_PKG_VERSION"))];
        if !deterministic {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            lines.push(format!("generated_unix={secs}"));
        }
        Self { lines }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.lines.push(format!("{key}={value}"));
        self
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn write_to(&self, out: &mut dyn Write) -> io::Result<()> {
        for line in &self.lines {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }
}

/// Opens `path` for writing, or stdout when absent.
pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Prints one JSON object per line on stdout.
pub fn report(value: Value) {
    println!("{value}");
}

/// Prints on stderr, for commands whose data goes to stdout.
pub fn report_stderr(value: Value) {
    eprintln!("{value}");
}

pub fn summary_line(check: &str, pass: bool, extra: Value) -> Value {
    let mut line = json!({ "check": check, "pass": pass });
    if let (Value::Object(base), Value::Object(more)) = (&mut line, extra) {
        base.extend(more);
    }
    line
}

/// Final summary line; returns whether the run passed.
pub fn summary(check: &str, pass: bool, extra: Value) -> bool {
    report(summary_line(check, pass, extra));
    pass
}
