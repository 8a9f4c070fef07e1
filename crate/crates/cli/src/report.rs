use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use cufraisse::CuError;

use crate::manifest::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Exhausted,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Exhausted => 2,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Verify(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    /// Library errors classified by exit status, prefixed by the manifest line.
    pub fn from_cu(line: Option<usize>, e: CuError) -> RunError {
        let msg = match line {
            Some(l) => format!("line {l}: {e}"),
            None => e.to_string(),
        };
        match e {
            CuError::Exhausted { .. } | CuError::PrefixTooShort { .. } => RunError::Budget(msg),
            CuError::NotCauchy { .. } | CuError::MissingCertificate(_) => RunError::Verify(msg),
            _ => RunError::Input(msg),
        }
    }

    pub fn input(line: usize, msg: impl std::fmt::Display) -> RunError {
        RunError::Input(format!("line {line}: {msg}"))
    }
}

/// A human-readable report with a JSON sidecar and an optional archive.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    sections: Vec<(String, Vec<String>)>,
    data: Map<String, Value>,
    pub archive: Option<String>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        Report { command: command.into(), verdict: Verdict::Pass, sections: vec![], data: Map::new(), archive: None }
    }

    pub fn section(&mut self, title: impl Into<String>, lines: Vec<String>) {
        self.sections.push((title.into(), lines));
    }

    pub fn data(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("report data serializes");
        self.data.insert(key.into(), v);
    }

    /// Downgrades the verdict; a failure outranks exhaustion.
    pub fn mark(&mut self, v: Verdict) {
        self.verdict = match (self.verdict, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Exhausted, _) | (_, Verdict::Exhausted) => Verdict::Exhausted,
            _ => Verdict::Pass,
        };
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let verdict = serde_json::to_value(self.verdict).expect("verdict");
        writeln!(s, "command: {}", self.command).unwrap();
        writeln!(s, "verdict: {}", verdict.as_str().expect("string")).unwrap();
        for (title, lines) in &self.sections {
            writeln!(s, "\n[{title}]").unwrap();
            for l in lines {
                writeln!(s, "{l}").unwrap();
            }
        }
        s
    }

    pub fn json(&self) -> String {
        let mut top = Map::new();
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("verdict".into(), serde_json::to_value(self.verdict).expect("verdict"));
        top.insert("data".into(), Value::Object(self.data.clone()));
        serde_json::to_string_pretty(&Value::Object(top)).expect("sidecar serializes") + "\n"
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.txt"), self.text())?;
        std::fs::write(dir.join("report.json"), self.json())?;
        if let Some(a) = &self.archive {
            std::fs::write(dir.join("archive.json"), a)?;
        }
        Ok(())
    }
}
