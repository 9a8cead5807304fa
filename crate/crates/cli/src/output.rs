use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde_json::{json, Map, Value};

use newton_osc::newton::NewtonError;
use newton_osc::opnorm::ResolutionError;
use newton_osc::polycore::ParseError;
use newton_osc::scaling::ScalingError;
use newton_osc::SCHEMA;

use crate::schema;

/// A command failure: exit code plus a machine-readable description.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub detail: Value,
}

impl Failure {
    pub fn parse(text: &str, e: &ParseError) -> Self {
        Self {
            code: 2,
            kind: "parse",
            message: e.to_string(),
            detail: json!({ "input": text, "position": e.position() }),
        }
    }

    pub fn newton(e: NewtonError) -> Self {
        let kind = match e {
            NewtonError::EmptyPolygon => "empty_polygon",
            NewtonError::NoCompactEdges => "no_compact_edges",
        };
        Self {
            code: 3,
            kind,
            message: e.to_string(),
            detail: Value::Null,
        }
    }

    pub fn resolution(e: &ResolutionError) -> Self {
        Self {
            code: 4,
            kind: "resolution",
            message: e.to_string(),
            detail: json!({ "lambda": e.lambda, "required": e.required, "cap": e.cap }),
        }
    }

    pub fn scaling(e: ScalingError) -> Self {
        match e {
            ScalingError::Resolution(r) => Self::resolution(&r),
            ScalingError::NoOscillation => Self::newton(NewtonError::EmptyPolygon),
            other => Self {
                code: 5,
                kind: "scaling",
                message: other.to_string(),
                detail: Value::Null,
            },
        }
    }

    pub fn invalid(message: String) -> Self {
        Self {
            code: 5,
            kind: "invalid_argument",
            message,
            detail: Value::Null,
        }
    }

    pub fn io(path: &Path, e: &std::io::Error) -> Self {
        Self {
            code: 6,
            kind: "io",
            message: format!("{}: {e}", path.display()),
            detail: Value::Null,
        }
    }

    pub fn internal(e: impl std::fmt::Display) -> Self {
        Self {
            code: 70,
            kind: "internal",
            message: e.to_string(),
            detail: Value::Null,
        }
    }

    pub fn report(self) -> ExitCode {
        let v = json!({
            "schema": SCHEMA,
            "error": { "kind": self.kind, "message": self.message, "detail": self.detail },
        });
        eprintln!("{v}");
        ExitCode::from(self.code)
    }
}

/// Destination plus the provenance stamped on every document.
pub struct Output {
    path: Option<PathBuf>,
    threads: usize,
}

impl Output {
    pub fn new(path: Option<PathBuf>, threads: usize) -> Self {
        Self { path, threads }
    }

    fn write(&self, text: &str) -> Result<(), Failure> {
        match &self.path {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, &e)),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| Failure::io(Path::new("<stdout>"), &e)),
        }
    }

    fn provenance(&self, seed: Option<u64>) -> Value {
        json!({ "threads": self.threads, "seed": seed, "version": env!("CARGO_PKG_VERSION") })
    }

    /// Wraps `payload` with schema and provenance, validates and writes it.
    pub fn json(&self, command: &str, payload: Value, seed: Option<u64>) -> Result<(), Failure> {
        let mut doc = Map::new();
        doc.insert("schema".into(), json!(SCHEMA));
        doc.insert("command".into(), json!(command));
        doc.insert("provenance".into(), self.provenance(seed));
        match payload {
            Value::Object(m) => doc.extend(m),
            other => {
                doc.insert("result".into(), other);
            }
        }
        let doc = Value::Object(doc);
        let text = serde_json::to_string_pretty(&doc).map_err(Failure::internal)?;
        schema::round_trip(command, &doc, &text).map_err(Failure::internal)?;
        self.write(&(text + "\n"))
    }

    /// CSV body preceded by a `#` provenance line.
    pub fn csv(&self, body: &str, seed: Option<u64>) -> Result<(), Failure> {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        self.write(&format!(
            "# schema={SCHEMA} threads={} seed={seed}\n{body}",
            self.threads
        ))
    }
}
