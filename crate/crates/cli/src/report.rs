//! Answer records and their text or JSON rendering.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;

use local_match::graph::{Edge, VertexId};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{CliError, Output};

/// What a command computed. `verify` reads these back. Colors are
/// `(vertex, color)` pairs of `u64`: serde's tagged enums cannot carry `u128`
/// or integer map keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Answers {
    Coloring {
        palette: u64,
        colors: Vec<(VertexId, u64)>,
    },
    Orientation {
        palette: u64,
        directions: Vec<(VertexId, VertexId)>,
    },
    Mis {
        vertices: BTreeSet<VertexId>,
    },
    Matching {
        edges: BTreeSet<Edge>,
    },
}

/// Answers plus a free-form summary object.
#[derive(Debug, Serialize)]
pub struct Report {
    #[serde(flatten)]
    pub answers: Option<Answers>,
    pub summary: Value,
}

impl Report {
    pub fn new(answers: Answers, summary: impl Serialize) -> Self {
        Report {
            answers: Some(answers),
            summary: json!(summary),
        }
    }

    pub fn summary(summary: impl Serialize) -> Self {
        Report {
            answers: None,
            summary: json!(summary),
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        match &self.answers {
            Some(Answers::Coloring { colors, .. }) => {
                for (v, c) in colors {
                    out.push_str(&format!("v {v} {c}\n"));
                }
            }
            Some(Answers::Orientation { directions, .. }) => {
                for (a, b) in directions {
                    out.push_str(&format!("d {a} {b}\n"));
                }
            }
            Some(Answers::Mis { vertices }) => {
                for v in vertices {
                    out.push_str(&format!("v {v}\n"));
                }
            }
            Some(Answers::Matching { edges }) => {
                for e in edges {
                    out.push_str(&format!("e {} {}\n", e.0, e.1));
                }
            }
            None => {}
        }
        if let Value::Object(fields) = &self.summary {
            for (key, value) in fields {
                match value {
                    Value::String(s) => out.push_str(&format!("# {key}: {s}\n")),
                    other => out.push_str(&format!("# {key}: {other}\n")),
                }
            }
        }
        out
    }

    pub fn emit(&self, output: &Output) -> Result<(), CliError> {
        let body = if output.json {
            let mut s = serde_json::to_string(self)?;
            s.push('\n');
            s
        } else {
            self.text()
        };
        write_output(output, &body)
    }
}

pub fn write_output(output: &Output, body: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => fs::write(path, body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "stdout".into(),
                    source,
                })
        }
    }
}
