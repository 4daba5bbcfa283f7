//! Plain-text circuit format.
//!
//! One directive per line; `#` starts a comment; blank lines are skipped.
//!
//! ```text
//! # two-bit xor
//! vertex 1 1 input
//! vertex 2 1 input
//! vertex 3 2 or 1 2
//! vertex 4 2 and 1 2
//! vertex 5 3 id 3
//! vertex 6 3 not 4
//! vertex 7 4 and 5 6
//! outputs 7
//! ```
//!
//! `vertex <id> <layer> <kind> [args...]` declares one vertex, where
//! `<kind>` is `input`, `random`, or an operation name. Exactly one
//! `outputs <ids...>` line names the outputs. Parsing checks that ids are
//! unique and every reference resolves; everything else (arity, layering,
//! acyclicity, output placement) is left to [`Circuit::validate`].

use std::collections::BTreeMap;
use std::fmt;

use super::{Circuit, GateOp, Vertex, VertexKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetlistError {
    /// One-based line number, or zero for whole-file problems.
    pub line: usize,
    pub msg: String,
}

impl NetlistError {
    fn new(line: usize, msg: impl Into<String>) -> NetlistError {
        NetlistError { line, msg: msg.into() }
    }
}

impl fmt::Display for NetlistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.msg)
        } else {
            write!(f, "line {}: {}", self.line, self.msg)
        }
    }
}

impl std::error::Error for NetlistError {}

/// Canonical text form: vertices in stored order, then the outputs line.
pub fn serialize(c: &Circuit) -> String {
    let mut out = String::new();
    for v in &c.vertices {
        let kind = match &v.kind {
            VertexKind::Input => "input".to_string(),
            VertexKind::Random => "random".to_string(),
            VertexKind::Gate(op) => op.name().to_string(),
        };
        out.push_str(&format!("vertex {} {} {}", v.id, v.layer, kind));
        for a in &v.args {
            out.push_str(&format!(" {a}"));
        }
        out.push('\n');
    }
    out.push_str("outputs");
    for o in &c.outputs {
        out.push_str(&format!(" {o}"));
    }
    out.push('\n');
    out
}

pub fn parse(text: &str) -> Result<Circuit, NetlistError> {
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut declared: BTreeMap<usize, usize> = BTreeMap::new(); // id -> line
    let mut outputs: Option<(usize, Vec<usize>)> = None;

    let number = |line: usize, tok: &str, what: &str| -> Result<usize, NetlistError> {
        tok.parse::<usize>()
            .map_err(|_| NetlistError::new(line, format!("bad {what} {tok:?}")))
    };

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "vertex" => {
                if toks.len() < 4 {
                    return Err(NetlistError::new(line, "vertex needs an id, a layer and a kind"));
                }
                let id = number(line, toks[1], "vertex id")?;
                let layer = number(line, toks[2], "layer")?;
                let kind = match toks[3] {
                    "input" => VertexKind::Input,
                    "random" => VertexKind::Random,
                    other => match GateOp::parse(other) {
                        Some(op) => VertexKind::Gate(op),
                        None => {
                            return Err(NetlistError::new(
                                line,
                                format!("unknown vertex kind {other:?}"),
                            ))
                        }
                    },
                };
                let mut args = Vec::with_capacity(toks.len() - 4);
                for t in &toks[4..] {
                    args.push(number(line, t, "argument")?);
                }
                if !matches!(kind, VertexKind::Gate(_)) && !args.is_empty() {
                    return Err(NetlistError::new(line, format!("{} takes no arguments", toks[3])));
                }
                if declared.insert(id, line).is_some() {
                    return Err(NetlistError::new(line, format!("vertex {id} declared twice")));
                }
                vertices.push(Vertex { id, layer, kind, args });
            }
            "outputs" => {
                if outputs.is_some() {
                    return Err(NetlistError::new(line, "outputs declared twice"));
                }
                if toks.len() == 1 {
                    return Err(NetlistError::new(line, "outputs line is empty"));
                }
                let mut ids = Vec::with_capacity(toks.len() - 1);
                for t in &toks[1..] {
                    ids.push(number(line, t, "output id")?);
                }
                outputs = Some((line, ids));
            }
            other => {
                return Err(NetlistError::new(line, format!("unknown directive {other:?}")));
            }
        }
    }

    // References may point forward; resolve once everything is declared.
    for v in &vertices {
        for &a in &v.args {
            if !declared.contains_key(&a) {
                let line = declared[&v.id];
                return Err(NetlistError::new(
                    line,
                    format!("vertex {} reads undefined vertex {a}", v.id),
                ));
            }
        }
    }
    let (outputs_line, outputs) = outputs.ok_or_else(|| NetlistError::new(0, "no outputs declared"))?;
    for &o in &outputs {
        if !declared.contains_key(&o) {
            return Err(NetlistError::new(outputs_line, format!("output {o} is not a vertex")));
        }
    }
    Ok(Circuit { vertices, outputs })
}
