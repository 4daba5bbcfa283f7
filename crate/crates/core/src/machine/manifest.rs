//! On-disk layout for sampler programs.
//!
//! A program is a directory holding `manifest.json` plus one netlist file
//! per component circuit:
//!
//! ```text
//! program/
//!   manifest.json
//!   selection.ckt
//!   remask.ckt          (remask mode only)
//!   predictor-001.ckt
//!   predictor-002.ckt
//!   ...
//! ```
//!
//! The manifest records the scalar parameters and the file names; file
//! names are relative to the directory. Loading re-validates the whole
//! program.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mode, SamplerSpec, SpecError};
use crate::circuit::netlist::{self, NetlistError};
use crate::circuit::Circuit;

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    Netlist {
        path: String,
        #[source]
        source: NetlistError,
    },
    #[error("unknown mode {0:?}")]
    UnknownMode(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    mode: String,
    positions: usize,
    rounds: usize,
    prompt_len: usize,
    output_len: usize,
    step_indexed: bool,
    selection: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    remask: Option<String>,
    predictors: Vec<String>,
}

fn io_err(path: &Path, source: std::io::Error) -> ManifestError {
    ManifestError::Io { path: path.display().to_string(), source }
}

/// Writes the program into `dir`, creating it if needed. Returns the
/// paths written, manifest first.
pub fn save_spec(spec: &SamplerSpec, dir: &Path) -> Result<Vec<String>, ManifestError> {
    spec.validate()?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: String| -> Result<(), ManifestError> {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
        written.push(path.display().to_string());
        Ok(())
    };

    let mut predictors = Vec::with_capacity(spec.predictors.len());
    for (i, p) in spec.predictors.iter().enumerate() {
        predictors.push(format!("predictor-{:03}.ckt", i + 1));
        put(&predictors[i], netlist::serialize(p))?;
    }
    put("selection.ckt", netlist::serialize(&spec.f))?;
    let remask = match &spec.g {
        Some(g) => {
            put("remask.ckt", netlist::serialize(g))?;
            Some("remask.ckt".to_string())
        }
        None => None,
    };

    let manifest = ManifestFile {
        mode: spec.mode.name().to_string(),
        positions: spec.positions,
        rounds: spec.rounds,
        prompt_len: spec.prompt_len,
        output_len: spec.output_len,
        step_indexed: spec.step_indexed,
        selection: "selection.ckt".to_string(),
        remask,
        predictors,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| ManifestError::Json { path: path.display().to_string(), source: e })?;
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    written.insert(0, path.display().to_string());
    Ok(written)
}

fn load_circuit(dir: &Path, name: &str) -> Result<Circuit, ManifestError> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    netlist::parse(&text)
        .map_err(|e| ManifestError::Netlist { path: path.display().to_string(), source: e })
}

/// Reads and validates a program directory.
pub fn load_spec(dir: &Path) -> Result<SamplerSpec, ManifestError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let m: ManifestFile = serde_json::from_str(&text)
        .map_err(|e| ManifestError::Json { path: path.display().to_string(), source: e })?;
    let mode = Mode::parse(&m.mode).ok_or_else(|| ManifestError::UnknownMode(m.mode.clone()))?;
    let f = load_circuit(dir, &m.selection)?;
    let g = match &m.remask {
        Some(name) => Some(load_circuit(dir, name)?),
        None => None,
    };
    let mut predictors = Vec::with_capacity(m.predictors.len());
    for name in &m.predictors {
        predictors.push(load_circuit(dir, name)?);
    }
    let spec = SamplerSpec {
        mode,
        positions: m.positions,
        rounds: m.rounds,
        prompt_len: m.prompt_len,
        output_len: m.output_len,
        step_indexed: m.step_indexed,
        f,
        g,
        predictors,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::builder::CircuitBuilder;

    fn coin_spec() -> SamplerSpec {
        let mut fb = CircuitBuilder::new();
        let ins = fb.inputs(2);
        let out = fb.id(ins[0]);
        let f = fb.finish(&[out]);
        let mut pb = CircuitBuilder::new();
        let _ins = pb.inputs(2);
        let zero = pb.const_false();
        let coin = pb.random();
        let p = pb.finish(&[zero, coin]);
        SamplerSpec {
            mode: Mode::Standard,
            positions: 1,
            rounds: 1,
            prompt_len: 0,
            output_len: 1,
            step_indexed: false,
            f,
            g: None,
            predictors: vec![p],
        }
    }

    #[test]
    fn save_load_round_trip() {
        let spec = coin_spec();
        let dir = tempfile::tempdir().unwrap();
        let written = save_spec(&spec, dir.path()).unwrap();
        assert!(written[0].ends_with("manifest.json"));
        let again = load_spec(dir.path()).unwrap();
        assert_eq!(again.f, spec.f);
        assert_eq!(again.predictors, spec.predictors);
        assert_eq!(again.mode, spec.mode);
        assert_eq!(again.positions, spec.positions);
        assert!(again.g.is_none());
    }

    #[test]
    fn bad_programs_fail_to_load() {
        let spec = coin_spec();
        let dir = tempfile::tempdir().unwrap();
        save_spec(&spec, dir.path()).unwrap();

        // Wrong arity after editing positions.
        let manifest = dir.path().join("manifest.json");
        let text = fs::read_to_string(&manifest).unwrap();
        fs::write(&manifest, text.replace("\"positions\": 1", "\"positions\": 2")).unwrap();
        assert!(matches!(load_spec(dir.path()), Err(ManifestError::Spec(_))));

        // Unreadable mode.
        let spec2 = coin_spec();
        let dir2 = tempfile::tempdir().unwrap();
        save_spec(&spec2, dir2.path()).unwrap();
        let manifest = dir2.path().join("manifest.json");
        let text = fs::read_to_string(&manifest).unwrap();
        fs::write(&manifest, text.replace("\"standard\"", "\"sideways\"")).unwrap();
        assert!(matches!(load_spec(dir2.path()), Err(ManifestError::UnknownMode(_))));

        // Missing netlist file.
        let spec3 = coin_spec();
        let dir3 = tempfile::tempdir().unwrap();
        save_spec(&spec3, dir3.path()).unwrap();
        fs::remove_file(dir3.path().join("selection.ckt")).unwrap();
        assert!(matches!(load_spec(dir3.path()), Err(ManifestError::Io { .. })));
    }
}
