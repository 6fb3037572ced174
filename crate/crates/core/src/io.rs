//! Instance files.
//!
//! An instance is a JSON object with keys `first_level`, `omega` and
//! `third_level`. Matrices are `{nrows, ncols, entries: [[row, col, value], ...]}`
//! and infinite bounds are written `"inf"` / `"-inf"`. The `omega` entry is
//! either the standard form or `{"polytope": {...}}` in inequality form.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{standardize_omega, FirstLevel, OmegaStandard, Polytope, ThirdLevel, WcaroInstance};

#[derive(Deserialize)]
#[serde(untagged)]
enum OmegaInput {
    Inequality { polytope: Polytope },
    Standard(OmegaStandard),
}

#[derive(Deserialize)]
struct InstanceInput {
    #[serde(default)]
    name: String,
    first_level: FirstLevel,
    omega: OmegaInput,
    third_level: ThirdLevel,
}

pub(crate) fn json_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    }
}

/// Parses an instance from JSON text. `path` is only used in error messages.
pub fn parse_instance(text: &str, path: &Path) -> Result<WcaroInstance> {
    let raw: InstanceInput = serde_json::from_str(text).map_err(|e| json_error(path, e))?;
    let omega = match raw.omega {
        OmegaInput::Standard(om) => om,
        OmegaInput::Inequality { polytope } => standardize_omega(&polytope)?,
    };
    let mut name = raw.name;
    if name.is_empty() {
        name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(WcaroInstance {
        name,
        first: raw.first_level,
        omega,
        third: raw.third_level,
    })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<WcaroInstance> {
    let path = path.as_ref();
    parse_instance(&fs::read_to_string(path)?, path)
}

pub fn write_instance(path: impl AsRef<Path>, inst: &WcaroInstance) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(inst)? + "\n")?;
    Ok(())
}
