//! Resolution of builtin names and files into exact inputs.

use std::fs;
use std::path::Path;

use quasim::bipartite::canonical_states;
use quasim::io::{dist_from_json, matrix_from_json, parse_rational};
use quasim::qcore::Dist;
use quasim::{RDist, RMatrix, RModel, Rational};

use crate::CliError;

/// `paper-S`, `identity` (3×3) or a path to matrix JSON.
pub fn matrix(source: &str) -> Result<RMatrix, CliError> {
    match source {
        "paper-S" => Ok(RModel::new().s),
        "identity" => Ok(RMatrix::identity(3)),
        path => {
            let text = read(path)?;
            matrix_from_json(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
        }
    }
}

/// `e0`..`e5`, `uniform`, `pAB`, an inline list like `1,0,0` or `1/2,1/2,0`,
/// or a path to distribution JSON.
pub fn state(source: &str) -> Result<RDist, CliError> {
    if let Some(i) = vertex_index(source) {
        return Ok(RModel::new().extreme(i).clone());
    }
    match source {
        "uniform" => Ok(Dist::uniform(3)?),
        "pAB" => Ok(canonical_states::<Rational>().0.dist().clone()),
        s if s.contains(',') => {
            let entries = s
                .split(',')
                .map(|v| parse_rational(v.trim()))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::Input(format!("state '{s}': {e}")))?;
            Dist::new(entries).map_err(|e| CliError::Input(format!("state '{s}': {e}")))
        }
        path => {
            let text = read(path)?;
            dist_from_json(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
        }
    }
}

/// `e0:e1,e2:e3` into vertex index pairs.
pub fn pairs(spec: &str) -> Result<Vec<(usize, usize)>, CliError> {
    spec.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Input(format!("pair '{pair}' is not of the form eI:eJ")))?;
            match (vertex_index(a.trim()), vertex_index(b.trim())) {
                (Some(a), Some(b)) => Ok((a, b)),
                _ => Err(CliError::Input(format!(
                    "pair '{pair}' names an unknown vertex (e0..e5)"
                ))),
            }
        })
        .collect()
}

fn vertex_index(name: &str) -> Option<usize> {
    let i: usize = name.strip_prefix('e')?.parse().ok()?;
    (i < 6 && name.len() == 2).then_some(i)
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(Path::new(path)).map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))
}
