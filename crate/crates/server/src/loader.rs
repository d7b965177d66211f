//! Reading ontologies and embedding files from text or disk.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use fuzzyvis_core::format::{import_embedding, FormatError, Imported};
use fuzzyvis_core::ontology::{parse_json, parse_obo, OntologyError};
use fuzzyvis_core::OntologyGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OntologyFormat {
    #[default]
    Obo,
    Json,
}

impl OntologyFormat {
    /// Guesses from the file extension; anything other than `.json` is OBO.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::Json,
            _ => Self::Obo,
        }
    }
}

impl fmt::Display for OntologyFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Obo => "obo",
            Self::Json => "json",
        })
    }
}

impl FromStr for OntologyFormat {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "obo" => Ok(Self::Obo),
            "json" => Ok(Self::Json),
            _ => Err(LoadError::UnsupportedFormat(s.to_owned())),
        }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("unsupported ontology format {0:?} (expected obo or json)")]
    UnsupportedFormat(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error(transparent)]
    Embedding(#[from] FormatError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub fn parse_ontology(text: &str, format: OntologyFormat) -> Result<OntologyGraph, LoadError> {
    Ok(match format {
        OntologyFormat::Obo => parse_obo(text)?,
        OntologyFormat::Json => parse_json(text)?,
    })
}

pub fn read_text(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_ontology(path: &Path, format: Option<OntologyFormat>) -> Result<OntologyGraph, LoadError> {
    let format = format.unwrap_or_else(|| OntologyFormat::from_path(path));
    parse_ontology(&read_text(path)?, format)
}

/// Imports an embedding file, dropping rows the graph does not declare.
pub fn load_embedding(path: &Path, graph: &OntologyGraph) -> Result<Imported, LoadError> {
    Ok(import_embedding(&read_text(path)?, Some(graph))?)
}
