//! Text format for embedding matrices.
//!
//! ```text
//! #fuzzyvis-embedding v1 dim=3 source=generated alpha=0.25 seed=7 family=product
//! HP:0000001\t1.0,1.0,1.0
//! HP:0000118\t0.75,1.0,0.0625
//! ```
//!
//! Values are written in the shortest decimal form that parses back to the
//! same `f64`, so export followed by import is lossless. Unknown header keys
//! are ignored.

use std::fmt::Write as _;
use std::io;

use thiserror::Error;

use crate::embedding::{EmbeddingMatrix, Provenance, Source};
use crate::fuzzy::OperatorFamily;
use crate::ontology::{ConceptId, OntologyGraph};

pub const MAGIC: &str = "#fuzzyvis-embedding";

/// Values this far outside `[0, 1]` are clamped on import instead of rejected.
pub const IMPORT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("missing `{MAGIC}` header line")]
    HeaderMissing,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("line {line}: expected {expected} values, found {found}")]
    DimMismatchAcrossRows { line: usize, expected: usize, found: usize },
    #[error("line {line}: value {value} is outside [0, 1]")]
    ValueOutOfRange { line: usize, value: f64 },
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error("line {line}: duplicate concept id {id}")]
    DuplicateId { line: usize, id: ConceptId },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImportWarning {
    Clamped {
        line: usize,
        id: ConceptId,
        value: f64,
    },
    /// Row for a concept the loaded ontology does not declare; dropped.
    UnknownConcept {
        line: usize,
        id: ConceptId,
    },
}

impl std::fmt::Display for ImportWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Clamped { line, id, value } => write!(f, "line {line}: clamped {value} for {id} into [0, 1]"),
            Self::UnknownConcept { line, id } => write!(f, "line {line}: unknown concept {id} dropped"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Imported {
    pub matrix: EmbeddingMatrix,
    pub warnings: Vec<ImportWarning>,
}

fn parse_header(line: &str) -> Result<(usize, Provenance), FormatError> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(FormatError::HeaderMissing);
    }
    match tokens.next() {
        Some("v1") => {}
        other => return Err(FormatError::BadHeader(format!("unsupported version {other:?}"))),
    }
    let mut dim = None;
    let mut source = Source::Imported;
    let mut alpha = None;
    let mut seed = None;
    let mut family = None;
    for token in tokens {
        let Some((key, value)) = token.split_once('=') else {
            continue;
        };
        let bad = |what: &str| FormatError::BadHeader(format!("invalid {what} {value:?}"));
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("dim"))?),
            "source" => {
                source = match value {
                    "generated" => Source::Generated,
                    "imported" => Source::Imported,
                    _ => return Err(bad("source")),
                }
            }
            "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad("alpha"))?),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            "family" => family = Some(value.parse::<OperatorFamily>().map_err(|_| bad("family"))?),
            _ => {}
        }
    }
    let dim = dim.ok_or_else(|| FormatError::BadHeader("missing dim".into()))?;
    if dim == 0 {
        return Err(FormatError::BadHeader("dim must be at least 1".into()));
    }
    let family = family.ok_or_else(|| FormatError::BadHeader("missing family".into()))?;
    Ok((
        dim,
        Provenance {
            source,
            alpha,
            seed,
            family,
        },
    ))
}

/// Parses an embedding file. With `graph`, rows for undeclared concepts are
/// dropped and reported as warnings.
pub fn import_embedding(text: &str, graph: Option<&OntologyGraph>) -> Result<Imported, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or(FormatError::HeaderMissing)?;
    let (dim, provenance) = parse_header(header.1)?;

    let mut warnings = Vec::new();
    let mut rows: Vec<(ConceptId, Vec<f64>)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, text) in lines {
        if text.trim().is_empty() {
            continue;
        }
        let (raw_id, raw_values) = text.split_once('\t').ok_or_else(|| FormatError::BadRow {
            line,
            message: "expected `<id>\\t<values>`".into(),
        })?;
        let id = ConceptId::parse(raw_id.trim()).ok_or_else(|| FormatError::BadRow {
            line,
            message: format!("invalid concept id {raw_id:?}"),
        })?;
        let mut values = Vec::with_capacity(dim);
        for raw in raw_values.split(',') {
            let value: f64 = raw.trim().parse().map_err(|_| FormatError::BadRow {
                line,
                message: format!("invalid number {raw:?}"),
            })?;
            values.push(clamp_imported(value, line, &id, &mut warnings)?);
        }
        if values.len() != dim {
            return Err(FormatError::DimMismatchAcrossRows {
                line,
                expected: dim,
                found: values.len(),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(FormatError::DuplicateId { line, id });
        }
        if graph.is_some_and(|g| !g.contains(id.as_str())) {
            warnings.push(ImportWarning::UnknownConcept { line, id });
            continue;
        }
        rows.push((id, values));
    }

    for w in &warnings {
        log::warn!("embedding import: {w}");
    }
    let matrix = EmbeddingMatrix::from_rows(dim, rows, provenance).expect("rows validated while parsing");
    Ok(Imported { matrix, warnings })
}

fn clamp_imported(
    value: f64,
    line: usize,
    id: &ConceptId,
    warnings: &mut Vec<ImportWarning>,
) -> Result<f64, FormatError> {
    if (0.0..=1.0).contains(&value) {
        return Ok(value);
    }
    let clamped = if (-IMPORT_TOLERANCE..0.0).contains(&value) {
        0.0
    } else if value > 1.0 && value <= 1.0 + IMPORT_TOLERANCE {
        1.0
    } else {
        return Err(FormatError::ValueOutOfRange { line, value });
    };
    warnings.push(ImportWarning::Clamped {
        line,
        id: id.clone(),
        value,
    });
    Ok(clamped)
}

pub fn header_line(matrix: &EmbeddingMatrix) -> String {
    let p = matrix.provenance();
    let mut header = format!("{MAGIC} v1 dim={} source={}", matrix.dim(), p.source);
    if let Some(alpha) = p.alpha {
        let _ = write!(header, " alpha={alpha:?}");
    }
    if let Some(seed) = p.seed {
        let _ = write!(header, " seed={seed}");
    }
    let _ = write!(header, " family={}", p.family);
    header
}

pub fn export_embedding<W: io::Write>(matrix: &EmbeddingMatrix, mut sink: W) -> io::Result<()> {
    writeln!(sink, "{}", header_line(matrix))?;
    let mut row_text = String::new();
    for (id, row) in matrix.rows() {
        row_text.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                row_text.push(',');
            }
            let _ = write!(row_text, "{v:?}");
        }
        writeln!(sink, "{id}\t{row_text}")?;
    }
    sink.flush()
}

pub fn export_to_string(matrix: &EmbeddingMatrix) -> String {
    let mut out = Vec::new();
    export_embedding(matrix, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("export writes UTF-8")
}
