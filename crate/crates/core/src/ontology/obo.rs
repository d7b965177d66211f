//! Reader for the subset of the OBO 1.2 flat-file format needed for taxonomies.
//!
//! Only `[Term]` stanzas are read, and within them only `id`, `name`, `def`,
//! `is_a` and `is_obsolete`. Header lines and every other stanza type are
//! skipped.

use std::collections::BTreeSet;

use super::{ConceptDraft, ConceptId, OntologyError, OntologyGraph};

#[derive(Default)]
struct Stanza {
    line: usize,
    id: Option<(String, usize)>,
    name: Option<String>,
    def: Option<String>,
    is_a: Vec<String>,
    obsolete: bool,
}

pub fn parse_obo(text: &str) -> Result<OntologyGraph, OntologyError> {
    let mut drafts = Vec::new();
    let mut obsolete = BTreeSet::new();
    let mut current: Option<Stanza> = None;
    let mut in_term = false;

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            if let Some(stanza) = current.take() {
                finish(stanza, &mut drafts, &mut obsolete)?;
            }
            in_term = line == "[Term]";
            if in_term {
                current = Some(Stanza {
                    line: line_no,
                    ..Stanza::default()
                });
            }
            continue;
        }
        let Some(stanza) = current.as_mut().filter(|_| in_term) else {
            continue;
        };
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "id" => stanza.id = Some((value.to_owned(), line_no)),
            "name" => stanza.name = Some(unescape(strip_trailing_modifiers(value))),
            "def" => stanza.def = Some(quoted_text(value)),
            "is_a" => {
                let target = value.split('!').next().unwrap_or("").trim();
                // `is_a: X {qualifier=...}` keeps only the id
                let target = target.split_whitespace().next().unwrap_or("");
                stanza.is_a.push(target.to_owned());
            }
            "is_obsolete" => stanza.obsolete = value == "true",
            _ => {}
        }
    }
    if let Some(stanza) = current.take() {
        finish(stanza, &mut drafts, &mut obsolete)?;
    }

    OntologyGraph::from_drafts(drafts, obsolete)
}

fn finish(
    stanza: Stanza,
    drafts: &mut Vec<ConceptDraft>,
    obsolete: &mut BTreeSet<ConceptId>,
) -> Result<(), OntologyError> {
    let (raw_id, id_line) = stanza.id.ok_or(OntologyError::MissingId { line: stanza.line })?;
    let id = ConceptId::parse(&raw_id).ok_or(OntologyError::InvalidId {
        value: raw_id.clone(),
        line: Some(id_line),
    })?;
    if stanza.obsolete {
        if !obsolete.insert(id.clone()) {
            return Err(OntologyError::DuplicateId {
                id,
                line: Some(id_line),
            });
        }
        return Ok(());
    }
    let mut parents = Vec::with_capacity(stanza.is_a.len());
    for target in stanza.is_a {
        parents.push(ConceptId::parse(&target).ok_or(OntologyError::InvalidId {
            value: target,
            line: Some(id_line),
        })?);
    }
    drafts.push(ConceptDraft {
        label: stanza.name.unwrap_or_else(|| id.as_str().to_owned()),
        definition: stanza.def,
        id,
        parents,
        line: Some(id_line),
    });
    Ok(())
}

/// `"text" [xrefs] {modifiers}` -> `text`. Unquoted values are kept verbatim.
fn quoted_text(value: &str) -> String {
    let Some(rest) = value.strip_prefix('"') else {
        return value.to_owned();
    };
    let mut out = String::new();
    let mut chars = rest.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => {}
            },
            '"' => return out,
            c => out.push(c),
        }
    }
    out
}

fn strip_trailing_modifiers(value: &str) -> &str {
    match value.rfind(" {") {
        Some(pos) if value.ends_with('}') => value[..pos].trim_end(),
        _ => value,
    }
}

fn unescape(value: &str) -> String {
    if !value.contains('\\') {
        return value.to_owned();
    }
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}
