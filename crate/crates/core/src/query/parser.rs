//! Text syntax for composite concepts.
//!
//! ```text
//! expr  := or
//! or    := and { "OR" and }
//! and   := unary { "AND" unary }
//! unary := "NOT" unary | "(" expr ")" | atom
//! atom  := bare-id | "quoted label"
//! ```
//!
//! Keywords are case-insensitive. Quoted strings are labels matched exactly
//! (ignoring case); `\"` and `\\` escape inside them. A bare token is first
//! looked up as a concept id, then as a one-word label. Chains of the same
//! operator become a single n-ary node.

use super::ast::QueryNode;
use super::{QueryError, Suggestion};
use crate::ontology::{ConceptId, OntologyGraph};

const MAX_SUGGESTIONS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    And,
    Or,
    Not,
    Quoted(String),
    Bare(String),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::And => "AND".into(),
            Tok::Or => "OR".into(),
            Tok::Not => "NOT".into(),
            Tok::Quoted(s) => format!("label {s:?}"),
            Tok::Bare(s) => format!("`{s}`"),
            Tok::End => "end of input".into(),
        }
    }
}

fn is_bare_char(c: char) -> bool {
    !(c.is_whitespace() || c == '(' || c == ')' || c == '"')
}

/// Tokens with their character offsets.
fn lex(text: &str) -> Result<Vec<(Tok, usize)>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        match c {
            '(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            '"' => {
                let mut label = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => {
                            return Err(QueryError::Syntax {
                                position: start,
                                expected: vec!["closing `\"`".into()],
                                found: "end of input".into(),
                            })
                        }
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') if matches!(chars.get(i + 1), Some('"' | '\\')) => {
                            label.push(chars[i + 1]);
                            i += 2;
                        }
                        Some(&ch) => {
                            label.push(ch);
                            i += 1;
                        }
                    }
                }
                out.push((Tok::Quoted(label), start));
            }
            _ => {
                while i < chars.len() && is_bare_char(chars[i]) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.to_ascii_uppercase().as_str() {
                    "AND" => Tok::And,
                    "OR" => Tok::Or,
                    "NOT" => Tok::Not,
                    _ => Tok::Bare(word),
                };
                out.push((tok, start));
            }
        }
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    graph: &'a OntologyGraph,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> QueryError {
        QueryError::Syntax {
            position: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn expr(&mut self) -> Result<QueryNode, QueryError> {
        let mut items = vec![self.and()?];
        while *self.peek() == Tok::Or {
            self.advance();
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            QueryNode::or(items)
        })
    }

    fn and(&mut self) -> Result<QueryNode, QueryError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.advance();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().expect("one item")
        } else {
            QueryNode::and(items)
        })
    }

    fn unary(&mut self) -> Result<QueryNode, QueryError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(QueryNode::negate(self.unary()?))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["AND", "OR", "`)`"]));
                }
                self.advance();
                Ok(inner)
            }
            Tok::Quoted(_) | Tok::Bare(_) => {
                let (tok, position) = self.advance();
                match tok {
                    Tok::Quoted(label) => resolve_label(self.graph, &label, position).map(QueryNode::Ref),
                    Tok::Bare(word) => resolve_bare(self.graph, &word, position).map(QueryNode::Ref),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.error(&["concept id", "quoted label", "NOT", "`(`"])),
        }
    }
}

pub fn parse_expression(text: &str, graph: &OntologyGraph) -> Result<QueryNode, QueryError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        graph,
    };
    let node = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(parser.error(&["AND", "OR", "end of input"]));
    }
    Ok(node)
}

fn labels_matching(graph: &OntologyGraph, label: &str) -> Vec<ConceptId> {
    let needle = label.to_lowercase();
    (0..graph.len())
        .filter(|&i| graph.label_lower_at(i) == needle)
        .map(|i| graph.id_at(i).clone())
        .collect()
}

fn resolve_label(graph: &OntologyGraph, label: &str, position: usize) -> Result<ConceptId, QueryError> {
    let mut matches = labels_matching(graph, label);
    match matches.len() {
        1 => Ok(matches.pop().expect("one match")),
        0 => Err(QueryError::UnknownConcept {
            name: label.to_owned(),
            position: Some(position),
            suggestions: suggest(graph, label),
        }),
        _ => Err(QueryError::AmbiguousLabel {
            label: label.to_owned(),
            position: Some(position),
            candidates: matches,
        }),
    }
}

fn resolve_bare(graph: &OntologyGraph, word: &str, position: usize) -> Result<ConceptId, QueryError> {
    if let Some(record) = graph.get(word) {
        return Ok(record.id.clone());
    }
    resolve_label(graph, word, position)
}

/// Closest labels by Jaro-Winkler similarity, best first.
pub fn suggest(graph: &OntologyGraph, name: &str) -> Vec<Suggestion> {
    let needle = name.to_lowercase();
    let mut scored: Vec<(f64, usize)> = (0..graph.len())
        .map(|i| (strsim::jaro_winkler(&needle, graph.label_lower_at(i)), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored
        .into_iter()
        .take(MAX_SUGGESTIONS)
        .map(|(_, i)| {
            let r = graph.record_at(i);
            Suggestion {
                id: r.id.clone(),
                label: r.label.clone(),
            }
        })
        .collect()
}

fn precedence(node: &QueryNode) -> u8 {
    match node {
        QueryNode::Or(_) => 1,
        QueryNode::And(_) => 2,
        QueryNode::Not(_) => 3,
        QueryNode::Ref(_) => 4,
    }
}

/// Canonical text with the fewest parentheses that preserve structure.
pub fn format_expression(node: &QueryNode) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

fn write_node(node: &QueryNode, out: &mut String) {
    match node {
        QueryNode::Ref(id) => out.push_str(id.as_str()),
        QueryNode::And(children) | QueryNode::Or(children) => {
            let keyword = if matches!(node, QueryNode::And(_)) {
                " AND "
            } else {
                " OR "
            };
            for (i, child) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(keyword);
                }
                // equal precedence means a nested same-operator node, which
                // only needs parentheses when the tree was not flattened
                write_child(child, precedence(child) <= precedence(node), out);
            }
        }
        QueryNode::Not(child) => {
            out.push_str("NOT ");
            write_child(child, precedence(child) < precedence(node), out);
        }
    }
}

fn write_child(child: &QueryNode, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_node(child, out);
        out.push(')');
    } else {
        write_node(child, out);
    }
}

/// Quotes a label for use inside an expression.
pub fn quote_label(label: &str) -> String {
    let mut out = String::with_capacity(label.len() + 2);
    out.push('"');
    for c in label.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}
