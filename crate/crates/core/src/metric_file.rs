//! Reading and writing metric-definition files.
//!
//! The format is the structured-text family of [`crate::textfmt`]:
//!
//! ```text
//! name        cylinder
//! dimension   4
//! coordinates t r z phi
//! signature   1 3
//! parameters {
//!   B0 = 1
//! }
//! components {
//!   1 1 : -(1 + B0^2*r^2/4)^2
//!   ...
//! }
//! domain {
//!   r
//! }
//! exceptional {
//!   4 - B0^2*r^2
//! }
//! ```
//!
//! Component entries use 1-based index pairs; the symmetric partner is filled
//! in automatically and unlisted entries are zero. Domain expressions must be
//! strictly positive at sample points; exceptional expressions must be
//! nonzero there.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{Expr, ParseError};
use crate::metric::{Chart, MetricError, MetricSpec};
use crate::textfmt::{lines_of, Document, Item, TextError};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("metric file: {0}")]
    Layout(#[from] TextError),
    #[error("missing field '{0}'")]
    Missing(&'static str),
    #[error("field '{field}': {detail}")]
    Malformed { field: &'static str, detail: String },
    #[error("component entry '{entry}': {detail}")]
    Component { entry: String, detail: String },
    #[error("expression '{src}': {err}")]
    Expr { src: String, err: ParseError },
    #[error("symbol '{symbol}' in '{src}' is neither a coordinate nor a parameter")]
    UnknownSymbol { symbol: String, src: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn parse_expr_checked(src: &str, spec_syms: &[String]) -> Result<Expr, FileError> {
    let e = Expr::parse(src).map_err(|err| FileError::Expr {
        src: src.to_string(),
        err,
    })?;
    for sym in e.symbols() {
        if !spec_syms.contains(&sym) {
            return Err(FileError::UnknownSymbol {
                symbol: sym,
                src: src.to_string(),
            });
        }
    }
    Ok(e)
}

pub fn parse_metric(src: &str) -> Result<MetricSpec, FileError> {
    let doc = Document::parse(src)?;
    let name = doc.get("name").unwrap_or("unnamed").to_string();
    let dimension: usize = doc
        .get("dimension")
        .ok_or(FileError::Missing("dimension"))?
        .parse()
        .map_err(|e| FileError::Malformed {
            field: "dimension",
            detail: format!("{e}"),
        })?;
    let coords: Vec<String> = doc
        .get("coordinates")
        .ok_or(FileError::Missing("coordinates"))?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    if coords.len() != dimension {
        return Err(FileError::Malformed {
            field: "coordinates",
            detail: format!("{} names for dimension {dimension}", coords.len()),
        });
    }
    let sig_parts: Vec<&str> = doc
        .get("signature")
        .ok_or(FileError::Missing("signature"))?
        .split_whitespace()
        .collect();
    let signature = match sig_parts.as_slice() {
        [a, b] => match (a.parse::<usize>(), b.parse::<usize>()) {
            (Ok(neg), Ok(pos)) if neg + pos == dimension => (neg, pos),
            _ => {
                return Err(FileError::Malformed {
                    field: "signature",
                    detail: format!("expected two counts summing to {dimension}"),
                })
            }
        },
        _ => {
            return Err(FileError::Malformed {
                field: "signature",
                detail: "expected '<negative> <positive>'".to_string(),
            })
        }
    };

    let mut params = BTreeMap::new();
    if let Some(items) = doc.block("parameters") {
        for line in lines_of(items) {
            let (pname, rest) = match line.split_once('=') {
                Some((l, r)) => (l.trim(), r.trim()),
                None => {
                    return Err(FileError::Malformed {
                        field: "parameters",
                        detail: format!("expected 'name = value', got '{line}'"),
                    })
                }
            };
            let value: f64 = rest.parse().map_err(|e| FileError::Malformed {
                field: "parameters",
                detail: format!("value for '{pname}': {e}"),
            })?;
            params.insert(pname.to_string(), value);
        }
    }

    let mut allowed: Vec<String> = coords.clone();
    allowed.extend(params.keys().cloned());

    let mut g = vec![vec![Expr::zero(); dimension]; dimension];
    let mut seen = vec![vec![false; dimension]; dimension];
    let comp_items = doc.block("components").ok_or(FileError::Missing("components"))?;
    for line in lines_of(comp_items) {
        let (head, expr_src) = line.split_once(':').ok_or_else(|| FileError::Component {
            entry: line.to_string(),
            detail: "expected 'a b : expression'".to_string(),
        })?;
        let idx: Vec<&str> = head.split_whitespace().collect();
        let parse_idx = |s: &str| -> Result<usize, FileError> {
            let v: usize = s.parse().map_err(|_| FileError::Component {
                entry: line.to_string(),
                detail: format!("bad index '{s}'"),
            })?;
            if v == 0 || v > dimension {
                return Err(FileError::Component {
                    entry: line.to_string(),
                    detail: format!("index {v} outside 1..{dimension}"),
                });
            }
            Ok(v - 1)
        };
        let (a, b) = match idx.as_slice() {
            [a, b] => (parse_idx(a)?, parse_idx(b)?),
            _ => {
                return Err(FileError::Component {
                    entry: line.to_string(),
                    detail: "expected exactly two indices".to_string(),
                })
            }
        };
        if seen[a][b] {
            return Err(FileError::Component {
                entry: line.to_string(),
                detail: "duplicate entry".to_string(),
            });
        }
        let e = parse_expr_checked(expr_src.trim(), &allowed)?;
        g[a][b] = e.clone();
        g[b][a] = e;
        seen[a][b] = true;
        seen[b][a] = true;
    }

    let mut domain = Vec::new();
    if let Some(items) = doc.block("domain") {
        for line in lines_of(items) {
            domain.push(parse_expr_checked(line, &allowed)?);
        }
    }
    let mut exceptional = Vec::new();
    if let Some(items) = doc.block("exceptional") {
        for line in lines_of(items) {
            exceptional.push(parse_expr_checked(line, &allowed)?);
        }
    }

    let spec = MetricSpec {
        name,
        chart: Chart { coords },
        g,
        params,
        signature,
        domain,
        exceptional,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn write_metric(m: &MetricSpec) -> String {
    let mut items = vec![
        Item::field("name", &m.name),
        Item::field("dimension", m.n()),
        Item::field("coordinates", m.chart.coords.join(" ")),
        Item::field("signature", format!("{} {}", m.signature.0, m.signature.1)),
    ];
    if !m.params.is_empty() {
        items.push(Item::block(
            "parameters",
            m.params
                .iter()
                .map(|(k, v)| Item::line(format!("{k} = {v}")))
                .collect(),
        ));
    }
    let mut comps = Vec::new();
    for a in 0..m.n() {
        for b in a..m.n() {
            if !m.g[a][b].is_zero() {
                comps.push(Item::line(format!("{} {} : {}", a + 1, b + 1, m.g[a][b])));
            }
        }
    }
    items.push(Item::block("components", comps));
    if !m.domain.is_empty() {
        items.push(Item::block(
            "domain",
            m.domain.iter().map(|e| Item::line(e.to_string())).collect(),
        ));
    }
    if !m.exceptional.is_empty() {
        items.push(Item::block(
            "exceptional",
            m.exceptional
                .iter()
                .map(|e| Item::line(e.to_string()))
                .collect(),
        ));
    }
    Document { items }.to_text()
}
