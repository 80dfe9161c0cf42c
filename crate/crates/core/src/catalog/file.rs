//! Function-definition files.
//!
//! ```text
//! # comments start with '#'
//! name = kinked
//! dim = 1
//! domain = box -1 1          # or `all`, or `unspecified`
//! tags = lsc, continuous_on_domain
//! singular_set = 0           # points separated by ';', coordinates by ','
//! exception_set =
//! piece = x < 0 -> -x
//! piece = otherwise -> x^2
//! ```
//!
//! A new `name =` line starts the next definition. Pieces are tried in
//! order; a point matching no piece is outside the domain.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::expr::{parse_cond, parse_expr, Cond, Expr};
use super::{CatalogEntry, Domain, Tag};
use crate::error::{Error, Result};
use crate::subdiff::SubdiffOracle;

#[derive(Default)]
struct Draft {
    line: usize,
    name: String,
    dim: Option<usize>,
    domain: Option<Domain>,
    tags: BTreeSet<Tag>,
    singular: Vec<Vec<f64>>,
    exceptions: Vec<Vec<f64>>,
    // (line, condition text, expression text)
    pieces: Vec<(usize, String, String)>,
    // raw point lists are parsed once dim is known
    singular_raw: Option<(usize, String)>,
    exception_raw: Option<(usize, String)>,
    domain_raw: Option<(usize, String)>,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn parse(text: &str) -> Result<Vec<CatalogEntry>> {
    let mut drafts: Vec<Draft> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected `key = value`, found {content:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "name" {
            if value.is_empty() {
                return Err(err(line, "empty name"));
            }
            drafts.push(Draft { line, name: value.to_string(), ..Draft::default() });
            continue;
        }
        let d = drafts
            .last_mut()
            .ok_or_else(|| err(line, format!("`{key}` before any `name =` line")))?;
        match key {
            "dim" => {
                let n: usize = value.parse().map_err(|_| err(line, format!("bad dimension {value:?}")))?;
                if n == 0 {
                    return Err(err(line, "dimension must be positive"));
                }
                d.dim = Some(n);
            }
            "domain" => d.domain_raw = Some((line, value.to_string())),
            "tags" => {
                for t in value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    let tag = Tag::parse(t).ok_or_else(|| err(line, format!("unknown tag {t:?}")))?;
                    d.tags.insert(tag);
                }
            }
            "singular_set" => d.singular_raw = Some((line, value.to_string())),
            "exception_set" => d.exception_raw = Some((line, value.to_string())),
            "piece" => {
                let (c, e) = value
                    .split_once("->")
                    .ok_or_else(|| err(line, "a piece needs `condition -> expression`"))?;
                d.pieces.push((line, c.trim().to_string(), e.trim().to_string()));
            }
            other => return Err(err(line, format!("unknown key {other:?}"))),
        }
    }
    drafts.into_iter().map(build).collect()
}

fn parse_points(line: usize, s: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for p in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let coords: std::result::Result<Vec<f64>, _> = p.split(',').map(|c| c.trim().parse::<f64>()).collect();
        let coords = coords.map_err(|_| err(line, format!("bad point {p:?}")))?;
        if coords.len() != dim {
            return Err(err(line, format!("point {p:?} has {} coordinates, expected {dim}", coords.len())));
        }
        out.push(coords);
    }
    Ok(out)
}

fn parse_domain(line: usize, s: &str, dim: usize) -> Result<Domain> {
    let mut words = s.split_whitespace();
    match words.next() {
        Some("all") => Ok(Domain::All),
        Some("unspecified") => Ok(Domain::Unspecified),
        Some("box") => {
            let nums: std::result::Result<Vec<f64>, _> = words.map(|w| w.parse::<f64>()).collect();
            let nums = nums.map_err(|_| err(line, "box bounds must be numbers"))?;
            if nums.len() != 2 * dim {
                return Err(err(line, format!("box needs {} bounds, found {}", 2 * dim, nums.len())));
            }
            let b: Vec<(f64, f64)> = nums.chunks(2).map(|c| (c[0], c[1])).collect();
            if b.iter().any(|(lo, hi)| lo > hi) {
                return Err(err(line, "box lower bound exceeds upper bound"));
            }
            Ok(Domain::Box(b))
        }
        _ => Err(err(line, format!("unknown domain {s:?}"))),
    }
}

fn build(mut d: Draft) -> Result<CatalogEntry> {
    let dim = d.dim.ok_or_else(|| err(d.line, format!("{} has no `dim` line", d.name)))?;
    if d.pieces.is_empty() {
        return Err(err(d.line, format!("{} has no pieces", d.name)));
    }
    if let Some((l, s)) = &d.domain_raw {
        d.domain = Some(parse_domain(*l, s, dim)?);
    }
    if let Some((l, s)) = &d.singular_raw {
        d.singular = parse_points(*l, s, dim)?;
    }
    if let Some((l, s)) = &d.exception_raw {
        d.exceptions = parse_points(*l, s, dim)?;
    }
    let mut pieces: Vec<(Cond, Expr)> = Vec::new();
    for (line, c, e) in &d.pieces {
        let cond = parse_cond(c, dim).map_err(|m| err(*line, m))?;
        let expr = parse_expr(e, dim).map_err(|m| err(*line, m))?;
        pieces.push((cond, expr));
    }
    let pieces = Arc::new(pieces);
    let eval = Arc::new(move |x: &[f64]| {
        for (c, e) in pieces.iter() {
            if c.holds(x) {
                return e.eval(x);
            }
        }
        f64::INFINITY
    });
    let mut entry = CatalogEntry::new(d.name.clone(), dim, eval.clone())
        .describe("user-defined")
        .with_domain(d.domain.unwrap_or(Domain::All));
    entry.tags = d.tags.clone();
    entry.singular_set = d.singular;
    entry.exception_set = d.exceptions;
    let domain = entry.domain.clone();
    let guarded = Arc::new(move |x: &[f64]| if domain.contains(x) { eval(x) } else { f64::INFINITY });
    if entry.has_tag(Tag::Convex) {
        entry = entry.with_subdiff(SubdiffOracle::convex_membership(guarded));
    } else if entry.has_tag(Tag::LocallyLipschitz) {
        entry = entry.with_subdiff(SubdiffOracle::gradient_sampling(guarded));
    }
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# two definitions
name = hinge
dim = 1
tags = convex, locally_lipschitz
piece = x < 0 -> 0
piece = otherwise -> 2*x

name = plane_max
dim = 2
domain = box -1 1 -1 1
singular_set = 0,0
piece = otherwise -> max(x1, x2)
";

    #[test]
    fn parses_multiple_entries() {
        let es = parse(SAMPLE).unwrap();
        assert_eq!(es.len(), 2);
        assert_eq!(es[0].value(&[-1.0]), 0.0);
        assert_eq!(es[0].value(&[1.5]), 3.0);
        assert!(es[0].subdiff_oracle().is_some());
        assert_eq!(es[1].value(&[0.2, -0.5]), 0.2);
        assert_eq!(es[1].value(&[2.0, 0.0]), f64::INFINITY);
        assert_eq!(es[1].singular_set, vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn errors_cite_lines() {
        let bad = "name = f\ndim = 1\npiece = x < 0 -> tan(x)\n";
        match parse(bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("tan"));
            }
            other => panic!("{other:?}"),
        }
        match parse("dim = 1\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("name = g\ndim = 1\ntags = shiny\npiece = otherwise -> x") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
