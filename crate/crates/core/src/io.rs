//! Plain-text graph files.
//!
//! ```text
//! # comment
//! n m
//! u v      (m lines, 0-based endpoints)
//! ```
//!
//! Blank lines and anything after `#` are ignored.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn two_numbers(line_no: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = |what: &str| -> Result<usize> {
        let tok = it
            .next()
            .ok_or_else(|| parse_err(line_no, format!("missing {what}")))?;
        tok.parse().map_err(|_| {
            parse_err(
                line_no,
                format!("{what} `{tok}` is not a non-negative integer"),
            )
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if it.next().is_some() {
        return Err(parse_err(line_no, "expected exactly two fields"));
    }
    Ok((a, b))
}

pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (a, b) = two_numbers(line_no, body)?;
        let Some((n, m)) = header else {
            header = Some((a, b));
            continue;
        };
        if edges.len() == m {
            return Err(parse_err(
                line_no,
                format!("more than the declared {m} edges"),
            ));
        }
        if a >= n || b >= n {
            return Err(parse_err(line_no, format!("endpoint outside 0..{n}")));
        }
        if a == b {
            return Err(parse_err(line_no, format!("self-loop at vertex {a}")));
        }
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(parse_err(line_no, format!("duplicate edge {a} {b}")));
        }
        edges.push((a, b));
    }
    let (n, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing `n m` header"))?;
    if edges.len() != m {
        return Err(parse_err(
            last_line.max(1),
            format!("declared {m} edges but found {}", edges.len()),
        ));
    }
    Graph::from_edges(n, edges)
}

pub fn read_graph_file(path: impl AsRef<Path>) -> Result<Graph> {
    let file = std::fs::File::open(path)?;
    read_graph(std::io::BufReader::new(file))
}

pub fn write_graph<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.edge_count())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn graph_to_string(g: &Graph) -> String {
    let mut buf = Vec::new();
    write_graph(g, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("graph text is ASCII")
}
