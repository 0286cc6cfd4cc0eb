//! On-disk formats.
//!
//! - edge lists: one `src dst` pair per line, whitespace separated, `#`
//!   starts a comment;
//! - features: CSV without header, one row per node;
//! - labels: one integer per line;
//! - matrices: a `rows cols` header followed by whitespace separated rows;
//! - named matrices: `# name` before each matrix;
//! - vectors: one value per line;
//! - histories: JSON lines.
//!
//! Reals are written with Rust's shortest round-trip formatting, so a value
//! read back is bit-identical to the value written.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Content lines with their 1-based numbers, comments and blanks removed.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("cannot parse {tok:?}")))
}

pub fn read_edge_list(path: &Path) -> Result<Vec<Edge>> {
    let text = read(path)?;
    content_lines(&text)
        .map(|(no, l)| {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(parse_err(path, no, format!("expected 2 fields, found {}", toks.len())));
            }
            Ok((parse_num(path, no, toks[0])?, parse_num(path, no, toks[1])?))
        })
        .collect()
}

pub fn read_features(path: &Path) -> Result<Array2<f64>> {
    let text = read(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, l) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if l.is_empty() {
            continue;
        }
        let row = l
            .split(',')
            .map(|t| parse_num(path, no, t.trim()))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(path, no, format!("{} columns, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    let p = rows.first().map_or(0, Vec::len);
    Ok(Array2::from_shape_fn((rows.len(), p), |(i, j)| rows[i][j]))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = read(path)?;
    content_lines(&text)
        .map(|(no, l)| parse_num(path, no, l))
        .collect()
}

/// Reads a graph; duplicate and reversed edges collapse to one.
pub fn load_graph(edge_path: &Path, feature_path: &Path, label_path: Option<&Path>) -> Result<Graph> {
    let features = read_features(feature_path)?;
    let edges = read_edge_list(edge_path)?;
    let labels = label_path.map(read_labels).transpose()?;
    Graph::new(features, edges, labels)
}

pub fn format_edge_list(edges: &[Edge]) -> String {
    let mut s = String::new();
    for (i, j) in edges {
        let _ = writeln!(s, "{i} {j}");
    }
    s
}

pub fn format_features(x: &Array2<f64>) -> String {
    let mut s = String::new();
    for row in x.outer_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn format_labels(y: &[usize]) -> String {
    y.iter().map(|v| format!("{v}\n")).collect()
}

/// Writes `<dir>/edges.txt`, `<dir>/features.csv`, and `<dir>/labels.txt`
/// when the graph has labels.
pub fn save_graph(g: &Graph, dir: &Path) -> Result<()> {
    write_text(&dir.join("edges.txt"), &format_edge_list(g.edges()))?;
    write_text(&dir.join("features.csv"), &format_features(g.features()))?;
    if let Some(y) = g.labels() {
        write_text(&dir.join("labels.txt"), &format_labels(y))?;
    }
    Ok(())
}

pub fn format_matrix(m: &Array2<f64>) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for row in m.outer_iter() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", cells.join(" "));
    }
    s
}

/// Parses one matrix from `lines`, which must start at its header.
fn parse_matrix<'a>(path: &Path, lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Array2<f64>> {
    let (no, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 0, "missing matrix header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| parse_num(path, no, t))
        .collect::<Result<_>>()?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(path, no, "header must be `rows cols`"));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut last = no;
    for r in 0..rows {
        let (no, l) = lines
            .next()
            .ok_or_else(|| parse_err(path, last + 1, format!("missing row {r}")))?;
        last = no;
        let before = data.len();
        for t in l.split_whitespace() {
            data.push(parse_num::<f64>(path, no, t)?);
        }
        if data.len() - before != cols {
            return Err(parse_err(path, no, format!("{} values, expected {cols}", data.len() - before)));
        }
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("counted"))
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let text = read(path)?;
    let mut lines = content_lines(&text);
    parse_matrix(path, &mut lines)
}

pub fn format_named_matrices(items: &[(&str, &Array2<f64>)]) -> String {
    items
        .iter()
        .map(|(name, m)| format!("# {name}\n{}", format_matrix(m)))
        .collect()
}

pub fn read_named_matrices(path: &Path) -> Result<Vec<(String, Array2<f64>)>> {
    let text = read(path)?;
    let mut out = Vec::new();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();
    while let Some((no, l)) = lines.next() {
        let name = l
            .strip_prefix('#')
            .ok_or_else(|| parse_err(path, no, "expected `# name`"))?
            .trim()
            .to_string();
        out.push((name, parse_matrix(path, &mut lines)?));
    }
    Ok(out)
}

pub fn format_vector(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}\n")).collect()
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = read(path)?;
    content_lines(&text)
        .map(|(no, l)| parse_num(path, no, l))
        .collect()
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("plain data serializes");
    s.push('\n');
    s
}

/// Audit sidecar of an attack: `+ i j` per inserted and `- i j` per
/// removed edge.
pub fn format_audit(inserted: &[Edge], removed: &[Edge]) -> String {
    let mut s = String::new();
    for (i, j) in inserted {
        let _ = writeln!(s, "+ {i} {j}");
    }
    for (i, j) in removed {
        let _ = writeln!(s, "- {i} {j}");
    }
    s
}

pub fn read_audit(path: &Path) -> Result<(Vec<Edge>, Vec<Edge>)> {
    let text = read(path)?;
    let (mut ins, mut rem) = (Vec::new(), Vec::new());
    for (no, l) in content_lines(&text) {
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [sign, a, b] = toks[..] else {
            return Err(parse_err(path, no, "expected `+|- i j`"));
        };
        let e = (parse_num(path, no, a)?, parse_num(path, no, b)?);
        match sign {
            "+" => ins.push(e),
            "-" => rem.push(e),
            _ => return Err(parse_err(path, no, format!("unknown marker {sign:?}"))),
        }
    }
    Ok((ins, rem))
}
