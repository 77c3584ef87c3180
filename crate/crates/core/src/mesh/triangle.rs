//! Reader for the text layout written by Shewchuk's Triangle.
//!
//! ```text
//! .node   <count> <dim=2> <n_attrs> <n_markers>
//!         <index> <x> <y> [attrs...] [marker]
//! .ele    <count> <nodes_per_triangle=3> <n_attrs>
//!         <index> <v1> <v2> <v3> [attrs...]
//! .edge   <count> <n_markers=1>
//!         <index> <v1> <v2> <marker>
//! ```
//!
//! `#` starts a comment. Indices may be 0- or 1-based; the base is taken from
//! the first node. Edges with marker 0 are interior and ignored.

use std::path::Path;

use super::{BoundaryEdge, Mesh};
use crate::error::{Error, Result};

struct Lines<'a> {
    file: &'static str,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(file: &'static str, text: &'a str) -> Self {
        Self { file, inner: text.lines().enumerate() }
    }

    /// Next non-empty line with comments stripped, split into tokens.
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            let body = line.split('#').next().unwrap_or("");
            let toks: Vec<&str> = body.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::MeshParse { file: self.file.into(), line, msg: msg.into() }
    }

    fn expect_tokens(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let file = self.file;
        self.next_tokens().ok_or_else(|| Error::MeshParse {
            file: file.into(),
            line: 0,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn parse<T: std::str::FromStr>(&self, line: usize, tok: &str, what: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(line, format!("cannot parse {what} from '{tok}'")))
    }
}

/// Parses the three Triangle files into a validated [`Mesh`].
pub fn read_triangle_mesh(node_text: &str, ele_text: &str, boundary_text: &str) -> Result<Mesh> {
    // nodes
    let mut nodes = Lines::new("node", node_text);
    let (ln, head) = nodes.expect_tokens("node header")?;
    if head.len() < 2 {
        return Err(nodes.err(ln, "header needs at least <count> <dim>"));
    }
    let count: usize = nodes.parse(ln, head[0], "vertex count")?;
    let dim: usize = nodes.parse(ln, head[1], "dimension")?;
    if dim != 2 {
        return Err(nodes.err(ln, format!("dimension {dim}, only 2 supported")));
    }
    let n_attr: usize = head.get(2).map(|t| nodes.parse(ln, t, "attribute count")).transpose()?.unwrap_or(0);
    let n_mark: usize = head.get(3).map(|t| nodes.parse(ln, t, "marker count")).transpose()?.unwrap_or(0);
    let mut vertices = Vec::with_capacity(count);
    let mut base = None;
    for k in 0..count {
        let (ln, toks) = nodes.expect_tokens("vertex line")?;
        if toks.len() < 3 + n_attr + n_mark {
            return Err(nodes.err(ln, format!("expected {} fields", 3 + n_attr + n_mark)));
        }
        let idx: usize = nodes.parse(ln, toks[0], "vertex index")?;
        let b = *base.get_or_insert(idx);
        if b > 1 {
            return Err(nodes.err(ln, "first vertex index must be 0 or 1"));
        }
        if idx != k + b {
            return Err(nodes.err(ln, format!("vertex index {idx} out of sequence")));
        }
        let x: f64 = nodes.parse(ln, toks[1], "x")?;
        let y: f64 = nodes.parse(ln, toks[2], "y")?;
        if !x.is_finite() || !y.is_finite() {
            return Err(nodes.err(ln, "non-finite coordinate"));
        }
        vertices.push([x, y]);
    }
    let base = base.unwrap_or(0);
    let nv = vertices.len();
    let vertex_ref = |lines: &Lines, ln: usize, tok: &str| -> Result<usize> {
        let v: usize = lines.parse(ln, tok, "vertex reference")?;
        if v < base || v - base >= nv {
            return Err(lines.err(ln, format!("vertex {v} past vertex count {nv}")));
        }
        Ok(v - base)
    };

    // triangles
    let mut ele = Lines::new("ele", ele_text);
    let (ln, head) = ele.expect_tokens("element header")?;
    let count: usize = ele.parse(ln, head[0], "triangle count")?;
    let per: usize = head.get(1).map(|t| ele.parse(ln, t, "nodes per triangle")).transpose()?.unwrap_or(3);
    if per != 3 {
        return Err(ele.err(ln, format!("{per} nodes per triangle, only 3 supported")));
    }
    let mut triangles = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, toks) = ele.expect_tokens("triangle line")?;
        if toks.len() < 4 {
            return Err(ele.err(ln, "expected <index> <v1> <v2> <v3>"));
        }
        let t = [vertex_ref(&ele, ln, toks[1])?, vertex_ref(&ele, ln, toks[2])?, vertex_ref(&ele, ln, toks[3])?];
        let (a, b, c) = (vertices[t[0]], vertices[t[1]], vertices[t[2]]);
        let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        if area == 0.0 {
            return Err(ele.err(ln, "zero-area triangle"));
        }
        triangles.push(t);
    }

    // boundary edges
    let mut edge = Lines::new("edge", boundary_text);
    let (ln, head) = edge.expect_tokens("edge header")?;
    let count: usize = edge.parse(ln, head[0], "edge count")?;
    let n_mark: usize = head.get(1).map(|t| edge.parse(ln, t, "marker count")).transpose()?.unwrap_or(0);
    if n_mark != 1 {
        return Err(edge.err(ln, "boundary edges need a marker column"));
    }
    let mut boundary = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, toks) = edge.expect_tokens("edge line")?;
        if toks.len() < 4 {
            return Err(edge.err(ln, "expected <index> <v1> <v2> <marker>"));
        }
        let a = vertex_ref(&edge, ln, toks[1])?;
        let b = vertex_ref(&edge, ln, toks[2])?;
        let marker: i64 = edge.parse(ln, toks[3], "marker")?;
        if marker < 0 {
            return Err(edge.err(ln, "negative marker"));
        }
        if marker > 0 {
            boundary.push(BoundaryEdge { vertices: [a, b], label: marker as u32 });
        }
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Reads `<stem>.node`, `<stem>.ele` and `<stem>.edge`.
pub fn read_triangle_files(stem: impl AsRef<Path>) -> Result<Mesh> {
    let stem = stem.as_ref();
    let read = |ext: &str| {
        let p = stem.with_extension(ext);
        std::fs::read_to_string(&p).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::Config(format!("mesh file not found: {}", p.display()))
            } else {
                Error::io(p, e)
            }
        })
    };
    read_triangle_mesh(&read("node")?, &read("ele")?, &read("edge")?)
}
