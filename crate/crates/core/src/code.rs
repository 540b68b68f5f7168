//! Linear secure storage codes over a prime field.
//!
//! Node `n` stores `A_n · (W_1..W_K, Z_1..Z_zdim)`. Each source is one field
//! symbol, so the key rate of a code with `zdim > 0` is `1/zdim`.

use std::fmt::{self, Write as _};

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::field::{solve_left, FieldMatrix, PrimeField};
use crate::graph::{EdgeId, NodeId, StorageGraph};
use crate::source::SourceSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CodeKind {
    M1,
    General,
    Keyless,
    /// Found by exhaustive search.
    Search,
}

impl CodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodeKind::M1 => "m1",
            CodeKind::General => "general",
            CodeKind::Keyless => "keyless",
            CodeKind::Search => "search",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "m1" => CodeKind::M1,
            "general" => CodeKind::General,
            "keyless" => CodeKind::Keyless,
            "search" => CodeKind::Search,
            _ => return None,
        })
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Key rate `L / L_Z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyRate {
    /// `L_Z = 0`.
    Unbounded,
    Finite(Ratio<u64>),
}

impl fmt::Display for KeyRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyRate::Unbounded => f.write_str("unbounded"),
            KeyRate::Finite(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeMeta {
    pub kind: CodeKind,
    pub seed: u64,
    /// Rejected draws before acceptance; not persisted in code files.
    pub retries: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSecureCode {
    field: PrimeField,
    sources: usize,
    per_edge: usize,
    zdim: usize,
    node_names: Vec<String>,
    nodes: Vec<FieldMatrix>,
    decoders: Vec<Option<FieldMatrix>>,
    pub meta: CodeMeta,
}

impl LinearSecureCode {
    /// Binds per-node matrices to `g`, synthesizing a decoder for every
    /// qualified edge where one exists.
    pub fn assemble(
        g: &StorageGraph,
        field: PrimeField,
        zdim: usize,
        nodes: Vec<FieldMatrix>,
        meta: CodeMeta,
    ) -> Result<Self> {
        if nodes.len() != g.node_count() {
            return Err(Error::CodeMismatch(format!(
                "{} node matrices for {} nodes",
                nodes.len(),
                g.node_count()
            )));
        }
        let width = g.sources() + zdim;
        if let Some((i, m)) = nodes.iter().enumerate().find(|(_, m)| m.cols() != width) {
            return Err(Error::CodeMismatch(format!(
                "node {} has {} columns, expected {width}",
                g.node_name(NodeId(i)),
                m.cols()
            )));
        }
        let mut code = LinearSecureCode {
            field,
            sources: g.sources(),
            per_edge: g.per_edge(),
            zdim,
            node_names: g.node_names().to_vec(),
            nodes,
            decoders: Vec::new(),
            meta,
        };
        code.decoders = g
            .edge_ids()
            .map(|e| {
                let label = g.label(e);
                if label.is_empty() {
                    return None;
                }
                let stacked = code.edge_matrix(g, e);
                solve_left(field, &stacked, &code.selector(label))
            })
            .collect();
        Ok(code)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn sources(&self) -> usize {
        self.sources
    }

    pub fn per_edge(&self) -> usize {
        self.per_edge
    }

    pub fn zdim(&self) -> usize {
        self.zdim
    }

    /// Columns of every node matrix: `K + zdim`.
    pub fn width(&self) -> usize {
        self.sources + self.zdim
    }

    pub fn node_matrix(&self, n: NodeId) -> &FieldMatrix {
        &self.nodes[n.0]
    }

    pub fn node_matrices(&self) -> &[FieldMatrix] {
        &self.nodes
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn decoder(&self, e: EdgeId) -> Option<&FieldMatrix> {
        self.decoders.get(e.0).and_then(|d| d.as_ref())
    }

    pub fn rate(&self) -> KeyRate {
        match self.zdim {
            0 => KeyRate::Unbounded,
            z => KeyRate::Finite(Ratio::new(1, z as u64)),
        }
    }

    /// Column index of source `k` (1-based).
    pub fn source_column(&self, k: usize) -> usize {
        k - 1
    }

    pub fn key_columns(&self) -> Vec<usize> {
        (self.sources..self.width()).collect()
    }

    /// Stacked matrix `[A_a; A_b]` of an edge.
    pub fn edge_matrix(&self, g: &StorageGraph, e: EdgeId) -> FieldMatrix {
        let edge = g.edge(e);
        self.nodes[edge.a.0].vstack(&self.nodes[edge.b.0])
    }

    /// Unit rows picking out the sources of `label`, ascending.
    pub fn selector(&self, label: SourceSet) -> FieldMatrix {
        let mut s = FieldMatrix::zeros(label.len(), self.width());
        for (i, k) in label.iter().enumerate() {
            s.set(i, self.source_column(k), 1);
        }
        s
    }

    /// Fails unless this code was built for a graph with `g`'s shape and node names.
    pub fn check_compatible(&self, g: &StorageGraph) -> Result<()> {
        if self.sources != g.sources() || self.per_edge != g.per_edge() {
            return Err(Error::CodeMismatch(format!(
                "code has K={} M={}, graph has K={} M={}",
                self.sources,
                self.per_edge,
                g.sources(),
                g.per_edge()
            )));
        }
        if self.node_names != g.node_names() {
            return Err(Error::CodeMismatch("node names or order differ".into()));
        }
        if self.decoders.len() != g.edge_count() {
            return Err(Error::CodeMismatch("edge count differs".into()));
        }
        Ok(())
    }

    /// Stored vector of every node, `V_n = A_n · (w; z)`.
    pub fn encode(&self, w: &[u64], z: &[u64]) -> Result<Vec<Vec<u64>>> {
        if w.len() != self.sources {
            return Err(Error::LengthMismatch {
                expected: self.sources,
                got: w.len(),
            });
        }
        if z.len() != self.zdim {
            return Err(Error::LengthMismatch {
                expected: self.zdim,
                got: z.len(),
            });
        }
        let x: Vec<u64> = w.iter().chain(z).map(|&v| self.field.reduce(v)).collect();
        Ok(self.nodes.iter().map(|a| a.mul_vec(self.field, &x)).collect())
    }

    /// Recovers the sources of a qualified edge (ascending) from its endpoint vectors.
    pub fn decode(&self, g: &StorageGraph, e: EdgeId, vi: &[u64], vj: &[u64]) -> Result<Vec<u64>> {
        let edge = g.edge(e);
        if !edge.is_qualified() {
            let r = g.edge_ref(e);
            return Err(Error::UnqualifiedEdge(r.a, r.b));
        }
        for (n, v) in [(edge.a, vi), (edge.b, vj)] {
            let dim = self.nodes[n.0].rows();
            if v.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        let d = self
            .decoder(e)
            .ok_or_else(|| Error::Precondition(format!("edge {} is not decodable", g.edge_ref(e))))?;
        let y: Vec<u64> = vi.iter().chain(vj).copied().collect();
        Ok(d.mul_vec(self.field, &y))
    }

    /// Renders the code file format.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "q {}", self.field.modulus());
        let _ = writeln!(out, "K {}", self.sources);
        let _ = writeln!(out, "M {}", self.per_edge);
        let _ = writeln!(out, "zdim {}", self.zdim);
        let _ = writeln!(out, "kind {}", self.meta.kind);
        let _ = writeln!(out, "seed {}", self.meta.seed);
        for (name, a) in self.node_names.iter().zip(&self.nodes) {
            let _ = writeln!(out, "node {name}");
            for r in 0..a.rows() {
                out.push_str("row");
                for &v in a.row(r) {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
        out
    }

    /// Parses a code file and binds it to `g`. Nodes must appear in graph order.
    pub fn parse(text: &str, g: &StorageGraph) -> Result<Self> {
        let mut header: [Option<u64>; 5] = [None; 5];
        const NAMES: [&str; 5] = ["q", "K", "M", "zdim", "seed"];
        let mut kind: Option<CodeKind> = None;
        let mut names: Vec<String> = Vec::new();
        let mut rows: Vec<Vec<Vec<u64>>> = Vec::new();

        let bad = |line: usize, msg: String| Error::CodeFormat { line, msg };

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let Some((&head, rest)) = tokens.split_first() else {
                continue;
            };
            match head {
                "kind" => {
                    let [value] = rest else {
                        return Err(bad(line, "`kind` takes one value".into()));
                    };
                    if kind.is_some() {
                        return Err(bad(line, "duplicate `kind`".into()));
                    }
                    kind = Some(CodeKind::parse(value).ok_or_else(|| bad(line, format!("unknown kind `{value}`")))?);
                }
                "node" => {
                    let [name] = rest else {
                        return Err(bad(line, "`node` takes one name".into()));
                    };
                    names.push(name.to_string());
                    rows.push(Vec::new());
                }
                "row" => {
                    let Some(current) = rows.last_mut() else {
                        return Err(bad(line, "`row` before any `node`".into()));
                    };
                    let values = rest
                        .iter()
                        .map(|t| {
                            t.parse::<u64>()
                                .map_err(|_| bad(line, format!("bad coefficient `{t}`")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    current.push(values);
                }
                other => {
                    let Some(slot) = NAMES.iter().position(|&n| n == other) else {
                        return Err(bad(line, format!("unknown directive `{other}`")));
                    };
                    if !names.is_empty() {
                        return Err(bad(line, format!("header `{other}` after first node")));
                    }
                    let [value] = rest else {
                        return Err(bad(line, format!("`{other}` takes one integer")));
                    };
                    if header[slot].is_some() {
                        return Err(bad(line, format!("duplicate `{other}`")));
                    }
                    header[slot] = Some(
                        value
                            .parse::<u64>()
                            .map_err(|_| bad(line, format!("bad integer `{value}`")))?,
                    );
                }
            }
        }

        let get = |i: usize| header[i].ok_or_else(|| bad(0, format!("missing `{}` header", NAMES[i])));
        let (q, k, m, zdim, seed) = (get(0)?, get(1)? as usize, get(2)? as usize, get(3)? as usize, get(4)?);
        let kind = kind.ok_or_else(|| bad(0, "missing `kind` header".into()))?;
        let field = PrimeField::new(q)?;

        if k != g.sources() || m != g.per_edge() {
            return Err(Error::CodeMismatch(format!(
                "code has K={k} M={m}, graph has K={} M={}",
                g.sources(),
                g.per_edge()
            )));
        }
        if names != g.node_names() {
            return Err(Error::CodeMismatch("node names or order differ".into()));
        }
        let width = k + zdim;
        let mut nodes = Vec::with_capacity(rows.len());
        for (name, r) in names.iter().zip(&rows) {
            if let Some(bad_row) = r.iter().find(|row| row.len() != width) {
                return Err(Error::CodeMismatch(format!(
                    "node {name} has a row of length {}, expected {width}",
                    bad_row.len()
                )));
            }
            if r.iter().flatten().any(|&v| v >= q) {
                return Err(Error::CodeMismatch(format!("node {name} has a coefficient >= q")));
            }
            nodes.push(FieldMatrix::from_rows(field, r, width));
        }
        Self::assemble(g, field, zdim, nodes, CodeMeta { kind, seed, retries: 0 })
    }
}
