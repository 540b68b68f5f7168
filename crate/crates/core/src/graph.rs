//! Labeled storage graphs and their line-oriented text format.
//!
//! ```text
//! # comment
//! K 2
//! M 1
//! edge V1 V3 1
//! edge V1 V2 2
//! edge V2 V4 -
//! ```
//!
//! Nodes are declared implicitly by the edges that mention them and are
//! numbered in order of first appearance. A graph built this way can never
//! contain an isolated node.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, GraphError, Result};
use crate::source::{SourceSet, MAX_SOURCES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// An undirected edge with endpoints ordered `a < b` in node order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub label: SourceSet,
}

impl Edge {
    pub fn is_qualified(&self) -> bool {
        !self.label.is_empty()
    }

    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Name-level reference to an edge, canonicalized so `a` precedes `b` in node order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub a: String,
    pub b: String,
}

impl std::fmt::Display for EdgeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{}}}", self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StorageGraph {
    sources: usize,
    per_edge: usize,
    nodes: Vec<String>,
    edges: Vec<Edge>,
    incident: Vec<Vec<EdgeId>>,
    by_name: HashMap<String, NodeId>,
}

impl StorageGraph {
    /// Builds a graph from `(a, b, label)` triples. Node order is first appearance.
    pub fn from_edges<'a, I>(sources: usize, per_edge: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str, SourceSet)>,
    {
        let mut b = Builder::new(sources, per_edge)?;
        for (i, (x, y, label)) in edges.into_iter().enumerate() {
            b.push(i + 1, x, y, label)?;
        }
        b.finish()
    }

    /// Number of source symbols K.
    pub fn sources(&self) -> usize {
        self.sources
    }

    /// Sources demanded by each qualified edge, M.
    pub fn per_edge(&self) -> usize {
        self.per_edge
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn node_name(&self, n: NodeId) -> &str {
        &self.nodes[n.0]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node(&self, name: &str) -> Result<NodeId> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn label(&self, e: EdgeId) -> SourceSet {
        self.edges[e.0].label
    }

    pub fn incident(&self, n: NodeId) -> &[EdgeId] {
        &self.incident[n.0]
    }

    pub fn find_edge(&self, x: NodeId, y: NodeId) -> Option<EdgeId> {
        self.incident[x.0]
            .iter()
            .copied()
            .find(|&e| self.edges[e.0].other(x) == y)
    }

    pub fn edge_ref(&self, e: EdgeId) -> EdgeRef {
        let edge = &self.edges[e.0];
        EdgeRef {
            a: self.nodes[edge.a.0].clone(),
            b: self.nodes[edge.b.0].clone(),
        }
    }

    /// Looks up an edge by endpoint names in either order.
    pub fn resolve(&self, x: &str, y: &str) -> Result<EdgeId> {
        let (nx, ny) = (self.node(x)?, self.node(y)?);
        self.find_edge(nx, ny)
            .ok_or_else(|| Error::UnknownEdge(x.to_string(), y.to_string()))
    }

    pub fn check_source(&self, k: usize) -> Result<()> {
        if (1..=self.sources).contains(&k) {
            Ok(())
        } else {
            Err(Error::SourceIndex {
                k,
                sources: self.sources,
            })
        }
    }

    /// Renders the graph in the text format; `parse(&g.emit()) == g`.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "K {}", self.sources);
        let _ = writeln!(out, "M {}", self.per_edge);
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", self.nodes[e.a.0], self.nodes[e.b.0], e.label);
        }
        out
    }

    /// Parses the text format, validating every graph invariant.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut sources: Option<usize> = None;
        let mut per_edge: Option<usize> = None;
        let mut builder: Option<Builder> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = content.split_whitespace();
            let Some(head) = tokens.next() else { continue };
            let rest: Vec<&str> = tokens.collect();
            match head {
                "K" | "M" => {
                    let name = if head == "K" { "K" } else { "M" };
                    if builder.is_some() {
                        return Err(GraphError::LateHeader { line, name });
                    }
                    let slot = if head == "K" { &mut sources } else { &mut per_edge };
                    if slot.is_some() {
                        return Err(GraphError::DuplicateHeader { line, name });
                    }
                    let [value] = rest.as_slice() else {
                        return Err(syntax(line, format!("`{name}` takes exactly one integer")));
                    };
                    let v = value
                        .parse::<usize>()
                        .map_err(|_| syntax(line, format!("`{value}` is not a non-negative integer")))?;
                    *slot = Some(v);
                }
                "edge" => {
                    let [x, y, labels] = rest.as_slice() else {
                        return Err(syntax(line, "expected `edge <nodeA> <nodeB> <labels>`".into()));
                    };
                    if builder.is_none() {
                        let k = sources.ok_or(GraphError::MissingHeader("K"))?;
                        let m = per_edge.ok_or(GraphError::MissingHeader("M"))?;
                        builder = Some(Builder::new(k, m)?);
                    }
                    let b = builder.as_mut().expect("initialized above");
                    let label = parse_label(line, labels, b.sources)?;
                    b.push(line, x, y, label)?;
                }
                other => return Err(syntax(line, format!("unknown directive `{other}`"))),
            }
        }

        match builder {
            Some(b) => b.finish(),
            None => {
                let k = sources.ok_or(GraphError::MissingHeader("K"))?;
                let m = per_edge.ok_or(GraphError::MissingHeader("M"))?;
                Builder::new(k, m)?.finish()
            }
        }
    }
}

fn syntax(line: usize, msg: String) -> GraphError {
    GraphError::Syntax { line, msg }
}

fn parse_label(line: usize, token: &str, k: usize) -> Result<SourceSet, GraphError> {
    if token == "-" {
        return Ok(SourceSet::EMPTY);
    }
    let mut set = SourceSet::EMPTY;
    for part in token.split(',') {
        let index = part
            .parse::<usize>()
            .map_err(|_| syntax(line, format!("bad source index `{part}` in label `{token}`")))?;
        if index == 0 || index > k {
            return Err(GraphError::SourceOutOfRange { line, index, k });
        }
        if !set.insert(index) {
            return Err(GraphError::RepeatedSource { line, index });
        }
    }
    Ok(set)
}

fn valid_node_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Builder {
    sources: usize,
    per_edge: usize,
    nodes: Vec<String>,
    by_name: HashMap<String, NodeId>,
    edges: Vec<Edge>,
    seen: HashMap<(NodeId, NodeId), ()>,
}

impl Builder {
    fn new(sources: usize, per_edge: usize) -> Result<Self, GraphError> {
        if sources == 0 {
            return Err(GraphError::ZeroParameter { name: "K" });
        }
        if per_edge == 0 {
            return Err(GraphError::ZeroParameter { name: "M" });
        }
        if sources > MAX_SOURCES {
            return Err(GraphError::TooManySources(sources));
        }
        if per_edge > sources {
            return Err(GraphError::PerEdgeExceedsSources {
                m: per_edge,
                k: sources,
            });
        }
        Ok(Builder {
            sources,
            per_edge,
            nodes: Vec::new(),
            by_name: HashMap::new(),
            edges: Vec::new(),
            seen: HashMap::new(),
        })
    }

    fn intern(&mut self, line: usize, name: &str) -> Result<NodeId, GraphError> {
        if !valid_node_name(name) {
            return Err(GraphError::BadNodeName {
                line,
                token: name.to_string(),
            });
        }
        if let Some(&id) = self.by_name.get(name) {
            return Ok(id);
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(name.to_string());
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    fn push(&mut self, line: usize, x: &str, y: &str, label: SourceSet) -> Result<(), GraphError> {
        if x == y {
            return Err(GraphError::SelfLoop {
                line,
                node: x.to_string(),
            });
        }
        if let Some(index) = label.max().filter(|&i| i > self.sources) {
            return Err(GraphError::SourceOutOfRange {
                line,
                index,
                k: self.sources,
            });
        }
        let size = label.len();
        if size != 0 && size != self.per_edge {
            return Err(GraphError::LabelSize {
                line,
                size,
                m: self.per_edge,
            });
        }
        let (nx, ny) = (self.intern(line, x)?, self.intern(line, y)?);
        let (a, b) = if nx < ny { (nx, ny) } else { (ny, nx) };
        if self.seen.insert((a, b), ()).is_some() {
            return Err(GraphError::DuplicateEdge {
                line,
                a: self.nodes[a.0].clone(),
                b: self.nodes[b.0].clone(),
            });
        }
        self.edges.push(Edge { a, b, label });
        Ok(())
    }

    fn finish(self) -> Result<StorageGraph, GraphError> {
        if self.edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut incident = vec![Vec::new(); self.nodes.len()];
        for (i, e) in self.edges.iter().enumerate() {
            incident[e.a.0].push(EdgeId(i));
            incident[e.b.0].push(EdgeId(i));
        }
        Ok(StorageGraph {
            sources: self.sources,
            per_edge: self.per_edge,
            nodes: self.nodes,
            edges: self.edges,
            incident,
            by_name: self.by_name,
        })
    }
}
