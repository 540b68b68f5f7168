//! Per-source structure of a storage graph.
//!
//! For each source `k` the graph is split into edges that demand `k`
//! (qualified in the characteristic graph of `k`) and edges that do not.
//! Nodes joined by paths of non-demanding edges form unqualified components;
//! a demanding edge whose endpoints share a component is *internal*.
//!
//! Components are reported twice: over the whole graph, and over the
//! subgraph induced by non-degenerate nodes. Only the latter decides
//! extremality. A degenerate node can store its common sources in the clear
//! (or nothing at all), so it never forces two neighbours to store aligned
//! content.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, NodeId, StorageGraph};
use crate::source::SourceSet;

/// The edge partition seen by a single source.
#[derive(Clone, Debug)]
pub struct CharacteristicView<'g> {
    graph: &'g StorageGraph,
    source: usize,
    qualified: Vec<EdgeId>,
    unqualified: Vec<EdgeId>,
}

impl<'g> CharacteristicView<'g> {
    pub fn graph(&self) -> &'g StorageGraph {
        self.graph
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn qualified(&self) -> &[EdgeId] {
        &self.qualified
    }

    pub fn unqualified(&self) -> &[EdgeId] {
        &self.unqualified
    }

    pub fn is_qualified(&self, e: EdgeId) -> bool {
        self.graph.label(e).contains(self.source)
    }
}

pub fn characteristic_view(g: &StorageGraph, k: usize) -> Result<CharacteristicView<'_>> {
    g.check_source(k)?;
    let (qualified, unqualified) = g.edge_ids().partition(|&e| g.label(e).contains(k));
    Ok(CharacteristicView {
        graph: g,
        source: k,
        qualified,
        unqualified,
    })
}

/// Component labelling of the nodes in scope. Ids run `1..=count`; a node
/// outside the scope carries id 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    ids: Vec<usize>,
    count: usize,
}

impl Components {
    pub fn id(&self, n: NodeId) -> Option<usize> {
        match self.ids[n.0] {
            0 => None,
            id => Some(id),
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Raw ids indexed by node; 0 marks out-of-scope nodes.
    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    /// Members of each component, in node order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.count];
        for (i, &id) in self.ids.iter().enumerate() {
            if id != 0 {
                out[id - 1].push(NodeId(i));
            }
        }
        out
    }
}

/// Unqualified components over every node of the view's graph.
pub fn unqualified_components(view: &CharacteristicView<'_>) -> Components {
    let scope = vec![true; view.graph.node_count()];
    components_within(view, &scope)
}

/// Breadth-first labelling over nodes with `scope[n]`, seeded in node order
/// and walking only unqualified edges whose endpoints are both in scope.
fn components_within(view: &CharacteristicView<'_>, scope: &[bool]) -> Components {
    let g = view.graph;
    let mut ids = vec![0usize; g.node_count()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in g.node_ids() {
        if !scope[start.0] || ids[start.0] != 0 {
            continue;
        }
        count += 1;
        ids[start.0] = count;
        queue.push_back(start);
        while let Some(n) = queue.pop_front() {
            for &e in g.incident(n) {
                if view.is_qualified(e) {
                    continue;
                }
                let m = g.edge(e).other(n);
                if scope[m.0] && ids[m.0] == 0 {
                    ids[m.0] = count;
                    queue.push_back(m);
                }
            }
        }
    }
    Components { ids, count }
}

/// Qualified edges of the view whose endpoints lie in one component, in edge order.
pub fn internal_qualified_edges(view: &CharacteristicView<'_>, comps: &Components) -> Vec<EdgeId> {
    view.qualified
        .iter()
        .copied()
        .filter(|&e| {
            let edge = view.graph.edge(e);
            matches!((comps.id(edge.a), comps.id(edge.b)), (Some(x), Some(y)) if x == y)
        })
        .collect()
}

/// Intersection of the labels on every edge incident to `v`.
pub fn common_sources(g: &StorageGraph, v: NodeId) -> SourceSet {
    g.incident(v)
        .iter()
        .map(|&e| g.label(e))
        .reduce(SourceSet::intersection)
        .unwrap_or(SourceSet::EMPTY)
}

/// Name-checked variant of [`common_sources`].
pub fn common_sources_of(g: &StorageGraph, name: &str) -> Result<SourceSet> {
    Ok(common_sources(g, g.node(name)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceAnalysis {
    pub source: usize,
    /// Components over the whole characteristic graph.
    pub components: Components,
    pub internal_qualified: Vec<EdgeId>,
    /// Components restricted to non-degenerate nodes; degenerate nodes have no id.
    pub reduced: Components,
    /// Internal qualified edges of the non-degenerate subgraph.
    pub reduced_internal: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentAnalysis {
    pub per_source: Vec<SourceAnalysis>,
    pub common: Vec<SourceSet>,
    pub degenerate: Vec<bool>,
}

impl ComponentAnalysis {
    pub fn source(&self, k: usize) -> &SourceAnalysis {
        &self.per_source[k - 1]
    }

    pub fn common(&self, n: NodeId) -> SourceSet {
        self.common[n.0]
    }

    pub fn is_degenerate(&self, n: NodeId) -> bool {
        self.degenerate[n.0]
    }

    pub fn degenerate_nodes(&self) -> Vec<NodeId> {
        self.nodes_where(true)
    }

    pub fn nondegenerate_nodes(&self) -> Vec<NodeId> {
        self.nodes_where(false)
    }

    fn nodes_where(&self, flag: bool) -> Vec<NodeId> {
        self.degenerate
            .iter()
            .enumerate()
            .filter(|(_, &d)| d == flag)
            .map(|(i, _)| NodeId(i))
            .collect()
    }

    /// Edges of the non-degenerate subgraph (both endpoints non-degenerate).
    pub fn nondegenerate_edges(&self, g: &StorageGraph) -> Vec<EdgeId> {
        g.edge_ids()
            .filter(|&e| {
                let edge = g.edge(e);
                !self.degenerate[edge.a.0] && !self.degenerate[edge.b.0]
            })
            .collect()
    }

    /// Largest reduced component count over all sources.
    pub fn max_reduced_components(&self) -> usize {
        self.per_source.iter().map(|s| s.reduced.count()).max().unwrap_or(0)
    }

    /// Whether any source has an internal qualified edge among non-degenerate nodes.
    pub fn has_obstruction(&self) -> bool {
        self.per_source.iter().any(|s| !s.reduced_internal.is_empty())
    }
}

pub fn analyze(g: &StorageGraph) -> ComponentAnalysis {
    let common: Vec<SourceSet> = g.node_ids().map(|n| common_sources(g, n)).collect();
    let degenerate: Vec<bool> = g
        .node_ids()
        .map(|n| g.incident(n).iter().all(|&e| g.label(e) == common[n.0]))
        .collect();
    let scope: Vec<bool> = degenerate.iter().map(|d| !d).collect();

    let per_source = (1..=g.sources())
        .map(|k| {
            let view = characteristic_view(g, k).expect("k within 1..=K");
            let components = unqualified_components(&view);
            let internal_qualified = internal_qualified_edges(&view, &components);
            let reduced = components_within(&view, &scope);
            let reduced_internal = internal_qualified_edges(&view, &reduced);
            SourceAnalysis {
                source: k,
                components,
                internal_qualified,
                reduced,
                reduced_internal,
            }
        })
        .collect();

    ComponentAnalysis {
        per_source,
        common,
        degenerate,
    }
}

/// Fails unless `a` is exactly the analysis of `g`.
pub fn ensure_matches(g: &StorageGraph, a: &ComponentAnalysis) -> Result<()> {
    if a.per_source.len() != g.sources() || a.common.len() != g.node_count() || *a != analyze(g) {
        return Err(Error::InconsistentAnalysis);
    }
    Ok(())
}
