//! Extremal source-key-capacity regimes.

use std::fmt;

use num_rational::Ratio;

use crate::analysis::{ensure_matches, ComponentAnalysis};
use crate::error::Result;
use crate::graph::{EdgeId, NodeId, StorageGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Every edge label equals the union of its endpoints' common sources:
    /// secure storage needs no key at all.
    Keyless,
    /// Capacity exactly `1/M`.
    ExtremalOneOverM,
    /// Within the characterized class but with an internal qualified edge:
    /// capacity strictly below `1/M`.
    SubExtremal,
    Uncharacterized,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Keyless => "Keyless",
            Regime::ExtremalOneOverM => "ExtremalOneOverM",
            Regime::SubExtremal => "SubExtremal",
            Regime::Uncharacterized => "Uncharacterized",
        }
    }

    /// Positive regimes carry an exact capacity claim.
    pub fn is_positive(self) -> bool {
        matches!(self, Regime::Keyless | Regime::ExtremalOneOverM)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Claimed source key capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capacity {
    /// No key needed (`L_Z = 0`).
    Unbounded,
    Exact(Ratio<u64>),
    Below(Ratio<u64>),
    Unknown,
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Unbounded => f.write_str("unbounded"),
            Capacity::Exact(r) => write!(f, "{r}"),
            Capacity::Below(r) => write!(f, "<{r}"),
            Capacity::Unknown => f.write_str("unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Source `k` sees an internal qualified edge.
    InternalEdge { source: usize, edge: EdgeId },
    /// A non-degenerate node with nonempty common sources.
    CommonSources { node: NodeId },
    /// An edge whose label differs from the union of its endpoints' common sources.
    UnionViolation { edge: EdgeId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationResult {
    pub regime: Regime,
    pub per_edge: usize,
    pub capacity: Capacity,
    pub witnesses: Vec<Witness>,
}

/// Edges violating `C(Vi) ∪ C(Vj) = f({Vi,Vj})`, in edge order.
pub fn keyless_violations(g: &StorageGraph, a: &ComponentAnalysis) -> Vec<EdgeId> {
    g.edge_ids()
        .filter(|&e| {
            let edge = g.edge(e);
            a.common(edge.a).union(a.common(edge.b)) != edge.label
        })
        .collect()
}

pub fn classify(g: &StorageGraph, a: &ComponentAnalysis) -> Result<ClassificationResult> {
    ensure_matches(g, a)?;
    let m = g.per_edge() as u64;
    let one_over_m = Ratio::new(1, m);

    let violations = keyless_violations(g, a);
    if violations.is_empty() {
        return Ok(ClassificationResult {
            regime: Regime::Keyless,
            per_edge: g.per_edge(),
            capacity: Capacity::Unbounded,
            witnesses: Vec::new(),
        });
    }

    let nondegenerate = a.nondegenerate_nodes();
    let loaded: Vec<NodeId> = nondegenerate
        .iter()
        .copied()
        .filter(|&n| !a.common(n).is_empty())
        .collect();

    if !nondegenerate.is_empty() && loaded.is_empty() {
        let witnesses: Vec<Witness> = a
            .per_source
            .iter()
            .flat_map(|s| {
                s.reduced_internal
                    .iter()
                    .map(move |&edge| Witness::InternalEdge { source: s.source, edge })
            })
            .collect();
        let (regime, capacity) = if witnesses.is_empty() {
            (Regime::ExtremalOneOverM, Capacity::Exact(one_over_m))
        } else {
            (Regime::SubExtremal, Capacity::Below(one_over_m))
        };
        return Ok(ClassificationResult {
            regime,
            per_edge: g.per_edge(),
            capacity,
            witnesses,
        });
    }

    let mut witnesses: Vec<Witness> = loaded.into_iter().map(|node| Witness::CommonSources { node }).collect();
    witnesses.extend(violations.into_iter().map(|edge| Witness::UnionViolation { edge }));
    Ok(ClassificationResult {
        regime: Regime::Uncharacterized,
        per_edge: g.per_edge(),
        capacity: Capacity::Unknown,
        witnesses,
    })
}
