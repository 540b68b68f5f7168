//! Tab-separated text output. One record per line.

use std::fmt::Write;

use secure_storage::classify::Witness;
use secure_storage::graph::NodeId;
use secure_storage::verify::{AuditViolation, EdgeRecord, VerificationReport};
use secure_storage::{ClassificationResult, ComponentAnalysis, StorageGraph};

fn names(g: &StorageGraph, nodes: &[NodeId]) -> String {
    if nodes.is_empty() {
        return "-".into();
    }
    nodes.iter().map(|&n| g.node_name(n)).collect::<Vec<_>>().join(",")
}

fn edge_list(g: &StorageGraph, edges: &[secure_storage::EdgeId]) -> String {
    if edges.is_empty() {
        return "-".into();
    }
    edges
        .iter()
        .map(|&e| g.edge_ref(e).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn analysis(g: &StorageGraph, a: &ComponentAnalysis) -> String {
    let mut out = String::new();
    writeln!(out, "K\t{}", g.sources()).unwrap();
    writeln!(out, "M\t{}", g.per_edge()).unwrap();
    writeln!(out, "nodes\t{}", g.node_count()).unwrap();
    writeln!(out, "edges\t{}", g.edge_count()).unwrap();
    for n in g.node_ids() {
        let kind = if a.is_degenerate(n) {
            "degenerate"
        } else {
            "nondegenerate"
        };
        writeln!(out, "node\t{}\tcommon\t{}\t{kind}", g.node_name(n), a.common(n)).unwrap();
    }
    writeln!(out, "degenerate\t{}", names(g, &a.degenerate_nodes())).unwrap();
    for s in &a.per_source {
        let k = s.source;
        writeln!(
            out,
            "source\t{k}\tU\t{}\tinternal\t{}",
            s.components.count(),
            edge_list(g, &s.internal_qualified)
        )
        .unwrap();
        for (i, members) in s.components.members().iter().enumerate() {
            writeln!(out, "component\t{k}\t{}\t{}", i + 1, names(g, members)).unwrap();
        }
        writeln!(
            out,
            "reduced\t{k}\tU\t{}\tinternal\t{}",
            s.reduced.count(),
            edge_list(g, &s.reduced_internal)
        )
        .unwrap();
        for (i, members) in s.reduced.members().iter().enumerate() {
            writeln!(out, "reduced_component\t{k}\t{}\t{}", i + 1, names(g, members)).unwrap();
        }
    }
    out
}

pub fn classification(g: &StorageGraph, c: &ClassificationResult) -> String {
    let mut out = String::new();
    writeln!(out, "regime\t{}", c.regime).unwrap();
    writeln!(out, "capacity\t{}", c.capacity).unwrap();
    for w in &c.witnesses {
        match w {
            Witness::InternalEdge { source, edge } => {
                writeln!(out, "witness\tk={source}\tedge\t{}", g.edge_ref(*edge)).unwrap()
            }
            Witness::CommonSources { node } => writeln!(out, "witness\tcommon\t{}", g.node_name(*node)).unwrap(),
            Witness::UnionViolation { edge } => {
                writeln!(out, "witness\tunion\t{}\tlabel\t{}", g.edge_ref(*edge), g.label(*edge)).unwrap()
            }
        }
    }
    out
}

fn edge_record(g: &StorageGraph, q: u64, r: &EdgeRecord) -> String {
    let mut line = format!(
        "edge\t{}\tlabel\t{}\tcorrectness\t{}\tsecurity\t{}\tH\t{}",
        g.edge_ref(r.edge),
        g.label(r.edge),
        r.correctness.as_str(),
        r.security.as_str(),
        r.joint_entropy
    );
    if let Some(o) = &r.oracle {
        let h = o
            .joint_entropy_log_q(q)
            .map_or_else(|| "nonuniform".to_string(), |h| h.to_string());
        write!(
            line,
            "\toracle\tcorrectness\t{}\tsecurity\t{}\tH\t{h}\ttuples\t{}",
            o.correctness.as_str(),
            o.security.as_str(),
            o.tuples
        )
        .unwrap();
        if !r.methods_agree() {
            line.push_str("\tDISAGREE");
        }
    } else if r.oracle_skipped {
        line.push_str("\toracle\tskipped");
    }
    line
}

fn violation(g: &StorageGraph, v: &AuditViolation) -> String {
    let detail = match v {
        AuditViolation::NodeSize { node, rank } => format!("node\t{}\trank\t{rank}", g.node_name(*node)),
        AuditViolation::NodeNoise { node, rank } => format!("node\t{}\tkey_rank\t{rank}", g.node_name(*node)),
        AuditViolation::EdgeSize { edge, rank } => format!("edge\t{}\trank\t{rank}", g.edge_ref(*edge)),
        AuditViolation::NoiseAlignment { rank } => format!("global_key_rank\t{rank}"),
        AuditViolation::Independence {
            node,
            with_sources,
            key_only,
        } => format!(
            "node\t{}\trank\t{with_sources}\tkey_rank\t{key_only}",
            g.node_name(*node)
        ),
    };
    format!("violation\t{}\t{detail}", v.lemma())
}

pub fn verification(g: &StorageGraph, q: u64, r: &VerificationReport) -> String {
    let mut out = String::new();
    for e in &r.edges {
        writeln!(out, "{}", edge_record(g, q, e)).unwrap();
    }
    for (n, h) in g.node_ids().zip(&r.node_entropy) {
        writeln!(out, "node\t{}\tH\t{h}", g.node_name(n)).unwrap();
    }
    writeln!(out, "key_residual\t{}", r.residual_key_entropy).unwrap();
    writeln!(out, "rate\t{}", r.rate).unwrap();
    if r.audit_skipped {
        writeln!(out, "audit\tskipped\tno key columns").unwrap();
    }
    if let Some(a) = &r.audit {
        writeln!(
            out,
            "audit\t{}\tnodes\t{}\tedges\t{}\tglobal_key_rank\t{}",
            if a.passed() { "pass" } else { "FAIL" },
            a.nodes_checked,
            a.edges_checked,
            a.global_key_rank
        )
        .unwrap();
        for v in &a.violations {
            writeln!(out, "{}", violation(g, v)).unwrap();
        }
    }
    writeln!(out, "{}", if r.is_valid() { "VALID" } else { "INVALID" }).unwrap();
    out
}
