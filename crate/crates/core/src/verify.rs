//! Correctness and security checks for linear secure codes.
//!
//! Sources and key symbols are independent and uniform, so for any linear map
//! `A` the entropy `H(A·X | X_S)` in `log q` units is the rank of `A` with the
//! columns in `S` deleted. The linear checks are rank comparisons built on that
//! identity. The entropy oracle ignores linearity and enumerates every input
//! tuple, counting outputs.

use std::collections::HashMap;

use crate::analysis::{ensure_matches, ComponentAnalysis};
use crate::code::{CodeKind, CodeMeta, KeyRate, LinearSecureCode};
use crate::error::{Error, Result};
use crate::field::{rank, FieldMatrix, PrimeField};
use crate::graph::{EdgeId, NodeId, StorageGraph};

/// Default cap on enumerated tuples or candidates.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Correctness of an unqualified edge.
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::NotApplicable => "n/a",
        }
    }
}

/// `H(rows · X | X_given)` in `log q` units.
pub fn cond_entropy_linear(field: PrimeField, rows: &FieldMatrix, given: &[usize]) -> usize {
    let free: Vec<usize> = (0..rows.cols()).filter(|c| !given.contains(c)).collect();
    rank(field, &rows.select_columns(&free))
}

fn source_columns(code: &LinearSecureCode, label: crate::source::SourceSet) -> Vec<usize> {
    label.iter().map(|k| code.source_column(k)).collect()
}

/// Every demanded source lies in the row space of the stacked edge matrix.
pub fn check_correctness_linear(code: &LinearSecureCode, g: &StorageGraph, e: EdgeId) -> Result<bool> {
    let label = g.label(e);
    if label.is_empty() {
        let r = g.edge_ref(e);
        return Err(Error::UnqualifiedEdge(r.a, r.b));
    }
    let field = code.field();
    let stacked = code.edge_matrix(g, e);
    let base = rank(field, &stacked);
    Ok(rank(field, &stacked.vstack(&code.selector(label))) == base)
}

/// `H(Vi,Vj | W_f) = H(Vi,Vj | W_all)`: the undesired sources add no information.
pub fn check_security_linear(code: &LinearSecureCode, g: &StorageGraph, e: EdgeId) -> bool {
    let field = code.field();
    let stacked = code.edge_matrix(g, e);
    let given_desired = source_columns(code, g.label(e));
    let all_sources: Vec<usize> = (0..code.sources()).collect();
    cond_entropy_linear(field, &stacked, &given_desired) == cond_entropy_linear(field, &stacked, &all_sources)
}

/// Result of enumerating every input tuple for one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOutcome {
    pub correctness: Verdict,
    pub security: Verdict,
    /// Distinct `(vi, vj)` values observed.
    pub joint_support: u64,
    /// Whether every observed value occurs equally often.
    pub joint_uniform: bool,
    pub tuples: u64,
}

impl OracleOutcome {
    /// `H(Vi, Vj)` in `log q` units, when the joint law is uniform over `q^r` points.
    pub fn joint_entropy_log_q(&self, q: u64) -> Option<u32> {
        if !self.joint_uniform {
            return None;
        }
        let mut acc = 1u64;
        for r in 0..64 {
            if acc == self.joint_support {
                return Some(r);
            }
            acc = acc.checked_mul(q)?;
        }
        None
    }
}

fn checked_pow(q: u64, e: usize) -> Option<u64> {
    (0..e).try_fold(1u64, |acc, _| acc.checked_mul(q))
}

fn pow_string(q: u64, e: usize) -> String {
    match checked_pow(q, e) {
        Some(v) => v.to_string(),
        None => format!("{q}^{e}"),
    }
}

/// Writes the base-`q` digits of `index` into `out`, least significant first.
fn digits(mut index: u64, q: u64, out: &mut [u64]) {
    for d in out.iter_mut() {
        *d = index % q;
        index /= q;
    }
}

/// Exhaustive check of one edge by enumerating `F_q^(K+zdim)`.
pub fn entropy_oracle(code: &LinearSecureCode, g: &StorageGraph, e: EdgeId, budget: u64) -> Result<OracleOutcome> {
    let field = code.field();
    let q = field.modulus();
    let width = code.width();
    let tuples = match checked_pow(q, width) {
        Some(t) if t <= budget => t,
        _ => {
            return Err(Error::BudgetExceeded {
                required: pow_string(q, width),
                budget,
            })
        }
    };
    let stacked = code.edge_matrix(g, e);
    let rows = stacked.rows();
    let bits = (64 - (q - 1).leading_zeros()) as usize;
    if rows * bits.max(1) > 128 {
        return Err(Error::BudgetExceeded {
            required: format!("{rows}-symbol outputs over F_{q}"),
            budget,
        });
    }
    let pack = |y: &[u64]| y.iter().fold(0u128, |acc, &v| (acc << bits) | v as u128);

    let label = g.label(e);
    let desired: Vec<usize> = source_columns(code, label);
    let undesired: Vec<usize> = (1..=code.sources())
        .filter(|&k| !label.contains(k))
        .map(|k| code.source_column(k))
        .collect();
    let keys = code.key_columns();

    let n_desired = checked_pow(q, desired.len()).expect("bounded by tuples");
    let n_undesired = checked_pow(q, undesired.len()).expect("bounded by tuples");
    let n_keys = checked_pow(q, keys.len()).expect("bounded by tuples");

    let mut x = vec![0u64; width];
    let mut d_digits = vec![0u64; desired.len()];
    let mut u_digits = vec![0u64; undesired.len()];
    let mut k_digits = vec![0u64; keys.len()];

    // output -> (desired-tuple index, occurrences)
    let mut seen: HashMap<u128, (u64, u64)> = HashMap::new();
    let mut correct = true;
    let mut secure = true;
    let mut histogram: Vec<u128> = Vec::with_capacity(n_keys as usize);
    let mut reference: Vec<u128> = Vec::with_capacity(n_keys as usize);

    for di in 0..n_desired {
        digits(di, q, &mut d_digits);
        for (&c, &v) in desired.iter().zip(&d_digits) {
            x[c] = v;
        }
        for ui in 0..n_undesired {
            digits(ui, q, &mut u_digits);
            for (&c, &v) in undesired.iter().zip(&u_digits) {
                x[c] = v;
            }
            histogram.clear();
            for ki in 0..n_keys {
                digits(ki, q, &mut k_digits);
                for (&c, &v) in keys.iter().zip(&k_digits) {
                    x[c] = v;
                }
                let y = stacked.mul_vec(field, &x);
                let key = pack(&y);
                histogram.push(key);
                let slot = seen.entry(key).or_insert((di, 0));
                if slot.0 != di {
                    correct = false;
                }
                slot.1 += 1;
            }
            histogram.sort_unstable();
            if ui == 0 {
                std::mem::swap(&mut reference, &mut histogram);
            } else if histogram != reference {
                secure = false;
            }
        }
    }

    let first = seen.values().next().map(|v| v.1);
    let joint_uniform = seen.values().all(|v| Some(v.1) == first);
    Ok(OracleOutcome {
        correctness: if label.is_empty() {
            Verdict::NotApplicable
        } else {
            Verdict::from_bool(correct)
        },
        security: Verdict::from_bool(secure),
        joint_support: seen.len() as u64,
        joint_uniform,
        tuples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Linear,
    /// Linear checks plus the exhaustive oracle.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeRecord {
    pub edge: EdgeId,
    pub correctness: Verdict,
    pub security: Verdict,
    pub method: Method,
    /// `H(Vi, Vj)` in `log q` units.
    pub joint_entropy: usize,
    pub oracle: Option<OracleOutcome>,
    /// Set when the oracle was requested but exceeded the budget.
    pub oracle_skipped: bool,
}

impl EdgeRecord {
    /// Linear and oracle verdicts coincide (vacuously true without the oracle).
    pub fn methods_agree(&self) -> bool {
        self.oracle
            .is_none_or(|o| o.correctness == self.correctness && o.security == self.security)
    }

    pub fn passed(&self) -> bool {
        !self.correctness.is_fail() && !self.security.is_fail() && self.methods_agree()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditViolation {
    /// `rank(A_n) != M` at a non-degenerate node.
    NodeSize { node: NodeId, rank: usize },
    /// `rank` of the key columns at a non-degenerate node is not `M`.
    NodeNoise { node: NodeId, rank: usize },
    /// `rank(A_edge) != 2M` on a qualified edge between non-degenerate nodes.
    EdgeSize { edge: EdgeId, rank: usize },
    /// Key columns stacked over all nodes do not have rank `M`.
    NoiseAlignment { rank: usize },
    /// Sources outside `C(V_n)` add rank beyond the key columns at node `n`.
    Independence {
        node: NodeId,
        with_sources: usize,
        key_only: usize,
    },
}

impl AuditViolation {
    pub fn lemma(&self) -> &'static str {
        match self {
            AuditViolation::Independence { .. } => "independence",
            AuditViolation::NodeSize { .. } | AuditViolation::NodeNoise { .. } => "message-and-noise-size",
            AuditViolation::EdgeSize { .. } => "qualified-edge-size",
            AuditViolation::NoiseAlignment { .. } => "noise-alignment",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditRecord {
    pub nodes_checked: usize,
    pub edges_checked: usize,
    pub global_key_rank: usize,
    pub violations: Vec<AuditViolation>,
}

impl AuditRecord {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact rank analogs of the size and alignment properties every rate-`1/M`
/// keyed code must have. Returns `None` for key-free codes, which fall outside
/// these properties.
pub fn audit_lemmas(code: &LinearSecureCode, g: &StorageGraph, a: &ComponentAnalysis) -> Result<Option<AuditRecord>> {
    code.check_compatible(g)?;
    ensure_matches(g, a)?;
    if code.zdim() == 0 {
        return Ok(None);
    }
    let field = code.field();
    let m = g.per_edge();
    let keys = code.key_columns();
    let mut violations = Vec::new();
    let mut nodes_checked = 0;

    for n in g.node_ids() {
        let an = code.node_matrix(n);
        let key_only = rank(field, &an.select_columns(&keys));
        let outside: Vec<usize> = (1..=code.sources())
            .filter(|&k| !a.common(n).contains(k))
            .map(|k| code.source_column(k))
            .chain(keys.iter().copied())
            .collect();
        let with_sources = rank(field, &an.select_columns(&outside));
        if with_sources != key_only {
            violations.push(AuditViolation::Independence {
                node: n,
                with_sources,
                key_only,
            });
        }
        if a.is_degenerate(n) {
            continue;
        }
        nodes_checked += 1;
        let r = rank(field, an);
        if r != m {
            violations.push(AuditViolation::NodeSize { node: n, rank: r });
        }
        if key_only != m {
            violations.push(AuditViolation::NodeNoise {
                node: n,
                rank: key_only,
            });
        }
    }

    let mut edges_checked = 0;
    for e in a.nondegenerate_edges(g) {
        if !g.edge(e).is_qualified() {
            continue;
        }
        edges_checked += 1;
        let r = rank(field, &code.edge_matrix(g, e));
        if r != 2 * m {
            violations.push(AuditViolation::EdgeSize { edge: e, rank: r });
        }
    }

    let mut all_keys = FieldMatrix::zeros(0, keys.len());
    for an in code.node_matrices() {
        all_keys = all_keys.vstack(&an.select_columns(&keys));
    }
    let global_key_rank = rank(field, &all_keys);
    if global_key_rank != m {
        violations.push(AuditViolation::NoiseAlignment { rank: global_key_rank });
    }

    Ok(Some(AuditRecord {
        nodes_checked,
        edges_checked,
        global_key_rank,
        violations,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub oracle: bool,
    pub audit: bool,
    pub budget: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle: false,
            audit: false,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub edges: Vec<EdgeRecord>,
    /// `H(V_n)` per node, `log q` units.
    pub node_entropy: Vec<usize>,
    /// `H(all V | all W)`: key material visible across the whole system.
    pub residual_key_entropy: usize,
    pub rate: KeyRate,
    pub audit: Option<AuditRecord>,
    /// Whether an audit was requested but skipped because the code is key-free.
    pub audit_skipped: bool,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.edges.iter().all(EdgeRecord::passed) && self.audit.as_ref().is_none_or(AuditRecord::passed)
    }
}

pub fn verify(code: &LinearSecureCode, g: &StorageGraph, opts: &VerifyOptions) -> Result<VerificationReport> {
    code.check_compatible(g)?;
    let field = code.field();
    let mut edges = Vec::with_capacity(g.edge_count());
    for e in g.edge_ids() {
        let correctness = if g.edge(e).is_qualified() {
            Verdict::from_bool(check_correctness_linear(code, g, e)?)
        } else {
            Verdict::NotApplicable
        };
        let security = Verdict::from_bool(check_security_linear(code, g, e));
        let (oracle, oracle_skipped) = if opts.oracle {
            match entropy_oracle(code, g, e, opts.budget) {
                Ok(o) => (Some(o), false),
                Err(Error::BudgetExceeded { .. }) => (None, true),
                Err(other) => return Err(other),
            }
        } else {
            (None, false)
        };
        edges.push(EdgeRecord {
            edge: e,
            correctness,
            security,
            method: if oracle.is_some() {
                Method::Oracle
            } else {
                Method::Linear
            },
            joint_entropy: rank(field, &code.edge_matrix(g, e)),
            oracle,
            oracle_skipped,
        });
    }

    let node_entropy = code.node_matrices().iter().map(|m| rank(field, m)).collect();
    let sources: Vec<usize> = (0..code.sources()).collect();
    let mut everything = FieldMatrix::zeros(0, code.width());
    for m in code.node_matrices() {
        everything = everything.vstack(m);
    }
    let residual_key_entropy = cond_entropy_linear(field, &everything, &sources);

    let (audit, audit_skipped) = if opts.audit {
        let a = crate::analysis::analyze(g);
        let record = audit_lemmas(code, g, &a)?;
        let skipped = record.is_none();
        (record, skipped)
    } else {
        (None, false)
    };

    Ok(VerificationReport {
        edges,
        node_entropy,
        residual_key_entropy,
        rate: code.rate(),
        audit,
        audit_skipped,
    })
}

/// Searches every code with `node_dim × (K + zdim)` coefficient matrices per node
/// over `F_q`, returning the first (in lexicographic order of node matrices)
/// that is correct and secure on every edge. Only scalar-linear codes of this
/// exact shape are covered; `None` says nothing about other code classes.
pub fn exhaustive_converse_search(
    g: &StorageGraph,
    q: u64,
    node_dim: usize,
    zdim: usize,
    budget: u64,
) -> Result<Option<LinearSecureCode>> {
    let field = PrimeField::new(q)?;
    let width = g.sources() + zdim;
    let per_node = node_dim * width;
    let total_exp = per_node * g.node_count();
    match checked_pow(q, total_exp) {
        Some(t) if t <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded {
                required: pow_string(q, total_exp),
                budget,
            })
        }
    }
    let choices = checked_pow(q, per_node).expect("bounded by budget");
    let candidates: Vec<FieldMatrix> = (0..choices)
        .map(|i| {
            let mut d = vec![0u64; per_node];
            digits(i, q, &mut d);
            // Most significant digit first gives lexicographic order on entries.
            d.reverse();
            let rows: Vec<Vec<u64>> = d.chunks(width.max(1)).map(<[u64]>::to_vec).collect();
            if node_dim == 0 {
                FieldMatrix::zeros(0, width)
            } else {
                FieldMatrix::from_rows(field, &rows, width)
            }
        })
        .collect();

    // Edges grouped by their later endpoint, checked once both ends are assigned.
    let mut closing: Vec<Vec<EdgeId>> = vec![Vec::new(); g.node_count()];
    for e in g.edge_ids() {
        closing[g.edge(e).b.0].push(e);
    }

    let probe_meta = CodeMeta {
        kind: CodeKind::Search,
        seed: 0,
        retries: 0,
    };
    let mut chosen = vec![0usize; g.node_count()];
    let mut assigned: Vec<FieldMatrix> = vec![FieldMatrix::zeros(node_dim, width); g.node_count()];
    let n = g.node_count();
    let mut depth = 0usize;
    // Iterative backtracking; `chosen[depth]` is the next candidate to try.
    loop {
        if chosen[depth] as u64 == choices {
            if depth == 0 {
                return Ok(None);
            }
            chosen[depth] = 0;
            depth -= 1;
            chosen[depth] += 1;
            continue;
        }
        assigned[depth] = candidates[chosen[depth]].clone();
        let ok = closing[depth]
            .iter()
            .all(|&e| edge_admissible(field, g, &assigned, e, width));
        if !ok {
            chosen[depth] += 1;
            continue;
        }
        if depth + 1 == n {
            let code = LinearSecureCode::assemble(g, field, zdim, assigned, probe_meta)?;
            return Ok(Some(code));
        }
        depth += 1;
    }
}

/// Correctness (if qualified) and security of one edge from raw node matrices.
fn edge_admissible(field: PrimeField, g: &StorageGraph, nodes: &[FieldMatrix], e: EdgeId, width: usize) -> bool {
    let edge = g.edge(e);
    let stacked = nodes[edge.a.0].vstack(&nodes[edge.b.0]);
    let desired: Vec<usize> = edge.label.iter().map(|k| k - 1).collect();
    if !desired.is_empty() {
        let mut sel = FieldMatrix::zeros(desired.len(), width);
        for (i, &c) in desired.iter().enumerate() {
            sel.set(i, c, 1);
        }
        if rank(field, &stacked.vstack(&sel)) != rank(field, &stacked) {
            return false;
        }
    }
    let sources: Vec<usize> = (0..g.sources()).collect();
    cond_entropy_linear(field, &stacked, &desired) == cond_entropy_linear(field, &stacked, &sources)
}
