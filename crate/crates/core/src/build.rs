//! Code constructions for the extremal regimes.
//!
//! * [`build_m1`]: explicit scalar construction for `M = 1`. A non-degenerate node in
//!   component `u` of source `k` gets coefficient `u` on `W_k`, and every such node
//!   adds the shared key `Z` once per source, giving coefficient `K` on `Z`.
//! * [`build_general`]: the same superposition with random coding vectors in
//!   `F_q^M` per (source, component) and an `M`-symbol shared key. A draw is kept
//!   when every qualified edge's `M × M` difference matrix is invertible.
//! * [`build_keyless`]: each node stores random combinations of its common sources only.
//!
//! In keyed constructions a degenerate node stores its common sources in the clear
//! when its edges are qualified, or zeros when they are not.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{ensure_matches, ComponentAnalysis};
use crate::classify::{classify, Regime};
use crate::code::{CodeKind, CodeMeta, LinearSecureCode};
use crate::error::{Error, Result};
use crate::field::{next_prime_at_least, rank, sample_matrix, FieldMatrix, PrimeField};
use crate::graph::{NodeId, StorageGraph};

pub const DEFAULT_MAX_RETRIES: u32 = 64;
pub const DEFAULT_MAX_ESCALATIONS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    pub seed: u64,
    pub q_override: Option<u64>,
    /// Draws per field size before escalating.
    pub max_retries: u32,
    /// Times the field may grow to `next_prime_at_least(2q)`.
    pub max_escalations: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            seed: 0,
            q_override: None,
            max_retries: DEFAULT_MAX_RETRIES,
            max_escalations: DEFAULT_MAX_ESCALATIONS,
        }
    }
}

impl BuildOptions {
    pub fn with_seed(seed: u64) -> Self {
        BuildOptions {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuildMode {
    /// Route by classifier regime.
    Auto,
    M1,
    General,
    Keyless,
}

impl std::str::FromStr for BuildMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(BuildMode::Auto),
            "m1" => Ok(BuildMode::M1),
            "general" => Ok(BuildMode::General),
            "keyless" => Ok(BuildMode::Keyless),
            other => Err(format!("unknown build mode `{other}`")),
        }
    }
}

pub fn build(
    g: &StorageGraph,
    a: &ComponentAnalysis,
    mode: BuildMode,
    opts: &BuildOptions,
) -> Result<LinearSecureCode> {
    match mode {
        BuildMode::M1 => build_m1(g, a, opts.q_override),
        BuildMode::General => build_general(g, a, opts),
        BuildMode::Keyless => build_keyless(g, a, opts),
        BuildMode::Auto => {
            let class = classify(g, a)?;
            match class.regime {
                Regime::Keyless => build_keyless(g, a, opts),
                Regime::ExtremalOneOverM if g.per_edge() == 1 => build_m1(g, a, opts.q_override),
                Regime::ExtremalOneOverM => build_general(g, a, opts),
                Regime::SubExtremal => Err(Error::Precondition(
                    "graph has an internal qualified edge; no extremal construction applies".into(),
                )),
                Regime::Uncharacterized => {
                    if a.has_obstruction() {
                        Err(Error::Precondition(
                            "uncharacterized graph with an internal qualified edge".into(),
                        ))
                    } else {
                        keyed_random(g, a, opts)
                    }
                }
            }
        }
    }
}

fn require_regime(g: &StorageGraph, a: &ComponentAnalysis, want: Regime) -> Result<()> {
    let got = classify(g, a)?.regime;
    if got != want {
        return Err(Error::Precondition(format!(
            "regime is {got}, construction needs {want}"
        )));
    }
    Ok(())
}

/// Resolves the working field: the override if valid, else the smallest prime `>= required`.
fn pick_field(required: u64, q_override: Option<u64>) -> Result<PrimeField> {
    match q_override {
        Some(q) => {
            let f = PrimeField::new(q)?;
            if q < required {
                return Err(Error::FieldTooSmall { q, required });
            }
            Ok(f)
        }
        None => PrimeField::new(next_prime_at_least(required)),
    }
}

/// Rows stored by a degenerate node in a keyed construction: its common sources
/// in the clear, or `dim` zero rows when it has none.
fn degenerate_rows(g: &StorageGraph, a: &ComponentAnalysis, n: NodeId, dim: usize, width: usize) -> FieldMatrix {
    let common = a.common(n);
    if common.is_empty() {
        return FieldMatrix::zeros(dim, width);
    }
    let mut m = FieldMatrix::zeros(common.len(), width);
    for (i, k) in common.iter().enumerate() {
        debug_assert!(k <= g.sources());
        m.set(i, k - 1, 1);
    }
    m
}

fn all_decodable(g: &StorageGraph, code: &LinearSecureCode) -> bool {
    g.edge_ids()
        .filter(|&e| g.edge(e).is_qualified())
        .all(|e| code.decoder(e).is_some())
}

/// Explicit construction for `M = 1`; deterministic, seed-independent.
pub fn build_m1(g: &StorageGraph, a: &ComponentAnalysis, q_override: Option<u64>) -> Result<LinearSecureCode> {
    ensure_matches(g, a)?;
    if g.per_edge() != 1 {
        return Err(Error::Precondition(format!(
            "m1 construction needs M = 1, graph has M = {}",
            g.per_edge()
        )));
    }
    require_regime(g, a, Regime::ExtremalOneOverM)?;

    let k_count = g.sources();
    let required = (a.max_reduced_components() as u64 + 1).max(k_count as u64 + 1);
    let field = pick_field(required, q_override)?;
    let width = k_count + 1;
    let key_coeff = field.reduce(k_count as u64);

    let nodes = g
        .node_ids()
        .map(|n| {
            if a.is_degenerate(n) {
                return degenerate_rows(g, a, n, 1, width);
            }
            let mut row = FieldMatrix::zeros(1, width);
            for s in &a.per_source {
                let u = s.reduced.id(n).expect("non-degenerate node has a component");
                row.set(0, s.source - 1, field.reduce(u as u64));
            }
            row.set(0, k_count, key_coeff);
            row
        })
        .collect();

    let meta = CodeMeta {
        kind: CodeKind::M1,
        seed: 0,
        retries: 0,
    };
    let code = LinearSecureCode::assemble(g, field, 1, nodes, meta)?;
    if !all_decodable(g, &code) {
        return Err(Error::Precondition("m1 construction left an edge undecodable".into()));
    }
    Ok(code)
}

/// Randomized construction achieving key rate `1/M` on extremal graphs.
pub fn build_general(g: &StorageGraph, a: &ComponentAnalysis, opts: &BuildOptions) -> Result<LinearSecureCode> {
    ensure_matches(g, a)?;
    require_regime(g, a, Regime::ExtremalOneOverM)?;
    keyed_random(g, a, opts)
}

/// Coding vectors `h_u^[k]`, one per (source, reduced component).
struct CodingVectors {
    /// `per_source[k-1]` is `M × U^[k]`; column `u-1` is `h_u^[k]`.
    per_source: Vec<FieldMatrix>,
}

impl CodingVectors {
    fn draw(field: PrimeField, m: usize, a: &ComponentAnalysis, rng: &mut ChaCha8Rng) -> Self {
        CodingVectors {
            per_source: a
                .per_source
                .iter()
                .map(|s| sample_matrix(field, m, s.reduced.count(), rng))
                .collect(),
        }
    }

    fn coeff(&self, k: usize, u: usize, row: usize) -> u64 {
        self.per_source[k - 1].get(row, u - 1)
    }
}

/// The `M × M` matrix whose columns are `h_{u_i}^[k] - h_{u_j}^[k]`, `k ∈ f(edge)` ascending.
fn difference_matrix(
    field: PrimeField,
    g: &StorageGraph,
    a: &ComponentAnalysis,
    h: &CodingVectors,
    e: crate::graph::EdgeId,
) -> FieldMatrix {
    let m = g.per_edge();
    let edge = g.edge(e);
    let mut out = FieldMatrix::zeros(m, edge.label.len());
    for (col, k) in edge.label.iter().enumerate() {
        let comps = &a.source(k).reduced;
        let ui = comps.id(edge.a).expect("endpoint is non-degenerate");
        let uj = comps.id(edge.b).expect("endpoint is non-degenerate");
        for r in 0..m {
            out.set(r, col, field.sub(h.coeff(k, ui, r), h.coeff(k, uj, r)));
        }
    }
    out
}

fn keyed_random(g: &StorageGraph, a: &ComponentAnalysis, opts: &BuildOptions) -> Result<LinearSecureCode> {
    let m = g.per_edge();
    let k_count = g.sources();
    let required = ((m * g.edge_count()) as u64 + 1)
        .max(k_count as u64 + 1)
        .max(a.max_reduced_components() as u64 + 1);
    let mut field = pick_field(required, opts.q_override)?;
    let width = k_count + m;
    let checked_edges: Vec<_> = a
        .nondegenerate_edges(g)
        .into_iter()
        .filter(|&e| g.edge(e).is_qualified())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rejected = 0u32;
    for escalation in 0..=opts.max_escalations {
        if escalation > 0 {
            field = PrimeField::new(next_prime_at_least(2 * field.modulus()))?;
        }
        for _ in 0..opts.max_retries {
            let h = CodingVectors::draw(field, m, a, &mut rng);
            let accepted = checked_edges
                .iter()
                .all(|&e| rank(field, &difference_matrix(field, g, a, &h, e)) == m);
            if !accepted {
                rejected += 1;
                continue;
            }
            let key_coeff = field.reduce(k_count as u64);
            let nodes = g
                .node_ids()
                .map(|n| {
                    if a.is_degenerate(n) {
                        return degenerate_rows(g, a, n, m, width);
                    }
                    let mut rows = FieldMatrix::zeros(m, width);
                    for s in &a.per_source {
                        let u = s.reduced.id(n).expect("non-degenerate node has a component");
                        for r in 0..m {
                            rows.set(r, s.source - 1, h.coeff(s.source, u, r));
                        }
                    }
                    for r in 0..m {
                        rows.set(r, k_count + r, key_coeff);
                    }
                    rows
                })
                .collect();
            let meta = CodeMeta {
                kind: CodeKind::General,
                seed: opts.seed,
                retries: rejected,
            };
            let code = LinearSecureCode::assemble(g, field, m, nodes, meta)?;
            if all_decodable(g, &code) {
                return Ok(code);
            }
            rejected += 1;
        }
    }
    Err(Error::RetriesExhausted {
        seed: opts.seed,
        q: field.modulus(),
        attempts: rejected,
    })
}

/// Key-free construction: node `n` stores `H_n · W_{C(n)}` with `H_n` random square.
pub fn build_keyless(g: &StorageGraph, a: &ComponentAnalysis, opts: &BuildOptions) -> Result<LinearSecureCode> {
    ensure_matches(g, a)?;
    require_regime(g, a, Regime::Keyless)?;
    let m = g.per_edge();
    let k_count = g.sources();
    let required = (m * g.edge_count()) as u64 + 1;
    let mut field = pick_field(required, opts.q_override)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rejected = 0u32;
    for escalation in 0..=opts.max_escalations {
        if escalation > 0 {
            field = PrimeField::new(next_prime_at_least(2 * field.modulus()))?;
        }
        for _ in 0..opts.max_retries {
            let nodes: Vec<FieldMatrix> = g
                .node_ids()
                .map(|n| {
                    let common = a.common(n);
                    let local = sample_matrix(field, common.len(), common.len(), &mut rng);
                    let mut rows = FieldMatrix::zeros(common.len(), k_count);
                    for (j, k) in common.iter().enumerate() {
                        for r in 0..common.len() {
                            rows.set(r, k - 1, local.get(r, j));
                        }
                    }
                    rows
                })
                .collect();
            let accepted = g.edge_ids().filter(|&e| g.edge(e).is_qualified()).all(|e| {
                let edge = g.edge(e);
                let cols: Vec<usize> = edge.label.iter().map(|k| k - 1).collect();
                let stacked = nodes[edge.a.0].vstack(&nodes[edge.b.0]);
                rank(field, &stacked.select_columns(&cols)) == m
            });
            if !accepted {
                rejected += 1;
                continue;
            }
            let meta = CodeMeta {
                kind: CodeKind::Keyless,
                seed: opts.seed,
                retries: rejected,
            };
            let code = LinearSecureCode::assemble(g, field, 0, nodes, meta)?;
            if all_decodable(g, &code) {
                return Ok(code);
            }
            rejected += 1;
        }
    }
    Err(Error::RetriesExhausted {
        seed: opts.seed,
        q: field.modulus(),
        attempts: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::code::KeyRate;
    use num_rational::Ratio;

    const CYCLE4: &str = "K 2\nM 1\nedge V1 V2 1\nedge V2 V3 2\nedge V3 V4 1\nedge V4 V1 2";

    fn setup(text: &str) -> (StorageGraph, ComponentAnalysis) {
        let g = StorageGraph::parse(text).unwrap();
        let a = analyze(&g);
        (g, a)
    }

    #[test]
    fn m1_on_alternating_cycle() {
        let (g, a) = setup(CYCLE4);
        let code = build_m1(&g, &a, None).unwrap();
        // max U = 2 and K = 2 give the bound 3.
        assert_eq!(code.field().modulus(), 3);
        assert_eq!(code.zdim(), 1);
        assert_eq!(code.rate(), KeyRate::Finite(Ratio::from_integer(1)));

        let code = build_m1(&g, &a, Some(5)).unwrap();
        assert_eq!(code.node_matrix(g.node("V1").unwrap()).row(0), [1, 1, 2]);
        assert_eq!(code.node_matrix(g.node("V2").unwrap()).row(0), [2, 1, 2]);
        // V2 - V1 = W1 on the {V1,V2} edge.
        let e = g.resolve("V1", "V2").unwrap();
        let v = code.encode(&[3, 1], &[4]).unwrap();
        assert_eq!(code.decode(&g, e, &v[0], &v[1]).unwrap(), vec![3]);
    }

    #[test]
    fn m1_preconditions() {
        let (g, a) = setup("K 1\nM 1\nedge A B 1");
        assert!(matches!(build_m1(&g, &a, None), Err(Error::Precondition(_))));
        let (g, a) = setup(CYCLE4);
        assert_eq!(build_m1(&g, &a, Some(4)), Err(Error::NotPrime(4)));
        assert_eq!(
            build_m1(&g, &a, Some(2)),
            Err(Error::FieldTooSmall { q: 2, required: 3 })
        );
        let (g, a) = setup("K 3\nM 2\nedge A B 1,2\nedge B C -\nedge C D 1,2\nedge D A -");
        assert!(matches!(build_m1(&g, &a, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn m1_is_seed_independent() {
        let (g, a) = setup(CYCLE4);
        let x = build(&g, &a, BuildMode::Auto, &BuildOptions::with_seed(1)).unwrap();
        let y = build(&g, &a, BuildMode::Auto, &BuildOptions::with_seed(99)).unwrap();
        assert_eq!(x.emit(), y.emit());
    }

    #[test]
    fn general_on_small_extremal_graph() {
        let (g, a) = setup("K 3\nM 2\nedge A B 1,2\nedge B C -\nedge C D 1,2\nedge D A -\nedge A E 2,3\nedge E F -");
        let code = build_general(&g, &a, &BuildOptions::with_seed(3)).unwrap();
        assert_eq!(code.zdim(), 2);
        assert_eq!(code.rate().to_string(), "1/2");
        assert!(code.field().modulus() > (2 * g.edge_count()) as u64);
        let again = build_general(&g, &a, &BuildOptions::with_seed(3)).unwrap();
        assert_eq!(code, again);
    }

    #[test]
    fn general_rejects_keyless_graph() {
        let (g, a) = setup("K 1\nM 1\nedge A B 1");
        assert!(matches!(
            build_general(&g, &a, &BuildOptions::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn keyless_single_edge() {
        let (g, a) = setup("K 1\nM 1\nedge A B 1");
        let code = build_keyless(&g, &a, &BuildOptions::default()).unwrap();
        assert_eq!(code.zdim(), 0);
        assert_eq!(code.rate(), KeyRate::Unbounded);
        let c = code.node_matrix(NodeId(0)).get(0, 0);
        assert_ne!(c, 0);
        let v = code.encode(&[1], &[]).unwrap();
        let e = g.resolve("A", "B").unwrap();
        assert_eq!(code.decode(&g, e, &v[0], &v[1]).unwrap(), vec![1]);
    }

    #[test]
    fn keyless_empty_common_nodes_store_nothing() {
        let (g, a) = setup("K 2\nM 1\nedge A B 1\nedge C D -\nedge D E -");
        let code = build_keyless(&g, &a, &BuildOptions::default()).unwrap();
        for name in ["C", "D", "E"] {
            assert_eq!(code.node_matrix(g.node(name).unwrap()).rows(), 0);
        }
    }

    #[test]
    fn auto_routing() {
        let (g, a) = setup("K 2\nM 1\nedge V1 V3 1\nedge V1 V2 2\nedge V2 V4 -\nedge V3 V4 2");
        assert!(matches!(
            build(&g, &a, BuildMode::Auto, &BuildOptions::default()),
            Err(Error::Precondition(_))
        ));
        let (g, a) = setup("K 1\nM 1\nedge A B 1");
        assert_eq!(
            build(&g, &a, BuildMode::Auto, &BuildOptions::default())
                .unwrap()
                .meta
                .kind,
            CodeKind::Keyless
        );
        // Uncharacterized but obstruction-free: best-effort keyed build.
        let (g, a) = setup("K 3\nM 2\nedge V A 1,2\nedge V B 1,3\nedge A B 2,3\nedge A C -\nedge B C -");
        assert_eq!(classify(&g, &a).unwrap().regime, Regime::Uncharacterized);
        let code = build(&g, &a, BuildMode::Auto, &BuildOptions::default()).unwrap();
        assert_eq!(code.zdim(), 2);
    }

    #[test]
    fn retries_exhausted_is_reported() {
        // A single draw over F_5 collides with probability 9/25.
        let (g, a) = setup(CYCLE4);
        let opts = |seed| BuildOptions {
            seed,
            q_override: Some(5),
            max_retries: 1,
            max_escalations: 0,
        };
        let failures = (0..200)
            .filter(|&s| matches!(build_general(&g, &a, &opts(s)), Err(Error::RetriesExhausted { .. })))
            .count();
        assert!(failures > 0);
    }
}
