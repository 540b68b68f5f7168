#![allow(dead_code)]

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secure_storage::field::{sample_matrix, FieldMatrix, PrimeField};
use secure_storage::{analyze, classify, Regime, SourceSet, StorageGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_label(rng: &mut impl Rng, k: usize, m: usize) -> SourceSet {
    let mut all: Vec<usize> = (1..=k).collect();
    all.shuffle(rng);
    all[..m].iter().copied().collect()
}

fn graph_from(k: usize, m: usize, edges: &[(usize, usize, SourceSet)]) -> StorageGraph {
    let names: Vec<(String, String, SourceSet)> = edges
        .iter()
        .map(|&(a, b, l)| (format!("N{a}"), format!("N{b}"), l))
        .collect();
    StorageGraph::from_edges(k, m, names.iter().map(|(a, b, l)| (a.as_str(), b.as_str(), *l))).unwrap()
}

/// Any valid graph: random edges, each unqualified with probability 1/3.
pub fn arbitrary_graph(seed: u64, max_k: usize, max_n: usize) -> StorageGraph {
    let mut r = rng(seed);
    let k = r.random_range(1..=max_k);
    let m = r.random_range(1..=k);
    let n = r.random_range(2..=max_n);
    let mut edges = Vec::new();
    let mut used = std::collections::HashSet::new();
    // A spanning path first so every node is on some edge.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut pairs: Vec<(usize, usize)> = order.windows(2).map(|w| (w[0], w[1])).collect();
    for _ in 0..r.random_range(0..=n) {
        let a = r.random_range(0..n);
        let b = r.random_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    for (a, b) in pairs {
        if used.insert((a.min(b), a.max(b))) {
            let label = if r.random_range(0..3) == 0 {
                SourceSet::EMPTY
            } else {
                random_label(&mut r, k, m)
            };
            edges.push((a, b, label));
        }
    }
    graph_from(k, m, &edges)
}

/// Graphs in which each node carries a colour per source; unqualified edges
/// join equal colours and a qualified edge flips exactly the colours of its
/// label. Such a graph has no internal qualified edge for any source. Only
/// graphs the classifier places at capacity `1/M` are returned.
pub fn extremal_graph(seed: u64, k: usize, m: usize, max_n: usize) -> Option<StorageGraph> {
    let mut r = rng(seed);
    let target_edges = r.random_range(max_n..=2 * max_n);
    let mut colours: Vec<Vec<u8>> = vec![(0..k).map(|_| r.random_range(0..3)).collect()];
    let mut edges: Vec<(usize, usize, SourceSet)> = Vec::new();
    let mut used = std::collections::HashSet::new();
    for _ in 0..target_edges * 4 {
        if edges.len() >= target_edges {
            break;
        }
        let u = r.random_range(0..colours.len());
        let (label, want) = if r.random_range(0..4) == 0 {
            (SourceSet::EMPTY, colours[u].clone())
        } else {
            let label = random_label(&mut r, k, m);
            let mut c = colours[u].clone();
            for s in label.iter() {
                c[s - 1] = (c[s - 1] + r.random_range(1..3)) % 3;
            }
            (label, c)
        };
        let existing: Vec<usize> = (0..colours.len())
            .filter(|&v| v != u && colours[v] == want && !used.contains(&(u.min(v), u.max(v))))
            .collect();
        let v = match existing.choose(&mut r) {
            Some(&v) if colours.len() >= max_n || r.random_bool(0.6) => v,
            _ if colours.len() < max_n => {
                colours.push(want);
                colours.len() - 1
            }
            _ => continue,
        };
        used.insert((u.min(v), u.max(v)));
        edges.push((u, v, label));
    }
    if edges.is_empty() {
        return None;
    }
    let g = graph_from(k, m, &edges);
    let c = classify(&g, &analyze(&g)).unwrap();
    (c.regime == Regime::ExtremalOneOverM).then_some(g)
}

/// Draws seeds until `count` extremal graphs are found.
pub fn extremal_corpus(count: usize, m_choices: &[usize], max_k: usize, max_n: usize, salt: u64) -> Vec<StorageGraph> {
    let mut out = Vec::new();
    let mut seed = salt;
    while out.len() < count {
        let mut r = rng(seed);
        let m = *m_choices.choose(&mut r).unwrap();
        let k = r.random_range(m.max(2)..=max_k.max(m));
        if let Some(g) = extremal_graph(seed ^ 0x9e37_79b9, k, m, max_n) {
            out.push(g);
        }
        seed += 1;
        assert!(seed - salt < 200 * count as u64, "generator acceptance too low");
    }
    out
}

/// Graphs built from a planted common-source set per node; edges join nodes
/// whose sets union to size 0 or `M`. Only graphs the classifier calls
/// keyless are returned.
pub fn keyless_graph(seed: u64, k: usize, m: usize, max_n: usize) -> Option<StorageGraph> {
    let mut r = rng(seed);
    let n = r.random_range(2..=max_n);
    let planted: Vec<SourceSet> = (0..n)
        .map(|_| {
            let size = r.random_range(0..=m);
            random_label(&mut r, k, size)
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let u = planted[a].union(planted[b]);
            if (u.is_empty() || u.len() == m) && r.random_bool(0.5) {
                edges.push((a, b, u));
            }
        }
    }
    if edges.is_empty() {
        return None;
    }
    let g = graph_from(k, m, &edges);
    let c = classify(&g, &analyze(&g)).unwrap();
    (c.regime == Regime::Keyless).then_some(g)
}

pub fn keyless_corpus(count: usize, max_k: usize, max_n: usize, salt: u64) -> Vec<StorageGraph> {
    let mut out = Vec::new();
    let mut seed = salt;
    while out.len() < count {
        let mut r = rng(seed);
        let k = r.random_range(1..=max_k);
        let m = r.random_range(1..=k);
        if let Some(g) = keyless_graph(seed ^ 0x5bd1_e995, k, m, max_n) {
            out.push(g);
        }
        seed += 1;
        assert!(seed - salt < 200 * count as u64, "generator acceptance too low");
    }
    out
}

/// Random node matrices of the right shape for `g`.
pub fn random_nodes(seed: u64, g: &StorageGraph, field: PrimeField, zdim: usize) -> Vec<FieldMatrix> {
    let mut r = rng(seed);
    (0..g.node_count())
        .map(|_| sample_matrix(field, g.per_edge(), g.sources() + zdim, &mut r))
        .collect()
}
