//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use secure_storage::build::{build, build_general, build_keyless, build_m1, BuildMode, BuildOptions};
use secure_storage::classify::Witness;
use secure_storage::code::{CodeKind, CodeMeta};
use secure_storage::field::{next_prime_at_least, PrimeField};
use secure_storage::verify::{
    audit_lemmas, check_correctness_linear, check_security_linear, entropy_oracle, exhaustive_converse_search, verify,
    Verdict, VerifyOptions, DEFAULT_BUDGET,
};
use secure_storage::{analyze, classify, corpus, Error, LinearSecureCode, Regime, StorageGraph};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Linear verdicts on every edge.
fn linear_ok(code: &LinearSecureCode, g: &StorageGraph) -> bool {
    g.edge_ids().all(|e| {
        (!g.edge(e).is_qualified() || check_correctness_linear(code, g, e).unwrap())
            && check_security_linear(code, g, e)
    })
}

/// Oracle and linear verdicts coincide on every edge. `None` if out of budget.
fn oracle_agrees(code: &LinearSecureCode, g: &StorageGraph, budget: u64) -> Option<bool> {
    let mut agree = true;
    for e in g.edge_ids() {
        let o = match entropy_oracle(code, g, e, budget) {
            Ok(o) => o,
            Err(Error::BudgetExceeded { .. }) => return None,
            Err(other) => panic!("{other}"),
        };
        let c = if g.edge(e).is_qualified() {
            Verdict::from_bool(check_correctness_linear(code, g, e).unwrap())
        } else {
            Verdict::NotApplicable
        };
        agree &= o.correctness == c && o.security == Verdict::from_bool(check_security_linear(code, g, e));
    }
    Some(agree)
}

fn sizes(graphs: &[StorageGraph]) -> String {
    let max = |f: fn(&StorageGraph) -> usize| graphs.iter().map(f).max().unwrap_or(0);
    let mean_n = graphs.iter().map(StorageGraph::node_count).sum::<usize>() as f64 / graphs.len() as f64;
    format!(
        "N<={} mean {mean_n:.1}, K<={}, |E|<={}",
        max(StorageGraph::node_count),
        max(StorageGraph::sources),
        max(StorageGraph::edge_count)
    )
}

/// Pipeline shared by the stated and corrected small-converse instances.
fn converse(g: &StorageGraph) -> (bool, String) {
    let c = classify(g, &analyze(g)).unwrap();
    let v13 = g.resolve("V1", "V3").unwrap();
    let witness_ok =
        c.regime == Regime::SubExtremal && c.witnesses == vec![Witness::InternalEdge { source: 1, edge: v13 }];
    let mut ok = witness_ok;
    let mut parts = vec![format!("classify={} witnesses={}", c.regime, c.witnesses.len())];
    for q in [2u64, 3] {
        let found = exhaustive_converse_search(g, q, 1, 1, DEFAULT_BUDGET).unwrap();
        ok &= found.is_none();
        parts.push(match found {
            None => format!("q={q}: no scalar linear code"),
            Some(code) => {
                let rows: Vec<String> = code.node_matrices().iter().map(|m| format!("{:?}", m.row(0))).collect();
                format!("q={q}: found {}", rows.join(" "))
            }
        });
    }
    (ok, parts.join("; "))
}

fn criterion_1() -> Outcome {
    let g = corpus::get("internal_edge").unwrap().graph();
    let (ok, detail) = converse(&g);
    outcome(ok, detail)
}

fn criterion_1b() -> Outcome {
    let g = corpus::get("internal_edge_corrected").unwrap().graph();
    let (ok, detail) = converse(&g);
    outcome(ok, detail)
}

fn criterion_2() -> Outcome {
    let mut graphs = vec![corpus::get("cycle4").unwrap().graph()];
    graphs.extend(common::extremal_corpus(120, &[1], 4, 12, 2_000));
    let mut oracle_checked = 0;
    for (i, g) in graphs.iter().enumerate() {
        let a = analyze(g);
        let code = build_m1(g, &a, None).unwrap();
        if build_m1(g, &a, None).unwrap().emit() != code.emit() {
            return outcome(false, format!("graph {i}: nondeterministic build"));
        }
        if code.rate().to_string() != "1" {
            return outcome(false, format!("graph {i}: rate {}", code.rate()));
        }
        let report = verify(&code, g, &VerifyOptions::default()).unwrap();
        if !report.is_valid() {
            return outcome(false, format!("graph {i}: linear check failed\n{}", g.emit()));
        }
        let q = code.field().modulus();
        if q.pow(g.sources() as u32 + 1) <= 1_000_000 {
            oracle_checked += 1;
            if oracle_agrees(&code, g, 1_000_000) != Some(true) {
                return outcome(false, format!("graph {i}: oracle disagrees"));
            }
        }
    }
    outcome(
        true,
        format!(
            "{} graphs ({}), {oracle_checked} oracle-checked",
            graphs.len(),
            sizes(&graphs)
        ),
    )
}

fn criterion_3() -> Outcome {
    let graphs = common::extremal_corpus(110, &[2, 3], 5, 10, 3_000);
    let mut retries = 0;
    for (i, g) in graphs.iter().enumerate() {
        let a = analyze(g);
        let m = g.per_edge();
        let code = match build_general(g, &a, &BuildOptions::with_seed(i as u64)) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("graph {i}: {e}")),
        };
        retries += code.meta.retries;
        if code.rate().to_string() != format!("1/{m}") {
            return outcome(false, format!("graph {i}: rate {}", code.rate()));
        }
        if !linear_ok(&code, g) {
            return outcome(false, format!("graph {i}: linear check failed"));
        }
        let audit = audit_lemmas(&code, g, &a).unwrap().expect("keyed code");
        if !audit.passed() {
            return outcome(false, format!("graph {i}: audit {:?}", audit.violations));
        }
    }
    outcome(
        true,
        format!("{} graphs ({}), {retries} rejected draws", graphs.len(), sizes(&graphs)),
    )
}

fn criterion_4() -> Outcome {
    let g = corpus::get("tetra_pair").unwrap().graph();
    let a = analyze(&g);
    let q = next_prime_at_least(2 * (g.per_edge() * g.edge_count()) as u64 + 1);
    let mut accepted = 0;
    for seed in 0..200u64 {
        let opts = BuildOptions {
            seed,
            q_override: Some(q),
            max_retries: 1,
            max_escalations: 0,
        };
        match build_general(&g, &a, &opts) {
            Ok(_) => accepted += 1,
            Err(Error::RetriesExhausted { .. }) => {}
            Err(other) => return outcome(false, other.to_string()),
        }
    }
    outcome(
        accepted >= 80,
        format!("q={q}: {accepted}/200 single draws accepted (need >= 80)"),
    )
}

fn criterion_5() -> Outcome {
    let mut graphs = vec![corpus::get("keyless_mixed").unwrap().graph()];
    graphs.extend(common::keyless_corpus(120, 3, 8, 5_000));
    let mut oracle_checked = 0;
    for (i, g) in graphs.iter().enumerate() {
        let a = analyze(g);
        if classify(g, &a).unwrap().regime != Regime::Keyless {
            return outcome(false, format!("graph {i}: not keyless"));
        }
        let code = build_keyless(g, &a, &BuildOptions::with_seed(i as u64)).unwrap();
        if code.zdim() != 0 || !linear_ok(&code, g) {
            return outcome(false, format!("graph {i}: bad keyless code"));
        }
        match oracle_agrees(&code, g, DEFAULT_BUDGET) {
            Some(true) => oracle_checked += 1,
            Some(false) => return outcome(false, format!("graph {i}: oracle disagrees")),
            None => {}
        }
    }
    let all = oracle_checked == graphs.len();
    outcome(
        all,
        format!("{} graphs, {oracle_checked} oracle-confirmed", graphs.len()),
    )
}

fn criterion_6() -> Outcome {
    let mut codes: Vec<(StorageGraph, LinearSecureCode)> = Vec::new();
    for g in common::extremal_corpus(140, &[1], 3, 7, 6_000) {
        let code = build_m1(&g, &analyze(&g), None).unwrap();
        codes.push((g, code));
    }
    for (i, g) in common::keyless_corpus(140, 3, 6, 7_000).into_iter().enumerate() {
        let code = build_keyless(&g, &analyze(&g), &BuildOptions::with_seed(i as u64)).unwrap();
        codes.push((g, code));
    }
    let mut r = common::rng(6);
    let mut compared = 0;
    let mut corrupted_failures = 0;
    let total = codes.len() * 2;
    for (g, code) in &codes {
        for corrupt in [false, true] {
            let stored: Vec<usize> = g
                .node_ids()
                .map(|n| n.0)
                .filter(|&n| code.node_matrices()[n].rows() > 0)
                .collect();
            if corrupt && stored.is_empty() {
                continue;
            }
            let candidate = if corrupt {
                let field = code.field();
                let mut nodes = code.node_matrices().to_vec();
                let n = stored[r.random_range(0..stored.len())];
                let row = r.random_range(0..nodes[n].rows());
                let col = r.random_range(0..nodes[n].cols());
                let bump = r.random_range(1..field.modulus());
                let v = field.add(nodes[n].get(row, col), bump);
                nodes[n].set(row, col, v);
                let meta = CodeMeta {
                    kind: CodeKind::Search,
                    seed: 0,
                    retries: 0,
                };
                LinearSecureCode::assemble(g, field, code.zdim(), nodes, meta).unwrap()
            } else {
                code.clone()
            };
            match oracle_agrees(&candidate, g, DEFAULT_BUDGET) {
                Some(true) => compared += 1,
                Some(false) => return outcome(false, "oracle and linear verdicts differ"),
                None => {}
            }
            if corrupt && !linear_ok(&candidate, g) {
                corrupted_failures += 1;
            }
        }
    }
    outcome(
        compared >= 500,
        format!("{compared}/{total} codes compared within budget, {corrupted_failures} mutants rejected"),
    )
}

fn criterion_7() -> Outcome {
    let mut graphs: Vec<StorageGraph> = corpus::INSTANCES.iter().map(|i| i.graph()).collect();
    graphs.extend(common::extremal_corpus(20, &[1, 2], 4, 8, 8_000));
    let mut builds = 0;
    for g in &graphs {
        let a = analyze(g);
        for mode in [BuildMode::Auto, BuildMode::M1, BuildMode::General, BuildMode::Keyless] {
            let first = build(g, &a, mode, &BuildOptions::with_seed(7));
            let second = build(g, &a, mode, &BuildOptions::with_seed(7));
            match (first, second) {
                (Ok(x), Ok(y)) => {
                    builds += 1;
                    if x.emit() != y.emit() {
                        return outcome(false, format!("{mode:?} differs between identical runs"));
                    }
                }
                (Err(x), Err(y)) if x.to_string() == y.to_string() => {}
                _ => return outcome(false, format!("{mode:?} outcome differs between identical runs")),
            }
        }
        if let Ok(x) = build(g, &a, BuildMode::M1, &BuildOptions::with_seed(1)) {
            let y = build(g, &a, BuildMode::M1, &BuildOptions::with_seed(99)).unwrap();
            if x.emit() != y.emit() {
                return outcome(false, "m1 build depends on seed");
            }
        }
    }
    outcome(true, format!("{builds} builds repeated byte-identically"))
}

/// Id, name, check, time limit.
type Criterion = (&'static str, &'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (
            "1",
            "converse on stated internal-edge instance",
            criterion_1,
            Duration::from_secs(10),
        ),
        (
            "1b",
            "converse on corrected internal-edge instance",
            criterion_1b,
            Duration::from_secs(10),
        ),
        (
            "2",
            "single-symbol extremal achievability",
            criterion_2,
            Duration::from_secs(60),
        ),
        (
            "3",
            "multi-symbol extremal achievability",
            criterion_3,
            Duration::from_secs(120),
        ),
        ("4", "single-draw acceptance rate", criterion_4, Duration::from_secs(30)),
        ("5", "keyless regime", criterion_5, Duration::from_secs(60)),
        (
            "6",
            "oracle and linear agreement",
            criterion_6,
            Duration::from_secs(120),
        ),
        ("7", "determinism", criterion_7, Duration::from_secs(60)),
    ];
    // Touch the field constructor so a broken modulus check fails loudly here too.
    PrimeField::new(2).unwrap();
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= limit;
        failed += !pass as usize;
        println!(
            "criterion {id} [{name}]: {} ({:.2}s, limit {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
