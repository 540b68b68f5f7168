mod render;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use secure_storage::verify::{exhaustive_converse_search, DEFAULT_BUDGET};
use secure_storage::{
    analyze, build, classify, corpus, verify, BuildMode, BuildOptions, LinearSecureCode, StorageGraph, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "secstore", version, about = "Secure storage codes over graphs")]
struct Cli {
    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Cap on enumerated tuples or search candidates.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Components, common sources and degenerate nodes.
    Analyze { graph: PathBuf },
    /// Capacity regime with witnesses.
    Classify { graph: PathBuf },
    /// Build a linear code and print or save it.
    Build {
        graph: PathBuf,
        #[arg(long, default_value = "auto")]
        mode: BuildMode,
        /// Field size override (must be prime).
        #[arg(long)]
        q: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a code file against a graph.
    Verify {
        code: PathBuf,
        graph: PathBuf,
        /// Also enumerate every input tuple per edge.
        #[arg(long)]
        oracle: bool,
        /// Exact rank audits on keyed codes.
        #[arg(long)]
        audit: bool,
    },
    /// Exhaustive search over scalar linear codes of a fixed shape.
    SearchConverse {
        graph: PathBuf,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        node_dim: usize,
        #[arg(long)]
        zdim: usize,
    },
    /// Run every bundled instance end to end.
    Demo,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    msg: String,
}

impl From<secure_storage::Error> for Failure {
    fn from(e: secure_storage::Error) -> Self {
        Failure {
            code: e.exit_code() as u8,
            msg: e.to_string(),
        }
    }
}

impl From<secure_storage::GraphError> for Failure {
    fn from(e: secure_storage::GraphError) -> Self {
        secure_storage::Error::from(e).into()
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        msg: format!("cannot read {}: {e}", path.display()),
    })
}

fn load_graph(path: &Path) -> Result<StorageGraph, Failure> {
    StorageGraph::parse(&read(path)?).map_err(|e| Failure {
        code: secure_storage::Error::from(e.clone()).exit_code() as u8,
        msg: format!("{}: {e}", path.display()),
    })
}

/// Output text and exit status of a successful run.
type Outcome = (String, u8);

fn run(cli: Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Analyze { graph } => {
            let g = load_graph(&graph)?;
            Ok((render::analysis(&g, &analyze(&g)), 0))
        }
        Command::Classify { graph } => {
            let g = load_graph(&graph)?;
            let c = classify(&g, &analyze(&g))?;
            let status = if c.regime.is_positive() { 0 } else { 1 };
            Ok((render::classification(&g, &c), status))
        }
        Command::Build { graph, mode, q, out } => {
            let g = load_graph(&graph)?;
            let opts = BuildOptions {
                seed: cli.seed,
                q_override: q,
                ..BuildOptions::default()
            };
            let code = build(&g, &analyze(&g), mode, &opts)?;
            match out {
                None => Ok((code.emit(), 0)),
                Some(path) => {
                    std::fs::write(&path, code.emit()).map_err(|e| Failure {
                        code: 2,
                        msg: format!("cannot write {}: {e}", path.display()),
                    })?;
                    let summary = format!(
                        "wrote\t{}\tkind\t{}\tq\t{}\trate\t{}\n",
                        path.display(),
                        code.meta.kind.as_str(),
                        code.field().modulus(),
                        code.rate()
                    );
                    Ok((summary, 0))
                }
            }
        }
        Command::Verify {
            code,
            graph,
            oracle,
            audit,
        } => {
            let g = load_graph(&graph)?;
            let c = LinearSecureCode::parse(&read(&code)?, &g)?;
            let opts = VerifyOptions {
                oracle,
                audit,
                budget: cli.budget,
            };
            let report = verify(&c, &g, &opts)?;
            let status = if report.is_valid() { 0 } else { 1 };
            Ok((render::verification(&g, c.field().modulus(), &report), status))
        }
        Command::SearchConverse {
            graph,
            q,
            node_dim,
            zdim,
        } => {
            let g = load_graph(&graph)?;
            match exhaustive_converse_search(&g, q, node_dim, zdim, cli.budget)? {
                Some(code) => Ok((code.emit(), 0)),
                None => Ok(("NONE\n".into(), 1)),
            }
        }
        Command::Demo => demo(&cli),
    }
}

fn demo(cli: &Cli) -> Result<Outcome, Failure> {
    let mut out = String::new();
    let mut status = 0;
    for inst in corpus::INSTANCES {
        let g = inst.graph();
        let a = analyze(&g);
        let c = classify(&g, &a)?;
        write!(
            out,
            "instance\t{}\tregime\t{}\tcapacity\t{}",
            inst.name, c.regime, c.capacity
        )
        .unwrap();
        match build(&g, &a, BuildMode::Auto, &BuildOptions::with_seed(cli.seed)) {
            Ok(code) => {
                let opts = VerifyOptions {
                    oracle: true,
                    audit: true,
                    budget: cli.budget,
                };
                let report = verify(&code, &g, &opts)?;
                let verdict = if report.is_valid() { "VALID" } else { "INVALID" };
                if !report.is_valid() {
                    status = 1;
                }
                writeln!(
                    out,
                    "\tbuild\t{}\tq\t{}\trate\t{}\tverify\t{verdict}",
                    code.meta.kind.as_str(),
                    code.field().modulus(),
                    code.rate()
                )
                .unwrap();
            }
            Err(e) => writeln!(out, "\tbuild\tnone\t{e}").unwrap(),
        }
    }
    Ok((out, status))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok((text, status)) => {
            print!("{text}");
            ExitCode::from(status)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
