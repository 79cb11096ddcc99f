//! Command-line front end over Newick files.
//!
//! One subcommand per invocation; results go to the output stream, all
//! diagnostics to the error stream. Exit code 0 reports success, 1 means a
//! decision subcommand found no solution, 2 flags bad input or usage.
//! Tree files carry one Newick string per line, with blank lines and `#`
//! comments skipped; triplet files use one `a,b|c` entry per line.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::approx::{approx_consensus_with_threads, SolveReport};
use crate::distance::{d_lr, mast, min_label_disagreement};
use crate::error::Error;
use crate::exact_d::{disagreement_kernel, solve_d};
use crate::exact_q::{min_q, solve_q_with_stats};
use crate::generate::{expected_distance_experiment, minrti_reduction, numbered_labels, random_tree};
use crate::newick::{parse_newick, to_newick};
use crate::oracle::brute_consensus;
use crate::tree::{Label, Tree};
use crate::triplets::{build_supertree, Triplet};

#[derive(Parser)]
#[command(
    name = "lrc",
    about = "Distances, consensus trees, and instance generators for conflicting phylogenies",
    version
)]
struct Cli {
    /// Worker threads for solvers that can parallelize.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(usize))]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Pick the best input tree; at most twice the optimal total.
    Approx,
    /// Enumerate every tree on the label set.
    Brute,
    /// Iterative deepening on the total removal budget.
    FptQ,
}

#[derive(Subcommand)]
enum Command {
    /// Leaf-removal distance between two trees.
    Distance { a: PathBuf, b: PathBuf },
    /// Largest label set on which two trees agree.
    Mast { a: PathBuf, b: PathBuf },
    /// A tree minimizing the total distance to all inputs.
    Consensus {
        #[arg(long, value_enum)]
        method: Method,
        trees: PathBuf,
        /// Largest total budget tried by the fpt-q method; defaults to
        /// enough for any instance.
        #[arg(long)]
        qmax: Option<u32>,
    },
    /// A tree within distance d of every input, if any.
    SolveD {
        #[arg(long)]
        d: u32,
        trees: PathBuf,
    },
    /// Labels that every small repair between two trees draws from.
    Kernel {
        #[arg(long)]
        k: u32,
        a: PathBuf,
        b: PathBuf,
    },
    /// Instance generators.
    #[command(subcommand)]
    Gen(Gen),
    /// Statistical experiments.
    #[command(subcommand)]
    Experiment(Experiment),
    /// Whether the input trees share a common supertree.
    CheckCompat { trees: PathBuf },
}

#[derive(Subcommand)]
enum Gen {
    /// Uniformly random trees, one Newick line each.
    Random {
        /// Leaves per tree.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Number of trees.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        count: u32,
        /// Generator seed; falls back to LRC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Consensus instances encoding triplet inconsistency.
    Reduction {
        /// File of a,b|c lines.
        #[arg(long)]
        triplets: PathBuf,
        /// Fresh labels per input triplet.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        gadget: u32,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Mean distance between random tree pairs.
    ExpectedDistance {
        /// Leaves per tree.
        #[arg(long, value_parser = clap::value_parser!(u32).range(4..))]
        n: u32,
        /// Number of pairs.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        trials: u32,
        /// Generator seed; falls back to LRC_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parses and runs one invocation, streaming results to `out` and
/// diagnostics to `err`, and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(parse_err) => {
            return match parse_err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{parse_err}");
                    0
                }
                _ => {
                    let _ = write!(err, "{parse_err}");
                    2
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            2
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    match cli.command {
        Command::Distance { a, b } => {
            let (ta, tb) = (load_one_tree(&a)?, load_one_tree(&b)?);
            let removed = min_label_disagreement(&ta, &tb).map_err(|e| e.to_string())?;
            let doc = json!({
                "d_lr": removed.len(),
                "removed": labels_json(removed.iter()),
            });
            emit(out, format_args!("{doc}"));
            Ok(0)
        }
        Command::Mast { a, b } => {
            let (ta, tb) = (load_one_tree(&a)?, load_one_tree(&b)?);
            let agreement = mast(&ta, &tb).map_err(|e| e.to_string())?;
            let doc = json!({ "agreement": labels_json(agreement.iter()) });
            emit(out, format_args!("{doc}"));
            Ok(0)
        }
        Command::Consensus {
            method,
            trees,
            qmax,
        } => {
            let inputs = load_trees(&trees)?;
            let report = match method {
                Method::Approx => {
                    approx_consensus_with_threads(&inputs, cli.threads).map_err(|e| e.to_string())?
                }
                Method::Brute => brute_report(&inputs)?,
                Method::FptQ => match fpt_q_report(&inputs, qmax)? {
                    Some(report) => report,
                    None => {
                        let budget = qmax.expect("only a user budget can run out");
                        let _ = writeln!(err, "no consensus within total budget {budget}");
                        return Ok(1);
                    }
                },
            };
            emit(out, format_args!("{}", report.to_json()));
            emit(out, format_args!("{}", to_newick(&report.consensus)));
            Ok(0)
        }
        Command::SolveD { d, trees } => {
            let inputs = load_trees(&trees)?;
            match solve_d(&inputs, d).map_err(|e| e.to_string())? {
                Some(tree) => {
                    emit(out, format_args!("{}", to_newick(&tree)));
                    Ok(0)
                }
                None => {
                    let _ = writeln!(err, "no tree within distance {d} of every input");
                    Ok(1)
                }
            }
        }
        Command::Kernel { k, a, b } => {
            let (ta, tb) = (load_one_tree(&a)?, load_one_tree(&b)?);
            let kernel = disagreement_kernel(k, &ta, &tb).map_err(|e| e.to_string())?;
            let doc = json!({ "kernel": labels_json(kernel.iter()) });
            emit(out, format_args!("{doc}"));
            Ok(0)
        }
        Command::Gen(Gen::Random { n, count, seed }) => {
            let seed = resolve_seed(seed)?;
            let labels = numbered_labels("t", n);
            for i in 0..count {
                let tree = random_tree(&labels, seed.wrapping_add(i as u64));
                emit(out, format_args!("{}", to_newick(&tree)));
            }
            Ok(0)
        }
        Command::Gen(Gen::Reduction { triplets, gadget }) => {
            let instance = load_triplets(&triplets)?;
            let trees = minrti_reduction(&instance, gadget).map_err(|e| e.to_string())?;
            for tree in &trees {
                emit(out, format_args!("{}", to_newick(tree)));
            }
            Ok(0)
        }
        Command::Experiment(Experiment::ExpectedDistance { n, trials, seed }) => {
            let seed = resolve_seed(seed)?;
            let stats = expected_distance_experiment(n, trials, seed);
            emit(out, format_args!("{}", stats.to_json()));
            Ok(0)
        }
        Command::CheckCompat { trees } => {
            let inputs = load_trees(&trees)?;
            let doc = match build_supertree(&inputs) {
                Some(tree) => json!({ "compatible": true, "supertree": to_newick(&tree) }),
                None => json!({ "compatible": false, "supertree": null }),
            };
            emit(out, format_args!("{doc}"));
            Ok(0)
        }
    }
}

fn brute_report(inputs: &[Tree]) -> Result<SolveReport, String> {
    let (consensus, total) = brute_consensus(inputs, false).map_err(|e| match e {
        Error::EnumerationGuard { n, limit } => {
            format!("brute enumeration handles at most {limit} labels, got {n}")
        }
        other => other.to_string(),
    })?;
    let per_tree_distance = inputs
        .iter()
        .map(|t| d_lr(&consensus, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut stats = std::collections::BTreeMap::new();
    stats.insert(
        "candidates_enumerated".to_string(),
        crate::oracle::num_trees(consensus.leaf_count()),
    );
    Ok(SolveReport {
        consensus,
        per_tree_distance,
        total,
        stats,
    })
}

fn fpt_q_report(inputs: &[Tree], qmax: Option<u32>) -> Result<Option<SolveReport>, String> {
    let fallback = || {
        let n = inputs.first().map_or(0, |t| t.leaf_count()) as u32;
        inputs.len() as u32 * n.saturating_sub(1)
    };
    let budget = qmax.unwrap_or_else(fallback);
    let found = min_q(inputs, budget).map_err(|e| e.to_string())?;
    let Some((q, _, consensus)) = found else {
        return Ok(None);
    };
    // A second run at the known optimum collects the search counters.
    let (_, counters) = solve_q_with_stats(inputs, q).map_err(|e| e.to_string())?;
    let per_tree_distance = inputs
        .iter()
        .map(|t| d_lr(&consensus, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut stats = std::collections::BTreeMap::new();
    stats.insert("q".to_string(), q as u64);
    stats.insert("nodes_expanded".to_string(), counters.nodes_expanded);
    stats.insert("max_children".to_string(), counters.max_children);
    stats.insert("backstop_locks".to_string(), counters.backstop_locks);
    stats.insert("verify_failures".to_string(), counters.verify_failures);
    Ok(Some(SolveReport {
        consensus,
        per_tree_distance,
        total: q,
        stats,
    }))
}

fn labels_json<'a>(labels: impl Iterator<Item = &'a Label>) -> Vec<String> {
    labels.map(|l| l.to_string()).collect()
}

fn emit(out: &mut dyn Write, line: std::fmt::Arguments<'_>) {
    // A broken pipe on the result stream is the reader's business, not a
    // usage error worth a diagnostic.
    let _ = writeln!(out, "{line}");
}

fn resolve_seed(explicit: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = explicit {
        return Ok(seed);
    }
    match std::env::var("LRC_SEED") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|_| format!("LRC_SEED must be a 64-bit unsigned integer, got '{text}'")),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err("LRC_SEED must be a 64-bit unsigned integer".to_string())
        }
    }
}

fn load_trees(path: &Path) -> Result<Vec<Tree>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut trees = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tree =
            parse_newick(line).map_err(|e| format!("{}:{}: {e}", path.display(), idx + 1))?;
        trees.push(tree);
    }
    if trees.is_empty() {
        return Err(format!("{}: {}", path.display(), Error::EmptyInput));
    }
    Ok(trees)
}

fn load_one_tree(path: &Path) -> Result<Tree, String> {
    let trees = load_trees(path)?;
    if trees.len() != 1 {
        return Err(format!(
            "{}: expected exactly one tree, found {}",
            path.display(),
            trees.len()
        ));
    }
    Ok(trees.into_iter().next().expect("length checked"))
}

fn load_triplets(path: &Path) -> Result<Vec<Triplet>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut triplets = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let triplet =
            parse_triplet(line).map_err(|e| format!("{}:{}: {e}", path.display(), idx + 1))?;
        triplets.push(triplet);
    }
    if triplets.is_empty() {
        return Err(format!("{}: {}", path.display(), Error::EmptyInput));
    }
    Ok(triplets)
}

fn parse_triplet(line: &str) -> Result<Triplet, Error> {
    let split = |text: &str, sep: char| -> Result<(String, String), Error> {
        match text.split_once(sep) {
            Some((left, right)) => Ok((left.trim().to_string(), right.trim().to_string())),
            None => Err(Error::InvalidOperation(format!(
                "expected a triplet shaped like a,b|c, got '{line}'"
            ))),
        }
    };
    let (pair, outgroup) = split(line, '|')?;
    let (a, b) = split(&pair, ',')?;
    Triplet::new(Label::new(a)?, Label::new(b)?, Label::new(outgroup)?)
}
