// SPDX-License-Identifier: Apache-2.0

//! `fraudbench` command-line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fraudbench::attack::{roc_curve, run_attack_trials, AttackSpec, EdgeFamily, ServerMode};
use fraudbench::dp::BudgetLedger;
use fraudbench::graph::{write_graph, SbmParams};
use fraudbench::harness::{
    ledger_path, parse_detectors, run_experiment, true_accuracies, ExperimentConfig, GraphSource,
};
use fraudbench::metrics::Leaderboard;
use fraudbench::pda::{pda_release, pda_top1, Accuracy, PdaConfig};
use fraudbench::rng::derive_seed;
use fraudbench::synth::{synthesize, SynthConfig, SynthMethod};

#[derive(Parser)]
#[command(
    name = "fraudbench",
    version,
    about = "Private benchmarking of graph fraud detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an SBM graph (optionally with an injected fraud clique) to files.
    Generate(GenerateArgs),
    /// Exact accuracy of detectors, without privacy.
    Evaluate(EvaluateArgs),
    /// Release detector accuracies with Partition-Duplicate-Aggregate.
    Pda(PdaArgs),
    /// Generate a private synthetic graph.
    Synth(SynthArgs),
    /// Simulate the edge-membership attack and write its ROC curve.
    Attack(AttackArgs),
    /// Run a config-file experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SbmArgs {
    #[arg(long, default_value_t = 100)]
    n_fraud: usize,
    #[arg(long, default_value_t = 1000)]
    n_benign: usize,
    #[arg(long, default_value_t = 0.1)]
    p_fraud: f64,
    #[arg(long, default_value_t = 0.005)]
    p_benign: f64,
    #[arg(long, default_value_t = 0.0)]
    p_cross: f64,
}

impl SbmArgs {
    fn params(&self) -> SbmParams {
        SbmParams {
            n_fraud: self.n_fraud,
            n_benign: self.n_benign,
            p_fraud: self.p_fraud,
            p_benign: self.p_benign,
            p_cross: self.p_cross,
        }
    }
}

/// A graph read from files, or sampled from an SBM seeded by `--seed`.
#[derive(Args)]
struct GraphArgs {
    /// Edge list, one whitespace- or comma-separated pair per line.
    #[arg(long, requires = "labels")]
    edges: Option<PathBuf>,
    /// CSV of `vertex,label` with label 1 for fraud.
    #[arg(long, requires = "edges")]
    labels: Option<PathBuf>,
    /// CSV of `vertex,f1,...,fd`.
    #[arg(long, requires = "edges")]
    metadata: Option<PathBuf>,
    #[command(flatten)]
    sbm: SbmArgs,
}

impl GraphArgs {
    fn source(&self, seed: u64) -> GraphSource {
        match (&self.edges, &self.labels) {
            (Some(edges), Some(labels)) => GraphSource::Files {
                edges: edges.clone(),
                labels: labels.clone(),
                metadata: self.metadata.clone(),
            },
            _ => GraphSource::Sbm {
                params: self.sbm.params(),
                seed: derive_seed(seed, &[u64::MAX]),
            },
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    sbm: SbmArgs,
    /// Relabel this many benign vertices as a fraud clique.
    #[arg(long)]
    clique_size: Option<usize>,
    #[arg(long, default_value_t = 0.8)]
    clique_density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `edges.txt` and `labels.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `builtin` or a comma-separated list of detector names.
    #[arg(long, default_value = "builtin")]
    detectors: String,
    #[arg(long, default_value = "auc")]
    accuracy: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PdaArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "builtin")]
    detectors: String,
    #[arg(long, default_value = "auc")]
    accuracy: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    rho: f64,
    /// Total budget; split evenly across detectors unless `--top1`.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Release only the name of the best detector.
    #[arg(long)]
    top1: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "sbm")]
    method: SynthMethod,
    #[arg(long, default_value_t = 1.0)]
    d_multiplier: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = fraudbench::dp::DEFAULT_DELTA)]
    delta: f64,
    /// Skip the privacy noise.
    #[arg(long)]
    no_noise: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `edges.txt`, `labels.csv` and `stats.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    sbm: SbmArgs,
    /// Detector whose accuracy the attacker's submission reports when the
    /// target edge is present.
    #[arg(long, default_value = "degree")]
    accurate: String,
    #[arg(long, default_value_t = 0.7)]
    threshold: f64,
    /// `exact`, `pda` or `synth`.
    #[arg(long, default_value = "exact")]
    server: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0.3)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value = "sbm")]
    method: SynthMethod,
    #[arg(long, default_value_t = 100)]
    positives: usize,
    #[arg(long, default_value_t = 100)]
    negatives: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file.
    config: PathBuf,
    /// Overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_accuracy(s: &str) -> Result<Accuracy> {
    match s {
        "auc" => Ok(Accuracy::Auc),
        "f1" => Ok(Accuracy::F1),
        other => bail!("unknown accuracy `{other}`"),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_sidecar(out: Option<&Path>, ledger: &BudgetLedger) -> Result<()> {
    if let Some(p) = out {
        let file = File::create(ledger_path(p))?;
        serde_json::to_writer_pretty(file, ledger)?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let source = match args.clique_size {
        Some(size) => GraphSource::SbmClique {
            params: args.sbm.params(),
            size,
            density: args.clique_density,
            seed: args.seed,
        },
        None => GraphSource::Sbm {
            params: args.sbm.params(),
            seed: args.seed,
        },
    };
    let graph = source.load()?;
    std::fs::create_dir_all(&args.out)?;
    write_graph(
        &graph,
        &args.out.join("edges.txt"),
        &args.out.join("labels.csv"),
        None,
    )?;
    eprintln!(
        "wrote {} vertices ({} fraud), {} edges to {}",
        graph.len(),
        graph.n_fraud(),
        graph.edge_count(),
        args.out.display()
    );
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let graph = args.graph.source(args.common.seed).load()?;
    let detectors = parse_detectors(&args.detectors)?;
    let values = true_accuracies(&detectors, &graph, parse_accuracy(&args.accuracy)?)?;
    let board = Leaderboard::new(&values, false)?;
    let mut out = output(args.common.out.as_deref())?;
    writeln!(out, "rank,detector,{}", args.accuracy)?;
    for (i, (name, v)) in board.entries().iter().enumerate() {
        writeln!(out, "{},{name},{v}", i + 1)?;
    }
    Ok(())
}

fn pda(args: PdaArgs) -> Result<()> {
    let graph = args.graph.source(args.common.seed).load()?;
    let detectors = parse_detectors(&args.detectors)?;
    let accuracy = parse_accuracy(&args.accuracy)?;
    let mut ledger = BudgetLedger::new(args.epsilon)?;
    let out_path = args.common.out.as_deref();
    let mut out = output(out_path)?;
    if args.top1 {
        let config = PdaConfig::new(args.k, args.rho, args.epsilon);
        let (winner, _) = pda_top1(
            &detectors,
            &graph,
            &config,
            accuracy,
            &mut ledger,
            args.common.seed,
        )?;
        writeln!(out, "winner,eps_charged")?;
        writeln!(out, "{winner},{}", ledger.spent_epsilon())?;
    } else {
        let config = PdaConfig::new(args.k, args.rho, args.epsilon / detectors.len() as f64);
        writeln!(out, "detector,value,eps_charged")?;
        for (i, d) in detectors.iter().enumerate() {
            let seed = derive_seed(args.common.seed, &[i as u64]);
            let r = pda_release(d, &graph, &config, accuracy, &mut ledger, seed)?;
            writeln!(out, "{},{},{}", d.name, r.value, r.epsilon_charged)?;
        }
    }
    write_sidecar(out_path, &ledger)
}

fn synth(args: SynthArgs) -> Result<()> {
    let graph = args.graph.source(args.seed).load()?;
    let mut config = SynthConfig {
        delta: args.delta,
        ..SynthConfig::new(args.method, args.d_multiplier, args.epsilon)
    };
    if args.no_noise {
        config = config.without_noise();
    }
    let result = synthesize(&graph, &config, args.seed)?;
    std::fs::create_dir_all(&args.out)?;
    write_graph(
        &result.graph,
        &args.out.join("edges.txt"),
        &args.out.join("labels.csv"),
        None,
    )?;
    let stats = File::create(args.out.join("stats.json"))?;
    serde_json::to_writer_pretty(stats, &result.stats)?;
    eprintln!(
        "{}: {} edges in, {} edges out",
        args.method.name(),
        graph.edge_count(),
        result.graph.edge_count()
    );
    Ok(())
}

fn attack(args: AttackArgs) -> Result<()> {
    let server = match args.server.as_str() {
        "exact" => ServerMode::Exact,
        "pda" => ServerMode::Pda {
            k: args.k,
            rho: args.rho,
            epsilon: args.epsilon,
        },
        "synth" => ServerMode::Synthetic(SynthConfig::new(args.method, 1.0, args.epsilon)),
        other => bail!("unknown server `{other}`"),
    };
    let family = EdgeFamily::between_first_benign(args.sbm.params());
    let accurate = args.accurate.parse()?;
    let spec = AttackSpec::new(accurate, family.query(), args.threshold);
    let trials = run_attack_trials(
        &server,
        &family,
        &spec,
        args.positives,
        args.negatives,
        args.common.seed,
    )?;
    let roc = roc_curve(&trials)?;
    roc.write_csv(output(args.common.out.as_deref())?)?;
    eprintln!("auc {} tpr@fpr=0 {}", roc.auc, roc.tpr_at_zero_fpr());
    Ok(())
}

fn experiment(args: ExperimentArgs) -> Result<()> {
    let mut overrides = Vec::new();
    if let Some(seed) = args.seed {
        overrides.push(("seed", seed.to_string()));
    }
    let config = ExperimentConfig::from_file_with(&args.config, &overrides)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let out = args.out.or_else(|| config.output.clone());
    let result = run_experiment(&config, out.as_deref())?;
    if out.is_none() {
        io::stdout().write_all(&result.csv)?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Generate(a) => generate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Pda(a) => pda(a),
        Command::Synth(a) => synth(a),
        Command::Attack(a) => attack(a),
        Command::Experiment(a) => experiment(a),
    }
}
