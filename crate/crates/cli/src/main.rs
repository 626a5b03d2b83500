mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use seq_outlier::exponents::ExponentReport;
use seq_outlier::harness::{self, Provenance};
use seq_outlier::sequential::{run_thresholds, write_trajectory_csv, IidSource, RunOptions};
use seq_outlier::spam::{self, FeatureSelector, QuantizerStrategy, SpamExperiment};
use seq_outlier::{Horizon, Hypothesis, Knowledge, Model};

use config::{load_layer, read_distribution, RunLayer, SpamLayer};

#[derive(Parser, Debug)]
#[command(name = "seq-outlier", version, about = "Sequential outlier hypothesis testing")]
struct Cli {
    /// Worker threads for Monte Carlo runs; results do not depend on it.
    #[arg(long, global = true, env = "SEQ_OUTLIER_JOBS")]
    jobs: Option<usize>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print error-exponent coefficients for a distribution pair.
    Exponents(ExponentArgs),
    /// Run one sequential test and report its decision.
    Simulate(SimulateArgs),
    /// Estimate error rates and slopes over a list of thresholds.
    Sweep(SweepArgs),
    /// Run the quantized spam-feature experiment.
    Spam(SpamArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Identical,
    Distinct,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Identical => Model::Identical,
            ModelArg::Distinct => Model::Distinct,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KnowledgeArg {
    BothKnown,
    PiKnown,
    Universal,
}

impl From<KnowledgeArg> for Knowledge {
    fn from(k: KnowledgeArg) -> Knowledge {
        match k {
            KnowledgeArg::BothKnown => Knowledge::BothKnown,
            KnowledgeArg::PiKnown => Knowledge::PiKnown,
            KnowledgeArg::Universal => Knowledge::Universal,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum StrategyArg {
    ZeroInflated,
    EqualWidth,
}

impl From<StrategyArg> for QuantizerStrategy {
    fn from(s: StrategyArg) -> QuantizerStrategy {
        match s {
            StrategyArg::ZeroInflated => QuantizerStrategy::ZeroInflated,
            StrategyArg::EqualWidth => QuantizerStrategy::EqualWidth,
        }
    }
}

#[derive(Args, Debug)]
struct ExponentArgs {
    /// Outlier distribution as a JSON array; repeat once per outlier for the distinct model.
    #[arg(long, required = true)]
    mu: Vec<PathBuf>,
    /// Typical distribution as a JSON array.
    #[arg(long)]
    pi: PathBuf,
    #[arg(long = "M")]
    m: usize,
    #[arg(long = "K")]
    k: usize,
    #[arg(long, value_enum, default_value = "identical")]
    model: ModelArg,
    /// Recorded in the provenance header; the report always lists every coefficient.
    #[arg(long, value_enum)]
    knowledge: Option<KnowledgeArg>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Report zeros instead of failing when an outlier distribution equals pi.
    #[arg(long)]
    allow_degenerate: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML or JSON config, or an earlier output carrying a `# config:` line.
    #[arg(long, env = "SEQ_OUTLIER_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long = "M", env = "SEQ_OUTLIER_M")]
    m: Option<usize>,
    #[arg(long = "K", env = "SEQ_OUTLIER_K")]
    k: Option<usize>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long, value_enum)]
    knowledge: Option<KnowledgeArg>,
    /// Outlier distribution file(s), JSON arrays.
    #[arg(long)]
    mu: Vec<PathBuf>,
    /// Typical distribution file, a JSON array.
    #[arg(long)]
    pi: Option<PathBuf>,
    /// Thresholds, comma separated.
    #[arg(long = "T", alias = "thresholds", value_delimiter = ',', num_args = 1..)]
    thresholds: Option<Vec<f64>>,
    /// Truncation horizon as a power of T.
    #[arg(long, conflicts_with = "horizon_steps")]
    horizon_power: Option<f64>,
    /// Truncation horizon as a fixed step count.
    #[arg(long)]
    horizon_steps: Option<u64>,
    #[arg(long, env = "SEQ_OUTLIER_SEED")]
    seed: Option<u64>,
    /// Null-tail tolerance for closing null runs early; 0 disables.
    #[arg(long)]
    null_tail_tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// True outlier set, e.g. `0,3`; empty for the null.
    #[arg(long, allow_hyphen_values = true)]
    truth: Option<String>,
    /// Write the per-step trajectory as CSV.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Trials per hypothesis.
    #[arg(long, env = "SEQ_OUTLIER_TRIALS")]
    trials: Option<u64>,
    /// Per-hypothesis CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Full result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Slope-vs-T table, one column per outlier count.
    #[arg(long)]
    slopes: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SpamArgs {
    #[arg(long, env = "SEQ_OUTLIER_CONFIG")]
    config: Option<PathBuf>,
    /// Comma-separated corpus with a 0/1 label in the last column.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    thresholds: Option<Vec<f64>>,
    #[arg(long, env = "SEQ_OUTLIER_TRIALS")]
    trials: Option<u64>,
    #[arg(long, env = "SEQ_OUTLIER_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long, conflicts_with = "feature_name")]
    feature_index: Option<usize>,
    #[arg(long)]
    feature_name: Option<String>,
    /// Treat nonspam as the outlier pool.
    #[arg(long)]
    swap_pools: bool,
    /// Slope table CSV; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Whitespace table for plotting.
    #[arg(long)]
    plot: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let data = e
        .chain()
        .filter_map(|c| c.downcast_ref::<seq_outlier::Error>())
        .any(|c| c.is_data_error());
    if data {
        2
    } else {
        1
    }
}

fn run(cli: Cli) -> Result<()> {
    let jobs = match cli.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(j) => j,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    match cli.command {
        Command::Exponents(a) => cmd_exponents(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a, jobs),
        Command::Spam(a) => cmd_spam(a, jobs),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn cmd_exponents(a: ExponentArgs) -> Result<()> {
    let mus = a.mu.iter().map(|p| read_distribution(p)).collect::<Result<Vec<_>>>()?;
    let pi = read_distribution(&a.pi)?;
    let model = Model::from(a.model);
    let report = match model {
        Model::Identical => {
            if mus.len() != 1 {
                bail!("the identical model takes one --mu, got {}", mus.len());
            }
            ExponentReport::identical(a.m, a.k, &mus[0], &pi, a.allow_degenerate)?
        }
        Model::Distinct => ExponentReport::distinct(a.m, a.k, &mus, &pi, a.allow_degenerate)?,
    };
    let config = serde_json::json!({
        "command": "exponents",
        "m": a.m,
        "k": a.k,
        "model": model,
        "knowledge": a.knowledge.map(Knowledge::from),
        "mu": mus,
        "pi": pi,
        "allow_degenerate": a.allow_degenerate,
    });
    let prov = Provenance::new(0, config);
    let mut buf = Vec::new();
    match a.format {
        Format::Json => {
            let doc = serde_json::json!({ "provenance": prov, "report": report });
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
        Format::Table => {
            prov.write(&mut buf)?;
            buf.extend_from_slice(report.to_table().as_bytes());
        }
    }
    emit(a.output.as_deref(), &buf)
}

fn run_layer(r: &RunArgs, trials: Option<u64>, truth: Option<Hypothesis>) -> Result<RunLayer> {
    let file = match &r.config {
        Some(p) => load_layer::<RunLayer>(p)?,
        None => RunLayer::default(),
    };
    let mu = if r.mu.is_empty() {
        None
    } else {
        Some(r.mu.iter().map(|p| read_distribution(p)).collect::<Result<Vec<_>>>()?)
    };
    let horizon = match (r.horizon_power, r.horizon_steps) {
        (Some(p), _) => Some(Horizon::Power(p)),
        (None, Some(s)) => Some(Horizon::Steps(s)),
        (None, None) => None,
    };
    let flags = RunLayer {
        m: r.m,
        k: r.k,
        model: r.model.map(Model::from),
        knowledge: r.knowledge.map(Knowledge::from),
        thresholds: r.thresholds.clone(),
        horizon,
        mu,
        pi: r.pi.as_deref().map(read_distribution).transpose()?,
        trials,
        seed: r.seed,
        null_tail_tolerance: r.null_tail_tolerance,
        truth,
    };
    file.overlay(flags).resolve()
}

fn parse_hypothesis(s: &str) -> Result<Hypothesis> {
    let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
    let idx = inner
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().with_context(|| format!("bad sequence index '{t}'")))
        .collect::<Result<Vec<_>>>()?;
    Ok(Hypothesis::new(idx)?)
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let truth = a.truth.as_deref().map(parse_hypothesis).transpose()?;
    let layer = run_layer(&a.run, None, truth)?;
    let thresholds = layer.thresholds();
    if thresholds.len() != 1 {
        bail!("simulate takes exactly one threshold, got {}", thresholds.len());
    }
    let plan = layer.plan()?;
    let truth = layer.truth.clone().context("missing truth")?;
    plan.config.space()?.validate(&truth)?;
    let mut config = plan.config.clone();
    config.record_trajectory = a.trajectory.is_some();
    let dists = plan.data.sequence_distributions(&truth, config.m);
    let mut source = IidSource::new(&dists, plan.seed);
    let result = run_thresholds(&config, thresholds, &mut source, RunOptions::default())?
        .pop()
        .context("no result")?;
    let mut cfg = serde_json::to_value(&layer)?;
    cfg["command"] = "simulate".into();
    cfg.as_object_mut().map(|o| o.remove("trials"));
    let prov = Provenance::new(plan.seed, cfg);
    if let Some(path) = &a.trajectory {
        let mut buf = Vec::new();
        prov.write(&mut buf)?;
        write_trajectory_csv(&mut buf, result.trajectory.as_deref().unwrap_or(&[]))?;
        emit(Some(path), &buf)?;
    }
    let doc = serde_json::json!({ "provenance": prov, "truth": truth, "result": result });
    let mut buf = serde_json::to_vec_pretty(&doc)?;
    buf.push(b'\n');
    emit(a.output.as_deref(), &buf)
}

fn cmd_sweep(a: SweepArgs, jobs: usize) -> Result<()> {
    let layer = run_layer(&a.run, a.trials, None)?;
    let plan = layer.plan()?;
    let result = harness::sweep(&plan, layer.thresholds(), jobs)?;
    let mut cfg = serde_json::to_value(&layer)?;
    cfg["command"] = "sweep".into();
    cfg.as_object_mut().map(|o| o.remove("truth"));
    let prov = Provenance::new(plan.seed, cfg);
    let mut csv = Vec::new();
    harness::write_sweep_csv(&mut csv, &result, &prov)?;
    emit(a.output.as_deref(), &csv)?;
    if let Some(p) = &a.json {
        let mut buf = Vec::new();
        harness::write_sweep_json(&mut buf, &result, &prov)?;
        emit(Some(p), &buf)?;
    }
    if let Some(p) = &a.slopes {
        let sizes: Vec<usize> = (0..=plan.config.k).collect();
        let mut buf = Vec::new();
        harness::write_slope_table(&mut buf, &result, &sizes, &prov)?;
        emit(Some(p), &buf)?;
    }
    Ok(())
}

fn cmd_spam(a: SpamArgs, jobs: usize) -> Result<()> {
    let file = match &a.config {
        Some(p) => load_layer::<SpamLayer>(p)?,
        None => SpamLayer::default(),
    };
    let feature = match (a.feature_index, a.feature_name) {
        (Some(i), _) => Some(FeatureSelector::Index(i)),
        (None, Some(n)) => Some(FeatureSelector::Name(n)),
        (None, None) => None,
    };
    let flags = SpamLayer {
        data: a.data,
        feature,
        strategy: a.strategy.map(QuantizerStrategy::from),
        thresholds: a.thresholds,
        trials: a.trials,
        seed: a.seed,
        swap_pools: a.swap_pools.then_some(true),
    };
    let layer = file.overlay(flags).resolve()?;
    let data = layer.data.clone().context("missing data path")?;
    let feature = layer.feature.clone().unwrap_or_default();
    let corpus = spam::load_corpus(&data, &feature)?;
    log::info!(
        "{} rows, {} spam, feature {}",
        corpus.len(),
        corpus.count(spam::Label::Spam),
        corpus.feature
    );
    let strategy = layer.strategy.unwrap_or_default();
    let quantizer = spam::fit_quantizer(&corpus, spam::LEVELS, strategy)?;
    let experiment = SpamExperiment {
        thresholds: layer.thresholds.clone().unwrap_or_default(),
        trials_per_hypothesis: layer.trials.unwrap_or(1000),
        seed: layer.seed.unwrap_or(0),
        strategy,
        swap_pools: layer.swap_pools.unwrap_or(false),
    };
    let outcome = spam::run_spam_experiment(&corpus, &quantizer, &experiment, jobs)?;
    let mut cfg = serde_json::to_value(&layer)?;
    cfg["command"] = "spam".into();
    let prov = Provenance::new(experiment.seed, cfg);
    let mut buf = Vec::new();
    spam::write_table_csv(&mut buf, &outcome, &prov)?;
    emit(a.output.as_deref(), &buf)?;
    if let Some(p) = &a.plot {
        let mut buf = Vec::new();
        harness::write_slope_table(&mut buf, &outcome.sweep, &[1, 2], &prov)?;
        emit(Some(p), &buf)?;
    }
    if let Some(p) = &a.json {
        let doc = serde_json::json!({ "provenance": prov, "outcome": outcome });
        let mut buf = serde_json::to_vec_pretty(&doc)?;
        buf.push(b'\n');
        emit(Some(p), &buf)?;
    }
    Ok(())
}
