//! Command-line front end. Every verb reads files, writes files under
//! `--out` (or stdout) and is byte-reproducible for a fixed `--seed`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::RawrError;
use crate::generators::{derive_seed, eccentricity_labels, generate, Family};
use crate::graph::{
    degree_percentile, fmt6, load_edge_list, load_features, load_labels, write_edge_list, write_labels, Graph,
    NodeData, Percentile, Split,
};
use crate::linalg::DenseMatrix;
use crate::metrics::{evaluate_candidates, mean_effective_resistance, pearson, select_epsilon, write_candidates, PairSet};
use crate::partition::{quotient, refine_eps_be, write_partition, write_quotient, Partition};
use crate::rewire::{build_rewired, Variant};
use crate::spectral::srl;
use crate::teacher_student::{run_ts_experiment, Dataset, ExperimentConfig, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad command line; carries clap's message.
    Usage(String),
    Input(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    /// `E<code> <kind>: <message>` on one line.
    pub fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Input(m) => ("input", m),
            CliError::Numeric(m) => ("numeric", m),
        };
        format!("E{} {kind}: {}", self.exit_code(), msg.replace('\n', " "))
    }
}

impl From<RawrError> for CliError {
    fn from(e: RawrError) -> Self {
        match e {
            RawrError::NonSymmetric(_)
            | RawrError::EigenNotConverged(_)
            | RawrError::NotPositiveDefinite
            | RawrError::Divergence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug, Clone, PartialEq)]
#[command(name = "rawr", version, about = "Role-aware graph rewiring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Generate a synthetic graph, optionally with eccentricity labels
    Gen(GenArgs),
    /// Approximate equitable partition and its quotient
    Partition(PartitionArgs),
    /// Attach role virtual nodes to a graph
    Rewire(RewireArgs),
    /// Spectral role lift report
    Srl(SrlArgs),
    /// Score the percentile grid and pick a tolerance
    SelectEps(SelectArgs),
    /// Mean effective resistance before and after rewiring
    Effres(EffresArgs),
    /// Teacher-student experiment
    TsSim(TsArgs),
    /// Correlate a candidate table with measured accuracies
    SrlCorrelate(CorrelateArgs),
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct Common {
    /// Seed for every random draw
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, PartialEq)]
#[group(multiple = false)]
pub struct Tolerance {
    /// Explicit tolerance
    #[arg(long)]
    pub eps: Option<f64>,
    /// Degree percentile (0, 25, 50, 75, 100)
    #[arg(long, value_parser = parse_percentile)]
    pub percentile: Option<Percentile>,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct GenArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long)]
    pub n: usize,
    /// Edge probability for `er`
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Emit eccentricity-binned labels with this many classes
    #[arg(long)]
    pub classes: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct PartitionArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct RewireArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[arg(long, value_parser = parse_variant, default_value = "repnodes")]
    pub variant: Variant,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SrlArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[arg(long, value_parser = parse_variant, default_value = "repnodes")]
    pub variant: Variant,
    /// Filter degree of `h(s) = s^L`
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct SelectArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, value_parser = parse_variant, default_value = "repnodes")]
    pub variant: Variant,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Candidate percentiles
    #[arg(long, value_parser = parse_percentile, value_delimiter = ',', default_value = "0,25,50,75,100")]
    pub percentile: Vec<Percentile>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct EffresArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[command(flatten)]
    pub tolerance: Tolerance,
    #[arg(long, value_parser = parse_variant, default_value = "repnodes")]
    pub variant: Variant,
    /// Average over all node pairs of the rewired graph instead of the original ones
    #[arg(long)]
    pub all_pairs: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct TsArgs {
    /// Single dataset instead of the synthetic families
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub labels: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    pub features: Option<PathBuf>,
    /// Synthetic families to generate
    #[arg(
        long,
        value_parser = parse_family,
        value_delimiter = ',',
        default_value = "caterpillar,grid,ladder,path,lobster,tree",
        conflicts_with = "graph"
    )]
    pub family: Vec<Family>,
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, value_parser = parse_variant, value_delimiter = ',', default_value = "full")]
    pub variant: Vec<Variant>,
    #[arg(long, value_parser = parse_percentile, value_delimiter = ',', default_value = "0,50,100")]
    pub percentile: Vec<Percentile>,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, PartialEq)]
pub struct CorrelateArgs {
    /// Candidate table written by `select-eps`
    #[arg(long)]
    pub candidates: PathBuf,
    /// CSV with header `percentile,accuracy`
    #[arg(long)]
    pub accuracy: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

fn parse_percentile(s: &str) -> std::result::Result<Percentile, String> {
    s.parse::<u32>()
        .ok()
        .and_then(Percentile::from_value)
        .ok_or_else(|| format!("percentile must be one of 0, 25, 50, 75, 100, got {s:?}"))
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: RawrError| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<Family, String> {
    s.parse().map_err(|e: RawrError| e.to_string())
}

/// Outcome of parsing: a command to run, or text (help, version) to print
/// before exiting successfully.
#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Run(Command),
    Print(String),
}

/// Parses arguments without the program name.
pub fn parse_args<I, T>(argv: I) -> CliResult<Parsed>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = std::iter::once(OsString::from("rawr")).chain(argv.into_iter().map(Into::into));
    match Cli::try_parse_from(args) {
        Ok(cli) => Ok(Parsed::Run(cli.command)),
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp
            | clap::error::ErrorKind::DisplayVersion
            | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                Ok(Parsed::Print(e.render().to_string()))
            }
            _ => {
                let rendered = e.render().to_string();
                let first = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
                Err(CliError::Usage(first.to_string()))
            }
        },
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> CliResult<Graph> {
    load_edge_list(open(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_data(labels: Option<&Path>, features: Option<&Path>, n: usize) -> CliResult<NodeData> {
    let mut data = match labels {
        Some(p) => load_labels(open(p)?, n).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?,
        None => NodeData::default(),
    };
    if let Some(p) = features {
        data.features =
            Some(load_features(open(p)?, n).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?);
    }
    data.validate(n)?;
    Ok(data)
}

/// Writes `name` under `dir`, or to stdout without a directory.
fn emit(out: Option<&Path>, name: &str, contents: &str) -> CliResult<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn resolve_eps(graph: &Graph, tol: &Tolerance) -> CliResult<f64> {
    match (tol.eps, tol.percentile) {
        (Some(e), _) if !(e >= 0.0) || !e.is_finite() => {
            Err(CliError::Usage(format!("--eps must be a non-negative number, got {e}")))
        }
        (Some(e), _) => Ok(e),
        (None, Some(p)) => Ok(degree_percentile(graph, p)),
        (None, None) => Ok(0.0),
    }
}

fn partition_for(graph: &Graph, variant: Variant, eps: f64) -> Partition {
    match variant {
        Variant::MasterNode => Partition::single_block(graph.num_nodes()),
        _ => refine_eps_be(graph, eps),
    }
}

fn run_gen(a: &GenArgs) -> CliResult<()> {
    let graph = generate(a.family, a.n, a.p, a.common.seed)?;
    let out = a.common.out.as_deref();
    emit(out, "graph.txt", &write_edge_list(&graph))?;
    if let Some(classes) = a.classes {
        let (labels, splits) = eccentricity_labels(&graph, classes, derive_seed(a.common.seed, 1))?;
        emit(out, "labels.csv", &write_labels(&labels, &splits))?;
    }
    Ok(())
}

fn run_partition(a: &PartitionArgs) -> CliResult<()> {
    let graph = read_graph(&a.graph)?;
    let eps = resolve_eps(&graph, &a.tolerance)?;
    let partition = refine_eps_be(&graph, eps);
    let q = quotient(&graph, &partition)?;
    let out = a.common.out.as_deref();
    emit(out, "partition.csv", &write_partition(&partition))?;
    emit(out, "quotient.csv", &write_quotient(&q, eps))?;
    Ok(())
}

fn run_rewire(a: &RewireArgs) -> CliResult<()> {
    let graph = read_graph(&a.graph)?;
    let data = read_data(None, a.features.as_deref(), graph.num_nodes())?;
    let eps = resolve_eps(&graph, &a.tolerance)?;
    let partition = partition_for(&graph, a.variant, eps);
    let q = quotient(&graph, &partition)?;
    let rewired = build_rewired(&graph, &partition, &q, a.variant, data.features.as_ref())?;
    let out = a.common.out.as_deref();
    emit(out, "rewired.txt", &rewired.write_edge_list())?;
    emit(out, "features.csv", &crate::graph::write_features(&rewired.features))?;
    emit(out, "metadata.txt", &rewired.write_metadata(eps, q.residual))?;
    Ok(())
}

/// One-hot targets over every labeled node.
fn labeled_targets(data: &NodeData, n: usize) -> CliResult<DenseMatrix> {
    let labels = data.labels.as_ref().ok_or(RawrError::EmptyLabels)?;
    let mask: Vec<bool> = labels.iter().map(Option::is_some).collect();
    if mask.len() != n || !mask.iter().any(|&m| m) {
        return Err(RawrError::EmptyLabels.into());
    }
    Ok(data.one_hot(&mask, data.num_classes()))
}

fn run_srl(a: &SrlArgs) -> CliResult<()> {
    let graph = read_graph(&a.graph)?;
    let n = graph.num_nodes();
    let data = read_data(Some(&a.labels), a.features.as_deref(), n)?;
    let eps = resolve_eps(&graph, &a.tolerance)?;
    let partition = partition_for(&graph, a.variant, eps);
    let q = quotient(&graph, &partition)?;
    let rewired = build_rewired(&graph, &partition, &q, a.variant, data.features.as_ref())?;
    let y = labeled_targets(&data, n)?;
    let report = srl(&graph, &rewired, &partition, &y, a.layers)?;
    emit(a.common.out.as_deref(), "srl.csv", &report.to_csv())
}

fn run_select(a: &SelectArgs) -> CliResult<()> {
    let graph = read_graph(&a.graph)?;
    let data = read_data(Some(&a.labels), a.features.as_deref(), graph.num_nodes())?;
    if !data.mask(Split::Train).iter().any(|&m| m) {
        return Err(CliError::Input("label file has no train nodes".into()));
    }
    let candidates = evaluate_candidates(&graph, &data, a.variant, &a.percentile, a.layers)?;
    let selected = select_epsilon(&candidates);
    let table = write_candidates(&candidates, selected);
    match a.common.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "candidates.csv", &table)?;
            if let Some(i) = selected {
                let c = &candidates[i];
                println!("selected percentile={} eps={}", c.percentile.value(), fmt6(c.eps));
            }
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn run_effres(a: &EffresArgs) -> CliResult<()> {
    let graph = read_graph(&a.graph)?;
    let baseline = mean_effective_resistance(&graph.dense_adjacency(), PairSet::All)?;
    let mut out = format!("baseline,{}\n", fmt6(baseline));
    if a.tolerance.eps.is_some() || a.tolerance.percentile.is_some() {
        let eps = resolve_eps(&graph, &a.tolerance)?;
        let partition = partition_for(&graph, a.variant, eps);
        let q = quotient(&graph, &partition)?;
        let rewired = build_rewired(&graph, &partition, &q, a.variant, None)?;
        let pairs = if a.all_pairs { PairSet::All } else { PairSet::Original(graph.num_nodes()) };
        let value = mean_effective_resistance(&rewired.dense_adjacency(), pairs)?;
        let _ = writeln!(out, "{},{}", a.variant, fmt6(value));
    }
    emit(a.common.out.as_deref(), "effres.csv", &out)
}

fn run_ts(a: &TsArgs) -> CliResult<()> {
    let seed = a.common.seed;
    let datasets = match &a.graph {
        Some(path) => {
            let graph = read_graph(path)?;
            let data = read_data(a.labels.as_deref(), a.features.as_deref(), graph.num_nodes())?;
            let tag = path.file_stem().map_or("graph".into(), |s| s.to_string_lossy().into_owned());
            vec![Dataset { tag, graph, data }]
        }
        None => synthetic_datasets(&a.family, a.n, a.classes, seed)?,
    };
    let mut teacher_sigmas = vec![1.0; a.layers];
    if let Some(last) = teacher_sigmas.last_mut() {
        *last = 40.0;
    }
    let config = ExperimentConfig {
        train: TrainConfig {
            learning_rate: a.lr,
            epochs: a.epochs,
            sigmas: vec![1.0; a.layers],
            ..TrainConfig::default()
        },
        teacher_sigmas,
        layers: a.layers,
        variants: a.variant.clone(),
        percentiles: a.percentile.clone(),
        default_classes: a.classes,
        seed,
    };
    if a.layers == 0 {
        return Err(CliError::Usage("--layers must be at least 1".into()));
    }
    let result = run_ts_experiment(&datasets, &config)?;
    let csv = result.to_csv();
    match a.common.out.as_deref() {
        Some(dir) => {
            emit(Some(dir), "ts.csv", &csv)?;
            println!("pearson={}", result.pearson.map_or("nan".into(), fmt6));
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// The synthetic corpus of `ts-sim`: one graph per family with
/// eccentricity labels, all derived from `seed`.
pub fn synthetic_datasets(families: &[Family], n: usize, classes: usize, seed: u64) -> crate::Result<Vec<Dataset>> {
    families
        .iter()
        .enumerate()
        .map(|(i, &family)| {
            let graph = generate(family, n, 0.2, derive_seed(seed, 100 + i as u64))?;
            let (labels, splits) = eccentricity_labels(&graph, classes, seed)?;
            Ok(Dataset {
                tag: family.to_string(),
                graph,
                data: NodeData { features: None, labels: Some(labels), splits: Some(splits) },
            })
        })
        .collect()
}

/// Reads `header` CSV rows into `(percentile, value)` pairs from the named
/// value column.
fn read_column(path: &Path, column: &str) -> CliResult<Vec<(u32, f64)>> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut lines = open(path)?.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
    let names: Vec<&str> = header.trim().split(',').collect();
    let pi = names.iter().position(|&h| h == "percentile").ok_or_else(|| bad("no percentile column".into()))?;
    let vi = names.iter().position(|&h| h == column).ok_or_else(|| bad(format!("no {column} column")))?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        let get = |j: usize| fields.get(j).copied().ok_or_else(|| bad(format!("line {}: missing field", i + 2)));
        let p = get(pi)?.parse().map_err(|_| bad(format!("line {}: bad percentile", i + 2)))?;
        let v = get(vi)?.parse().map_err(|_| bad(format!("line {}: bad {column}", i + 2)))?;
        rows.push((p, v));
    }
    Ok(rows)
}

fn run_correlate(a: &CorrelateArgs) -> CliResult<()> {
    let scores = read_column(&a.candidates, "srl_star")?;
    let accuracy = read_column(&a.accuracy, "accuracy")?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = scores
        .iter()
        .filter_map(|(p, s)| accuracy.iter().find(|(q, _)| q == p).map(|(_, acc)| (*s, *acc)))
        .unzip();
    let r = pearson(&xs, &ys).ok_or_else(|| {
        CliError::Numeric(format!("correlation undefined over {} matched percentiles", xs.len()))
    })?;
    emit(a.common.out.as_deref(), "correlation.txt", &format!("pearson={}\n", fmt6(r)))
}

pub fn execute(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Gen(a) => run_gen(a),
        Command::Partition(a) => run_partition(a),
        Command::Rewire(a) => run_rewire(a),
        Command::Srl(a) => run_srl(a),
        Command::SelectEps(a) => run_select(a),
        Command::Effres(a) => run_effres(a),
        Command::TsSim(a) => run_ts(a),
        Command::SrlCorrelate(a) => run_correlate(a),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("RAWR_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Usage(format!("RAWR_THREADS must be a positive integer, got {value:?}")))?;
    // a second initialization (tests) keeps the existing pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses, runs and maps the outcome to an exit code. Errors go to stderr
/// as a single `E<code> <kind>: <message>` line.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let outcome = configure_threads().and_then(|()| parse_args(argv)).and_then(|parsed| match parsed {
        Parsed::Print(text) => {
            print!("{text}");
            Ok(())
        }
        Parsed::Run(cmd) => execute(&cmd),
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.line());
            e.exit_code()
        }
    }
}
