mod analyze;
mod figures;
mod resolve;
mod selftest;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qaoae_core::experiments::{self, summarize, write_records_csv, Manifest, Mode};
use qaoae_core::GraphKind;

/// Entanglement in QAOA and annealing circuits for MaxCut.
#[derive(Debug, Parser)]
#[command(name = "qaoae", version)]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, env = "QAOAE_THREADS", default_value_t = 0, global = true)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the problem graphs of a sweep as JSON files.
    GenGraphs(SweepArgs),
    /// Randomized QAOA circuits, entropy after every layer.
    Randomized(SweepArgs),
    /// Multi-start optimized circuits, entropy along the best circuit.
    Optimized(SweepArgs),
    /// Trotterized annealing, entropy at every time step.
    Anneal(SweepArgs),
    /// Fit sweep records or export plot-ready series from a summary.
    Analyze(analyze::AnalyzeArgs),
    /// Graph statistics: one JSON graph, or ensemble shortest paths.
    GraphStats(GraphStatsArgs),
    /// Oracle-equivalence and invariant checks.
    Selftest,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// JSON config, or a manifest written by an earlier sweep.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["desk", "paper"])]
    preset: Option<String>,
    #[arg(long, value_parser = ["linear", "regular3", "complete"])]
    graph: Option<String>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    depth: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    time_list: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    problems: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["contiguous", "random"])]
    bipartition: Option<String>,
    /// Override any config key, e.g. `--set spectrum=true`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, default_value = "qaoae-out")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct GraphStatsArgs {
    /// A graph JSON file; without it, ensemble statistics are computed.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "regular3", value_parser = ["linear", "regular3", "complete"])]
    graph: String,
    #[arg(long, value_delimiter = ',', default_value = "8,10,12,14,16,18,20,22")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    problems: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure categories with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<qaoae_core::Error> for CliError {
    fn from(e: qaoae_core::Error) -> Self {
        use qaoae_core::Error::*;
        match e {
            Config(_) | Parameter(_) | InvalidSize(_) | TooLarge { .. } | Domain { .. } | InsufficientData(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn sweep(mode: Mode, args: &SweepArgs) -> CliResult<()> {
    let cfg = resolve::resolve_config(mode, args)?;
    cfg.validate()?;
    let output = experiments::run(&cfg)?;
    fs::create_dir_all(&args.output)?;
    write_records_csv(BufWriter::new(File::create(args.output.join("records.csv"))?), &output.records)?;
    let summary = summarize(&cfg, &output);
    write_json(&args.output.join("summary.json"), &summary)?;
    write_json(&args.output.join("manifest.json"), &Manifest::new(cfg))?;
    println!("{} records written to {}", output.records.len(), args.output.display());
    for fit in &summary.fits {
        let at = match (fit.n, fit.p_or_t) {
            (Some(n), Some(k)) => format!(" N={n} p_or_T={k}"),
            (None, Some(k)) => format!(" p_or_T={k}"),
            _ => String::new(),
        };
        println!(
            "fit {}{}: intercept={} slope={} residual={}",
            fit.name, at, fit.fit.intercept, fit.fit.slope, fit.fit.residual_norm
        );
    }
    Ok(())
}

fn gen_graphs(args: &SweepArgs) -> CliResult<()> {
    let cfg = resolve::resolve_config(Mode::Randomized, args)?;
    cfg.validate()?;
    let dir = args.output.join("graphs");
    fs::create_dir_all(&dir)?;
    let mut count = 0;
    for &n in &cfg.sizes {
        for id in 0..cfg.n_problems {
            let problem = experiments::build_problem(&cfg, n, id)?;
            write_json(&dir.join(format!("{}_N{n}_{id}.json", cfg.graph_kind)), &problem.graph)?;
            count += 1;
        }
    }
    println!("{count} graphs written to {}", dir.display());
    Ok(())
}

fn graph_stats(args: &GraphStatsArgs) -> CliResult<()> {
    use qaoae_core::graph::{avg_shortest_path, generate, maxcut_bruteforce};
    if let Some(path) = &args.input {
        let g: qaoae_core::Graph = serde_json::from_reader(File::open(path)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let mut stats = serde_json::json!({
            "n": g.n_vertices(),
            "kind": g.kind(),
            "n_edges": g.edges().len(),
            "degrees": g.degrees(),
            "avg_shortest_path": avg_shortest_path(&g).ok(),
        });
        if let Ok((cost, optima)) = maxcut_bruteforce(&g) {
            stats["maxcut_min_cost"] = cost.into();
            stats["maxcut_optima"] = optima.iter().map(|s| s.to_bits()).collect::<Vec<_>>().into();
        }
        println!("{}", serde_json::to_string_pretty(&stats)?);
        return Ok(());
    }
    let kind: GraphKind = args.graph.parse()?;
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let paths = (0..args.problems)
            .map(|id| {
                let seed = qaoae_core::seed::derive_seed(args.seed, &[n as u64, id as u64]);
                avg_shortest_path(&generate(kind, n, seed)?)
            })
            .collect::<qaoae_core::Result<Vec<f64>>>()?;
        let (mean, stderr) = experiments::mean_stderr_two_pass(&paths);
        rows.push(vec![n as f64, mean, stderr]);
    }
    let header = ["N", "avg_shortest_path_mean", "avg_shortest_path_stderr"];
    match &args.output {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join("fig2d.csv");
            figures::write_table(&path, &header, rows)?;
            println!("{}", path.display());
        }
        None => figures::write_table_to(std::io::stdout().lock(), &header, rows)?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    match &cli.command {
        Command::GenGraphs(a) => gen_graphs(a),
        Command::Randomized(a) => sweep(Mode::Randomized, a),
        Command::Optimized(a) => sweep(Mode::Optimized, a),
        Command::Anneal(a) => sweep(Mode::Annealing, a),
        Command::Analyze(a) => analyze::run(a),
        Command::GraphStats(a) => graph_stats(a),
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
