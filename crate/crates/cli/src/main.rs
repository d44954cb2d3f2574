use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tsgraph::distance::DistanceKind;
use tsgraph::harness::{
    bench_distances, format_bench, format_results, run_experiment, ExperimentSpec, Method,
    SplitMode, DEFAULT_FRACTIONS, DEFAULT_REPEATS,
};
use tsgraph::solvers::GcnFeatures;

#[derive(Parser)]
#[command(
    name = "tsgraph",
    version,
    about = "Semi-supervised time-series classification on similarity graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write the result CSV.
    Run(RunArgs),
    /// Time one distance evaluation per measure and series length.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Random,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FeaturesArg {
    Gaussian,
    Identity,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file. Flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory or file; repeat for several. Replaces the file's list.
    #[arg(long = "dataset")]
    datasets: Vec<PathBuf>,
    /// euclidean, dtw, sdtw or mpdist; repeatable.
    #[arg(long = "distance")]
    distances: Vec<String>,
    /// ac, ls, gcn or 1nn; repeatable.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Labeled fractions for random splits, comma separated.
    #[arg(long, value_delimiter = ',')]
    fractions: Vec<f64>,
    /// Random splits per fraction.
    #[arg(long)]
    repeats: Option<usize>,
    /// Seed of the first split; repeat r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// `fixed` labels the archive TRAIN file.
    #[arg(long, value_enum)]
    split: Option<SplitArg>,
    #[arg(long)]
    self_tuning_k: Option<usize>,
    /// Eigenpairs used by Allen–Cahn.
    #[arg(long)]
    m_e: Option<usize>,
    #[arg(long, value_enum)]
    gcn_features: Option<FeaturesArg>,
    /// Z-normalize every series after loading.
    #[arg(long)]
    z_normalize: bool,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Result CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![10, 100, 1000])]
    lengths: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Timing CSV; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_spec(args: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_file(path)?,
        None => ExperimentSpec::default(),
    };
    if !args.datasets.is_empty() {
        spec.datasets = args.datasets.clone();
    }
    if !args.distances.is_empty() {
        spec.distances = args
            .distances
            .iter()
            .map(|name| {
                let fresh = DistanceKind::from_name(name)?;
                // keep parameters from the file when the same measure is named
                Ok(spec
                    .distances
                    .iter()
                    .copied()
                    .find(|k| k.name() == fresh.name())
                    .unwrap_or(fresh))
            })
            .collect::<tsgraph::Result<_>>()?;
    }
    if !args.methods.is_empty() {
        spec.methods = args
            .methods
            .iter()
            .map(|m| Method::from_name(m))
            .collect::<tsgraph::Result<_>>()?;
    }
    let random_flags = !args.fractions.is_empty() || args.repeats.is_some() || args.seed.is_some();
    match args.split {
        Some(SplitArg::Fixed) if random_flags => {
            bail!("--fractions, --repeats and --seed only apply to random splits")
        }
        Some(SplitArg::Fixed) => spec.split = SplitMode::FixedArchiveTrain,
        Some(SplitArg::Random) | None
            if random_flags || matches!(args.split, Some(SplitArg::Random)) =>
        {
            let (mut fractions, mut repeats, mut base_seed) = match &spec.split {
                SplitMode::Random {
                    fractions,
                    repeats,
                    base_seed,
                } => (fractions.clone(), *repeats, *base_seed),
                SplitMode::FixedArchiveTrain => (DEFAULT_FRACTIONS.to_vec(), DEFAULT_REPEATS, 0),
            };
            if !args.fractions.is_empty() {
                fractions = args.fractions.clone();
            }
            repeats = args.repeats.unwrap_or(repeats);
            base_seed = args.seed.unwrap_or(base_seed);
            spec.split = SplitMode::Random {
                fractions,
                repeats,
                base_seed,
            };
        }
        _ => {}
    }
    if let Some(k) = args.self_tuning_k {
        spec.self_tuning_k = k;
    }
    if let Some(m_e) = args.m_e {
        spec.allen_cahn.m_e = m_e;
    }
    if let Some(features) = args.gcn_features {
        spec.gcn_features = match features {
            FeaturesArg::Gaussian => GcnFeatures::GaussianRows,
            FeaturesArg::Identity => GcnFeatures::Identity,
        };
    }
    spec.z_normalize |= args.z_normalize;
    if args.cache_dir.is_some() {
        spec.cache_dir = args.cache_dir.clone();
    }
    if let Some(workers) = args.workers {
        spec.workers = workers;
    }
    if args.out.is_some() {
        spec.out = args.out.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let spec = build_spec(&args)?;
    let report = run_experiment(&spec)?;
    for failure in report.failures() {
        eprintln!(
            "warning: {} / {} / {} / fraction {} seed {:?}: {}",
            failure.dataset,
            failure.distance,
            failure.method,
            failure.fraction,
            failure.seed,
            failure.error.as_deref().unwrap_or_default()
        );
    }
    let c = report.cache;
    eprintln!(
        "{} cells, {} failed; distance matrices: {} computed, {} from disk, {} from memory",
        report.results.len(),
        report.failures().count(),
        c.computed,
        c.disk_hits,
        c.memory_hits
    );
    if c.write_failures > 0 {
        eprintln!(
            "warning: {} cache files could not be written",
            c.write_failures
        );
    }
    emit(&format_results(&report.results), spec.out.as_ref())
}

fn bench(args: BenchArgs) -> Result<()> {
    let entries = bench_distances(&args.lengths, args.repeats)?;
    emit(&format_bench(&entries), args.out.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Bench(args) => bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
