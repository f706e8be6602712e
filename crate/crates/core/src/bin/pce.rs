use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sparse_pce::benchmarks::{BenchmarkModel, BENCHMARK_NAMES};
use sparse_pce::experiment::{
    diagnose_sweep, fit_design, run_convergence, write_diagnostics_csv, DiagnoseConfig, ExperimentConfig, FitConfig,
    FitOutcome, FitReport, Method, DEFAULT_CAP,
};
use sparse_pce::orthopoly::PolyKind;
use sparse_pce::sampling::{chebyshev_design, lhs_design_in, random_design, Design, Domain};
use sparse_pce::{PceError, Result};

#[derive(Parser)]
#[command(
    name = "pce",
    version,
    about = "Sparse polynomial chaos expansions from few model runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit an expansion to a design CSV or a sampled benchmark
    Fit(FitArgs),
    /// Fit with iterative basis selection and write the adaptation trace
    Adapt(FitArgs),
    /// Convergence study over design sizes and trials
    Bench(BenchArgs),
    /// Mutual coherence and RIP lower bound against total degree
    Diagnose(DiagnoseArgs),
    /// Generate a design, optionally evaluated on a benchmark
    Sample(SampleArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// Design CSV with columns x1..xd, f and optionally g1..gd
    #[arg(long, conflicts_with = "model")]
    input: Option<PathBuf>,
    /// Input distributions, e.g. `0:1` or `uniform:0:1,gaussian:1:0.005`;
    /// a single entry is repeated for every column
    #[arg(long, allow_hyphen_values = true)]
    domains: Option<String>,
    /// Benchmark to sample instead of reading a design
    #[arg(long)]
    model: Option<String>,
    /// Dimension of corner-peak and constant benchmarks
    #[arg(long)]
    dim: Option<usize>,
    /// Stages of the resistor ladders
    #[arg(long)]
    stages: Option<usize>,
    /// Design size when sampling a benchmark
    #[arg(long, short = 'm')]
    size: Option<usize>,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// nonadaptive or basis_selection
    #[arg(long)]
    method: Option<String>,
    /// Use gradient rows
    #[arg(long)]
    gradients: bool,
    /// Largest total-degree basis tried by the non-adaptive sweep
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long, short = 'k', default_value_t = 10)]
    folds: usize,
    /// Expansion steps per iteration of basis selection
    #[arg(long, short = 't', default_value_t = 3)]
    expansions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Model file
    #[arg(long, default_value = "model.txt")]
    model_out: PathBuf,
    /// Cross-validation report or adaptation trace CSV
    #[arg(long)]
    report: Option<PathBuf>,
    /// Index set of the final basis
    #[arg(long)]
    basis_out: Option<PathBuf>,
    /// Test RMSE on this many Latin-hypercube points (benchmarks only)
    #[arg(long)]
    test_points: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Key-value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    /// Comma-separated: nonadaptive, basis_selection, oracle
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated ascending design sizes
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    gradients: bool,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, short = 't')]
    expansions: Option<usize>,
    #[arg(long, short = 'k')]
    folds: Option<usize>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    test_points: Option<usize>,
    #[arg(long)]
    reference_samples: Option<usize>,
    /// Per-trial CSV; the summary goes next to it with a `_summary` suffix
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Worker threads (default from PCE_WORKERS, else 1)
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, default_value_t = 6)]
    dim: usize,
    #[arg(long, short = 'm', default_value_t = 100)]
    samples: usize,
    /// Comma-separated total degrees
    #[arg(long, default_value = "2,4,6,8")]
    degrees: String,
    /// Sparsity level of the RIP test
    #[arg(long, default_value_t = 10)]
    s: usize,
    #[arg(long, default_value_t = 2000)]
    rip_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Designs per degree; medians are reported
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value = "legendre")]
    family: String,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// random, lhs or chebyshev
    #[arg(long, default_value = "random")]
    design: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include benchmark gradients
    #[arg(long)]
    gradients: bool,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn output_writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn parse_domains(spec: &str, dim: Option<usize>) -> Result<Vec<Domain>> {
    let doms = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Domain>>>()?;
    match (doms.len(), dim) {
        (1, Some(d)) => Ok(vec![doms[0]; d]),
        (n, Some(d)) if n != d => Err(PceError::DimensionMismatch { expected: d, actual: n }),
        _ => Ok(doms),
    }
}

fn benchmark(src: &SourceArgs) -> Result<Option<BenchmarkModel>> {
    src.model
        .as_deref()
        .map(|name| BenchmarkModel::by_name(name, src.dim, src.stages))
        .transpose()
}

/// Loads the design named by `src`, sampling a benchmark when requested.
fn load_design(src: &SourceArgs, seed: u64, gradients: bool) -> Result<(Design, Option<BenchmarkModel>)> {
    if let Some(truth) = benchmark(src)? {
        let m = src
            .size
            .ok_or_else(|| PceError::InvalidArgument("--size is required with --model".into()))?;
        return Ok((truth.sample(m, seed, gradients)?, Some(truth)));
    }
    let path = src
        .input
        .as_ref()
        .ok_or_else(|| PceError::InvalidArgument("either --input or --model is required".into()))?;
    let domains = src.domains.as_deref().map(|s| parse_domains(s, src.dim)).transpose()?;
    let design = Design::read_csv(BufReader::new(File::open(path)?), domains.as_deref())?;
    Ok((design, None))
}

fn run_fit(args: &FitArgs, default_method: Method) -> Result<()> {
    let method = match &args.method {
        Some(m) => m.parse()?,
        None => default_method,
    };
    let (design, truth) = load_design(&args.source, args.seed, args.gradients)?;
    let config = FitConfig {
        method,
        gradients: args.gradients,
        cap: args.cap,
        folds: args.folds,
        expansions: args.expansions,
        seed: args.seed,
    };
    let outcome = fit_design(&design, &config)?;
    outcome
        .model
        .write_text(BufWriter::new(File::create(&args.model_out)?))?;
    if let Some(p) = &args.report {
        outcome.write_report_csv(BufWriter::new(File::create(p)?))?;
    }
    if let Some(p) = &args.basis_out {
        outcome.model.basis().write_text(BufWriter::new(File::create(p)?))?;
    }
    print_outcome(&outcome, method, design.len());
    if let (Some(truth), Some(q)) = (truth, args.test_points) {
        let rmse = sparse_pce::benchmarks::rmse(&outcome.model, &truth, q, args.seed.wrapping_add(1))?;
        println!("test_rmse = {rmse:e}");
    }
    Ok(())
}

fn print_outcome(outcome: &FitOutcome, method: Method, m: usize) {
    let model = &outcome.model;
    println!("method = {method}");
    println!("samples = {m}");
    println!("rows = {}", outcome.rows);
    println!("basis_size = {}", model.basis().len());
    println!("nonzeros = {}", model.nnz());
    match &outcome.report {
        FitReport::Cv(r) => {
            let b = r.best_entry();
            if let Some(p) = b.degree {
                println!("degree = {p}");
            }
            println!("eps = {:e}", b.eps);
            println!("e_cv = {:e}", b.e_cv);
        }
        FitReport::Adapt(s) => {
            println!("iterations = {}", s.iteration);
            println!("e_cv = {:e}", s.best_e_cv);
            if s.degenerate {
                println!("degenerate = true");
            }
        }
    }
    println!("mean = {:e}", model.mean());
    println!("variance = {:e}", model.variance());
}

fn run_bench(args: &BenchArgs) -> Result<()> {
    let mut config = ExperimentConfig::default();
    if let Some(p) = &args.config {
        config.apply_text(&std::fs::read_to_string(p)?)?;
    }
    let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| config.set(k, &v));
    set("model", args.model.clone())?;
    set("dim", args.dim.map(|v| v.to_string()))?;
    set("stages", args.stages.map(|v| v.to_string()))?;
    set("methods", args.methods.clone())?;
    set("sizes", args.sizes.clone())?;
    set("trials", args.trials.map(|v| v.to_string()))?;
    set("seed", args.seed.map(|v| v.to_string()))?;
    set("gradients", args.gradients.then(|| "true".to_string()))?;
    set("family", args.family.clone())?;
    set("expansions", args.expansions.map(|v| v.to_string()))?;
    set("folds", args.folds.map(|v| v.to_string()))?;
    set("cap", args.cap.map(|v| v.to_string()))?;
    set("test_points", args.test_points.map(|v| v.to_string()))?;
    set("reference_samples", args.reference_samples.map(|v| v.to_string()))?;
    set("output", args.output.as_ref().map(|p| p.display().to_string()))?;
    set("workers", args.workers.map(|v| v.to_string()))?;

    let table = run_convergence(&config)?;
    match &config.output {
        Some(path) => {
            table.write_csv(BufWriter::new(File::create(path)?))?;
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
            let summary = path.with_file_name(format!("{stem}_summary.csv"));
            table.write_summary_csv(BufWriter::new(File::create(&summary)?))?;
            table.write_summary_csv(io::stdout().lock())?;
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn run_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let degrees = args
        .degrees
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| PceError::InvalidArgument(format!("bad degree `{s}`")))
        })
        .collect::<Result<Vec<u32>>>()?;
    let config = DiagnoseConfig {
        dim: args.dim,
        samples: args.samples,
        degrees,
        s: args.s,
        rip_trials: args.rip_trials,
        seed: args.seed,
        repeats: args.repeats,
        kind: args.family.parse::<PolyKind>()?,
    };
    let rows = diagnose_sweep(&config)?;
    write_diagnostics_csv(&rows, output_writer(args.output.as_deref())?)
}

fn run_sample(args: &SampleArgs) -> Result<()> {
    let src = &args.source;
    let truth = benchmark(src)?;
    let domains = match (&truth, &src.domains) {
        (Some(t), _) => t.domains.clone(),
        (None, Some(s)) => parse_domains(s, src.dim)?,
        (None, None) => {
            return Err(PceError::InvalidArgument(
                "either --model or --domains is required".into(),
            ))
        }
    };
    let m = src
        .size
        .ok_or_else(|| PceError::InvalidArgument("--size is required".into()))?;
    let design = match args.design.as_str() {
        "random" => random_design(m, &domains, args.seed)?,
        "lhs" => lhs_design_in(m, &domains, args.seed)?,
        "chebyshev" => chebyshev_design(m, &domains, args.seed)?,
        other => {
            return Err(PceError::Unknown {
                kind: "design",
                name: other.into(),
            })
        }
    };
    let design = match truth {
        Some(t) => t.evaluate(design, args.gradients)?,
        None if args.gradients => return Err(PceError::MissingGradients),
        None => design,
    };
    design.write_csv(output_writer(args.output.as_deref())?)
}

fn known_names(kind: &str) -> Option<&'static [&'static str]> {
    match kind {
        "model" => Some(&BENCHMARK_NAMES),
        "method" => Some(&["nonadaptive", "basis_selection", "oracle"]),
        "polynomial family" => Some(&["legendre", "hermite"]),
        "design" => Some(&["random", "lhs", "chebyshev"]),
        _ => None,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => run_fit(a, Method::Nonadaptive),
        Command::Adapt(a) => run_fit(a, Method::BasisSelection),
        Command::Bench(a) => run_bench(a),
        Command::Diagnose(a) => run_diagnose(a),
        Command::Sample(a) => run_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let PceError::Unknown { kind, .. } = &e {
                if let Some(names) = known_names(kind) {
                    eprintln!("expected one of: {}", names.join(", "));
                }
                eprintln!("run `pce --help` for usage");
            }
            ExitCode::from(2)
        }
    }
}
