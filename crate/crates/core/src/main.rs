use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use delaytomo::evaluation::{self, DeltaMode, ReferenceChoice, Scheme};
use delaytomo::format::sig5;
use delaytomo::matrix::coherence_over_visible;
use delaytomo::measurement::{generate_link_delays, DelayParams};
use delaytomo::solver::{solve_l1_l2_traced, trace_csv, SolveOptions};
use delaytomo::{
    build_differential_matrix, build_routing_matrix, enumerate_simple_paths, find_complementary_pair,
    select_paths, verify_coherence_theorem, CoherenceReport, MeasurementSet, PathSet, RoutingMatrix,
    SelectionStrategy, Topology, TomoError,
};

#[derive(Parser)]
#[command(name = "delaytomo", version, about = "Network delay tomography without clock synchronisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Routing matrix size, coherence and identifiability report.
    Analyze(AnalyzeArgs),
    /// Differential matrix dump and coherence for one reference path.
    Diff(DiffArgs),
    /// Simulated path measurements as CSV.
    Simulate(SimulateArgs),
    /// k-identifiability ratios as CSV.
    Evaluate(EvaluateArgs),
    /// k-identifiability ratio for every reference path.
    Sweep(SweepArgs),
    /// Enumerated or selected paths, in path-file format.
    Paths(PathArgs),
}

#[derive(Args, Clone)]
struct PathArgs {
    /// Topology file.
    #[arg(long)]
    topology: PathBuf,
    /// Path file; without it paths are enumerated from the topology.
    #[arg(long, conflicts_with = "select")]
    paths: Option<PathBuf>,
    /// Select N enumerated paths with a strategy: N:shortest-first|coverage-greedy|random.
    #[arg(long, value_name = "N:STRATEGY")]
    select: Option<String>,
    /// Hop limit for path enumeration (default |V|-1).
    #[arg(long)]
    max_hops: Option<usize>,
    /// Cap on enumerated paths.
    #[arg(long, default_value_t = 1000)]
    max_paths: usize,
    /// Seed for random path selection.
    #[arg(long, default_value_t = 0)]
    select_seed: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    paths: PathArgs,
}

#[derive(Args)]
struct DiffArgs {
    #[command(flatten)]
    paths: PathArgs,
    /// Reference path (1-based).
    #[arg(long)]
    reference: usize,
}

#[derive(Args, Clone)]
struct DelayArgs {
    /// Delay of a congested link in ms.
    #[arg(long, default_value_t = 10.0)]
    congested_delay: f64,
    /// Mean background delay of every link in ms; 0 gives noiseless delays.
    #[arg(long, default_value_t = 0.05)]
    background: f64,
    /// Clock offset in ms, or `random` for a draw in [-1e6, 1e6] with |offset| >= 1.
    #[arg(long, default_value = "random")]
    delta: String,
    /// Master seed; all randomness derives from it.
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    paths: PathArgs,
    #[command(flatten)]
    delay: DelayArgs,
    /// Congested links, 1-based, comma separated (e.g. 1,3 or e1,e3).
    #[arg(long, default_value = "")]
    congested: String,
    /// Reference path (1-based) for differential measurements.
    #[arg(long)]
    reference: Option<usize>,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Differential measurement CSV; needs --reference.
    #[arg(long, requires = "reference")]
    diff_out: Option<PathBuf>,
    /// Solve the differential system and write the solver trace here.
    #[arg(long, requires = "reference")]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Original,
    Differential,
    Both,
}

impl SchemeArg {
    fn schemes(self) -> Vec<Scheme> {
        match self {
            SchemeArg::Original => vec![Scheme::Original],
            SchemeArg::Differential => vec![Scheme::Differential],
            SchemeArg::Both => vec![Scheme::Original, Scheme::Differential],
        }
    }
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    delay: DelayArgs,
    /// Sizes of congested sets: `2`, `1-3`, `1..3` or `1,2,4`.
    #[arg(long, default_value = "1")]
    k: String,
    /// Support threshold in ms.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Regularisation weight relative to max |M^T b|.
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Largest number of congested sets enumerated exhaustively.
    #[arg(long, default_value_t = 100_000)]
    cap: u128,
    /// Sample this many congested sets when the cap is exceeded.
    #[arg(long)]
    samples: Option<u64>,
    /// Delay draws per congested set.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    paths: PathArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_enum, default_value = "differential")]
    scheme: SchemeArg,
    /// Reference path (1-based) or `sweep`.
    #[arg(long, default_value = "1")]
    reference: String,
    /// Nested path-set sizes to compare (prefixes of the path list), e.g. 3,4,6.
    #[arg(long)]
    sizes: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    paths: PathArgs,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

type CliResult<T> = std::result::Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Analyze(a) => analyze(&load_paths(&a.paths)?),
        Command::Diff(a) => diff(&load_paths(&a.paths)?, a.reference),
        Command::Simulate(a) => simulate(&a),
        Command::Evaluate(a) => evaluate(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Paths(a) => emit(None, &load_paths(&a)?.serialize()),
    }
}

fn load_paths(args: &PathArgs) -> CliResult<PathSet> {
    let text = read(&args.topology)?;
    let topology = Arc::new(Topology::parse(&text).map_err(|e| format!("{}: {e}", args.topology.display()))?);
    if let Some(file) = &args.paths {
        return PathSet::parse(topology, &read(file)?).map_err(|e| format!("{}: {e}", file.display()));
    }
    let all = enumerate_simple_paths(topology, args.max_paths, args.max_hops).map_err(err)?;
    match &args.select {
        None => Ok(all),
        Some(text) => {
            let (count, strategy) = text
                .split_once(':')
                .ok_or_else(|| format!("--select expects N:STRATEGY, got `{text}`"))?;
            let count: usize = count.parse().map_err(|_| format!("bad path count `{count}`"))?;
            let strategy: SelectionStrategy = strategy.parse().map_err(err)?;
            select_paths(&all, count, strategy, args.select_seed).map_err(err)
        }
    }
}

fn read(path: &FsPath) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Writes `text` to `out`, or stdout. A failed write leaves no file behind.
fn emit(out: Option<&FsPath>, text: &str) -> CliResult<()> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => fs::write(path, text).map_err(|e| {
            let _ = fs::remove_file(path);
            format!("{}: {e}", path.display())
        }),
    }
}

fn link_name(link: usize) -> String {
    format!("e{}", link + 1)
}

fn coherence_line(label: &str, report: Option<&CoherenceReport>, hidden: &[usize]) -> String {
    let mut line = match report {
        Some(c) => format!(
            "{label} = {} (columns {}, {}), k_max = {}",
            sig5(c.mu),
            link_name(c.argmax_pair.0),
            link_name(c.argmax_pair.1),
            c.k_max.map_or("unbounded".to_string(), |k| k.to_string())
        ),
        None => format!("{label} undefined (fewer than two non-zero columns)"),
    };
    if !hidden.is_empty() {
        let names: Vec<String> = hidden.iter().map(|&l| link_name(l)).collect();
        let _ = write!(line, ", zero columns {}", names.join(" "));
    }
    line
}

fn analyze(paths: &PathSet) -> CliResult<()> {
    let routing = build_routing_matrix(paths).map_err(err)?;
    let (coherence, uncovered) = coherence_over_visible(routing.entries());
    let mut out = String::new();
    let _ = writeln!(out, "paths I = {}", routing.rows());
    let _ = writeln!(out, "links J = {}", routing.cols());
    let _ = writeln!(out, "{}", coherence_line("mu", coherence.as_ref(), &uncovered));
    let one_id = uncovered.is_empty() && coherence.as_ref().is_some_and(|c| c.is_one_identifiable());
    let _ = writeln!(out, "1-identifiable: {}", if one_id { "yes" } else { "no" });
    match find_complementary_pair(routing.entries()) {
        Some((a, b)) => {
            let _ = writeln!(out, "complementary pair: {} {}", link_name(a), link_name(b));
        }
        None => out.push_str("no complementary pair\n"),
    }
    if uncovered.is_empty() {
        let report = verify_coherence_theorem(&routing).map_err(err)?;
        for rc in &report.per_reference {
            let label = format!("reference {}: mu", rc.reference + 1);
            let _ = writeln!(out, "{}", coherence_line(&label, rc.coherence.as_ref(), &rc.cancelled_links));
        }
        let verdict = if !report.premise_one_identifiable {
            "not applicable (routing matrix not 1-identifiable)"
        } else if report.holds() {
            "holds"
        } else {
            "VIOLATED"
        };
        let _ = writeln!(out, "coherence dichotomy: {verdict}");
    } else {
        out.push_str("coherence dichotomy: not applicable (uncovered links)\n");
    }
    emit(None, &out)
}

fn reference_index(reference: usize, routing: &RoutingMatrix) -> CliResult<usize> {
    if reference == 0 || reference > routing.rows() {
        return Err(TomoError::ReferenceOutOfRange {
            reference,
            rows: routing.rows(),
        }
        .to_string());
    }
    Ok(reference - 1)
}

fn diff(paths: &PathSet, reference: usize) -> CliResult<()> {
    let routing = build_routing_matrix(paths).map_err(err)?;
    let r = reference_index(reference, &routing)?;
    let differential = build_differential_matrix(&routing, r).map_err(err)?;
    let (coherence, cancelled) = coherence_over_visible(differential.entries());
    let mut out = differential.dump();
    let _ = writeln!(out, "reference l1 = {}", routing.row_l1(r));
    let _ = writeln!(out, "{}", coherence_line("mu", coherence.as_ref(), &cancelled));
    emit(None, &out)
}

fn parse_links(list: &str, num_links: usize) -> CliResult<Vec<usize>> {
    let mut links = Vec::new();
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let digits = token.strip_prefix('e').unwrap_or(token);
        let link: usize = digits.parse().map_err(|_| format!("bad link `{token}`"))?;
        if link == 0 || link > num_links {
            return Err(format!("link `{token}` outside e1..e{num_links}"));
        }
        links.push(link - 1);
    }
    links.sort_unstable();
    links.dedup();
    Ok(links)
}

fn parse_k(text: &str) -> CliResult<Vec<usize>> {
    let bad = || format!("bad k range `{text}`");
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let range = text.split_once("..").or_else(|| text.split_once('-'));
    let mut ks: Vec<usize> = match range {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            (num(lo)?..=num(hi)?).collect()
        }
        None => text.split(',').map(num).collect::<CliResult<_>>()?,
    };
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(bad());
    }
    Ok(ks)
}

fn parse_delta(text: &str) -> CliResult<DeltaMode<f64>> {
    if text == "random" {
        return Ok(DeltaMode::default_random());
    }
    let v: f64 = text.parse().map_err(|_| format!("--delta expects a number or `random`, got `{text}`"))?;
    if !v.is_finite() {
        return Err(format!("--delta must be finite, got `{text}`"));
    }
    Ok(DeltaMode::Fixed(v))
}

fn delay_params(args: &DelayArgs) -> DelayParams<f64> {
    DelayParams {
        congested_delay: args.congested_delay,
        background_mean: args.background,
        seed: args.seed,
    }
}

/// Stream separating the offset draw from the link-delay draw.
const OFFSET_STREAM: u64 = 0x0ff5_e7d1_a5ee_d001;

fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let paths = load_paths(&args.paths)?;
    let routing = build_routing_matrix(&paths).map_err(err)?;
    let congested = parse_links(&args.congested, routing.cols())?;
    let x = generate_link_delays(routing.cols(), &congested, delay_params(&args.delay)).map_err(err)?;
    let delta = parse_delta(&args.delay.delta)?.draw(&mut ChaCha8Rng::seed_from_u64(args.delay.seed ^ OFFSET_STREAM));
    let reference = args.reference.map(|r| reference_index(r, &routing)).transpose()?;
    let set = MeasurementSet::measure(routing.entries(), &x.delays, delta, reference).map_err(err)?;

    let mut written: Vec<&FsPath> = Vec::new();
    let result = (|| {
        emit(args.out.as_deref(), &set.to_csv())?;
        written.extend(args.out.as_deref());
        if let (Some(path), Some(csv)) = (&args.diff_out, set.differential_csv()) {
            emit(Some(path), &csv)?;
            written.push(path);
        }
        if let (Some(path), Some(r), Some(b)) = (&args.trace, reference, &set.differential) {
            let m = build_differential_matrix(&routing, r).map_err(err)?;
            let (solved, trace) = solve_l1_l2_traced(m.entries(), b, &SolveOptions::<f64>::default()).map_err(err)?;
            emit(Some(path), &trace_csv(&trace))?;
            let support: Vec<String> = solved.support.iter().map(|&l| link_name(l)).collect();
            eprintln!(
                "recovered support: {{{}}} after {} iterations",
                support.join(", "),
                solved.iterations
            );
        }
        Ok(())
    })();
    if result.is_err() {
        for path in written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

fn experiment_config(args: &ExperimentArgs, scheme: Scheme, reference: ReferenceChoice) -> CliResult<evaluation::ExperimentConfig<f64>> {
    let mut cfg = evaluation::ExperimentConfig::new(scheme, reference, parse_k(&args.k)?, args.delay.seed);
    cfg.delay = delay_params(&args.delay);
    cfg.delta = parse_delta(&args.delay.delta)?;
    cfg.solver = SolveOptions {
        lambda_rel: args.lambda,
        support_threshold: args.threshold,
        ..SolveOptions::default()
    };
    cfg.enumeration_cap = args.cap;
    cfg.sample_size = args.samples;
    cfg.repeats = args.repeats;
    Ok(cfg)
}

fn with_jobs<T: Send>(jobs: usize, work: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    if jobs == 0 {
        return Err("--jobs must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(err)?
        .install(work)
}

fn context_text(args: &PathArgs, paths: &PathSet) -> String {
    format!("{}\n{}", paths.topology().serialize(), paths.serialize())
        + &args.select.clone().unwrap_or_default()
}

fn print_summary(reports: &[evaluation::RatioReport]) {
    for rep in reports {
        let reference = rep.reference.map_or(String::new(), |r| format!(" reference {} (l1 {})", r + 1, rep.reference_l1.unwrap_or(0)));
        for row in &rep.per_k {
            eprintln!(
                "{} I={}{} k={}: R = {} ({}/{})",
                rep.scheme,
                rep.paths,
                reference,
                row.k,
                sig5(row.ratio),
                row.identified,
                row.total
            );
        }
    }
}

fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let paths = load_paths(&args.paths)?;
    let reference = if args.reference == "sweep" {
        ReferenceChoice::Sweep
    } else {
        let r: usize = args
            .reference
            .parse()
            .map_err(|_| format!("--reference expects a path number or `sweep`, got `{}`", args.reference))?;
        if r == 0 || r > paths.len() {
            return Err(TomoError::ReferenceOutOfRange { reference: r, rows: paths.len() }.to_string());
        }
        ReferenceChoice::Row(r - 1)
    };
    let schemes = args.scheme.schemes();
    let cfg = experiment_config(&args.experiment, schemes[0], reference)?;
    let sets = match &args.sizes {
        None => vec![paths.clone()],
        Some(list) => {
            let sizes = list
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad path-set size `{s}`")))
                .collect::<CliResult<Vec<_>>>()?;
            sizes.iter().map(|&n| paths.prefix(n).map_err(err)).collect::<CliResult<Vec<_>>>()?
        }
    };
    let reports = with_jobs(args.experiment.jobs, || {
        evaluation::row_count_comparison(&sets, &cfg, &schemes).map_err(err)
    })?;
    let hash = cfg.fingerprint(&(context_text(&args.paths, &paths) + args.sizes.as_deref().unwrap_or("")));
    emit(args.experiment.out.as_deref(), &evaluation::results_csv(&reports, &hash))?;
    print_summary(&reports);
    Ok(())
}

fn sweep(args: &SweepArgs) -> CliResult<()> {
    let paths = load_paths(&args.paths)?;
    let routing = build_routing_matrix(&paths).map_err(err)?;
    let cfg = experiment_config(&args.experiment, Scheme::Differential, ReferenceChoice::Sweep)?;
    let reports = with_jobs(args.experiment.jobs, || evaluation::reference_sweep(&routing, &cfg).map_err(err))?;
    let hash = cfg.fingerprint(&context_text(&args.paths, &paths));
    emit(args.experiment.out.as_deref(), &evaluation::results_csv(&reports, &hash))?;
    print_summary(&reports);
    Ok(())
}
