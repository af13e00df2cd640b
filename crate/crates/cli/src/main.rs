//! `dcm` — command-line front end for the directed configuration model
//! laboratory.
//!
//! Subcommands: `gen` builds a degree sequence from a parametric family,
//! `sample` draws one multigraph from a sequence, `analyze` censuses an
//! edge-list file, `explore` traces the stub-revealing walk, `experiment`
//! runs a full Monte Carlo experiment from a JSON config, and `verify`
//! runs the exact verification suite.
//!
//! Exit codes: 0 success, 2 bad configuration or input, 3 verification
//! found a violated bound, 4 I/O failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use dcm_core::degseq::{build_family, BiDegreeSequence, DegreeParams, FamilyKind, FamilySpec};
use dcm_core::explore::{explore_out_component, StubOrder};
use dcm_core::harness::{
    attach_conjecture_comparison, derive_seed, run_experiment, run_n_sweep, ExperimentConfig,
    HarnessError,
};
use dcm_core::oracle::run_verification_suite;
use dcm_core::sampler::{sample_configuration, MultiDigraph, StubLayout};
use dcm_core::scc;

const EXIT_CONFIG: u8 = 2;
const EXIT_VIOLATION: u8 = 3;
const EXIT_IO: u8 = 4;

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(name = "dcm", version, about = "Directed configuration model laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a degree sequence from a parametric family and write its text form.
    Gen(GenArgs),
    /// Draw one multigraph from a degree sequence file and write its edge list.
    Sample(SampleArgs),
    /// Census the strongly connected components of an edge-list file.
    Analyze(AnalyzeArgs),
    /// Trace the stub-revealing exploration walk over a degree sequence.
    Explore(ExploreArgs),
    /// Run a Monte Carlo experiment described by a JSON config file.
    Experiment(ExperimentArgs),
    /// Run the exact verification suite; exits 3 if any bound is violated.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Mix,
    Poissonized,
}

#[derive(Args)]
struct GenArgs {
    /// Family shape.
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Number of vertices.
    #[arg(long)]
    n: u64,
    /// Target subcriticality Q, in (−1, 0].
    #[arg(long, allow_hyphen_values = true)]
    target_q: f64,
    /// Mix family: share of vertices given degree (2,2).
    #[arg(long)]
    mix_b_share: Option<f64>,
    /// Poissonized family: raw Poisson rate (skips calibration).
    #[arg(long)]
    poisson_rate: Option<f64>,
    /// Master seed for randomized families.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Degree sequence file (from `gen`, or hand-written).
    #[arg(long)]
    seq: PathBuf,
    /// Seed for the matching draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Edge-list file (from `sample`, or hand-written).
    #[arg(long)]
    graph: PathBuf,
    /// Output path for the census JSON (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Fifo,
    Lifo,
}

#[derive(Args)]
struct ExploreArgs {
    /// Degree sequence file.
    #[arg(long)]
    seq: PathBuf,
    /// Start vertex (0-indexed).
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Seed for the stub draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of steps.
    #[arg(long, default_value_t = 1_000_000)]
    step_cap: u64,
    /// Stop once the drift Q_t reaches this floor.
    #[arg(long, allow_hyphen_values = true)]
    drift_floor: Option<f64>,
    /// Frontier discipline for the revealed stubs.
    #[arg(long, value_enum, default_value_t = OrderArg::Fifo)]
    order: OrderArg,
    /// Output path for the trace CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON (exact field set; unknown keys rejected).
    #[arg(long)]
    config: PathBuf,
    /// Also rerun the experiment at these sizes (comma-separated n values)
    /// and report the complex/long-cycle scaling table.
    #[arg(long, value_delimiter = ',')]
    sweep: Option<Vec<u64>>,
    /// Trials per sweep size (defaults to the config's trial count).
    #[arg(long)]
    sweep_trials: Option<u64>,
    /// Also draw this many limit-law samples and attach the joint-law
    /// comparison to the summary.
    #[arg(long, value_name = "DRAWS")]
    conjecture: Option<usize>,
}

// ---------------------------------------------------------------------------
// Failure plumbing
// ---------------------------------------------------------------------------

struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: EXIT_CONFIG }
    }

    fn io(path: &Path, source: &std::io::Error) -> Self {
        Self { message: format!("{}: {source}", path.display()), code: EXIT_IO }
    }
}

impl From<HarnessError> for Failure {
    fn from(err: HarnessError) -> Self {
        let code = match err {
            HarnessError::Io { .. } => EXIT_IO,
            _ => EXIT_CONFIG,
        };
        Self { message: err.to_string(), code }
    }
}

impl From<dcm_core::degseq::DegSeqError> for Failure {
    fn from(err: dcm_core::degseq::DegSeqError) -> Self {
        Self::config(err.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, &e))
}

fn emit(out: Option<&PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent).map_err(|e| Failure::io(parent, &e))?;
                }
            }
            fs::write(path, content).map_err(|e| Failure::io(path, &e))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = FamilySpec {
        kind: match args.family {
            FamilyArg::Mix => FamilyKind::Mix,
            FamilyArg::Poissonized => FamilyKind::Poissonized,
        },
        n: args.n,
        target_q: args.target_q,
        mix_b_share: args.mix_b_share,
        poisson_rate: args.poisson_rate,
    };
    let mut rng = ChaCha12Rng::from_seed(derive_seed(args.seed, "family", 0));
    let seq = build_family(&spec, &mut rng)?;
    emit(args.out.as_ref(), &sequence_file_string(&seq))
}

/// Degree-sequence text in the `@counts` form, with the achieved
/// parameters as trailing comments.
fn sequence_file_string(seq: &BiDegreeSequence) -> String {
    use std::fmt::Write as _;
    let params = DegreeParams::compute(seq).summary();
    let mut out = String::from("@counts\n");
    for (&(d_in, d_out), &count) in seq.counts() {
        let _ = writeln!(out, "{d_in} {d_out} {count}");
    }
    let _ = writeln!(out, "# n = {}, m = {}", params.n, params.m);
    let _ = writeln!(
        out,
        "# Q = {}, R_minus = {}, R_plus = {}",
        params.q, params.r_minus, params.r_plus
    );
    out
}

fn cmd_sample(args: &SampleArgs) -> Result<(), Failure> {
    let seq = BiDegreeSequence::parse_str(&read_file(&args.seq)?)?;
    let layout = StubLayout::new(&seq);
    let mut rng = ChaCha12Rng::from_seed(derive_seed(args.seed, "sample", 0));
    let matching = sample_configuration(&seq, &mut rng);
    let graph = MultiDigraph::from_matching(&seq, &layout, &matching);
    emit(args.out.as_ref(), &graph.to_edge_list_string())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let graph =
        MultiDigraph::parse_edge_list(&read_file(&args.graph)?).map_err(Failure::config)?;
    let census = scc::census(&graph);
    let mut json = serde_json::to_string_pretty(&census).expect("census serializes");
    json.push('\n');
    emit(args.out.as_ref(), &json)
}

fn cmd_explore(args: &ExploreArgs) -> Result<(), Failure> {
    let seq = BiDegreeSequence::parse_str(&read_file(&args.seq)?)?;
    if args.start >= seq.n() {
        return Err(Failure::config(format!(
            "start vertex {} out of range for n = {}",
            args.start,
            seq.n()
        )));
    }
    let layout = StubLayout::new(&seq);
    let mut rng = ChaCha12Rng::from_seed(derive_seed(args.seed, "explore", 0));
    let order = match args.order {
        OrderArg::Fifo => StubOrder::Fifo,
        OrderArg::Lifo => StubOrder::Lifo,
    };
    let trace = explore_out_component(
        &seq,
        &layout,
        args.start,
        &mut rng,
        args.step_cap,
        args.drift_floor,
        order,
    );
    emit(args.out.as_ref(), &trace.to_csv_string())
}

fn cmd_experiment(args: &ExperimentArgs) -> Result<(), Failure> {
    let config = ExperimentConfig::from_json_str(&read_file(&args.config)?)?;
    let output = run_experiment(&config)?;
    let mut summary = output.summary;

    if let Some(draws) = args.conjecture {
        attach_conjecture_comparison(&config, &mut summary, &output.records, draws)?;
        // Refresh the persisted summary so the file carries the comparison.
        if let Some(path) = &config.summary_json {
            let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
            fs::write(path, json).map_err(|e| Failure::io(path, &e))?;
        }
    }

    let sweep_rows = match &args.sweep {
        Some(ns) => {
            let trials = args.sweep_trials.unwrap_or(config.trials);
            Some(run_n_sweep(&config, ns, trials)?)
        }
        None => None,
    };

    if let Some(path) = &config.summary_json {
        eprintln!("experiment done: {} trials, summary at {}", summary.trials, path.display());
        if let Some(rows) = &sweep_rows {
            println!("{}", serde_json::to_string_pretty(rows).expect("rows serialize"));
        }
    } else if let Some(rows) = &sweep_rows {
        // stdout must stay a single JSON document even when it carries both.
        let combined = serde_json::json!({ "summary": summary, "sweep": rows });
        println!("{}", serde_json::to_string_pretty(&combined).expect("combined serializes"));
    } else {
        println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    }
    Ok(())
}

fn cmd_verify() -> Result<(), Failure> {
    let results = run_verification_suite();
    let mut failed = 0;
    for check in &results {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status} {} — {}", check.name, check.detail);
        if !check.passed {
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(Failure {
            message: format!("{failed} of {} checks violated a bound", results.len()),
            code: EXIT_VIOLATION,
        });
    }
    println!("all {} checks passed", results.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Explore(args) => cmd_explore(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Verify => cmd_verify(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
