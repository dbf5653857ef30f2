//! Command-line front end for the k-CNF-XOR satisfiability laboratory.
//!
//! Every run is reproducible: commands take an explicit `--seed`, and runs
//! that produce files also record a JSON manifest from which `cnfxor rerun`
//! regenerates the outputs byte-for-byte. Solver exit codes follow the SAT
//! ecosystem convention: 10 satisfiable, 20 unsatisfiable, 30 budget
//! exhausted; usage and validation errors exit 2, size-guard violations
//! exit 3, failed statistical checks exit 1.

mod manifest;
mod range;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cnfxor::bounds;
use cnfxor::count::{self, count_exact, CountError, CountMethod};
use cnfxor::dimacs;
use cnfxor::formula::RandomModelParams;
use cnfxor::lab::{self, CrossingRequest, FixedAxis, GridSpec};
use cnfxor::sample::sample_formula;
use cnfxor::solver::{solve, SolveBudget, Verdict};
use cnfxor::stattest::{self, StatTestError};
use manifest::{default_manifest_path, Manifest};
use range::parse_density_range;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[derive(Parser)]
#[command(name = "cnfxor", version, about = "random k-CNF-XOR phase-transition laboratory")]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Manifest path (default: first output path + ".manifest.json").
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Sample one random formula and write it as DIMACS-XOR.
    Gen(GenArgs),
    /// Decide a DIMACS-XOR file.
    Solve(SolveArgs),
    /// Count the satisfying assignments of a DIMACS-XOR file exactly.
    Count(CountArgs),
    /// Estimate the mean normalized log-count of satisfiable k-CNF draws.
    Phi(PhiArgs),
    /// Evaluate the theoretical transition curves over an r-grid.
    Bounds(BoundsArgs),
    /// Scan a (r, s) grid of satisfiability probabilities.
    Scan(ScanArgs),
    /// Locate the density where the satisfiability probability crosses a target.
    Crossing(CrossingArgs),
    /// Statistical checks of the random model's solution-space laws.
    #[command(subcommand)]
    Stattest(StatTestCommand),
    /// Re-execute a recorded run from its manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Args, Serialize, Deserialize, Clone)]
struct BudgetArgs {
    /// Stop the solver after this many conflicts.
    #[arg(long)]
    max_conflicts: Option<u64>,
    /// Wall-clock limit per solver call, in seconds.
    #[arg(long)]
    timeout_secs: Option<f64>,
}

impl BudgetArgs {
    fn to_budget(&self) -> SolveBudget {
        SolveBudget {
            max_conflicts: self.max_conflicts,
            wall_timeout: self.timeout_secs.map(Duration::from_secs_f64),
        }
    }
}

#[derive(Args, Serialize, Deserialize)]
struct GenArgs {
    #[arg(short)]
    k: usize,
    #[arg(short)]
    n: usize,
    /// k-clause density (clauses = ⌈rn⌉).
    #[arg(short, default_value_t = 0.0)]
    r: f64,
    /// XOR-clause density (clauses = ⌈sn⌉).
    #[arg(short, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct SolveArgs {
    file: PathBuf,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Args, Serialize, Deserialize)]
struct CountArgs {
    file: PathBuf,
}

#[derive(Args, Serialize, Deserialize)]
struct PhiArgs {
    #[arg(short)]
    k: usize,
    #[arg(short)]
    r: f64,
    #[arg(short)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the estimate as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct BoundsArgs {
    #[arg(short)]
    k: usize,
    /// r-grid as start:stop:step (endpoints inclusive) or a single value.
    #[arg(long)]
    r: String,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct ScanArgs {
    #[arg(short)]
    k: usize,
    #[arg(short)]
    n: usize,
    /// r-grid as start:stop:step or a single value.
    #[arg(long)]
    r: String,
    /// s-grid as start:stop:step or a single value.
    #[arg(long)]
    s: String,
    #[arg(long, default_value_t = 25)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FixChoice {
    R,
    S,
}

#[derive(Args, Serialize, Deserialize)]
struct CrossingArgs {
    #[arg(short)]
    k: usize,
    #[arg(short)]
    n: usize,
    /// Which density axis is held fixed.
    #[arg(long, value_enum)]
    fix: FixChoice,
    /// Value of the fixed density.
    #[arg(long, default_value_t = 0.0)]
    at: f64,
    /// Low end of the searched interval.
    #[arg(long)]
    lo: f64,
    /// High end of the searched interval.
    #[arg(long)]
    hi: f64,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    /// Probability level to locate.
    #[arg(long, default_value_t = 0.5)]
    target: f64,
    /// Bisection stops when the bracket is this narrow (density units).
    #[arg(long, default_value_t = lab::DEFAULT_RESOLUTION)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Write the estimate as a crossings CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
enum StatTestCommand {
    /// Satisfaction events of two fixed assignments under random XOR systems.
    Pairwise(PairwiseArgs),
    /// Survival of a solution set of pinned size under random XOR clauses.
    ResidualSat(ResidualArgs),
    /// Extinction of a small solution set under random XOR clauses.
    ResidualUnsat(ResidualArgs),
    /// Markov tail on the solution count of random k-CNF.
    Markov(MarkovArgs),
}

#[derive(Args, Serialize, Deserialize)]
struct PairwiseArgs {
    #[arg(short)]
    n: usize,
    /// Number of XOR clauses per sampled system.
    #[arg(short, long)]
    m_xor: usize,
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct ResidualArgs {
    #[arg(short)]
    n: usize,
    #[arg(short)]
    s: f64,
    #[arg(long, default_value_t = 3)]
    alpha: u32,
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct MarkovArgs {
    #[arg(short)]
    k: usize,
    #[arg(short)]
    r: f64,
    #[arg(short)]
    n: usize,
    #[arg(long, default_value_t = 1.5)]
    epsilon: f64,
    #[arg(long, default_value_t = 500)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize)]
struct RerunArgs {
    manifest: PathBuf,
}

struct Failure {
    exit: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure {
            exit: 2,
            message: message.to_string(),
        }
    }

    fn guard(message: impl ToString) -> Self {
        Failure {
            exit: 3,
            message: message.to_string(),
        }
    }

    fn io(context: &str, e: std::io::Error) -> Self {
        Failure {
            exit: 2,
            message: format!("{context}: {e}"),
        }
    }
}

fn count_failure(e: CountError) -> Failure {
    match e {
        CountError::GuardExceeded { .. } => Failure::guard(e),
        other => Failure::usage(other),
    }
}

fn stattest_failure(e: StatTestError) -> Failure {
    match e {
        StatTestError::Count(inner) => count_failure(inner),
        other => Failure::usage(other),
    }
}

struct RunOutput {
    exit: u8,
    outputs: Vec<PathBuf>,
}

impl RunOutput {
    fn ok(outputs: Vec<PathBuf>) -> Self {
        RunOutput { exit: 0, outputs }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }

    let (command, manifest_path) = match cli.command {
        Command::Rerun(args) => match Manifest::<Command>::load(&args.manifest) {
            Ok(loaded) => (loaded.command, Some(args.manifest)),
            Err(message) => {
                eprintln!("error: {message}");
                return ExitCode::from(2);
            }
        },
        other => (other, cli.manifest),
    };

    let started = Instant::now();
    match run(&command) {
        Ok(out) => {
            let path = manifest_path
                .or_else(|| out.outputs.first().map(|p| default_manifest_path(p)));
            if let Some(path) = path {
                let manifest = Manifest::new(
                    &command,
                    out.outputs.clone(),
                    started.elapsed().as_millis() as u64,
                );
                if let Err(e) = manifest.save(&path) {
                    eprintln!("error: cannot write manifest {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(out.exit)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.exit)
        }
    }
}

fn run(command: &Command) -> Result<RunOutput, Failure> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Count(args) => cmd_count(args),
        Command::Phi(args) => cmd_phi(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Scan(args) => cmd_scan(args),
        Command::Crossing(args) => cmd_crossing(args),
        Command::Stattest(test) => cmd_stattest(test),
        Command::Rerun(_) => Err(Failure::usage("nested rerun manifests are not supported")),
    }
}

fn cmd_gen(args: &GenArgs) -> Result<RunOutput, Failure> {
    let params =
        RandomModelParams::new(args.k, args.n, args.r, args.s).map_err(Failure::usage)?;
    let formula = sample_formula(&params, args.seed).map_err(Failure::usage)?;
    let mut file = BufWriter::new(
        File::create(&args.out).map_err(|e| Failure::io("cannot create output", e))?,
    );
    dimacs::write_dimacs_xor(&formula, &mut file).map_err(Failure::usage)?;
    file.flush().map_err(|e| Failure::io("write failed", e))?;
    println!(
        "wrote {}: n={} k={} with {} cnf + {} xor clauses (seed {})",
        args.out.display(),
        formula.n,
        formula.k,
        formula.cnf.len(),
        formula.xors.len(),
        args.seed
    );
    Ok(RunOutput::ok(vec![args.out.clone()]))
}

fn load_formula(path: &PathBuf) -> Result<cnfxor::Formula, Failure> {
    let file = File::open(path).map_err(|e| Failure::io("cannot open input", e))?;
    dimacs::parse_dimacs_xor(BufReader::new(file)).map_err(Failure::usage)
}

fn cmd_solve(args: &SolveArgs) -> Result<RunOutput, Failure> {
    let formula = load_formula(&args.file)?;
    let outcome = solve(&formula, args.budget.to_budget());
    let stats = outcome.stats;
    let exit = match outcome.verdict {
        Verdict::Sat(model) => {
            println!("SAT");
            let mut line = String::from("v");
            for var in 1..=formula.n as u32 {
                let lit = if model.get(var) {
                    var as i64
                } else {
                    -(var as i64)
                };
                line.push(' ');
                line.push_str(&lit.to_string());
            }
            line.push_str(" 0");
            println!("{line}");
            10
        }
        Verdict::Unsat => {
            println!("UNSAT");
            20
        }
        Verdict::Exhausted => {
            println!("EXHAUSTED");
            30
        }
    };
    println!(
        "c decisions={} propagations={} conflicts={} elapsed={:.3}s",
        stats.decisions,
        stats.propagations,
        stats.conflicts,
        stats.elapsed.as_secs_f64()
    );
    Ok(RunOutput {
        exit,
        outputs: vec![],
    })
}

fn cmd_count(args: &CountArgs) -> Result<RunOutput, Failure> {
    let formula = load_formula(&args.file)?;
    let result = count_exact(&formula).map_err(count_failure)?;
    println!("{}", result.count);
    println!(
        "c n={} method={}",
        result.n,
        match result.method {
            CountMethod::XorAffineEnumeration => "xor-affine-enumeration",
            CountMethod::FullEnumeration => "full-enumeration",
        }
    );
    Ok(RunOutput::ok(vec![]))
}

fn write_json<T: Serialize>(value: &T, path: &PathBuf) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, json + "\n").map_err(|e| Failure::io("cannot write report", e))
}

fn cmd_phi(args: &PhiArgs) -> Result<RunOutput, Failure> {
    let estimate = count::estimate_phi(args.k, args.r, args.n, args.trials, args.seed)
        .map_err(count_failure)?;
    println!(
        "phi_hat(k={}, r={}, n={}) = {:.6} ± {:.6} over {}/{} satisfiable trials",
        estimate.k,
        estimate.r,
        estimate.n,
        estimate.mean,
        estimate.stderr,
        estimate.sat_trials,
        estimate.trials
    );
    let mut outputs = Vec::new();
    if let Some(out) = &args.out {
        write_json(&estimate, out)?;
        outputs.push(out.clone());
    }
    Ok(RunOutput::ok(outputs))
}

fn cmd_bounds(args: &BoundsArgs) -> Result<RunOutput, Failure> {
    let grid = parse_density_range(&args.r).map_err(Failure::usage)?;
    let curve = bounds::curve(args.k, &grid).map_err(Failure::usage)?;
    match &args.out {
        Some(out) => {
            let mut file = BufWriter::new(
                File::create(out).map_err(|e| Failure::io("cannot create output", e))?,
            );
            bounds::write_curve_csv(&curve, &mut file)
                .map_err(|e| Failure::io("write failed", e))?;
            file.flush().map_err(|e| Failure::io("write failed", e))?;
            println!(
                "wrote {}: k={} beta={:.12} validity r < {:.6}, {} rows",
                out.display(),
                curve.k,
                curve.beta_k,
                curve.r_validity_max,
                curve.samples.len()
            );
            Ok(RunOutput::ok(vec![out.clone()]))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            bounds::write_curve_csv(&curve, &mut stdout)
                .map_err(|e| Failure::io("write failed", e))?;
            Ok(RunOutput::ok(vec![]))
        }
    }
}

fn cmd_scan(args: &ScanArgs) -> Result<RunOutput, Failure> {
    let spec = GridSpec {
        k: args.k,
        n: args.n,
        r_values: parse_density_range(&args.r).map_err(Failure::usage)?,
        s_values: parse_density_range(&args.s).map_err(Failure::usage)?,
        trials_per_cell: args.trials,
        budget: args.budget.to_budget(),
        master_seed: args.seed,
    };
    let result = lab::scan(&spec).map_err(Failure::usage)?;
    let mut file = BufWriter::new(
        File::create(&args.out).map_err(|e| Failure::io("cannot create output", e))?,
    );
    lab::write_scan_csv(&result, &mut file).map_err(|e| Failure::io("write failed", e))?;
    file.flush().map_err(|e| Failure::io("write failed", e))?;
    let flagged = result.cells.iter().filter(|c| c.p_sat().is_none()).count();
    println!(
        "wrote {}: {} cells x {} trials, {} flagged",
        args.out.display(),
        result.cells.len(),
        spec.trials_per_cell,
        flagged
    );
    Ok(RunOutput::ok(vec![args.out.clone()]))
}

fn cmd_crossing(args: &CrossingArgs) -> Result<RunOutput, Failure> {
    let request = CrossingRequest {
        k: args.k,
        n: args.n,
        fixed_axis: match args.fix {
            FixChoice::R => FixedAxis::R,
            FixChoice::S => FixedAxis::S,
        },
        fixed_value: args.at,
        interval: (args.lo, args.hi),
        trials_per_probe: args.trials,
        target: args.target,
        resolution: args.resolution,
        budget: args.budget.to_budget(),
        seed: args.seed,
    };
    let estimate = lab::estimate_crossing(&request).map_err(Failure::usage)?;
    println!(
        "crossing on {} axis at {:.4} in [{:.4}, {:.4}] (k={}, n={}, fixed {}={}, {} trials, {} censored)",
        match request.fixed_axis {
            FixedAxis::R => "s",
            FixedAxis::S => "r",
        },
        estimate.crossing,
        estimate.ci_low,
        estimate.ci_high,
        estimate.k,
        estimate.n,
        estimate.fixed_axis.as_str(),
        estimate.fixed_value,
        estimate.trials_used,
        estimate.exhausted_trials
    );
    let mut outputs = Vec::new();
    if let Some(out) = &args.out {
        let mut file = BufWriter::new(
            File::create(out).map_err(|e| Failure::io("cannot create output", e))?,
        );
        lab::write_crossings_csv(std::slice::from_ref(&estimate), &mut file)
            .map_err(|e| Failure::io("write failed", e))?;
        file.flush().map_err(|e| Failure::io("write failed", e))?;
        outputs.push(out.clone());
    }
    Ok(RunOutput::ok(outputs))
}

fn cmd_stattest(test: &StatTestCommand) -> Result<RunOutput, Failure> {
    let (pass, summary, json, out) = match test {
        StatTestCommand::Pairwise(a) => {
            let report =
                stattest::test_xor_pairwise_independence(a.n, a.m_xor, a.samples, a.seed)
                    .map_err(stattest_failure)?;
            (
                report.pass,
                format!(
                    "pairwise: p_single={:.6} p_joint={:.6} p_conditional={:.6} (expected {:.6}) -> {}",
                    report.p_single,
                    report.p_joint,
                    report.p_conditional,
                    report.expected_single,
                    verdict_word(report.pass)
                ),
                serde_json::to_value(&report).unwrap(),
                a.out.clone(),
            )
        }
        StatTestCommand::ResidualSat(a) => {
            let report = stattest::test_residual_sat_bound(a.n, a.s, a.alpha, a.samples, a.seed)
                .map_err(stattest_failure)?;
            (
                report.pass,
                format!(
                    "residual-sat: freq={:.5} wilson99={:.5} threshold={:.5} -> {}",
                    report.frequency,
                    report.wilson_lower_99,
                    report.threshold,
                    verdict_word(report.pass)
                ),
                serde_json::to_value(&report).unwrap(),
                a.out.clone(),
            )
        }
        StatTestCommand::ResidualUnsat(a) => {
            let report = stattest::test_residual_unsat_bound(a.n, a.s, a.alpha, a.samples, a.seed)
                .map_err(stattest_failure)?;
            (
                report.pass,
                format!(
                    "residual-unsat: freq={:.5} wilson99={:.5} threshold={:.5} -> {}",
                    report.frequency,
                    report.wilson_lower_99,
                    report.threshold,
                    verdict_word(report.pass)
                ),
                serde_json::to_value(&report).unwrap(),
                a.out.clone(),
            )
        }
        StatTestCommand::Markov(a) => {
            let report =
                stattest::test_markov_count_bound(a.k, a.r, a.n, a.epsilon, a.samples, a.seed)
                    .map_err(stattest_failure)?;
            (
                report.pass,
                format!(
                    "markov: violations={}/{} freq={:.5} tail={:.5} -> {}",
                    report.violations,
                    report.samples,
                    report.violation_frequency,
                    report.markov_tail,
                    verdict_word(report.pass)
                ),
                serde_json::to_value(&report).unwrap(),
                a.out.clone(),
            )
        }
    };
    println!("{summary}");
    let mut outputs = Vec::new();
    if let Some(out) = out {
        write_json(&json, &out)?;
        outputs.push(out);
    }
    Ok(RunOutput {
        exit: if pass { 0 } else { 1 },
        outputs,
    })
}

fn verdict_word(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
