use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fairdiv::bench::{feasibility_summary, run_bench_with, BenchConfig, Engine, CSV_HEADER};
use fairdiv::dp::{decide_exists_um_and_fair_with, solve_um_within_with, DpConfig};
use fairdiv::gen::{gen_mallows_borda, gen_reduction, gen_uniform, MallowsConfig, Reduction, ReductionKind};
use fairdiv::milp::{build_milp, write_lp};
use fairdiv::model::FORMAT_VERSION;
use fairdiv::oracle::{brute_force_decide_with, brute_force_um_within_with, OracleConfig};
use fairdiv::{is_fair, um_welfare, Allocation, Criterion, Error, Instance, Limits, SolveOutcome};

const EXIT_NO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

/// Utilitarian-maximal allocation of indivisible goods under fairness constraints.
///
/// Exit status: 0 success, 1 a computed "no" (decision false, infeasible,
/// allocation not fair), 2 usage or input error, 3 time or budget exhausted.
#[derive(Parser)]
#[command(name = "fairdiv", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance (JSON on stdout or to --output).
    Gen(GenArgs),
    /// Maximize welfare subject to a fairness criterion.
    Solve(SolveArgs),
    /// Decide whether some welfare-maximizing allocation is also fair.
    Decide(DecideArgs),
    /// Evaluate a fairness criterion on a given allocation.
    Check(CheckArgs),
    /// Write the MILP for UM within PROP, EF, PROP1 or EF1 in CPLEX LP format.
    ExportMilp(ExportArgs),
    /// Runtime and feasibility sweep over Mallows-Borda instances (CSV).
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Mallows,
    Uniform,
    Reduction,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "mallows")]
    model: Model,
    /// Number of agents (mallows, uniform).
    #[arg(long, short = 'n', default_value_t = 3)]
    n: usize,
    /// Number of items (mallows, uniform).
    #[arg(long, short = 'm', default_value_t = 3)]
    m: usize,
    /// Mallows dispersion in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    phi: f64,
    /// Largest value drawn by the uniform model.
    #[arg(long, default_value_t = 10)]
    vmax: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reduction kind: partition-ef1, partition-prop1, partition-efx,
    /// 3partition-ef1, 3partition-prop1, knapsack-prop1.
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated integers; for knapsack, value,weight pairs.
    #[arg(long)]
    payload: Option<String>,
    /// Target T for 3-Partition, or value target for Knapsack.
    #[arg(long)]
    target: Option<u64>,
    /// Instance name stored in the file.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveEngine {
    Dp,
    Brute,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Instance JSON file, or - for stdin.
    instance: PathBuf,
    #[arg(long, short = 'c')]
    criterion: Criterion,
    #[arg(long, value_enum, default_value = "dp")]
    engine: SolveEngine,
    /// Wall-clock limit, e.g. 60s or 500ms.
    #[arg(long, value_parser = parse_duration)]
    timeout: Option<Duration>,
    /// Follow the result with one JSON line per DP level.
    #[arg(long)]
    stats: bool,
    /// Include elapsed_ns in the stats (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    /// Disable the common-ranking shortcut for EF1/EFx.
    #[arg(long)]
    no_fast_path: bool,
    /// Oracle enumeration budget (brute engine).
    #[arg(long, default_value_t = fairdiv::oracle::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(clap::Args)]
struct DecideArgs {
    instance: PathBuf,
    #[arg(long, short = 'c')]
    criterion: Criterion,
    #[arg(long, value_enum, default_value = "dp")]
    engine: SolveEngine,
    #[arg(long, value_parser = parse_duration)]
    timeout: Option<Duration>,
    #[arg(long, default_value_t = fairdiv::oracle::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(clap::Args)]
struct CheckArgs {
    instance: PathBuf,
    /// Allocation JSON file.
    allocation: PathBuf,
    #[arg(long, short = 'c')]
    criterion: Criterion,
}

#[derive(clap::Args)]
struct ExportArgs {
    instance: PathBuf,
    /// One of prop, ef, prop1, ef1.
    #[arg(long, short = 'c')]
    criterion: Criterion,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 7)]
    n_max: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1.0")]
    phis: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Any of dp, brute, milp (milp needs --milp-cmd).
    #[arg(long, value_delimiter = ',', default_value = "dp")]
    engines: Vec<Engine>,
    #[arg(long, value_delimiter = ',', default_value = "ef,ef1,prop,prop1")]
    criteria: Vec<Criterion>,
    /// Per-solve limit; 0 disables it.
    #[arg(long, value_parser = parse_duration, default_value = "60s")]
    timeout: Duration,
    /// Solver command for MILP rows; {lp} is replaced by the LP file path.
    #[arg(long)]
    milp_cmd: Option<String>,
    /// Worker threads. Timings are least disturbed with 1.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn parse_duration(s: &str) -> Result<Duration, String> {
    humantime::parse_duration(s)
        .or_else(|_| s.parse::<f64>().map(Duration::from_secs_f64).map_err(|e| e.to_string()))
        .map_err(|e| format!("invalid duration '{s}': {e}"))
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path)
            .with_context(|| format!("cannot open {}", path.display()))?
            .read_to_string(&mut text)?;
    }
    Ok(text)
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    Instance::from_json(&read_input(path)?).with_context(|| format!("reading {}", path.display()))
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json(value: &Value) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn limits(timeout: Option<Duration>) -> Limits {
    timeout.map_or(Limits::unlimited(), Limits::with_timeout)
}

fn gen(args: GenArgs) -> anyhow::Result<u8> {
    let inst = match args.model {
        Model::Mallows => gen_mallows_borda(&MallowsConfig {
            n: args.n,
            m: args.m,
            phi: args.phi,
            seed: args.seed,
        })?,
        Model::Uniform => gen_uniform(args.n, args.m, args.vmax, args.seed)?,
        Model::Reduction => {
            let kind: ReductionKind = args
                .kind
                .as_deref()
                .ok_or_else(|| Error::Usage("--model reduction needs --kind".into()))?
                .parse()?;
            let payload = parse_payload(args.payload.as_deref().unwrap_or(""))?;
            gen_reduction(&Reduction::from_payload(kind, &payload, args.target)?)?
        }
    };
    let inst = match args.name {
        Some(name) => inst.with_name(name),
        None => inst,
    };
    let mut out = output(args.output.as_deref())?;
    inst.write_to(&mut out)?;
    out.flush()?;
    Ok(0)
}

fn parse_payload(s: &str) -> Result<Vec<u64>, Error> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Usage(format!("payload entry '{t}' is not a non-negative integer"))))
        .collect()
}

fn solve(args: SolveArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&args.instance)?;
    let out: SolveOutcome = match args.engine {
        SolveEngine::Dp => {
            let cfg = DpConfig {
                limits: limits(args.timeout),
                common_ranking_fast_path: !args.no_fast_path,
            };
            solve_um_within_with(&inst, args.criterion, &cfg)?
        }
        SolveEngine::Brute => {
            let cfg = OracleConfig {
                budget: args.budget,
                limits: limits(args.timeout),
            };
            brute_force_um_within_with(&inst, args.criterion, &cfg)?
        }
    };
    let mut stats = json!({ "states_explored": out.stats.states_explored });
    if args.timing {
        stats["elapsed_ns"] = json!(out.stats.elapsed_ns);
    }
    print_json(&json!({
        "format": FORMAT_VERSION,
        "status": if out.is_found() { "found" } else { "infeasible" },
        "welfare": out.optimum(),
        "owner": out.allocation.as_ref().map(|a| a.owner().to_vec()),
        "stats": stats,
    }))?;
    if args.stats {
        for (k, states) in out.stats.states_per_level.iter().enumerate() {
            print_json(&json!({ "level": k + 1, "states": states }))?;
        }
    }
    Ok(if out.is_found() { 0 } else { EXIT_NO })
}

fn decide(args: DecideArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&args.instance)?;
    let (answer, w0, w1) = match args.engine {
        SolveEngine::Dp => {
            let cfg = DpConfig {
                limits: limits(args.timeout),
                ..DpConfig::default()
            };
            let d = decide_exists_um_and_fair_with(&inst, args.criterion, &cfg)?;
            (d.answer, d.w0, d.w1)
        }
        SolveEngine::Brute => {
            let cfg = OracleConfig {
                budget: args.budget,
                limits: limits(args.timeout),
            };
            if args.criterion == Criterion::None {
                bail!(Error::Usage("decide needs a fairness criterion, not none".into()));
            }
            let answer = brute_force_decide_with(&inst, args.criterion, &cfg)?;
            let w1 = brute_force_um_within_with(&inst, args.criterion, &cfg)?.optimum();
            (answer, um_welfare(&inst).0, w1)
        }
    };
    print_json(&json!({ "format": FORMAT_VERSION, "answer": answer, "w0": w0, "w1": w1 }))?;
    Ok(if answer { 0 } else { EXIT_NO })
}

fn check(args: CheckArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&args.instance)?;
    let alloc = Allocation::from_json(&read_input(&args.allocation)?)
        .with_context(|| format!("reading {}", args.allocation.display()))?;
    let fair = is_fair(&inst, &alloc, args.criterion)?;
    print_json(&json!({ "format": FORMAT_VERSION, "criterion": args.criterion, "fair": fair }))?;
    Ok(if fair { 0 } else { EXIT_NO })
}

fn export_milp(args: ExportArgs) -> anyhow::Result<u8> {
    let inst = read_instance(&args.instance)?;
    let model = build_milp(&inst, args.criterion)?;
    let mut out = output(args.output.as_deref())?;
    write_lp(&model, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn bench(args: BenchArgs) -> anyhow::Result<u8> {
    let cfg = BenchConfig {
        n_min: args.n_min,
        n_max: args.n_max,
        phis: args.phis,
        samples: args.samples,
        seed: args.seed,
        engines: args.engines,
        criteria: args.criteria,
        timeout: (!args.timeout.is_zero()).then_some(args.timeout),
        milp_cmd: args.milp_cmd,
        jobs: args.jobs,
    };
    cfg.validate()?;
    let mut out = fairdiv::bench::csv_writer(output(args.output.as_deref())?);
    out.write_record(CSV_HEADER.split(','))?;
    let mut rows = Vec::new();
    run_bench_with(&cfg, |r| {
        out.serialize(&r)?;
        out.flush()?;
        rows.push(r);
        Ok(())
    })?;
    out.flush()?;
    let s = feasibility_summary(&rows);
    eprintln!(
        "{} instances: EF feasible {}/{} ({:.1}%), PROP feasible {}/{} ({:.1}%)",
        s.instances,
        s.ef_feasible,
        s.ef_known,
        100.0 * s.ef_rate(),
        s.prop_feasible,
        s.prop_known,
        100.0 * s.prop_rate()
    );
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_resource() => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Gen(a) => gen(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Decide(a) => decide(a),
        Cmd::Check(a) => check(a),
        Cmd::ExportMilp(a) => export_milp(a),
        Cmd::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("fairdiv: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
