use std::collections::BTreeMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bpmatch::bp::MessageInit;
use bpmatch::graph::{parse_graph, Graph, Mode};
use bpmatch::harness::{
    certify, random_init, solve, sweep, tree_verify, Density, HarnessError, InstanceSpec, SolveConfig, StopRequest,
    SweepConfig, TreeVerifyConfig, EXIT_MISMATCH, EXIT_OK, EXIT_VALIDATION,
};
use bpmatch::lp::cert::write_certificate;
use bpmatch::numeric::{parse_rational, NumericMode, Rational};
use bpmatch::reduce::reduce_trivial;
use bpmatch::schedule::{make_schedule, validate_schedule, Schedule, ScheduleSpec};
use bpmatch::tree::{build_tree, DEFAULT_NODE_CAP};

#[derive(Parser, Debug)]
#[command(name = "bpmatch", version, about = "Min-sum belief propagation for b-matchings, with exact verification")]
struct Cli {
    /// perfect or nonperfect.
    #[arg(long, global = true, default_value = "perfect")]
    mode: Mode,
    /// Seed for random initial messages.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run message passing on one instance.
    Solve(SolveArgs),
    /// Tightness verdict, dual certificate, slackness report and iteration bound.
    Certify(CertifyArgs),
    /// Compare computation-tree DP values against message passing.
    TreeVerify(TreeVerifyArgs),
    /// Random-instance sweep over a seed range.
    Sweep(SweepArgs),
    /// Check a schedule for redundant updates.
    ScheduleValidate(ScheduleValidateArgs),
}

#[derive(Args, Debug)]
struct InitArgs {
    /// weights, zero, const=VALUE, random, or file=PATH.
    #[arg(long, default_value = "weights")]
    init: String,
    /// Value range LO:HI for `--init random`.
    #[arg(long, default_value = "-10:10")]
    init_range: String,
}

#[derive(Args, Debug)]
struct SolveArgs {
    graph: PathBuf,
    /// sync, roundrobin, random:SEED, or file=PATH.
    #[arg(long, default_value = "sync")]
    schedule: String,
    #[command(flatten)]
    init: InitArgs,
    /// budget=T, window=K, or certified; defaults to the certified bound when one exists.
    #[arg(long)]
    stop: Option<String>,
    /// Run the oracle and dual certificate alongside message passing.
    #[arg(long)]
    certify: bool,
    /// Certificate file overriding the solver's dual.
    #[arg(long)]
    dual_file: Option<PathBuf>,
    /// Write the dual certificate used here.
    #[arg(long)]
    emit_cert: Option<PathBuf>,
    /// Write the message trace as `t i j value` lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Accept redundant schedules; the run is then reported uncertified.
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "exact")]
    numeric: Numeric,
    /// Include wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    graph: PathBuf,
    #[command(flatten)]
    init: InitArgs,
    #[arg(long)]
    dual_file: Option<PathBuf>,
    #[arg(long)]
    emit_cert: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TreeVerifyArgs {
    graph: PathBuf,
    #[arg(long, default_value_t = 4)]
    t_max: usize,
    /// Schedules for generalized trees; repeatable. Defaults to sync, roundrobin and random:SEED.
    #[arg(long)]
    schedule: Vec<String>,
    /// Generalized trees are checked for this many sweeps of the arc set.
    #[arg(long, default_value_t = 2)]
    gct_sweeps: usize,
    #[command(flatten)]
    init: InitArgs,
    #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    /// Print the balanced tree of depth t-max rooted at this vertex (1-based, residual labels).
    #[arg(long)]
    dump_tree: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, default_value_t = 4)]
    n_min: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// complete or sparse:P.
    #[arg(long, default_value = "complete")]
    density: Density,
    /// Integer weight range LO:HI; defaults to 1:100 (perfect) or -100:0 (nonperfect).
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    distinct: bool,
    #[arg(long, default_value_t = 1)]
    b_max: usize,
    /// Seed range START..END (end exclusive).
    #[arg(long, default_value = "0..200")]
    seeds: String,
    /// Omit for the synchronous engine.
    #[arg(long)]
    schedule: Option<String>,
    /// Rounds past the bound over which the estimate must hold (synchronous only).
    #[arg(long, default_value_t = 2)]
    extra_rounds: usize,
}

#[derive(Args, Debug)]
struct ScheduleValidateArgs {
    graph: PathBuf,
    #[arg(long)]
    schedule: String,
    /// Steps to check; defaults to four sweeps of the arc set.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Numeric {
    Exact,
    Float,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(cli: &Cli) -> Result<i32, HarnessError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(cli, a),
        Command::Certify(a) => cmd_certify(cli, a),
        Command::TreeVerify(a) => cmd_tree_verify(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::ScheduleValidate(a) => cmd_schedule_validate(cli, a),
    }
}

fn read(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<Graph, HarnessError> {
    Ok(parse_graph(&read(path)?)?)
}

fn usage(msg: impl Into<String>) -> HarnessError {
    HarnessError::Usage(msg.into())
}

fn print_report<T: serde::Serialize + std::fmt::Display>(cli: &Cli, report: &T) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(report).expect("reports serialize"));
    } else {
        print!("{report}");
    }
}

fn parse_range(text: &str, sep: &str) -> Result<(i64, i64), HarnessError> {
    let bad = || usage(format!("bad range `{text}` (expected LO{sep}HI)"));
    let (lo, hi) = text.split_once(sep).ok_or_else(bad)?;
    let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: i64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Parses `i j value` lines (1-based ids, `#` comments) into an explicit message map.
fn parse_init_file(text: &str) -> Result<MessageInit, HarnessError> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || usage(format!("init file line {}: expected `i j value`", k + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = fields[..] else { return Err(bad()) };
        let i: usize = i.parse().map_err(|_| bad())?;
        let j: usize = j.parse().map_err(|_| bad())?;
        let v = parse_rational(v).ok_or_else(bad)?;
        if i == 0 || j == 0 {
            return Err(bad());
        }
        if map.insert((i - 1, j - 1), v).is_some() {
            return Err(usage(format!("init file line {}: duplicate arc {i}>{j}", k + 1)));
        }
    }
    Ok(MessageInit::Explicit(map))
}

fn make_init(args: &InitArgs, g: &Graph, seed: u64) -> Result<MessageInit, HarnessError> {
    match args.init.as_str() {
        "weights" => Ok(MessageInit::Weights),
        "zero" => Ok(MessageInit::Constant(Rational::from_integer(0.into()))),
        "random" => {
            let (lo, hi) = parse_range(&args.init_range, ":")?;
            Ok(random_init(g, seed, lo, hi))
        }
        other => {
            if let Some(v) = other.strip_prefix("const=") {
                let v = parse_rational(v).ok_or_else(|| usage(format!("bad constant `{v}`")))?;
                Ok(MessageInit::Constant(v))
            } else if let Some(path) = other.strip_prefix("file=") {
                parse_init_file(&read(Path::new(path))?)
            } else {
                Err(usage(format!("unknown init `{other}` (weights, zero, const=VALUE, random, file=PATH)")))
            }
        }
    }
}

fn parse_stop(text: Option<&str>) -> Result<StopRequest, HarnessError> {
    let Some(text) = text else { return Ok(StopRequest::Auto) };
    let bad = || usage(format!("unknown stop `{text}` (budget=T, window=K, certified)"));
    if text == "certified" {
        return Ok(StopRequest::Certified);
    }
    let (kind, value) = text.split_once('=').ok_or_else(bad)?;
    let value: usize = value.parse().map_err(|_| bad())?;
    match kind {
        "budget" => Ok(StopRequest::Budget(value)),
        "window" => Ok(StopRequest::Window(value)),
        _ => Err(bad()),
    }
}

/// The graph message passing runs on: the trivial-vertex residual in perfect mode.
fn bp_graph(g: &Graph, mode: Mode) -> Result<Graph, HarnessError> {
    match mode {
        Mode::Perfect => {
            let red = reduce_trivial(g);
            if red.infeasible {
                return Err(HarnessError::Infeasible);
            }
            Ok(red.graph)
        }
        Mode::NonPerfect => Ok(g.clone()),
    }
}

fn load_schedule(text: &str, g: &Graph) -> Result<Schedule, HarnessError> {
    let spec: ScheduleSpec = text.parse().map_err(usage)?;
    let file_text = match &spec {
        ScheduleSpec::File(path) => Some(read(Path::new(path))?),
        _ => None,
    };
    Ok(make_schedule(g, &spec, file_text.as_deref())?)
}

fn cmd_solve(cli: &Cli, a: &SolveArgs) -> Result<i32, HarnessError> {
    let start = Instant::now();
    let numeric = match a.numeric {
        Numeric::Exact => NumericMode::Exact,
        Numeric::Float => NumericMode::Float,
    };
    let g = load_graph(&a.graph)?.with_numeric(numeric);
    g.validate(cli.mode).map_err(HarnessError::Validation)?;
    let mut cfg = SolveConfig::new(cli.mode);
    cfg.instance = a.graph.display().to_string();
    cfg.numeric = numeric;
    cfg.init = make_init(&a.init, &g, cli.seed)?;
    cfg.stop = parse_stop(a.stop.as_deref())?;
    cfg.certify = a.certify || a.emit_cert.is_some() || a.dual_file.is_some();
    cfg.allow_redundant = a.force;
    cfg.record_trace = a.trace.is_some();
    if let Some(path) = &a.dual_file {
        cfg.dual = Some(read(path)?);
    }
    if a.schedule != "sync" {
        cfg.schedule = Some(load_schedule(&a.schedule, &bp_graph(&g, cli.mode)?)?);
    }
    let mut outcome = solve(&g, &cfg)?;
    if let (Some(path), Some(trace)) = (&a.trace, &outcome.trace) {
        write(path, trace)?;
    }
    if let (Some(path), Some(cert)) = (&a.emit_cert, &outcome.certificate) {
        write(path, &write_certificate(&outcome.bp_graph, cert))?;
    }
    if a.timing {
        outcome.report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    print_report(cli, &outcome.report);
    Ok(outcome.report.status.exit_code())
}

fn cmd_certify(cli: &Cli, a: &CertifyArgs) -> Result<i32, HarnessError> {
    let g = load_graph(&a.graph)?;
    g.validate(cli.mode).map_err(HarnessError::Validation)?;
    let init = make_init(&a.init, &g, cli.seed)?;
    let dual = a.dual_file.as_deref().map(read).transpose()?;
    let report = certify(&g, cli.mode, &init, dual.as_deref(), &a.graph.display().to_string())?;
    if let Some(path) = &a.emit_cert {
        write(path, &write_certificate(&report.graph, &report.cert))?;
    }
    print_report(cli, &report);
    Ok(report.status().exit_code())
}

fn cmd_tree_verify(cli: &Cli, a: &TreeVerifyArgs) -> Result<i32, HarnessError> {
    if cli.mode != Mode::Perfect {
        return Err(usage("tree-verify runs in perfect mode"));
    }
    let g = load_graph(&a.graph)?;
    g.validate(Mode::Perfect).map_err(HarnessError::Validation)?;
    let bg = bp_graph(&g, Mode::Perfect)?;
    let names = if a.schedule.is_empty() {
        vec!["sync".to_string(), "roundrobin".to_string(), format!("random:{}", cli.seed)]
    } else {
        a.schedule.clone()
    };
    let mut cfg = TreeVerifyConfig::new(a.t_max);
    cfg.schedules = names.iter().map(|s| load_schedule(s, &bg)).collect::<Result<_, _>>()?;
    cfg.gct_sweeps = a.gct_sweeps;
    cfg.init = make_init(&a.init, &g, cli.seed)?;
    cfg.cap = a.node_cap;
    let report = tree_verify(&g, &cfg)?;
    let dump = match a.dump_tree {
        Some(v) if v == 0 || v > bg.n() => return Err(usage(format!("--dump-tree {v}: residual graph has {} vertices", bg.n()))),
        Some(v) => Some(build_tree(&bg, v - 1, a.t_max, a.node_cap)?.dump()),
        None => None,
    };
    if cli.json {
        let mut value = serde_json::to_value(&report).expect("reports serialize");
        if let Some(d) = &dump {
            value["tree_dump"] = json!(d);
        }
        println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
    } else {
        if let Some(d) = &dump {
            println!("tree rooted at {} (t={}):", a.dump_tree.unwrap_or(0), a.t_max);
            print!("{d}");
        }
        print!("{report}");
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_MISMATCH })
}

fn parse_seeds(text: &str) -> Result<Range<u64>, HarnessError> {
    let bad = || usage(format!("bad seed range `{text}` (expected START..END)"));
    let (s, e) = text.split_once("..").ok_or_else(bad)?;
    let s: u64 = s.parse().map_err(|_| bad())?;
    let e: u64 = e.parse().map_err(|_| bad())?;
    Ok(s..e)
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<i32, HarnessError> {
    if a.n_min > a.n_max {
        return Err(usage("--n-min exceeds --n-max"));
    }
    let mut spec = match cli.mode {
        Mode::Perfect => InstanceSpec::perfect(a.n_min, a.n_max, a.density),
        Mode::NonPerfect => InstanceSpec::nonperfect(a.n_min, a.n_max, a.density),
    };
    if let Some(w) = &a.weights {
        let (lo, hi) = parse_range(w, ":")?;
        spec.weight_min = lo;
        spec.weight_max = hi;
    }
    spec.distinct = a.distinct;
    spec.b_max = a.b_max;
    let schedule = match a.schedule.as_deref() {
        None | Some("sync") => None,
        Some("roundrobin") => Some(Schedule::RoundRobin),
        Some(s) => match s.parse::<ScheduleSpec>().map_err(usage)? {
            ScheduleSpec::Random(seed) => Some(Schedule::RandomPermutation { seed }),
            _ => return Err(usage("sweeps take sync, roundrobin or random:SEED")),
        },
    };
    let cfg = SweepConfig { instance: spec, seeds: parse_seeds(&a.seeds)?, schedule, extra_rounds: a.extra_rounds };
    let report = sweep(&cfg);
    print_report(cli, &report);
    Ok(if report.ok() { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_schedule_validate(cli: &Cli, a: &ScheduleValidateArgs) -> Result<i32, HarnessError> {
    let g = load_graph(&a.graph)?;
    g.validate(cli.mode).map_err(HarnessError::Validation)?;
    let bg = bp_graph(&g, cli.mode)?;
    let sched = load_schedule(&a.schedule, &bg)?;
    let horizon = a.horizon.unwrap_or(4 * bg.num_arcs().max(1));
    let result = validate_schedule(&bg, &sched, horizon);
    let violation = result.as_ref().err().map(ToString::to_string);
    if cli.json {
        let value = json!({ "schedule": sched.to_string(), "horizon": horizon, "valid": result.is_ok(), "violation": violation });
        println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
    } else {
        println!("schedule: {sched}");
        println!("horizon: {horizon}");
        match &violation {
            None => println!("valid: true"),
            Some(v) => println!("valid: false ({v})"),
        }
    }
    Ok(if result.is_ok() { EXIT_OK } else { EXIT_VALIDATION })
}
