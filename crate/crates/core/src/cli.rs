//! Batch command line: `solve`, `check`, `sweep` and `bench`.
//!
//! Exit codes: 0 success, 1 parse/validation/usage failure, 2 infeasible or
//! unbounded model, 3 node/time limit reached, 4 oracle cap exceeded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::bnb::{solve_mip, MipParams, MipSolution, MipStatus};
use crate::error::{Error, Result};
use crate::io::read_instance;
use crate::model::WcaroInstance;
use crate::oracle::{certify_with, CertReport, OracleCaps, ThirdLevelForm};
use crate::power::{
    build_power_instance, bundled_case, load_timeseries, parse_case, synthetic_day, GridCase, PenaltyConvention,
    PowerBuildParams, TimeSeries,
};
use crate::reformulate::{build_single_level_with, BuildOptions, SingleLevel, DEFAULT_PWL_SEGMENTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_ORACLE_CAP: i32 = 4;

/// Environment variable holding the number of worker threads for sweeps.
pub const THREADS_ENV: &str = "WCARO_THREADS";

#[derive(Parser, Debug)]
#[command(name = "wcaro", version, about = "Robust dispatch with mixed-integer recourse via a single-level MIP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build and solve the single-level MIP.
    Solve(SolveArgs),
    /// Solve and compare against the brute-force oracle.
    Check(CheckArgs),
    /// Solve a power case over a grid of forecast error bounds.
    Sweep(SweepArgs),
    /// Time a list of power cases.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct PowerArgs {
    /// Case file (JSON, or matpower `.m` with a `.roles.json` sidecar) or a bundled replica name.
    #[arg(long)]
    pub case: Option<String>,
    /// Time-series CSV, or `synthetic` for the bundled synthetic day.
    #[arg(long, default_value = "synthetic")]
    pub timeseries: String,
    #[arg(long, default_value_t = 24)]
    pub periods: usize,
    /// Comma-separated storage ids to keep; an empty string keeps none.
    #[arg(long)]
    pub storage_subset: Option<String>,
    #[arg(long, value_enum, default_value = "absolute")]
    pub penalty: PenaltyArg,
    /// Require the final state of charge to reach the initial one.
    #[arg(long)]
    pub terminal_soc: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum PenaltyArg {
    Absolute,
    Signed,
}

#[derive(Args, Debug, Clone)]
pub struct EngineArgs {
    /// Relative optimality gap at which branch-and-bound stops.
    #[arg(long, default_value_t = 1e-6)]
    pub gap: f64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Secant pieces per quadratic first-level cost term.
    #[arg(long, default_value_t = DEFAULT_PWL_SEGMENTS)]
    pub pwl_segments: usize,
    /// Report zero wall time so that outputs are byte-stable.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "case")]
    pub instance: Option<PathBuf>,
    #[command(flatten)]
    pub power: PowerArgs,
    /// Forecast error bound for power cases.
    #[arg(long = "R", alias = "r", default_value_t = 1.0)]
    pub r: f64,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Where to write the solution JSON (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the single-level model in LP format.
    #[arg(long)]
    pub write_lp: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Evaluate the oracle on the plain third level instead of the β-bounded one.
    #[arg(long)]
    pub plain: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub power: PowerArgs,
    /// `start:stop:step`.
    #[arg(long)]
    pub r_grid: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Suite JSON listing the cases to run.
    #[arg(long)]
    pub suite: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub no_timing: bool,
}

/// One solve, as written next to solutions and in logs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub params: serde_json::Value,
    pub status: MipStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub wall_time: f64,
    pub nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cert_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    record: &'a RunRecord,
    x: Vec<f64>,
    y: Vec<f64>,
    solution: &'a MipSolution,
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    record: &'a RunRecord,
    certificate: &'a CertReport,
}

/// Parses `args` (including the program name) and runs the command.
/// Diagnostics go to stderr; the return value is the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let out = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Bench(a) => cmd_bench(&a),
    };
    match out {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::TooLarge(_) => EXIT_ORACLE_CAP,
        Error::InfeasibleFirstLevel | Error::EmptyOmega => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

pub fn status_code(s: MipStatus) -> i32 {
    match s {
        MipStatus::Optimal => EXIT_OK,
        MipStatus::Infeasible | MipStatus::Unbounded => EXIT_INFEASIBLE,
        MipStatus::GapLimit | MipStatus::NodeLimit => EXIT_LIMIT,
    }
}

impl EngineArgs {
    fn mip_params(&self) -> Result<MipParams> {
        if !(self.gap >= 0.0) {
            return Err(Error::Invalid(format!("gap must be nonnegative, got {}", self.gap)));
        }
        let time_limit = match self.time_limit {
            Some(s) if !(s > 0.0) => return Err(Error::Invalid(format!("time limit must be positive, got {s}"))),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(MipParams { gap_tol: self.gap, node_limit: self.node_limit, time_limit, ..Default::default() })
    }

    fn build_options(&self) -> BuildOptions {
        BuildOptions { pwl_segments: self.pwl_segments }
    }

    fn seconds(&self, d: Duration) -> f64 {
        if self.no_timing {
            0.0
        } else {
            d.as_secs_f64()
        }
    }
}

/// A case argument: a file path if it exists, otherwise a bundled replica name.
pub fn load_case(spec: &str) -> Result<GridCase> {
    let p = Path::new(spec);
    if p.exists() {
        parse_case(p)
    } else if crate::power::REPLICAS.contains(&spec) {
        bundled_case(spec)
    } else {
        Err(Error::Invalid(format!("case '{spec}' is neither a file nor a bundled replica")))
    }
}

pub fn load_series(spec: &str, periods: usize) -> Result<TimeSeries> {
    if spec == "synthetic" {
        Ok(synthetic_day(periods))
    } else {
        load_timeseries(spec, periods)
    }
}

/// Parses a comma-separated id list; the empty string is the empty list.
pub fn parse_ids(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::Invalid(format!("invalid storage id '{t}'"))))
        .collect()
}

impl PowerArgs {
    fn load(&self) -> Result<(GridCase, TimeSeries)> {
        let spec = self.case.as_deref().ok_or_else(|| Error::Invalid("either --instance or --case is required".into()))?;
        let mut case = load_case(spec)?;
        if let Some(ids) = &self.storage_subset {
            case = case.with_storages(&parse_ids(ids)?)?;
        }
        Ok((case, load_series(&self.timeseries, self.periods)?))
    }

    fn params(&self, r: f64) -> PowerBuildParams {
        PowerBuildParams {
            r,
            soc_initial: None,
            terminal_soc: self.terminal_soc,
            penalty_convention: match self.penalty {
                PenaltyArg::Absolute => PenaltyConvention::Absolute,
                PenaltyArg::Signed => PenaltyConvention::Signed,
            },
        }
    }
}

struct Solved {
    sl: SingleLevel,
    sol: MipSolution,
    wall: Duration,
}

fn build_and_solve(inst: &WcaroInstance, engine: &EngineArgs) -> Result<Solved> {
    let params = engine.mip_params()?;
    let t0 = Instant::now();
    let sl = build_single_level_with(inst, None, &engine.build_options())?;
    let sol = solve_mip(&sl.mip, &params)?;
    Ok(Solved { sl, sol, wall: t0.elapsed() })
}

fn record(name: &str, params: serde_json::Value, s: &Solved, engine: &EngineArgs) -> RunRecord {
    RunRecord {
        instance: name.to_string(),
        params,
        status: s.sol.status,
        objective: s.sol.objective,
        best_bound: s.sol.best_bound,
        gap: s.sol.gap,
        wall_time: engine.seconds(s.wall),
        nodes: s.sol.nodes,
        cert_margin: None,
        unit: None,
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn cmd_solve(a: &SolveArgs) -> Result<i32> {
    let (inst, unit, params) = match &a.instance {
        Some(p) => (read_instance(p)?, None, serde_json::json!({ "gap": a.engine.gap })),
        None => {
            let (case, ts) = a.power.load()?;
            let bp = a.power.params(a.r);
            let p = build_power_instance(&case, &ts, &bp)?;
            let params = serde_json::json!({
                "gap": a.engine.gap,
                "R": a.r,
                "periods": ts.periods(),
                "storages": case.storages.iter().map(|s| s.id).collect::<Vec<_>>(),
                "penalty_convention": bp.penalty_convention,
                "beta_exact": p.beta.exact,
            });
            (p.instance, Some(case.unit), params)
        }
    };
    let s = build_and_solve(&inst, &a.engine)?;
    if let Some(p) = &a.write_lp {
        fs::write(p, s.sl.mip.to_lp_format())?;
    }
    let mut rec = record(&inst.name, params, &s, &a.engine);
    rec.unit = unit;
    let feasible = s.sol.objective.is_finite();
    let out = SolveOutput {
        record: &rec,
        x: if feasible { s.sl.x_of(&s.sol.primal) } else { Vec::new() },
        y: if feasible { s.sl.y_of(&s.sol.primal) } else { Vec::new() },
        solution: &s.sol,
    };
    write_json(a.out.as_deref(), &out)?;
    eprintln!("{}: {:?}, objective {}", inst.name, s.sol.status, s.sol.objective);
    Ok(status_code(s.sol.status))
}

pub fn cmd_check(a: &CheckArgs) -> Result<i32> {
    let inst = read_instance(&a.instance)?;
    let caps = OracleCaps::default();
    if inst.third.n_bin > caps.max_bin || inst.omega.dim() > caps.max_dim {
        return Err(Error::TooLarge(format!(
            "oracle cap exceeded: {} binaries (cap {}), uncertainty dimension {} (cap {})",
            inst.third.n_bin,
            caps.max_bin,
            inst.omega.dim(),
            caps.max_dim
        )));
    }
    let s = build_and_solve(&inst, &a.engine)?;
    if s.sol.status != MipStatus::Optimal {
        eprintln!("{}: {:?}; nothing to certify", inst.name, s.sol.status);
        return Ok(status_code(s.sol.status));
    }
    let form = if a.plain { ThirdLevelForm::Plain } else { ThirdLevelForm::Bounded };
    let cert = certify_with(&inst, &s.sl, &s.sol, a.tol, form, &caps)?;
    let mut rec = record(&inst.name, serde_json::json!({ "gap": a.engine.gap, "tol": a.tol }), &s, &a.engine);
    rec.cert_margin = Some(cert.margin);
    write_json(a.out.as_deref(), &CheckOutput { record: &rec, certificate: &cert })?;
    eprintln!(
        "{}: MIP {} oracle {} margin {:e} exact {}",
        inst.name, cert.mip_value, cert.oracle_value_at_xstar, cert.margin, cert.exact
    );
    if cert.upper_bound_holds {
        Ok(EXIT_OK)
    } else {
        eprintln!("error: upper bound violated by {:e}", -cert.margin);
        Ok(EXIT_INPUT)
    }
}

/// Points of `start:stop:step`, inclusive of `stop` up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Invalid(format!("grid '{spec}' is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    let (a, b, step) = (v[0], v[1], v[2]);
    if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
        return Err(Error::Invalid(format!("grid '{spec}' needs start ≤ stop and a positive step")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Worker count from [`THREADS_ENV`], defaulting to the available cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs `f` on every item with up to `threads` workers and returns the
/// results in input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("result buffer")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("result buffer").into_iter().map(|r| r.expect("every slot filled")).collect()
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let grid = parse_grid(&a.r_grid)?;
    let (case, ts) = a.power.load()?;
    a.engine.mip_params()?;
    let results = parallel_map(&grid, thread_count(), |&r| -> Result<Solved> {
        let p = build_power_instance(&case, &ts, &a.power.params(r))?;
        build_and_solve(&p.instance, &a.engine)
    });
    let mut csv = String::from("R,objective,gap,wall_time,status,unit\n");
    let mut code = EXIT_OK;
    for (r, res) in grid.iter().zip(results) {
        let s = res?;
        code = code.max(status_code(s.sol.status));
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            fmt_num(*r),
            fmt_num(s.sol.objective),
            fmt_num(s.sol.gap),
            fmt_num(a.engine.seconds(s.wall)),
            status_name(s.sol.status),
            case.unit
        )
        .expect("writing to a string");
    }
    fs::write(&a.out, csv)?;
    Ok(code)
}

fn status_name(s: MipStatus) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// A benchmark suite file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Suite {
    #[serde(default = "default_series")]
    pub timeseries: String,
    #[serde(default = "default_periods")]
    pub periods: usize,
    #[serde(rename = "R", alias = "r", default = "default_r")]
    pub r: f64,
    #[serde(default = "default_gap")]
    pub gap: f64,
    /// Seconds per case.
    #[serde(default)]
    pub time_limit: Option<f64>,
    pub cases: Vec<SuiteCase>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteCase {
    /// Bundled replica name or path (relative paths resolve against the suite file).
    pub case: String,
    /// Storage ids to keep; all when omitted.
    #[serde(default)]
    pub storages: Option<Vec<u32>>,
}

fn default_series() -> String {
    "synthetic".into()
}
fn default_periods() -> usize {
    24
}
fn default_r() -> f64 {
    0.5
}
fn default_gap() -> f64 {
    1e-4
}

pub fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.suite)?;
    let suite: Suite = serde_json::from_str(&text).map_err(|e| crate::io::json_error(&a.suite, e))?;
    let base = a.suite.parent().unwrap_or(Path::new("."));
    let resolve = |s: &str| -> String {
        let p = base.join(s);
        if !crate::power::REPLICAS.contains(&s) && p.exists() {
            p.to_string_lossy().into_owned()
        } else {
            s.to_string()
        }
    };
    let series = if suite.timeseries == "synthetic" { suite.timeseries.clone() } else { resolve(&suite.timeseries) };
    let ts = load_series(&series, suite.periods)?;
    // Load everything first so that an unknown fixture fails before any solve.
    let mut cases = Vec::new();
    for c in &suite.cases {
        let mut case = load_case(&resolve(&c.case))?;
        if let Some(ids) = &c.storages {
            case = case.with_storages(ids)?;
        }
        cases.push(case);
    }
    let engine = EngineArgs {
        gap: suite.gap,
        time_limit: suite.time_limit,
        node_limit: None,
        pwl_segments: DEFAULT_PWL_SEGMENTS,
        no_timing: a.no_timing,
    };
    let mut csv = String::from("case,buses,storages,n_bin,wall_time,objective,gap,status\n");
    let mut code = EXIT_OK;
    for case in &cases {
        let p = build_power_instance(case, &ts, &PowerBuildParams::with_r(suite.r))?;
        let s = build_and_solve(&p.instance, &engine)?;
        code = code.max(status_code(s.sol.status));
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            case.name,
            case.buses.len(),
            case.storages.len(),
            p.instance.third.n_bin,
            fmt_num(engine.seconds(s.wall)),
            fmt_num(s.sol.objective),
            fmt_num(s.sol.gap),
            status_name(s.sol.status)
        )
        .expect("writing to a string");
        eprintln!("{}: {:?} in {:.2}s", case.name, s.sol.status, s.wall.as_secs_f64());
    }
    fs::write(&a.out, csv)?;
    Ok(code)
}
