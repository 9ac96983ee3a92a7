//! Command line front end behind the `rsma` binary.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration, 4 numeric domain,
//! 5 I/O.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::allocation::{t_opt_closed_form, t_opt_exhaustive, AllocationResult, SearchObjective, DEFAULT_GRANULARITY};
use crate::bound::{BoundTerms, LowerBound};
use crate::channel::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sweep::{csv_bytes, run_sweep, SweepOptions, SweepSpec};
use crate::transceiver::{monte_carlo_sum_rate, SumRateEstimate};

#[derive(Debug, Parser)]
#[command(name = "rsma", version, about = "Rate-splitting under mobility: bounds, power splits and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario JSON (sweep spec JSON for `sweep`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Exhaustive-search step on (0, 1].
    #[arg(long, global = true, default_value_t = DEFAULT_GRANULARITY)]
    granularity: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print results as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Power split to evaluate instead of the closed-form one.
    #[arg(long, global = true)]
    t: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound quantities at one split and the bound over a 0.05 grid.
    Bound,
    /// Closed-form split, optionally against an exhaustive search.
    Alloc {
        /// Also run the grid search on the lower bound.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Monte Carlo ergodic sum-rate at one split.
    Sumrate,
    /// Runs a sweep spec and writes CSV.
    Sweep,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn cli_main(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.common.config.is_none() {
        let e = Cli::command().error(ErrorKind::MissingRequiredArgument, "--config <PATH> is required");
        let _ = e.print();
        return 2;
    }
    let run = || run(&cli);
    let outcome = match cli.common.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::config("threads", e.to_string())),
        },
        None => run(),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    match &cli.command {
        Command::Bound => cmd_bound(c),
        Command::Alloc { exhaustive } => cmd_alloc(c, *exhaustive),
        Command::Sumrate => cmd_sumrate(c),
        Command::Sweep => cmd_sweep(c),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn config_path(c: &CommonArgs) -> Result<&Path> {
    c.config
        .as_deref()
        .ok_or_else(|| Error::config("--config", "a config file is required"))
}

fn load_scenario(c: &CommonArgs) -> Result<ScenarioConfig> {
    let path = config_path(c)?;
    let mut cfg = ScenarioConfig::from_json_str(&read_text(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    apply_overrides(&mut cfg, c);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ScenarioConfig, c: &CommonArgs) {
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = c.trials {
        cfg.trials = trials;
    }
}

fn check_t(t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::config("--t", format!("must lie in (0, 1], got {t}")));
    }
    Ok(t)
}

fn emit_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: "<stdout>".into(),
        source,
    })?;
    emit_text(&(text + "\n"))
}

/// Writes to stdout in one piece; a reader that went away early is not an error.
fn emit_text(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
        _ => Ok(()),
    }
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Serialize)]
struct CurvePoint {
    t: f64,
    private_bound: f64,
    common_bound: f64,
    bound_value: f64,
}

#[derive(Serialize)]
struct BoundReport {
    epsilon: f64,
    terms: BoundTerms,
    curve: Vec<CurvePoint>,
}

fn cmd_bound(c: &CommonArgs) -> Result<()> {
    let cfg = load_scenario(c)?;
    let eps = cfg.epsilon()?;
    let bound = LowerBound::new(cfg.power(), cfg.users, cfg.n_t, eps)?;
    let t = match c.t {
        Some(t) => check_t(t)?,
        None => t_opt_closed_form(cfg.power(), cfg.users, cfg.n_t, eps)?.t_opt,
    };
    let terms = bound.terms(t)?;
    let curve = (1..=20)
        .map(|i| {
            let t = i as f64 / 20.0;
            Ok(CurvePoint {
                t,
                private_bound: bound.private(t)?,
                common_bound: bound.common(t)?,
                bound_value: bound.value(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(path) = &c.out {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |source| Error::Csv {
            path: path.clone(),
            source,
        };
        for p in &curve {
            w.serialize(p).map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: path.clone(),
            source: e.into_error(),
        })?;
        write_out(path, &bytes)?;
    }
    let report = BoundReport {
        epsilon: eps,
        terms,
        curve,
    };
    if c.json {
        return emit_json(&report);
    }
    emit_text(&render_bound(&report).expect("formatting into a String"))
}

fn render_bound(r: &BoundReport) -> std::result::Result<String, std::fmt::Error> {
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.10}"));
    let t = &r.terms;
    let mut out = String::new();
    writeln!(out, "epsilon          {:.10}", r.epsilon)?;
    writeln!(out, "d_hat            {:.10}", t.d_hat)?;
    writeln!(out, "theta_hat        {:.10}", t.theta_hat)?;
    writeln!(out, "dk_rounded       {}", t.dk_rounded)?;
    writeln!(out, "mu               {:.10}", t.mu)?;
    writeln!(out, "t                {:.10}", t.t)?;
    writeln!(out, "beta_exact       {:.10}", t.beta_exact)?;
    writeln!(out, "beta_asymptotic  {}", opt(t.beta_asymptotic))?;
    writeln!(out, "phi              {}", opt(t.phi))?;
    writeln!(out, "tau              {:.10}", t.tau)?;
    writeln!(out, "omega            {:.10}", t.omega)?;
    writeln!(out, "rho              {}", opt(t.rho))?;
    writeln!(out)?;
    writeln!(out, "{:>6}  {:>12}  {:>12}  {:>12}", "t", "private", "common", "bound")?;
    for p in &r.curve {
        writeln!(
            out,
            "{:>6.2}  {:>12.6}  {:>12.6}  {:>12.6}",
            p.t, p.private_bound, p.common_bound, p.bound_value
        )?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct AllocReport {
    epsilon: f64,
    closed_form: AllocationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive: Option<AllocationResult>,
}

fn cmd_alloc(c: &CommonArgs, exhaustive: bool) -> Result<()> {
    let cfg = load_scenario(c)?;
    let eps = cfg.epsilon()?;
    let (p, k, nt) = (cfg.power(), cfg.users, cfg.n_t);
    let closed_form = t_opt_closed_form(p, k, nt, eps)?;
    let exhaustive = if exhaustive {
        Some(t_opt_exhaustive(p, k, nt, eps, SearchObjective::LowerBound, c.granularity, None)?)
    } else {
        None
    };
    let report = AllocReport {
        epsilon: eps,
        closed_form,
        exhaustive,
    };
    if c.json {
        return emit_json(&report);
    }
    emit_text(&render_alloc(&report).expect("formatting into a String"))
}

fn render_alloc(r: &AllocReport) -> std::result::Result<String, std::fmt::Error> {
    let mut out = String::new();
    writeln!(out, "t_opt = {}", r.closed_form.t_opt)?;
    writeln!(out, "branch = {}", r.closed_form.branch.as_str())?;
    writeln!(out, "objective_at_t = {:.10}", r.closed_form.objective_at_t)?;
    if let Some(ex) = &r.exhaustive {
        writeln!(out, "exhaustive t_opt = {}", ex.t_opt)?;
        writeln!(out, "exhaustive objective_at_t = {:.10}", ex.objective_at_t)?;
    }
    Ok(out)
}

fn cmd_sumrate(c: &CommonArgs) -> Result<()> {
    let cfg = load_scenario(c)?;
    let t = match c.t {
        Some(t) => check_t(t)?,
        None => t_opt_closed_form(cfg.power(), cfg.users, cfg.n_t, cfg.epsilon()?)?.t_opt,
    };
    let est = monte_carlo_sum_rate(&cfg, t)?;
    if c.json {
        return emit_json(&est);
    }
    emit_text(&render_sumrate(&est).expect("formatting into a String"))
}

fn render_sumrate(est: &SumRateEstimate) -> std::result::Result<String, std::fmt::Error> {
    let mut out = String::new();
    writeln!(out, "t = {}", est.t)?;
    writeln!(out, "sum_rate = {:.10} +/- {:.10}", est.mean, est.half_width_95)?;
    writeln!(out, "common_rate = {:.10}", est.per_stream_means[0])?;
    for (k, r) in est.per_stream_means[1..].iter().enumerate() {
        writeln!(out, "private_rate[{k}] = {r:.10}")?;
    }
    writeln!(out, "trials = {}", est.trials)?;
    if est.degenerate_redraws > 0 {
        writeln!(out, "degenerate_redraws = {}", est.degenerate_redraws)?;
    }
    Ok(out)
}

fn cmd_sweep(c: &CommonArgs) -> Result<()> {
    let path = config_path(c)?;
    let mut spec = SweepSpec::from_json_str(&read_text(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    apply_overrides(&mut spec.base, c);
    let options = SweepOptions {
        granularity: c.granularity,
        fixed_t: c.t,
    };
    let rows = run_sweep(&spec, &options)?;
    if c.json {
        return emit_json(&rows);
    }
    let bytes = csv_bytes(&rows)?;
    match &c.out {
        Some(out) => write_out(out, &bytes),
        None => emit_text(std::str::from_utf8(&bytes).expect("CSV is UTF-8")),
    }
}
