//! Command-line front end: replay simulations, strategy comparisons,
//! forecast accuracy evaluation, and synthetic trace generation.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 3 on runtime errors.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use datesso::baselines::StrategyKind;
use datesso::forecast;
use datesso::model::{self, TraceProfile, WorkloadTrace};
use datesso::sim::{self, SimConfig};
use datesso::{Real, ServiceRepository, SlaConstraints};

const OUT_DIR_ENV: &str = "DATESSO_OUT";

#[derive(Parser)]
#[command(name = "datesso", version, about = "Debt-aware self-adaptive service composition simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; the DATESSO_OUT environment variable overrides
    /// this flag.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Replay one strategy over a workload trace and write its outputs.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Strategy to run (datesso, tlhca, doa, rbc).
        #[arg(long)]
        strategy: Option<String>,
    },
    /// Run several strategies on identical inputs and write a comparison
    /// report.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated strategy list.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<String>>,
    },
    /// Train the forecasters on the leading split and score their accuracy
    /// on the remainder.
    ForecastEval {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic workload trace CSV.
    GenTrace {
        #[command(flatten)]
        common: CommonArgs,
    },
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    repository: Option<PathBuf>,
    workload: Option<PathBuf>,
    synthetic_workload: SyntheticConfig,
    strategy: String,
    strategies: Vec<String>,
    sla: SlaConfig,
    horizon_offset: usize,
    forecaster: ForecasterConfig,
    train_fraction: f64,
    seed: u64,
    out_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            repository: None,
            workload: None,
            synthetic_workload: SyntheticConfig::default(),
            strategy: "datesso".into(),
            strategies: StrategyKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            sla: SlaConfig::default(),
            horizon_offset: 5,
            forecaster: ForecasterConfig::default(),
            train_fraction: 2.0 / 3.0,
            seed: 42,
            out_dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SlaConfig {
    local_latency_s: f64,
    local_utilization: f64,
    global_latency_s: f64,
    global_utilization: f64,
    compute_cost_per_s: f64,
}

impl Default for SlaConfig {
    fn default() -> Self {
        SlaConfig {
            local_latency_s: 0.09,
            local_utilization: 0.8,
            global_latency_s: 1.0,
            global_utilization: 0.9,
            compute_cost_per_s: 0.0025,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ForecasterConfig {
    p_max: usize,
    q_max: usize,
    refit_every: usize,
    history_window: usize,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig {
            p_max: 2,
            q_max: 1,
            refit_every: 600,
            history_window: 512,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SyntheticConfig {
    horizon: usize,
    services: Option<usize>,
    base_level: f64,
    cycle_amplitude: f64,
    cycle_period: usize,
    burst_amplitude: f64,
    burst_rate: f64,
    burst_duration: usize,
    noise_scale: f64,
    memory: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        let profile = TraceProfile::default();
        SyntheticConfig {
            horizon: 7200,
            services: None,
            base_level: profile.base_level,
            cycle_amplitude: profile.cycle_amplitude,
            cycle_period: profile.cycle_period,
            burst_amplitude: profile.burst_amplitude,
            burst_rate: profile.burst_rate,
            burst_duration: profile.burst_duration,
            noise_scale: profile.noise_scale,
            memory: profile.memory,
        }
    }
}

impl SyntheticConfig {
    fn profile(&self) -> TraceProfile {
        TraceProfile {
            base_level: self.base_level,
            cycle_amplitude: self.cycle_amplitude,
            cycle_period: self.cycle_period,
            burst_amplitude: self.burst_amplitude,
            burst_rate: self.burst_rate,
            burst_duration: self.burst_duration,
            noise_scale: self.noise_scale,
            memory: self.memory,
        }
    }
}

// ---------------------------------------------------------------------------
// Error handling with the documented exit codes
// ---------------------------------------------------------------------------

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { common, strategy } => cmd_simulate(common, strategy),
        Command::Compare { common, strategies } => cmd_compare(common, strategies),
        Command::ForecastEval { common } => cmd_forecast_eval(common),
        Command::GenTrace { common } => cmd_gen_trace(common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

// ---------------------------------------------------------------------------
// Shared setup
// ---------------------------------------------------------------------------

struct Prepared {
    config: Config,
    out_dir: PathBuf,
}

fn prepare(common: &CommonArgs) -> CliResult<Prepared> {
    let mut config = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<Config>(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    let out_dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .or_else(|| common.out.clone())
        .unwrap_or_else(|| config.out_dir.clone());
    Ok(Prepared { config, out_dir })
}

fn load_repository(config: &Config) -> CliResult<ServiceRepository> {
    let path = config
        .repository
        .as_ref()
        .ok_or_else(|| config_err("no repository file configured (set `repository` in the config)"))?;
    if !path.exists() {
        return Err(config_err(format!("repository file {} does not exist", path.display())));
    }
    model::load_repository(path).map_err(config_err)
}

fn load_trace(config: &Config, services: usize) -> CliResult<WorkloadTrace> {
    match &config.workload {
        Some(path) => {
            if !path.exists() {
                return Err(config_err(format!("workload file {} does not exist", path.display())));
            }
            let trace = model::load_workload(path).map_err(config_err)?;
            if trace.services() != services {
                return Err(config_err(format!(
                    "workload covers {} services, expected {services}",
                    trace.services()
                )));
            }
            Ok(trace)
        }
        None => {
            let synth = &config.synthetic_workload;
            model::generate_synthetic_trace(config.seed, synth.horizon, services, &synth.profile())
                .map_err(config_err)
        }
    }
}

fn build_sla(config: &Config, services: usize) -> CliResult<SlaConstraints> {
    SlaConstraints::uniform(
        services,
        config.sla.local_latency_s,
        config.sla.local_utilization,
        config.sla.global_latency_s,
        config.sla.global_utilization,
        config.sla.compute_cost_per_s,
    )
    .map_err(config_err)
}

fn sim_config(config: &Config) -> SimConfig<Real> {
    SimConfig {
        horizon_offset: config.horizon_offset,
        train_fraction: config.train_fraction,
        refit_every: config.forecaster.refit_every,
        history_window: config.forecaster.history_window,
        p_max: config.forecaster.p_max,
        q_max: config.forecaster.q_max,
        cost_bounds: None,
    }
}

fn parse_strategies(names: &[String]) -> CliResult<Vec<StrategyKind>> {
    names.iter().map(|s| s.parse::<StrategyKind>().map_err(config_err)).collect()
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.1} us", d.as_secs_f64() * 1e6)
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

fn cmd_simulate(common: CommonArgs, strategy: Option<String>) -> CliResult<()> {
    let Prepared { config, out_dir } = prepare(&common)?;
    let name = strategy.unwrap_or_else(|| config.strategy.clone());
    let kind: StrategyKind = name.parse().map_err(config_err)?;

    let repo = load_repository(&config)?;
    let trace = load_trace(&config, repo.abstract_count())?;
    let sla = build_sla(&config, repo.abstract_count())?;

    let result = sim::run(kind, &repo, &trace, &sla, &sim_config(&config)).map_err(runtime_err)?;
    let dir = out_dir.join(kind.name());
    result.write_outputs(&dir).map_err(runtime_err)?;

    println!("strategy          {}", kind);
    println!("simulated steps   {} (from timestep {})", result.steps.len(), result.start);
    println!("adaptations       {}", result.adaptations.len());
    println!(
        "violations        {} local, {} global",
        result.violations.local(),
        result.violations.global()
    );
    println!("accumulated debt  {:.4}", result.ledger.total());
    println!("total score       {:.4}", result.total_score);
    if let Some(median) = result.median_reasoning_time() {
        println!("median reasoning  {}", fmt_duration(median));
    }
    println!("outputs           {}", dir.display());
    Ok(())
}

fn cmd_compare(common: CommonArgs, strategies: Option<Vec<String>>) -> CliResult<()> {
    let Prepared { config, out_dir } = prepare(&common)?;
    let names = strategies.unwrap_or_else(|| config.strategies.clone());
    let kinds = parse_strategies(&names)?;
    if kinds.len() < 2 {
        return Err(config_err("compare needs at least two strategies"));
    }

    let repo = load_repository(&config)?;
    let trace = load_trace(&config, repo.abstract_count())?;
    let sla = build_sla(&config, repo.abstract_count())?;

    let comparison = sim::compare(&kinds, &repo, &trace, &sla, &sim_config(&config)).map_err(runtime_err)?;
    sim::write_comparison(&out_dir, &comparison).map_err(runtime_err)?;

    println!(
        "{:<10} {:>12} {:>8} {:>8} {:>12} {:>14} {:>16}",
        "strategy", "score", "viol", "adapt", "final debt", "sustainability", "median reasoning"
    );
    for (summary, result) in comparison.report.strategies.iter().zip(&comparison.results) {
        println!(
            "{:<10} {:>12.3} {:>8} {:>8} {:>12.3} {:>14} {:>16}",
            summary.strategy,
            summary.total_score,
            summary.violation_total,
            summary.adaptation_count,
            summary.final_accumulated_debt,
            summary
                .sustainability
                .map(|s| format!("{s:.4}"))
                .unwrap_or_else(|| "-".into()),
            result
                .median_reasoning_time()
                .map(fmt_duration)
                .unwrap_or_else(|| "-".into()),
        );
    }
    if let Some(note) = &comparison.report.sustainability_note {
        println!("note: {note}");
    }
    println!("outputs written to {}", out_dir.display());
    Ok(())
}

fn cmd_forecast_eval(common: CommonArgs) -> CliResult<()> {
    let Prepared { config, out_dir } = prepare(&common)?;
    let trace = match &config.workload {
        Some(path) => {
            if !path.exists() {
                return Err(config_err(format!("workload file {} does not exist", path.display())));
            }
            model::load_workload(path).map_err(config_err)?
        }
        None => {
            let services = match &config.repository {
                Some(_) => load_repository(&config)?.abstract_count(),
                None => config.synthetic_workload.services.unwrap_or(10),
            };
            load_trace(&config, services)?
        }
    };

    let horizon = trace.horizon();
    let split = ((horizon as f64) * config.train_fraction).floor() as usize;
    if split < 64 || split >= horizon {
        return Err(config_err(format!(
            "train fraction {} leaves an unusable split on a {horizon}-step trace",
            config.train_fraction
        )));
    }

    let dir = out_dir.join("forecast");
    std::fs::create_dir_all(&dir).map_err(runtime_err)?;
    let mut summary = String::from("abstract_index,rmse,mae,naive_rmse\n");
    println!("{:<6} {:>10} {:>10} {:>12}", "svc", "rmse", "mae", "naive_rmse");
    for x in 0..trace.services() {
        let series: Vec<f64> = trace.column(x, 0..horizon).into_iter().map(f64::from).collect();
        let (p, q) = forecast::select_order(&series[..split], config.forecaster.p_max, config.forecaster.q_max)
            .map_err(runtime_err)?;
        let model = forecast::fit(&series[..split], p, q).map_err(runtime_err)?;

        let mut rows = String::from("timestep,actual,predicted,abs_error\n");
        let mut se = 0.0f64;
        let mut ae = 0.0f64;
        let mut naive_se = 0.0f64;
        for t in split..horizon {
            let from = t.saturating_sub(config.forecaster.history_window);
            let predicted = model.forecast(&series[from..t], 1)[0];
            let actual = series[t];
            let err = (predicted - actual).abs();
            se += err * err;
            ae += err;
            naive_se += (series[t - 1] - actual).powi(2);
            rows.push_str(&format!("{t},{actual},{predicted},{err}\n"));
        }
        let count = (horizon - split) as f64;
        let rmse = (se / count).sqrt();
        let mae = ae / count;
        let naive_rmse = (naive_se / count).sqrt();
        std::fs::write(dir.join(format!("service_{x}.csv")), rows).map_err(runtime_err)?;
        summary.push_str(&format!("{x},{rmse},{mae},{naive_rmse}\n"));
        println!("{x:<6} {rmse:>10.3} {mae:>10.3} {naive_rmse:>12.3}");
    }
    std::fs::write(dir.join("summary.csv"), summary).map_err(runtime_err)?;
    println!("outputs written to {}", dir.display());
    Ok(())
}

fn cmd_gen_trace(common: CommonArgs) -> CliResult<()> {
    let Prepared { config, out_dir } = prepare(&common)?;
    let synth = &config.synthetic_workload;
    let services = synth.services.unwrap_or(10);
    let trace = model::generate_synthetic_trace(config.seed, synth.horizon, services, &synth.profile())
        .map_err(config_err)?;
    std::fs::create_dir_all(&out_dir).map_err(runtime_err)?;
    let path = out_dir.join("trace.csv");
    model::save_workload(&path, &trace).map_err(runtime_err)?;
    println!(
        "wrote {} ({} timesteps x {} services, seed {})",
        path.display(),
        trace.horizon(),
        services,
        config.seed
    );
    Ok(())
}
