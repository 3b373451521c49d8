//! CLI harness: run configured scenarios or the shipped experiment presets,
//! write CSV traces, check finite excitation, audit runs against the
//! theoretical error bounds, and sweep algorithm parameters.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use idrem::bounds::{
    bound_inputs_from_run, compute_constants, error_bound_fe, error_bound_post,
    interval_end_errors, audit_scalar_regressor,
};
use idrem::excitation::check_fe;
use idrem::harness::{
    parse_scenario, preset, run_scenario, sweep, write_csv, Preset, SweepParam, Trace,
};
use idrem::signals::Scenario;

#[derive(Parser)]
#[command(name = "idrem", version, about = "Time-varying parameter identification under finite excitation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file and write the trace as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
        /// Keep every k-th row in the CSV.
        #[arg(long, default_value_t = 10)]
        log_stride: usize,
    },
    /// Reproduce a shipped experiment preset (full logging rate by default).
    Repro {
        /// Experiment number: 1 (disturbance-free) or 2 (uniform disturbance).
        #[arg(long)]
        experiment: u8,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        log_stride: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Measure the finite-excitation levels of a configured regressor.
    Excitation {
        #[arg(long)]
        config: PathBuf,
        /// Sliding window width (s).
        #[arg(long)]
        ts: f64,
        /// Window start (defaults to the grid's excitation start).
        #[arg(long)]
        from: Option<f64>,
        /// Window end (defaults to the configured excitation end, else t_end).
        #[arg(long)]
        to: Option<f64>,
    },
    /// Run a scenario, then audit the trace against the theoretical bounds.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Sliding window width for the excitation measurement (s).
        #[arg(long, default_value_t = 0.1)]
        ts: f64,
        /// End of the excitation window (defaults to the configured value).
        #[arg(long)]
        te: Option<f64>,
    },
    /// Sweep T or gamma0 on an experiment preset and tabulate the
    /// steady-state errors.
    Sweep {
        /// Swept parameter: T | gamma0
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        experiment: u8,
    },
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<idrem::Error> for CliError {
    fn from(e: idrem::Error) -> Self {
        match e {
            idrem::Error::InvalidScenario(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| CliError::usage(e.to_string()))
}

fn run_and_write(scenario: &Scenario, out: &Path, stride: usize) -> Result<Trace, CliError> {
    let trace = run_scenario(scenario)?;
    write_csv(&trace, out, stride)?;
    let rows = trace.len().div_ceil(stride.max(1));
    println!(
        "wrote {rows} rows ({} steps at dt = {}, stride {stride}) to {}",
        trace.len(),
        scenario.dt,
        out.display()
    );
    println!(
        "final error {:.6e}, peak error {:.6e}",
        trace.err_inst.last().copied().unwrap_or(0.0),
        trace.max_error_in(0.0, scenario.t_end),
    );
    Ok(trace)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run { config, seed, out, log_stride } => {
            let mut scenario = load_scenario(&config)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            run_and_write(&scenario, &out, log_stride)?;
            Ok(())
        }
        Command::Repro { experiment, out, log_stride, seed } => {
            let which = Preset::from_number(experiment)
                .ok_or_else(|| CliError::usage(format!("unknown experiment {experiment}, expected 1 or 2")))?;
            let mut scenario = preset(which);
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            let out = out.unwrap_or_else(|| PathBuf::from(format!("experiment{experiment}.csv")));
            run_and_write(&scenario, &out, log_stride)?;
            Ok(())
        }
        Command::Excitation { config, ts, from, to } => {
            let scenario = load_scenario(&config)?;
            let from = from.unwrap_or(scenario.grid.t_r_plus);
            let to = to.unwrap_or_else(|| scenario.fe_end.unwrap_or(scenario.t_end));
            if let Some(warning) = scenario.grid.excitation_fit_warning(ts, to) {
                eprintln!("warning: {warning}");
            }
            let report = check_fe(&scenario, from, to, ts)?;
            print!("{report}");
            Ok(())
        }
        Command::Bounds { config, ts, te } => {
            let scenario = load_scenario(&config)?;
            let fe_end = te.unwrap_or_else(|| scenario.fe_end.unwrap_or(scenario.t_end));
            if fe_end <= scenario.grid.t_r_plus || fe_end > scenario.t_end {
                return Err(CliError::usage(format!(
                    "excitation end {fe_end} must lie in (t_r_plus, t_end]"
                )));
            }
            if let Some(warning) = scenario.grid.excitation_fit_warning(ts, fe_end) {
                eprintln!("warning: {warning}");
            }
            audit_run(&scenario, fe_end, ts)
        }
        Command::Sweep { param, values, experiment } => {
            let param = SweepParam::parse(&param)
                .ok_or_else(|| CliError::usage(format!("unknown sweep parameter `{param}`, expected T or gamma0")))?;
            if values.is_empty() {
                return Err(CliError::usage("sweep needs at least one value"));
            }
            let which = Preset::from_number(experiment)
                .ok_or_else(|| CliError::usage(format!("unknown experiment {experiment}, expected 1 or 2")))?;
            let base = preset(which);
            let rows = sweep(&base, param, &values)?;
            println!(
                "sweep over {} on experiment {experiment} (steady-state error: peak \
                 instantaneous error over the last 2 s of the excitation window)",
                param.as_str()
            );
            println!("  {:<14} steady_state_error", param.as_str());
            for row in rows {
                println!("  {:<14.6e} {:.6e}", row.value, row.steady_state_error);
            }
            Ok(())
        }
    }
}

fn audit_run(scenario: &Scenario, fe_end: f64, ts: f64) -> Result<(), CliError> {
    let trace = run_scenario(scenario)?;
    let report = check_fe(scenario, scenario.grid.t_r_plus, fe_end, ts)?;
    print!("{report}");

    let inputs = bound_inputs_from_run(scenario, &trace, report.lifted.alpha2, fe_end)?;
    let constants = compute_constants(&inputs);
    print!("{constants}");

    let audit = audit_scalar_regressor(scenario, &trace)?;
    print!("{audit}");
    if let Some(mu_peak) = audit.mu_peak {
        println!(
            "  mu bound check: peak {:.6e} <= mu_max {:.6e}: {}",
            mu_peak,
            constants.mu_max,
            mu_peak <= constants.mu_max
        );
    }

    let theta_tilde_0 = trace.err_inst.first().copied().unwrap_or(0.0);
    let ends = interval_end_errors(scenario, &trace);
    let mut excited_ok = true;
    let mut excited_worst = 0.0f64;
    let mut last_excited_err = 0.0f64;
    let mut post_ok = true;
    let mut first_post_index = None;
    for end in &ends {
        if end.t_boundary <= fe_end + 1e-9 {
            let bound = error_bound_fe(end.index, theta_tilde_0, &constants, inputs.delta1_max);
            excited_ok &= end.err_vs_interval_start <= bound && end.err_vs_boundary <= bound;
            excited_worst = excited_worst.max(end.err_vs_interval_start);
            last_excited_err = end.err_vs_interval_start;
        } else {
            let first = *first_post_index.get_or_insert(end.index);
            let bound = error_bound_post(end.index - first, last_excited_err, &constants, inputs.delta1_max);
            post_ok &= end.err_vs_interval_start <= bound;
        }
    }
    println!("bound audit");
    println!("  initial error:                    {theta_tilde_0:.6e}");
    println!("  worst excited interval-end error: {excited_worst:.6e}");
    println!("  excited ends within bounds:       {excited_ok}");
    if first_post_index.is_some() {
        println!("  post-excitation ends within bounds: {post_ok}");
    }
    println!(
        "  peak error over [{:.2}, {:.2}]:       {:.6e}",
        scenario.grid.t_r_plus,
        fe_end,
        trace.max_error_in(scenario.grid.t_r_plus, fe_end)
    );
    println!(
        "  steady-state error (last 2 s of window): {:.6e}",
        trace.max_error_in(fe_end - 2.0, fe_end)
    );
    Ok(())
}
