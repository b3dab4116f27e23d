use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use catenary_robot::catenary::TensionMode;
use catenary_robot::scenario::{self, RunTrace, ScenarioSpec, Summary, TraceFormat};
use catenary_robot::Error;

#[derive(Parser)]
#[command(name = "catenary-robot", version, about = "Simulate two quadrotors carrying a hanging cable")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TensionArg {
    Classical,
    Paper,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and optionally write its trace (.csv or .json).
    Run {
        /// Built-in scenario name or path to a scenario JSON file.
        #[arg(long)]
        scenario: String,
        /// Integrator step [s].
        #[arg(long)]
        dt: Option<f64>,
        /// Simulated duration [s].
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, value_enum)]
        tension_mode: Option<TensionArg>,
        /// Disable the cable tension feed-forward.
        #[arg(long)]
        no_feedforward: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace sample rate [Hz].
        #[arg(long)]
        log_rate: Option<f64>,
    },
    /// List the built-in scenarios.
    List,
    /// Plot trace channels to an SVG file.
    Plot {
        trace: PathBuf,
        /// Comma-separated channel names.
        #[arg(long, value_delimiter = ',', default_value = "x_C,span,yaw")]
        channels: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print error statistics of a trace.
    Stats {
        trace: PathBuf,
        /// Start of the statistics window [s].
        #[arg(long)]
        from: Option<f64>,
    },
}

fn print_summary(s: &Summary) {
    println!("window    t >= {} s ({} samples)", s.window_start, s.samples);
    println!("mean      x {:+.6e}  y {:+.6e}  z {:+.6e}  [m]", s.mean[0], s.mean[1], s.mean[2]);
    println!("std       x {:.6e}  y {:.6e}  z {:.6e}  [m]", s.std[0], s.std[1], s.std[2]);
    println!("yaw       mean {:+.6e}  std {:.6e}  rms {:.6e}  [rad]", s.mean_yaw, s.std_yaw, s.rms_yaw);
    println!("span      mean {:+.6e}  std {:.6e}  rms {:.6e}  [m]", s.mean_span, s.std_span, s.rms_span);
    println!("position  rms {:.6e}  [m]", s.rms_position);
}

fn write_out(trace: &RunTrace, out: &Option<PathBuf>) -> catenary_robot::Result<()> {
    if let Some(path) = out {
        scenario::write_trace(trace, path, TraceFormat::from_path(path))?;
        log::info!("wrote {} rows to {}", trace.rows.len(), path.display());
    }
    Ok(())
}

fn execute(command: Command) -> catenary_robot::Result<ExitCode> {
    match command {
        Command::List => {
            for name in ScenarioSpec::builtin_names() {
                println!("{name}");
            }
        }
        Command::Run { scenario, dt, duration, tension_mode, no_feedforward, out, log_rate } => {
            let mut spec = ScenarioSpec::load(&scenario)?;
            if let Some(dt) = dt {
                spec.sim.dt = dt;
            }
            if let Some(d) = duration {
                spec.sim.duration_s = d;
            }
            if let Some(mode) = tension_mode {
                spec.modes.tension = match mode {
                    TensionArg::Classical => TensionMode::Classical,
                    TensionArg::Paper => TensionMode::Paper,
                };
            }
            if no_feedforward {
                spec.modes.feedforward = false;
            }
            if let Some(hz) = log_rate {
                spec.sim.log_hz = hz;
            }
            spec.validate()?;
            let outcome = scenario::run(&spec)?;
            write_out(&outcome.trace, &out)?;
            if let Some(err) = outcome.error {
                eprintln!("error: {err}");
                let code = if matches!(err, Error::NumericalDivergence { .. }) { 2 } else { 1 };
                return Ok(ExitCode::from(code));
            }
            match &outcome.trace.summary {
                Some(s) => print_summary(s),
                None => println!("statistics: empty window ({} rows)", outcome.trace.rows.len()),
            }
        }
        Command::Plot { trace, channels, out } => {
            let data = scenario::read_trace(&trace)?;
            let names: Vec<&str> = channels.iter().map(|c| c.trim()).filter(|c| !c.is_empty()).collect();
            scenario::plot(&data, &names, &out)?;
        }
        Command::Stats { trace, from } => {
            let data = scenario::read_trace(&trace)?;
            let summary = scenario::stats(&data, from.unwrap_or(data.stats_from))?;
            print_summary(&summary);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e @ Error::NumericalDivergence { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
