use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wk_cli::config::{Format, ScenarioConfig};
use wk_cli::{catalog, cmd_integrate, cmd_sweep, cmd_verify, CliError, OutputOverrides, EXIT_CONFIG, EXIT_OK};
use wk_core::verify::{Suite, VerifyOptions};

#[derive(Parser)]
#[command(name = "wk", version, about = "Extremal worldlines of the Kawaguchi metric (k² + A)|u|")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Scenario config file.
    #[arg(short, long, conflicts_with = "scenario", required_unless_present = "scenario")]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `wk catalog`).
    #[arg(long)]
    scenario: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        match (&self.config, &self.scenario) {
            (Some(path), _) => ScenarioConfig::load(path),
            (None, Some(name)) => catalog::scenario(name),
            (None, None) => Err(CliError::Config("give --config or --scenario".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write trajectory, diagnostics and summary.
    Integrate {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Trajectory format; `json` writes JSON lines.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Also write whitespace-separated (s, spatial x, k²) for plotting.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Run a verification suite and print one JSON report per check.
    Verify {
        /// all, geometry, proposition1, zermelo, riewe, dixon, proposition2 or action.
        suite: String,
        /// RNG seed for random cases; defaults to WK_SEED or 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Flip the sign of the curvature term in the Dixon I residual.
        #[arg(long)]
        flip_curvature_sign: bool,
    },
    /// Run a parameter sweep and write sweep_summary.csv.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(short, long, default_value_t = default_jobs())]
        jobs: usize,
    },
    /// List built-in charts, Lagrangians, scenarios and suites.
    Catalog {
        /// Print as JSON.
        #[arg(long)]
        json: bool,
        /// Print the config of one built-in scenario.
        #[arg(long)]
        show: Option<String>,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn run(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Integrate {
            source,
            out,
            format,
            emit_plot_data,
        } => {
            let cfg = source.load()?;
            let overrides = OutputOverrides {
                format: format.map(|f| match f {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                }),
                plot_data: emit_plot_data,
            };
            let written = cmd_integrate(&cfg, &out, &overrides)?;
            eprintln!("wrote {}", written.trajectory.display());
            if written.truncated {
                eprintln!("trajectory truncated; see {}", written.diagnostics.display());
            }
            Ok(written.exit_code())
        }
        Command::Verify {
            suite,
            seed,
            flip_curvature_sign,
        } => {
            let suite: Suite = suite.parse().map_err(|e: wk_core::Error| CliError::Config(e.to_string()))?;
            let mut opts = VerifyOptions::from_env().map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(seed) = seed {
                opts.seed = seed;
            }
            if flip_curvature_sign {
                opts.curvature_sign = -1.0;
            }
            let (_, code) = cmd_verify(suite, &opts, std::io::stdout().lock())?;
            Ok(code)
        }
        Command::Sweep { source, out, jobs } => {
            let cfg = source.load()?;
            let (path, rows) = cmd_sweep(&cfg, &out, jobs)?;
            let failed = rows.iter().filter(|r| r.summary.status != "ok").count();
            eprintln!("wrote {} ({} runs, {failed} not completed)", path.display(), rows.len());
            Ok(EXIT_OK)
        }
        Command::Catalog { json, show } => {
            let mut stdout = std::io::stdout().lock();
            if let Some(name) = show {
                writeln!(stdout, "{}", catalog::scenario(&name)?.to_json())?;
            } else if json {
                let text = serde_json::to_string_pretty(&catalog::catalog()).map_err(std::io::Error::from)?;
                writeln!(stdout, "{text}")?;
            } else {
                write!(stdout, "{}", catalog::catalog())?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        // A closed downstream pipe (`wk catalog | head`) is not an error.
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("wk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
