use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ternary_consensus_cli::{
    cmd_bound, cmd_check_core, cmd_run, cmd_sweep, presets, BoundArgs, CliError, ExperimentConfig, Overrides,
    EXIT_CONFIG, EXIT_NOT_CORE_CONNECTED, EXIT_OK,
};

#[derive(Parser, Debug)]
#[command(name = "tcsim", version, about = "Ternary-message average consensus simulator")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use a built-in config instead of --config.
    #[arg(long, global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for both the graph and the initial values.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "t-max", global = true)]
    t_max: Option<u64>,
    /// Validate every round against the protocol invariants.
    #[arg(long, global = true)]
    check: bool,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write metrics.csv (and trace.csv).
    Run {
        /// Run the real-valued Metropolis iteration instead.
        #[arg(long)]
        baseline: bool,
    },
    /// Evaluate the convergence-time bound.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long = "B")]
        block: usize,
        #[arg(long = "D")]
        d_sup: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        w0: f64,
        #[arg(long)]
        v20: f64,
        #[arg(long)]
        xinf: f64,
    },
    /// Check a generated window of the configured sequence for core-connectivity.
    CheckCore {
        #[arg(long)]
        window: usize,
    },
    /// Time to reach an error threshold for several network sizes.
    Sweep {
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        /// Defaults to run.stop_err.
        #[arg(long = "stop-err")]
        stop_err: Option<f64>,
    },
    /// List the built-in configs.
    Presets,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => {
            let text = presets::get(name).ok_or_else(|| {
                let known: Vec<_> = presets::names().collect();
                CliError::Config(format!("unknown preset {name:?}; known: {}", known.join(", ")))
            })?;
            ExperimentConfig::parse(text, PathBuf::new())
                .map_err(|e| CliError::Config(format!("preset {name}: {e}")))?
        }
        (None, None) => return Err(CliError::Config("--config or --preset is required".into())),
    };
    cfg.apply(&Overrides {
        seed: cli.seed,
        t_max: cli.t_max,
        check: cli.check,
        out: cli.out.clone(),
    });
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::Run { baseline } => {
            let report = cmd_run(&load(cli)?, *baseline)?;
            if !cli.quiet {
                println!("{report}");
            }
            Ok(EXIT_OK)
        }
        &Command::Bound {
            n,
            block,
            d_sup,
            alpha,
            beta,
            eps,
            w0,
            v20,
            xinf,
        } => {
            let terms = cmd_bound(&BoundArgs {
                n,
                block,
                d_sup,
                alpha,
                beta,
                eps,
                w0,
                v20,
                xinf,
            })?;
            for (label, v) in terms.labeled() {
                println!("{label} = {v:.16e}");
            }
            println!("T = {:.16e}", terms.total());
            Ok(EXIT_OK)
        }
        Command::CheckCore { window } => {
            let check = cmd_check_core(&load(cli)?, *window)?;
            let edges: Vec<String> = check.core_edges.iter().map(ToString::to_string).collect();
            if !cli.quiet {
                let verdict = if check.is_core_connected {
                    "core-connected"
                } else {
                    "not core-connected"
                };
                println!("{verdict}");
                println!(
                    "core edges: {}",
                    if edges.is_empty() {
                        "(none)".into()
                    } else {
                        edges.join(" ")
                    }
                );
            }
            Ok(if check.is_core_connected {
                EXIT_OK
            } else {
                EXIT_NOT_CORE_CONNECTED
            })
        }
        Command::Sweep { n_list, stop_err } => {
            let cfg = load(cli)?;
            let stop_err = stop_err
                .or(cfg.run.stop_err)
                .ok_or_else(|| CliError::Config("--stop-err or run.stop_err is required".into()))?;
            let rows = cmd_sweep(&cfg, n_list, stop_err)?;
            if !cli.quiet {
                for r in rows {
                    let rounds = r.rounds_to_err.map_or_else(|| "not reached".into(), |t| t.to_string());
                    println!("n={} rounds_to_err={rounds} final_err={:.6e}", r.n, r.final_err);
                }
            }
            Ok(EXIT_OK)
        }
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("tcsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
