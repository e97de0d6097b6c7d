//! Benchmark CLI for LPV data-driven predictive control.
//!
//! Verbs: `generate` (dictionary + certificate), `check-pe` (certificate
//! only), `simulate` (data-driven simulation of one window pair), `run`
//! (closed-loop experiments with CSV/SVG/metrics artifacts).
//!
//! Exit codes: 0 success, 2 configuration or parse error, 3 excitation
//! failure, 4 inconsistent windows, 5 infeasible control step, 1 other I/O
//! failures.

mod config;
mod experiments;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ExperimentId};
use experiments::{cmd_check_pe, cmd_generate, cmd_run, cmd_simulate, CmdError, ControllerKind};

#[derive(Parser)]
#[command(
    name = "lpv-dpc",
    about = "Data-driven predictive control benchmarks for LPV systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment preset; defaults to the config file's id, else example1.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<ExperimentId>,
    /// Seed for every random draw in the experiment.
    #[arg(long)]
    seed: Option<u64>,
    /// Dictionary length N_d.
    #[arg(long)]
    nd: Option<usize>,
    /// Prediction horizon N_p.
    #[arg(long)]
    np: Option<usize>,
    /// Past-window length n_ell.
    #[arg(long)]
    nell: Option<usize>,
    /// Config file (strict `key = value` with sections).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root; defaults to $LPV_DPC_OUT or ./out.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_experiment(text: &str) -> Result<ExperimentId, String> {
    ExperimentId::parse(text).ok_or_else(|| format!("unknown experiment '{text}'"))
}

#[derive(Subcommand)]
enum Command {
    /// Generate the experiment's data dictionary and print its certificate.
    Generate {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Recompute and print the persistency-of-excitation certificate.
    CheckPe {
        #[command(flatten)]
        common: CommonOpts,
        /// Dictionary CSV to check (requires --meta).
        #[arg(long, requires = "meta")]
        dict: Option<PathBuf>,
        /// Metadata sidecar of --dict.
        #[arg(long, requires = "dict")]
        meta: Option<PathBuf>,
    },
    /// Data-driven simulation of one past/future window pair.
    Simulate {
        #[command(flatten)]
        common: CommonOpts,
        /// Dictionary CSV to predict from (requires --meta).
        #[arg(long, requires = "meta")]
        dict: Option<PathBuf>,
        /// Metadata sidecar of --dict.
        #[arg(long, requires = "dict")]
        meta: Option<PathBuf>,
        /// Windows CSV: first n_ell rows are the past, the rest the future.
        #[arg(long)]
        windows: Option<PathBuf>,
    },
    /// Closed-loop experiment; writes trajectories, metrics and plots.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Which controllers to run.
        #[arg(long, value_parser = ["dpc", "mpc", "both"], default_value = "both")]
        controller: String,
        /// Closed-loop steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Dump the first-step QP matrices as CSV files.
        #[arg(long)]
        dump_qp: bool,
    },
}

fn build_config(common: &CommonOpts, steps: Option<usize>) -> Result<ExperimentConfig, CmdError> {
    let file_text = match &common.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CmdError::Io(format!("reading {}: {e}", path.display())))?,
        ),
        None => None,
    };
    // The experiment id decides the defaults: explicit flag first, then the
    // config file's id, then example1.
    let id = match common.experiment {
        Some(id) => id,
        None => match &file_text {
            Some(text) => {
                let mut probe = ExperimentConfig::defaults(ExperimentId::Example1);
                probe.apply_file(text).map_err(|e| CmdError::Config(e.to_string()))?;
                probe.experiment
            }
            None => ExperimentId::Example1,
        },
    };
    let mut cfg = ExperimentConfig::defaults(id);
    if let Some(text) = &file_text {
        cfg.apply_file(text).map_err(|e| CmdError::Config(e.to_string()))?;
        cfg.experiment = id;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(nd) = common.nd {
        cfg.n_d = nd;
    }
    if let Some(np) = common.np {
        cfg.horizon = np;
    }
    if let Some(nell) = common.nell {
        cfg.n_ell = nell;
    }
    if let Some(steps) = steps {
        cfg.steps = steps;
    }
    if common.out.is_some() {
        cfg.out_dir = common.out.clone();
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Generate { common } => {
            let cfg = build_config(&common, None)?;
            cmd_generate(&cfg)
        }
        Command::CheckPe { common, dict, meta } => {
            let cfg = build_config(&common, None)?;
            let paths = dict.as_deref().zip(meta.as_deref());
            cmd_check_pe(&cfg, paths)
        }
        Command::Simulate {
            common,
            dict,
            meta,
            windows,
        } => {
            let cfg = build_config(&common, None)?;
            let paths = dict.as_deref().zip(meta.as_deref());
            cmd_simulate(&cfg, paths, windows.as_deref())
        }
        Command::Run {
            common,
            controller,
            steps,
            dump_qp,
        } => {
            let cfg = build_config(&common, steps)?;
            let kinds: Vec<ControllerKind> = match controller.as_str() {
                "dpc" => vec![ControllerKind::Dpc],
                "mpc" => vec![ControllerKind::Mpc],
                _ => vec![ControllerKind::Dpc, ControllerKind::Mpc],
            };
            cmd_run(&cfg, &kinds, dump_qp)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
