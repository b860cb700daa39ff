//! `pecam` command-line front end.

mod commands;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use pecam_core::cam::DEFAULT_SPRING_STIFFNESS;
use pecam_core::opt::Parameterization;
use pecam_core::{CamDesign, DesignSpace, RunConfig, TaskKind};

pub use error::CliError;
pub use output::header;

#[derive(Debug, Parser)]
#[command(name = "pecam", version, about = "Elliptic-cam knee spring design toolkit")]
pub struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for episode batches (default: all processors).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Writes the spring torque curve of one design.
    TorqueCurve {
        /// `rigid`, `hardware` or `q_bar,a,b,phi0`.
        #[arg(long, value_parser = parse_design)]
        design: Option<[f64; 4]>,
        /// Lower knee angle, rad.
        #[arg(long, allow_negative_numbers = true)]
        q_min: Option<f64>,
        /// Upper knee angle, rad.
        #[arg(long, allow_negative_numbers = true)]
        q_max: Option<f64>,
        /// Number of evenly spaced angles.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Runs one episode and writes its trajectory and summary.
    Simulate {
        /// `rigid`, `hardware` or `q_bar,a,b,phi0`.
        #[arg(long, value_parser = parse_design)]
        design: Option<[f64; 4]>,
        /// `forward_1ms`, `random_commands`, `stand`, `payload` or `rough`.
        #[arg(long, value_parser = parse_task)]
        task: Option<TaskKind>,
        /// Episode length, s.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Evaluates a (q_bar, r) grid of circular cams.
    Sweep {
        /// Grid points per axis.
        #[arg(long)]
        resolution: Option<usize>,
        /// Episodes per cell.
        #[arg(long)]
        episodes: Option<usize>,
    },
    /// Runs the surrogate-based design optimization.
    Optimize {
        /// Total design evaluations.
        #[arg(long)]
        budget: Option<usize>,
        /// Episodes per evaluation.
        #[arg(long)]
        episodes: Option<usize>,
        /// `circular` or `elliptic`.
        #[arg(long, value_parser = parse_space)]
        space: Option<Parameterization>,
    },
    /// Compares two designs on paired episode seeds.
    Compare {
        /// Baseline design, same forms as `--design`.
        #[arg(long, value_parser = parse_design)]
        design_a: Option<[f64; 4]>,
        /// Candidate design, same forms as `--design`.
        #[arg(long, value_parser = parse_design)]
        design_b: Option<[f64; 4]>,
        /// Paired episodes.
        #[arg(long)]
        episodes: Option<usize>,
    },
}

fn parse_design(s: &str) -> Result<[f64; 4], String> {
    match s {
        "rigid" => return Ok(CamDesign::rigid().vector()),
        "hardware" => return Ok(CamDesign::hardware().vector()),
        _ => {}
    }
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|_| "expected `rigid`, `hardware` or four values q_bar,a,b,phi0".to_string())
}

fn parse_task(s: &str) -> Result<TaskKind, String> {
    s.parse::<TaskKind>().map_err(|e| e.to_string())
}

fn parse_space(s: &str) -> Result<Parameterization, String> {
    match s {
        "circular" => Ok(Parameterization::Circular),
        "elliptic" => Ok(Parameterization::Elliptic),
        _ => Err(format!("unknown design space `{s}` (expected circular or elliptic)")),
    }
}

fn cam(v: [f64; 4], k_s: f64) -> CamDesign {
    CamDesign::new(v[0], v[1], v[2], v[3], k_s)
}

/// Loads the configuration and folds command-line overrides into it.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_toml(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = out.clone();
    }
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    let k_s = if config.design.k_s > 0.0 { config.design.k_s } else { DEFAULT_SPRING_STIFFNESS };
    match &cli.command {
        Command::TorqueCurve { design, q_min, q_max, samples } => {
            if let Some(d) = design {
                config.design = cam(*d, k_s);
            }
            if let Some(v) = q_min {
                config.torque_curve.q_min = *v;
            }
            if let Some(v) = q_max {
                config.torque_curve.q_max = *v;
            }
            if let Some(v) = samples {
                config.torque_curve.samples = *v;
            }
        }
        Command::Simulate { design, task, duration } => {
            if let Some(d) = design {
                config.design = cam(*d, k_s);
            }
            if let Some(kind) = task {
                config.task.kind = *kind;
            }
            if duration.is_some() {
                config.task.duration = *duration;
            }
        }
        Command::Sweep { resolution, episodes } => {
            if let Some(n) = resolution {
                config.sweep.resolution = [*n, *n];
            }
            if let Some(n) = episodes {
                config.sweep.episodes = *n;
            }
        }
        Command::Optimize { budget, episodes, space } => {
            if let Some(n) = budget {
                config.optimizer.budget = *n;
            }
            if let Some(n) = episodes {
                config.optimizer.episodes = *n;
            }
            if let Some(p) = space {
                if *p != config.design_space.parameterization {
                    config.design_space = match p {
                        Parameterization::Circular => DesignSpace::circular(),
                        Parameterization::Elliptic => DesignSpace::elliptic(),
                    };
                }
            }
        }
        Command::Compare { design_a, design_b, episodes } => {
            if let Some(d) = design_a {
                config.compare.design_a = cam(*d, k_s);
            }
            if let Some(d) = design_b {
                config.compare.design_b = cam(*d, k_s);
            }
            if let Some(n) = episodes {
                config.compare.episodes = *n;
            }
        }
    }
    config.validate()?;
    Ok(config)
}

/// Runs one invocation inside a worker pool sized by the configuration.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = effective_config(&cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::TorqueCurve { .. } => commands::torque_curve(&config),
        Command::Simulate { .. } => commands::simulate(&config),
        Command::Sweep { .. } => commands::sweep(&config),
        Command::Optimize { .. } => commands::optimize(&config),
        Command::Compare { .. } => commands::compare(&config),
    })
}
