#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use tissue_growth::harness::{
    self, assumption_text, parse_config, Axis, ExitCategory, HarnessError, RunConfig,
};
use tissue_growth::model::Barenblatt;

#[derive(Parser)]
#[command(name = "tissue-growth", version, about = "Two-species tissue growth solver and estimate auditor")]
struct Cli {
    /// Overrides `[output] directory`.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Reserved; runs are deterministic and use no randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Writes SVG plots next to the CSV output.
    #[arg(long, global = true)]
    emit_plots: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs one simulation and audits its diagnostics.
    Run { config: PathBuf },
    /// Refinement study along one parameter axis.
    Converge {
        config: PathBuf,
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Prints the structural assumption report of the configured rates.
    Validate { config: PathBuf },
    /// Prints statistics of the Barenblatt profile.
    Barenblatt {
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
    },
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    s.parse()
}

fn load(cli: &Cli, path: &PathBuf) -> Result<RunConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.clone(),
        source,
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(dir) = &cli.output_dir {
        cfg.output.directory = dir.clone();
    }
    if cli.emit_plots {
        cfg.output.emit_plots = true;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<ExitCategory, HarnessError> {
    if let Some(seed) = cli.seed {
        info!("--seed {seed} accepted but unused: runs are deterministic");
    }
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(cli, config)?;
            let outcome = harness::cmd_run(&cfg)?;
            println!("{}", outcome.audit);
            println!("output written to {}", cfg.output.directory.display());
            Ok(outcome.category())
        }
        Command::Converge {
            config,
            axis,
            levels,
        } => {
            let cfg = load(cli, config)?;
            let table = harness::cmd_converge(&cfg, *axis, *levels)?;
            print!("{table}");
            Ok(ExitCategory::Success)
        }
        Command::Validate { config } => {
            let cfg = load(cli, config)?;
            let report = harness::cmd_validate(&cfg);
            println!("{}", assumption_text(&report));
            Ok(if report.all_pass() {
                ExitCategory::Success
            } else {
                ExitCategory::Assumptions
            })
        }
        Command::Barenblatt {
            gamma,
            dim,
            t,
            mass,
        } => {
            if !(*t > 0.0) {
                return Err(tissue_growth::model::ModelError::BadBarenblattArguments {
                    t: *t,
                    mass: *mass,
                }
                .into());
            }
            if !(1..=2).contains(dim) {
                return Err(tissue_growth::GridError::UnsupportedDimension(*dim).into());
            }
            let b = Barenblatt::new(*gamma, *dim, *mass)?;
            println!("gamma           {gamma}");
            println!("dimension       {dim}");
            println!("mass            {mass}");
            println!("t               {t}");
            println!("tau             {:.12e}", b.tau(*t));
            println!("support radius  {:.12e}", b.support_radius(*t));
            println!("peak density    {:.12e}", b.density_at(0.0, *t));
            println!("peak pressure   {:.12e}", b.pressure_at(0.0, *t));
            Ok(ExitCategory::Success)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(cat) => ExitCode::from(cat.code()),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.category().code())
        }
    }
}
