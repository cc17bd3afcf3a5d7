use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bvprop::cli::{
    cmd_bounds, cmd_converge, cmd_simulate, cmd_switch_bound, require_config, rotor_demo, SystemSpec,
};
use bvprop::Error;

#[derive(Parser)]
#[command(name = "bvprop", version, about = "Galerkin propagation and a-priori bounds for bilinear quantum control")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate and write trajectory.csv and summary.json.
    Simulate,
    /// Evaluate the requested bound reports.
    Bounds,
    /// Galerkin error and bound for a list of orders.
    Converge {
        /// Comma-separated orders; defaults to the configuration's n_list.
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
    },
    /// Lower bounds on switches and total variation for bang-bang steering.
    SwitchBound {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Steer the rotor from φ_1 with cos(3t)/n.
    RotorDemo {
        #[arg(long, value_delimiter = ',', default_values_t = [10, 50])]
        n: Vec<usize>,
        /// Galerkin order.
        #[arg(long, default_value_t = 16)]
        order: usize,
    },
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate => {
            let cfg = require_config(cli.config.as_ref(), cli.seed)?;
            let s = cmd_simulate(&cfg, &cli.out)?;
            println!(
                "{}: N = {}, final norm {:.16e}, |c_1| = {:.6}",
                s.model, s.n, s.final_norm, s.overlaps[0]
            );
        }
        Command::Bounds => {
            let cfg = require_config(cli.config.as_ref(), cli.seed)?;
            let out = cmd_bounds(&cfg, &cli.out)?;
            for r in &out.reports {
                println!(
                    "{:<14} measured {:.6e} (+{:.1e})  bound {:.6e}  {}{}",
                    r.name,
                    r.measured,
                    r.uncertainty,
                    r.bound,
                    if r.satisfied { "ok" } else { "VIOLATED" },
                    if r.estimated_constants { " [estimated constants]" } else { "" }
                );
            }
            for r in out.warnings() {
                eprintln!("warning: {} violated with estimated constants", r.name);
            }
            if !out.hard_failures().is_empty() {
                eprintln!("error: a bound with analytic constants is violated");
                return Ok(ExitCode::from(3));
            }
        }
        Command::Converge { n_list } => {
            let cfg = require_config(cli.config.as_ref(), cli.seed)?;
            for r in cmd_converge(&cfg, &n_list, &cli.out)? {
                println!("N = {:>4}  error {:.6e}  bound {:.6e}", r.n, r.measured, r.bound);
            }
        }
        Command::SwitchBound { k, epsilon } => {
            let system = match cli.config.as_ref() {
                Some(_) => require_config(cli.config.as_ref(), cli.seed)?.config.system,
                None => SystemSpec::Rotor,
            };
            println!("{}", cmd_switch_bound(k, epsilon, &system)?);
        }
        Command::RotorDemo { n, order } => {
            println!("n, |<φ_1,ψ>|, |<φ_2,ψ>|, 9/n");
            for r in rotor_demo(&n, order, &cli.out)? {
                println!("{}, {:.6}, {:.6}, {:.6}", r.n, r.overlap_1, r.overlap_2, r.nine_over_n);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Config(_)) { 2 } else { 1 })
        }
    }
}
