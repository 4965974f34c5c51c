//! Command-line front end: evolve / convergence / cost / validate.

use clap::{Args, Parser, Subcommand};
use landau::cli::{parse_config, parse_config_with_overrides, run_convergence, run_cost_scaling, run_evolve};
use landau::{Error, SimConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "landau", version, about = "Particle-method solver for the homogeneous Landau equation")]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

/// Flag overrides shared by all subcommands; flags win over file keys.
#[derive(Args, Clone)]
struct Overrides {
    /// Configuration file (flat `key = value` lines)
    config: PathBuf,
    /// RNG seed (required for rbm1/rbm2 unless set in the file)
    #[arg(long)]
    seed: Option<u64>,
    /// Solver method: det1, det2, rbm1, rbm2
    #[arg(long)]
    method: Option<String>,
    /// Grid resolution per dimension
    #[arg(long)]
    n_o: Option<usize>,
    /// Time step
    #[arg(long)]
    dt: Option<f64>,
    /// Final time
    #[arg(long)]
    t_end: Option<f64>,
    /// Output directory
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Generic override, repeatable: --set key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn resolve(&self) -> landau::Result<SimConfig> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if let Some(s) = self.seed {
            pairs.push(("seed".into(), s.to_string()));
        }
        if let Some(m) = &self.method {
            pairs.push(("method".into(), m.clone()));
        }
        if let Some(n) = self.n_o {
            pairs.push(("n_o".into(), n.to_string()));
        }
        if let Some(dt) = self.dt {
            pairs.push(("dt".into(), dt.to_string()));
        }
        if let Some(t) = self.t_end {
            pairs.push(("t_end".into(), t.to_string()));
        }
        if let Some(dir) = &self.output_dir {
            pairs.push(("output_dir".into(), dir.display().to_string()));
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::Config(format!("--set expects key=value, got '{kv}'"))
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let text = std::fs::read_to_string(&self.config)?;
        parse_config_with_overrides(&text, &pairs)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the time evolution and write diagnostics/snapshot CSVs
    Evolve(Overrides),
    /// Sweep resolutions and fit the error decay order
    Convergence {
        #[command(flatten)]
        overrides: Overrides,
        /// Resolutions to sweep, e.g. --resolutions 40,60,80
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        /// Seeds to average over for random-batch methods
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Sweep resolutions and fit the per-step cost against N
    Cost {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', required = true)]
        resolutions: Vec<usize>,
        /// Timed steps per resolution
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Parse and validate a configuration file, printing the resolved values
    Validate {
        config: PathBuf,
    },
}

fn dispatch(cmd: Command) -> landau::Result<()> {
    match cmd {
        Command::Evolve(ov) => {
            let cfg = ov.resolve()?;
            let files = run_evolve(&cfg)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Convergence {
            overrides,
            resolutions,
            seeds,
        } => {
            let cfg = overrides.resolve()?;
            let summary = run_convergence(&cfg, &resolutions, &seeds)?;
            for r in &summary.rows {
                println!(
                    "n_o = {:4}  h = {:.5}  rel_l2_error = {:.6e}",
                    r.n_o, r.h, r.rel_l2_error
                );
            }
            println!("fitted slope (error vs 1/n_o): {:.4}", summary.slope);
        }
        Command::Cost {
            overrides,
            resolutions,
            steps,
        } => {
            let cfg = overrides.resolve()?;
            let summary = run_cost_scaling(&cfg, &resolutions, steps)?;
            for r in &summary.rows {
                println!(
                    "n_o = {:4}  N = {:7}  step = {:.4e} s",
                    r.n_o, r.n_particles, r.mean_step_seconds
                );
            }
            println!("fitted slope (time vs N): {:.4}", summary.slope);
        }
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            println!("scenario = {}", cfg.scenario.name());
            println!("method = {}", cfg.method.name());
            println!("d = {}", cfg.dim());
            println!("n_o = {}", cfg.n_o);
            println!("N = {}", cfg.particle_count());
            println!("h = {}", cfg.h());
            println!("epsilon = {}", cfg.resolved_epsilon());
            println!("sigma = {}", cfg.resolved_sigma());
            println!("steps = {}", cfg.n_steps());
            println!("ok");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match dispatch(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::Io(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
