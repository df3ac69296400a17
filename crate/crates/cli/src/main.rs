use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use sse_bandit::verify_dominance;
use sse_bandit_cli::config::parse_algorithm;
use sse_bandit_cli::verify::{space_from, VerifyArgs};
use sse_bandit_cli::{parse_config, run_experiment};

#[derive(Parser)]
#[command(name = "sse-bandit", version, about = "Strategic bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write CSV and plot data.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// s-se or classic-se.
        #[arg(long)]
        algo: Option<String>,
        /// Run only this profile: a name from the file or a preset.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Check that truthful reporting dominates every grid deviation.
    Verify {
        /// Comma-separated arms: point:V, bernoulli:P, uniform:A:B, beta:A:B.
        #[arg(long, default_value = "point:1.0,bernoulli:0.5")]
        arms: String,
        #[arg(long, default_value_t = 6)]
        horizon: usize,
        /// Comma-separated report fractions; must include 1.
        #[arg(long, default_value = "0,1")]
        grid: String,
        /// Deviating arm, numbered from 1.
        #[arg(long, default_value_t = 1)]
        arm: usize,
        /// Force every bonus to zero.
        #[arg(long)]
        ablate_bonus: bool,
        /// Largest number of deviation policies to enumerate.
        #[arg(long)]
        budget: Option<u128>,
        /// Tapes drawn when exhaustive enumeration is not possible.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        tape_seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            seed,
            epochs,
            out,
            algo,
            profile,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(e) = epochs {
                anyhow::ensure!(e >= 1, "--epochs must be at least 1");
                cfg.epochs = e;
            }
            if let Some(o) = out {
                cfg.outputs = o;
            }
            if let Some(a) = algo {
                cfg.algorithm = parse_algorithm(&a)?;
            }
            if let Some(p) = profile {
                let chosen = match cfg.profiles.iter().find(|x| x.name == p) {
                    Some(x) => x.clone(),
                    None => cfg.preset_profile(&p)?,
                };
                cfg.profiles = vec![chosen];
            }
            let outcomes = run_experiment(&cfg)?;
            println!("wrote {}", cfg.outputs.display());
            for o in outcomes {
                println!(
                    "{:<24} mean regret at T {:>12.3}  first phase ended {:>4}/{}  halted {:>4}/{}",
                    o.name, o.final_regret, o.committed, cfg.epochs, o.halted, cfg.epochs
                );
            }
        }
        Command::Verify {
            arms,
            horizon,
            grid,
            arm,
            ablate_bonus,
            budget,
            samples,
            tape_seed,
            out,
        } => {
            let space = space_from(&VerifyArgs {
                arms,
                horizon,
                grid,
                arm,
                ablate_bonus,
                budget,
                samples,
                tape_seed,
            })?;
            let cert = verify_dominance(&space)?;
            let report = format!(
                "bonus: {}\n{cert}",
                if ablate_bonus { "ablated" } else { "standard" }
            );
            print!("{report}");
            if let Some(path) = out {
                fs::write(&path, &report).with_context(|| format!("writing {}", path.display()))?;
            }
        }
    }
    Ok(())
}
