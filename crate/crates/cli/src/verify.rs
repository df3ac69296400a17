//! The `verify` subcommand's argument handling.

use anyhow::{bail, Context, Result};

use sse_bandit::verifier::{DeviationSpace, TapeMode, DEFAULT_BUDGET};
use sse_bandit::{BonusMode, Distribution};

/// Parses `point:1.0,bernoulli:0.5,uniform:0.2:0.8,beta:2:3`.
pub fn parse_arms(s: &str) -> Result<Vec<Distribution>> {
    s.split(',')
        .map(|item| {
            let parts: Vec<&str> = item.trim().split(':').collect();
            let num = |i: usize| -> Result<f64> {
                parts
                    .get(i)
                    .context("missing parameter")?
                    .parse::<f64>()
                    .with_context(|| format!("bad number in `{item}`"))
            };
            let d = match (parts[0], parts.len()) {
                ("point", 2) => Distribution::PointMass { value: num(1)? },
                ("bernoulli", 2) => Distribution::Bernoulli { p: num(1)? },
                ("uniform", 3) => Distribution::Uniform {
                    low: num(1)?,
                    high: num(2)?,
                },
                ("beta", 3) => Distribution::Beta {
                    alpha: num(1)?,
                    beta: num(2)?,
                },
                _ => bail!("cannot read arm `{item}`"),
            };
            d.validate()?;
            Ok(d)
        })
        .collect()
}

pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .with_context(|| format!("bad fraction `{f}`"))
        })
        .collect()
}

pub struct VerifyArgs {
    pub arms: String,
    pub horizon: usize,
    pub grid: String,
    /// One-based.
    pub arm: usize,
    pub ablate_bonus: bool,
    pub budget: Option<u128>,
    pub samples: usize,
    pub tape_seed: u64,
}

pub fn space_from(args: &VerifyArgs) -> Result<DeviationSpace> {
    if args.arm == 0 {
        bail!("arms are numbered from 1");
    }
    let mut space = DeviationSpace::new(
        parse_arms(&args.arms)?,
        args.horizon,
        parse_grid(&args.grid)?,
    );
    space.deviator = args.arm - 1;
    space.budget = args.budget.unwrap_or(DEFAULT_BUDGET);
    space.tapes = TapeMode::Auto {
        samples: args.samples,
        seed: args.tape_seed,
    };
    if args.ablate_bonus {
        space.bonus_mode = BonusMode::Ablated;
    }
    space.validate()?;
    Ok(space)
}
