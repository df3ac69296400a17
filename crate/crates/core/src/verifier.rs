//! Brute-force check that truthful reporting is a dominant strategy in every
//! subgame, at desk scale.
//!
//! One arm deviates by reporting `f * r` on each pull with `f` taken from a
//! small grid. For a fixed reward tape every fraction sequence is played out
//! once. For a sequence `s` and a cut round `t`, the truthful continuation
//! plays `s` on the pulls before `t` and reports truthfully from then on, so
//! both games share the history before `t`. The margin is the truthful
//! continuation's utility from `t` minus the deviation's.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::bonus::BonusReport;
use crate::engine::run_with;
use crate::error::{Error, Result};
use crate::player::confidence_radius;
use crate::rank::rank_map;
use crate::rng::{stream, FixedTape, StreamRole};
use crate::strategy::{ArmStrategy, FractionSchedule, StrategyId};
use crate::types::{BonusMode, Distribution, GameConfig, RoundRecord};

pub const MAX_HORIZON: usize = 8;
pub const MAX_GRID: usize = 3;
pub const DEFAULT_BUDGET: u128 = 1 << 14;
pub const TOLERANCE: f64 = 1e-9;

/// How reward tapes are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TapeMode {
    /// Every Bernoulli outcome combination when there are at most
    /// `DEFAULT_BUDGET` of them, sampled tapes otherwise.
    Auto {
        samples: usize,
        seed: u64,
    },
    Sampled {
        samples: usize,
        seed: u64,
    },
}

impl Default for TapeMode {
    fn default() -> Self {
        TapeMode::Auto {
            samples: 256,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationSpace {
    pub arms: Vec<Distribution>,
    pub horizon: usize,
    pub grid: Vec<f64>,
    pub deviator: usize,
    /// Strategy of every arm; the deviator's entry is ignored.
    pub opponents: Vec<StrategyId>,
    pub budget: u128,
    pub bonus_mode: BonusMode,
    pub tapes: TapeMode,
    /// Seed of the opponents' strategy streams.
    pub strategy_seed: u64,
}

impl DeviationSpace {
    /// Truthful opponents, deviator arm 0, default budget and tapes.
    pub fn new(arms: Vec<Distribution>, horizon: usize, grid: Vec<f64>) -> Self {
        let k = arms.len();
        Self {
            arms,
            horizon,
            grid,
            deviator: 0,
            opponents: vec![StrategyId::Truthful; k],
            budget: DEFAULT_BUDGET,
            bonus_mode: BonusMode::Standard,
            tapes: TapeMode::default(),
            strategy_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.arms.len();
        if k < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 arms, got {k}"
            )));
        }
        if self.horizon < 2 || self.horizon > MAX_HORIZON {
            return Err(Error::InvalidConfig(format!(
                "verifier horizon must be in 2..={MAX_HORIZON}, got {}",
                self.horizon
            )));
        }
        if self.grid.is_empty() || self.grid.len() > MAX_GRID {
            return Err(Error::InvalidConfig(format!(
                "grid must hold 1 to {MAX_GRID} fractions, got {}",
                self.grid.len()
            )));
        }
        if let Some(f) = self
            .grid
            .iter()
            .find(|f| !(f.is_finite() && (0.0..=1.0).contains(*f)))
        {
            return Err(Error::InvalidConfig(format!(
                "grid fraction {f} is outside [0, 1]"
            )));
        }
        if !self.grid.contains(&1.0) {
            return Err(Error::InvalidConfig(
                "grid must contain 1 (truthful)".into(),
            ));
        }
        if self.deviator >= k {
            return Err(Error::ArmOutOfRange {
                arm: self.deviator,
                num_arms: k,
            });
        }
        if self.opponents.len() != k {
            return Err(Error::InvalidConfig(format!(
                "{} opponent strategies for {k} arms",
                self.opponents.len()
            )));
        }
        for d in &self.arms {
            d.validate()?;
        }
        for s in &self.opponents {
            s.validate()?;
        }
        Ok(())
    }

    /// True when no arm can be eliminated before the horizon.
    pub fn elimination_impossible(&self) -> bool {
        elimination_impossible(self.arms.len(), self.horizon)
    }

    /// Most pulls arm `arm` can receive.
    pub fn max_pulls(&self, arm: usize) -> usize {
        let k = self.arms.len();
        if self.elimination_impossible() {
            round_robin_pulls(k, self.horizon, arm)
        } else {
            self.horizon - k + 1
        }
    }

    /// `|G|^(max pulls of the deviator)`, or `None` on overflow.
    pub fn policy_count(&self) -> Option<u128> {
        (self.grid.len() as u128).checked_pow(self.max_pulls(self.deviator) as u32)
    }
}

/// Elimination needs `2 * radius <= 1`, which first holds after `n*` pulls
/// each; with `K` arms that is round `K n*`.
fn elimination_impossible(k: usize, horizon: usize) -> bool {
    let n_star = (1u64..)
        .find(|&n| 2.0 * confidence_radius(horizon, n).expect("n >= 1") <= 1.0)
        .expect("radius tends to zero");
    n_star.saturating_mul(k as u64) > horizon as u64
}

fn round_robin_pulls(k: usize, horizon: usize, arm: usize) -> usize {
    if arm >= horizon {
        0
    } else {
        (horizon - arm - 1) / k + 1
    }
}

/// Every fraction sequence over the deviator's pulls, in lexicographic
/// order of grid indices.
pub fn enumerate_policies(space: &DeviationSpace) -> Result<impl Iterator<Item = Vec<f64>> + '_> {
    space.validate()?;
    let len = space.max_pulls(space.deviator);
    let required = space.policy_count().unwrap_or(u128::MAX);
    if required > space.budget {
        return Err(Error::BudgetExceeded {
            required,
            budget: space.budget,
        });
    }
    let base = space.grid.len() as u128;
    Ok((0..required).map(move |i| decode(i, base, len, &space.grid)))
}

fn decode(mut i: u128, base: u128, len: usize, grid: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for slot in out.iter_mut().rev() {
        *slot = grid[(i % base) as usize];
        i /= base;
    }
    out
}

/// A failed inequality with both games replayed in full.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub tape: Vec<Vec<f64>>,
    pub cut: usize,
    pub deviation: Vec<f64>,
    pub truthful_continuation: Vec<f64>,
    pub deviation_utility: f64,
    pub truthful_utility: f64,
    pub margin: f64,
    pub deviation_rounds: Vec<RoundRecord>,
    pub truthful_rounds: Vec<RoundRecord>,
    pub deviation_bonuses: BonusReport,
    pub truthful_bonuses: BonusReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceCertificate {
    pub grid: Vec<f64>,
    pub horizon: usize,
    pub deviator: usize,
    pub budget: u128,
    pub policies: u128,
    pub tapes: usize,
    pub exhaustive_tapes: bool,
    /// `(policy, cut)` pairs checked across all tapes.
    pub checks: u64,
    pub min_margin: f64,
    pub tolerance: f64,
    /// Worst violation, when the minimum margin is below `-tolerance`.
    pub counterexample: Option<Counterexample>,
}

impl DominanceCertificate {
    pub fn certified(&self) -> bool {
        self.min_margin >= -self.tolerance
    }
}

impl fmt::Display for DominanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let grid: Vec<String> = self.grid.iter().map(|g| g.to_string()).collect();
        writeln!(
            f,
            "status: {}",
            if self.certified() {
                "certified"
            } else {
                "counterexample"
            }
        )?;
        writeln!(f, "deviating arm: {}", self.deviator + 1)?;
        writeln!(f, "horizon: {}", self.horizon)?;
        writeln!(f, "grid: {{{}}}", grid.join(", "))?;
        writeln!(f, "budget: {}", self.budget)?;
        writeln!(f, "policies: {}", self.policies)?;
        writeln!(
            f,
            "tapes: {} ({})",
            self.tapes,
            if self.exhaustive_tapes {
                "exhaustive"
            } else {
                "sampled"
            }
        )?;
        writeln!(f, "checks: {}", self.checks)?;
        writeln!(f, "min margin: {:.12}", self.min_margin)?;
        writeln!(f, "tolerance: {:e}", self.tolerance)?;
        if let Some(c) = &self.counterexample {
            writeln!(f, "counterexample:")?;
            writeln!(f, "  cut round: {}", c.cut)?;
            writeln!(f, "  deviation fractions: {:?}", c.deviation)?;
            writeln!(f, "  truthful continuation: {:?}", c.truthful_continuation)?;
            writeln!(f, "  deviation utility: {:.9}", c.deviation_utility)?;
            writeln!(f, "  truthful utility: {:.9}", c.truthful_utility)?;
            for (k, tape) in c.tape.iter().enumerate() {
                writeln!(f, "  tape arm {}: {:?}", k + 1, tape)?;
            }
            for (name, rounds, bonuses) in [
                ("deviation", &c.deviation_rounds, &c.deviation_bonuses),
                ("truthful", &c.truthful_rounds, &c.truthful_bonuses),
            ] {
                writeln!(f, "  {name} replay (t arm reward report phase):")?;
                for r in rounds {
                    writeln!(
                        f,
                        "    {} {} {} {} {}",
                        r.t,
                        r.chosen + 1,
                        r.reward,
                        r.report,
                        r.phase
                    )?;
                }
                let b: Vec<String> = bonuses
                    .entries
                    .iter()
                    .map(|e| format!("{:.6} ({})", e.value, e.branch))
                    .collect();
                writeln!(f, "    bonuses: {}", b.join(", "))?;
            }
        }
        Ok(())
    }
}

/// One deviation played out on one tape.
struct Outcome {
    /// Savings of the deviator at each round, zero when another arm is pulled.
    round_savings: Vec<f64>,
    /// Deviator pulls before each round (index `t - 1`) and at the end.
    pulls_before: Vec<usize>,
    bonus: f64,
    rounds: Vec<RoundRecord>,
    bonuses: BonusReport,
}

impl Outcome {
    fn utility_from(&self, cut: usize) -> f64 {
        self.round_savings[cut - 1..].iter().sum::<f64>() + self.bonus
    }
}

fn play(
    space: &DeviationSpace,
    config: &Arc<GameConfig>,
    ranks: &[usize],
    tape: &[Vec<f64>],
    fractions: &[f64],
) -> Result<Outcome> {
    let mut strategies: Vec<Box<dyn ArmStrategy>> = Vec::with_capacity(space.arms.len());
    for (k, id) in space.opponents.iter().enumerate() {
        if k == space.deviator {
            strategies.push(Box::new(FractionSchedule {
                fractions: fractions.to_vec(),
            }));
        } else {
            strategies.push(id.build(
                ranks[k],
                stream(space.strategy_seed, 0, StreamRole::Strategy, k),
            )?);
        }
    }
    let mut source = FixedTape {
        tapes: tape.to_vec(),
    };
    let r = run_with(Arc::clone(config), strategies, &mut source)?;
    let t_max = space.horizon;
    let mut round_savings = vec![0.0; t_max];
    let mut pulls_before = vec![0; t_max + 1];
    let mut n = 0;
    for (i, rec) in r.trajectory.rounds.iter().enumerate() {
        pulls_before[i] = n;
        if rec.chosen == space.deviator {
            round_savings[i] = rec.reward - rec.report;
            n += 1;
        }
    }
    for p in pulls_before.iter_mut().skip(r.trajectory.rounds.len()) {
        *p = n;
    }
    Ok(Outcome {
        round_savings,
        pulls_before,
        bonus: r.bonuses.value(space.deviator),
        rounds: r.trajectory.rounds,
        bonuses: r.bonuses,
    })
}

/// Reward tapes per arm; the flag is true for exhaustive enumeration.
pub fn reward_tapes(space: &DeviationSpace) -> Result<(Vec<Vec<Vec<f64>>>, bool)> {
    space.validate()?;
    let k = space.arms.len();
    let lens: Vec<usize> = (0..k).map(|a| space.max_pulls(a)).collect();
    let sample = |samples: usize, seed: u64| -> Vec<Vec<Vec<f64>>> {
        (0..samples as u64)
            .map(|i| {
                (0..k)
                    .map(|a| {
                        let mut rng = stream(seed, i, StreamRole::Reward, a);
                        (0..lens[a])
                            .map(|_| space.arms[a].sample(&mut rng))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    };
    let (samples, seed) = match space.tapes {
        TapeMode::Sampled { samples, seed } => return Ok((sample(samples, seed), false)),
        TapeMode::Auto { samples, seed } => (samples, seed),
    };

    let enumerable = space
        .arms
        .iter()
        .all(|d| d.is_degenerate() || matches!(d, Distribution::Bernoulli { .. }));
    let free_bits: usize = (0..k)
        .filter(|&a| !space.arms[a].is_degenerate())
        .map(|a| lens[a])
        .sum();
    if !enumerable || free_bits > 14 {
        return Ok((sample(samples, seed), false));
    }
    let fixed = |d: &Distribution| match *d {
        Distribution::Bernoulli { p } => p,
        Distribution::Uniform { low, .. } => low,
        Distribution::PointMass { value } => value,
        Distribution::Beta { .. } => unreachable!("beta laws are never degenerate"),
    };
    let tapes = (0..1u64 << free_bits)
        .map(|mut bits| {
            (0..k)
                .map(|a| {
                    let d = &space.arms[a];
                    (0..lens[a])
                        .map(|_| {
                            if d.is_degenerate() {
                                fixed(d)
                            } else {
                                let b = (bits & 1) as f64;
                                bits >>= 1;
                                b
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok((tapes, true))
}

/// Checks the subgame inequality for every deviation, cut and tape.
pub fn verify_dominance(space: &DeviationSpace) -> Result<DominanceCertificate> {
    let policies: Vec<Vec<f64>> = enumerate_policies(space)?.collect();
    let (tapes, exhaustive) = reward_tapes(space)?;
    let k = space.arms.len();
    let mut profile = space.opponents.clone();
    profile[space.deviator] = StrategyId::Truthful;
    let config = Arc::new(
        GameConfig::new(space.arms.clone(), space.horizon, profile)?
            .with_bonus_mode(space.bonus_mode),
    );
    let ranks_map = rank_map(&config.true_means())?;
    let ranks: Vec<usize> = (0..k).map(|a| ranks_map.rank_of(a)).collect();
    let index: HashMap<Vec<u64>, usize> = policies
        .iter()
        .enumerate()
        .map(|(i, p)| (key(p), i))
        .collect();

    // (margin, tape, cut, deviation, continuation, checks)
    type Worst = (f64, usize, usize, usize, usize, u64);
    let per_tape: Vec<Worst> = tapes
        .par_iter()
        .enumerate()
        .map(|(ti, tape)| -> Result<Worst> {
            let outcomes = policies
                .iter()
                .map(|p| play(space, &config, &ranks, tape, p))
                .collect::<Result<Vec<_>>>()?;
            let mut worst: Worst = (f64::INFINITY, ti, 0, 0, 0, 0);
            for (si, s) in policies.iter().enumerate() {
                let dev = &outcomes[si];
                for cut in 1..=space.horizon {
                    let p = dev.pulls_before[cut - 1];
                    let mut cont = s.clone();
                    cont[p..].iter_mut().for_each(|f| *f = 1.0);
                    let ci = index[&key(&cont)];
                    let margin = outcomes[ci].utility_from(cut) - dev.utility_from(cut);
                    worst.5 += 1;
                    if margin < worst.0 {
                        worst = (margin, ti, cut, si, ci, worst.5);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>>>()?;

    let checks = per_tape.iter().map(|w| w.5).sum();
    let worst = per_tape
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .ok_or_else(|| Error::InvalidConfig("no reward tapes".into()))?;
    let (min_margin, ti, cut, si, ci, _) = worst;

    let counterexample = if min_margin < -TOLERANCE {
        let tape = &tapes[ti];
        let dev = play(space, &config, &ranks, tape, &policies[si])?;
        let tru = play(space, &config, &ranks, tape, &policies[ci])?;
        Some(Counterexample {
            tape: tape.clone(),
            cut,
            deviation: policies[si].clone(),
            truthful_continuation: policies[ci].clone(),
            deviation_utility: dev.utility_from(cut),
            truthful_utility: tru.utility_from(cut),
            margin: min_margin,
            deviation_rounds: dev.rounds,
            truthful_rounds: tru.rounds,
            deviation_bonuses: dev.bonuses,
            truthful_bonuses: tru.bonuses,
        })
    } else {
        None
    };

    Ok(DominanceCertificate {
        grid: space.grid.clone(),
        horizon: space.horizon,
        deviator: space.deviator,
        budget: space.budget,
        policies: policies.len() as u128,
        tapes: tapes.len(),
        exhaustive_tapes: exhaustive,
        checks,
        min_margin,
        tolerance: TOLERANCE,
        counterexample,
    })
}

fn key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|f| f.to_bits()).collect()
}
