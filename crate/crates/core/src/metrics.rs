//! Regret, utilities, gaps and the closed-form thresholds used as oracles.
//!
//! All quantities are realized values of one game. Expectations are
//! estimated by averaging over epochs with [`mean_se`].

use crate::engine::GameResult;
use crate::error::{Error, Result};
use crate::rank::{rank_map, RankMap};
use crate::types::{GameConfig, Trajectory};

/// The per-round benchmark the player's revenue is compared to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    /// Second-highest true mean.
    SecondTrueMean,
    /// Second-highest effective (reported) mean of the game itself.
    SecondEffectiveMean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub comparator: f64,
    /// `sum_{s <= t} (comparator - x_s)` for `t = 1..=T`, bonuses excluded.
    /// Rounds after a halt count as zero revenue.
    pub cumulative: Vec<f64>,
    pub bonus_total: f64,
    pub total: f64,
    /// Shortfall over rounds up to the end of the first phase.
    pub exploration: f64,
    /// Shortfall over the remaining rounds.
    pub exploitation: f64,
}

impl RegretReport {
    /// Cumulative regret at round `t` (one-based), bonuses excluded.
    pub fn at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.cumulative[t - 1]
        }
    }
}

/// Regret of a report sequence against a fixed comparator.
pub fn regret_series(
    reports: &[f64],
    horizon: usize,
    comparator: f64,
    bonus_total: f64,
    tau: Option<usize>,
) -> RegretReport {
    let split = tau.unwrap_or(horizon);
    let mut cumulative = Vec::with_capacity(horizon);
    let (mut acc, mut exploration, mut exploitation) = (0.0, 0.0, 0.0);
    for t in 1..=horizon {
        let x = reports.get(t - 1).copied().unwrap_or(0.0);
        let d = comparator - x;
        acc += d;
        if t <= split {
            exploration += d;
        } else {
            exploitation += d;
        }
        cumulative.push(acc);
    }
    RegretReport {
        comparator,
        cumulative,
        bonus_total,
        total: acc + bonus_total,
        exploration,
        exploitation,
    }
}

pub fn regret(result: &GameResult, comparator: Comparator) -> RegretReport {
    let c = match comparator {
        Comparator::SecondTrueMean => result.config().second_best_mean(),
        Comparator::SecondEffectiveMean => effective_means(&result.trajectory).second_mean(),
    };
    let reports: Vec<f64> = result.trajectory.rounds.iter().map(|r| r.report).collect();
    regret_series(
        &reports,
        result.config().horizon(),
        c,
        result.bonuses.total(),
        result.tau(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityReport {
    pub savings: Vec<f64>,
    pub bonuses: Vec<f64>,
    pub utilities: Vec<f64>,
}

pub fn utilities(result: &GameResult) -> UtilityReport {
    let bonuses = result.bonuses.values();
    let utilities = result
        .savings
        .iter()
        .zip(&bonuses)
        .map(|(s, b)| s + b)
        .collect();
    UtilityReport {
        savings: result.savings.clone(),
        bonuses,
        utilities,
    }
}

/// Savings of `arm` over rounds `from..=to`.
pub fn windowed_savings(traj: &Trajectory, arm: usize, from: usize, to: usize) -> f64 {
    traj.rounds
        .iter()
        .filter(|r| r.chosen == arm && r.t >= from && r.t <= to)
        .map(|r| r.reward - r.report)
        .sum()
}

/// Utility of `arm` in the subgame starting at round `cut`: savings from
/// `cut` onwards plus its bonus.
pub fn subgame_utility(result: &GameResult, arm: usize, cut: usize) -> f64 {
    windowed_savings(&result.trajectory, arm, cut, result.config().horizon())
        + result.bonuses.value(arm)
}

/// True and effective gaps of one game (or a pool of games).
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub true_means: Vec<f64>,
    /// `None` for arms that were never pulled.
    pub effective: Vec<Option<f64>>,
    /// Ranking by effective mean; absent arms rank last.
    pub ranks: RankMap,
    /// Top effective mean minus the arm's.
    pub delta: Vec<Option<f64>>,
    /// Second-highest effective mean minus the arm's.
    pub delta_under: Vec<Option<f64>>,
}

impl GapReport {
    pub fn from_sums(true_means: Vec<f64>, report_sums: &[f64], pulls: &[u64]) -> Self {
        let effective: Vec<Option<f64>> = report_sums
            .iter()
            .zip(pulls)
            .map(|(s, &n)| (n > 0).then(|| s / n as f64))
            .collect();
        let keyed: Vec<f64> = effective.iter().map(|m| m.unwrap_or(-1.0)).collect();
        let ranks = rank_map(&keyed).expect("at least one arm");
        let top = effective[ranks.index_at(0)];
        let second = if ranks.len() > 1 {
            effective[ranks.index_at(1)]
        } else {
            None
        };
        let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
        Self {
            delta: effective.iter().map(|&m| diff(top, m)).collect(),
            delta_under: effective.iter().map(|&m| diff(second, m)).collect(),
            true_means,
            effective,
            ranks,
        }
    }

    /// `Delta_ij = mu_i - mu_j` on true means.
    pub fn true_gap(&self, i: usize, j: usize) -> f64 {
        self.true_means[i] - self.true_means[j]
    }

    pub fn top_arm(&self) -> usize {
        self.ranks.index_at(0)
    }

    /// Second-highest effective mean, zero if absent.
    pub fn second_mean(&self) -> f64 {
        self.effective[self.ranks.index_at(1)].unwrap_or(0.0)
    }
}

pub fn effective_means(traj: &Trajectory) -> GapReport {
    let k = traj.num_arms();
    let mut sums = vec![0.0; k];
    let mut pulls = vec![0u64; k];
    for r in &traj.rounds {
        sums[r.chosen] += r.report;
        pulls[r.chosen] += 1;
    }
    GapReport::from_sums(traj.config.true_means(), &sums, &pulls)
}

/// Effective means pooled over several games of the same configuration.
pub fn pooled_effective_means<'a>(
    trajs: impl IntoIterator<Item = &'a Trajectory>,
) -> Result<GapReport> {
    let mut it = trajs.into_iter().peekable();
    let first = it
        .peek()
        .ok_or_else(|| Error::InvalidInput("no trajectories to pool".into()))?;
    let k = first.num_arms();
    let true_means = first.config.true_means();
    let mut sums = vec![0.0; k];
    let mut pulls = vec![0u64; k];
    for traj in it {
        for r in &traj.rounds {
            sums[r.chosen] += r.report;
            pulls[r.chosen] += 1;
        }
    }
    Ok(GapReport::from_sums(true_means, &sums, &pulls))
}

/// A closed-form bound, or the marker for a zero gap in its denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    fn over_gap(numerator: f64, gap: f64) -> Self {
        if gap > 0.0 {
            Bound::Finite(numerator / gap)
        } else {
            Bound::Unbounded
        }
    }
}

/// Pull bound of a suboptimal arm under classic elimination, `32 ln T / gap^2`.
pub fn pull_bound(horizon: usize, gap: f64) -> Bound {
    Bound::over_gap(32.0 * (horizon as f64).ln(), gap * gap)
}

/// Savings-aware pull bound `max{c M / gap, 162 ln T / gap^2}`.
///
/// `c = 6` is the stated constant; `c = 3` is the tighter one the argument
/// actually reaches.
pub fn zeta(horizon: usize, savings_bound: f64, gap: f64, c: f64) -> Bound {
    if gap <= 0.0 {
        return Bound::Unbounded;
    }
    let ln_t = (horizon as f64).ln();
    Bound::Finite((c * savings_bound / gap).max(162.0 * ln_t / (gap * gap)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmThresholds {
    pub arm: usize,
    /// Zero-based rank by true mean.
    pub rank: usize,
    /// Gap to the best true mean.
    pub gap_top: f64,
    /// Gap to the second-best true mean (negative for the best arm).
    pub gap_second: f64,
    /// Pull bound; `None` for the best arm.
    pub pulls: Option<Bound>,
    /// Utility bound.
    pub utility: Bound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    pub horizon: usize,
    pub arms: Vec<ArmThresholds>,
    /// Pull bound of the best arm during elimination.
    pub best_arm_pulls: f64,
    /// Explicit-constant regret bound for truthful play.
    pub regret_bound: f64,
    /// Terms dropped from sums because of a zero gap.
    pub unbounded_terms: usize,
}

/// Closed-form bounds for truthful play on `config`'s true means.
pub fn thresholds(config: &GameConfig) -> Thresholds {
    let horizon = config.horizon();
    let ln_t = (horizon as f64).ln();
    let means = config.true_means();
    let ranks = rank_map(&means).expect("validated config");
    let mu1 = means[ranks.index_at(0)];
    let mu2 = means[ranks.index_at(1)];
    let exploit_c = 64.0 + 16.0 * std::f64::consts::SQRT_2;

    let mut arms = Vec::with_capacity(means.len());
    let mut best_arm_pulls = 0.0;
    let mut regret_bound = means.len() as f64;
    let mut unbounded_terms = 0;
    let mut add = |b: Bound, scale: f64, acc: &mut f64| match b {
        Bound::Finite(v) => *acc += scale * v,
        Bound::Unbounded => unbounded_terms += 1,
    };
    for (k, &mean) in means.iter().enumerate() {
        let rank = ranks.rank_of(k);
        let gap_top = mu1 - mean;
        let gap_second = mu2 - mean;
        let (pulls, utility) = if rank == 0 {
            (
                None,
                Bound::Finite(2.0 * horizon as f64 * (mu1 - mu2) + 1.0),
            )
        } else {
            let t_k = pull_bound(horizon, gap_top);
            add(t_k, if rank == 1 { 2.0 } else { 1.0 }, &mut best_arm_pulls);
            add(
                Bound::over_gap(exploit_c * ln_t, gap_top),
                1.0,
                &mut regret_bound,
            );
            if rank >= 2 {
                add(
                    Bound::over_gap(32.0 * ln_t, gap_second),
                    1.0,
                    &mut regret_bound,
                );
            }
            (Some(t_k), Bound::over_gap(65.0 * ln_t, gap_top))
        };
        arms.push(ArmThresholds {
            arm: k,
            rank,
            gap_top,
            gap_second,
            pulls,
            utility,
        });
    }
    Thresholds {
        horizon,
        arms,
        best_arm_pulls,
        regret_bound,
        unbounded_terms,
    }
}

/// Explicit-constant regret bound against the second effective mean for a
/// profile whose savings never exceed `savings_bound`.
pub fn effective_regret_bound(horizon: usize, savings_bound: f64, gaps: &GapReport) -> Bound {
    let ln_t = (horizon as f64).ln();
    let term = |gap: Option<f64>| -> Bound {
        match gap {
            Some(g) if g > 0.0 => Bound::Finite((6.0 * savings_bound).max(162.0 * ln_t / g)),
            _ => Bound::Unbounded,
        }
    };
    let mut total = gaps.effective.len() as f64;
    for k in 0..gaps.effective.len() {
        let rank = gaps.ranks.rank_of(k);
        if rank >= 1 {
            if let Bound::Finite(v) = term(gaps.delta[k]) {
                total += 3.0 * v;
            }
        }
        if rank >= 2 {
            if let Bound::Finite(v) = term(gaps.delta_under[k]) {
                total += v;
            }
        }
    }
    Bound::Finite(total)
}

/// Mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    pub se: f64,
}

pub fn mean_se(xs: &[f64]) -> MeanSe {
    let n = xs.len();
    if n == 0 {
        return MeanSe {
            mean: f64::NAN,
            se: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let se = if n < 2 {
        0.0
    } else {
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    MeanSe { mean, se }
}

/// Per-round mean and standard error of several cumulative regret curves.
pub fn aggregate_curves(reports: &[RegretReport]) -> Vec<MeanSe> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    let mut column = vec![0.0; reports.len()];
    (0..first.cumulative.len())
        .map(|t| {
            for (c, r) in column.iter_mut().zip(reports) {
                *c = r.cumulative[t];
            }
            mean_se(&column)
        })
        .collect()
}
