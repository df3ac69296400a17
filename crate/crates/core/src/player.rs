//! The player's side of the game: successive elimination over round-robin
//! pulls, the commit to a single survivor, and (for the strategic variant)
//! the phase-two defection test.
//!
//! The player only ever sees reports. Confidence radii use the natural log of
//! the horizon.

use crate::error::{Error, Result};
use crate::rank::{argmax_by, rank_map, RankMap};
use crate::types::{Algorithm, Phase};

/// Hoeffding radius `sqrt(2 ln T / n)`.
pub fn confidence_radius(horizon: usize, pulls: u64) -> Result<f64> {
    if pulls == 0 {
        return Err(Error::UndefinedRadius);
    }
    if horizon < 2 {
        return Err(Error::InvalidInput(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    Ok((2.0 * (horizon as f64).ln() / pulls as f64).sqrt())
}

/// Arms among `active` whose upper bound falls at or below the leader's
/// lower bound. The leader is the active arm with the highest mean (ties to
/// the lower index) and is never returned.
pub fn dominated_arms(means: &[f64], radii: &[f64], active: &[bool]) -> Vec<usize> {
    let candidates = (0..means.len()).filter(|&k| active[k]);
    let Some(leader) = argmax_by(candidates.clone(), |k| means[k]) else {
        return Vec::new();
    };
    let lower = means[leader] - radii[leader];
    candidates
        .filter(|&k| k != leader && lower >= means[k] + radii[k])
        .collect()
}

/// Reported means of every arm just before one of its pulls.
#[derive(Debug, Clone, PartialEq)]
pub struct PullSnapshot {
    pub round: usize,
    pub report: f64,
    /// `None` for arms with no pulls yet.
    pub prior_means: Vec<Option<f64>>,
    pub prior_active: Vec<bool>,
}

impl PullSnapshot {
    /// Highest prior mean among arms active at the time.
    pub fn leader_mean(&self) -> Option<f64> {
        (0..self.prior_means.len())
            .filter(|&j| self.prior_active[j])
            .filter_map(|j| self.prior_means[j])
            .reduce(f64::max)
    }

    /// Highest prior mean among pulled arms other than `arm`.
    pub fn best_other_mean(&self, arm: usize) -> Option<f64> {
        self.prior_means
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != arm)
            .filter_map(|(_, m)| *m)
            .reduce(f64::max)
    }

    /// Rank map over prior means, unpulled arms ranked as zero.
    pub fn rank_map(&self) -> RankMap {
        let v: Vec<f64> = self.prior_means.iter().map(|m| m.unwrap_or(0.0)).collect();
        rank_map(&v).expect("snapshot has at least one arm")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectionVerdict {
    Continue,
    Halt,
}

/// What happened when a report was folded in.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observation {
    pub eliminated: Vec<usize>,
    pub committed: Option<usize>,
    pub halted: bool,
}

/// Everything the player tracks during a game.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayerState {
    horizon: usize,
    algorithm: Algorithm,
    round: usize,
    active: Vec<bool>,
    pulls: Vec<u64>,
    report_sums: Vec<f64>,
    phase: Phase,
    tau: Option<usize>,
    eliminated_at: Vec<Option<usize>>,
    committed: Option<usize>,
    phase2_threshold: Option<f64>,
    last_pull: Vec<Option<PullSnapshot>>,
    halted_at: Option<usize>,
}

impl PlayerState {
    pub fn new(num_arms: usize, horizon: usize, algorithm: Algorithm) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 arms, got {num_arms}"
            )));
        }
        if horizon < 2 {
            return Err(Error::InvalidConfig(format!(
                "horizon must be at least 2, got {horizon}"
            )));
        }
        Ok(Self {
            horizon,
            algorithm,
            round: 0,
            active: vec![true; num_arms],
            pulls: vec![0; num_arms],
            report_sums: vec![0.0; num_arms],
            phase: Phase::Explore,
            tau: None,
            eliminated_at: vec![None; num_arms],
            committed: None,
            phase2_threshold: None,
            last_pull: vec![None; num_arms],
            halted_at: None,
        })
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// Rounds played so far.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn is_active(&self, arm: usize) -> bool {
        self.active[arm]
    }

    pub fn active_arms(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_arms()).filter(|&k| self.active[k])
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn pulls(&self) -> &[u64] {
        &self.pulls
    }

    pub fn report_sums(&self) -> &[f64] {
        &self.report_sums
    }

    /// Reported mean of `arm`, `None` before its first pull.
    pub fn reported_mean(&self, arm: usize) -> Option<f64> {
        (self.pulls[arm] > 0).then(|| self.report_sums[arm] / self.pulls[arm] as f64)
    }

    /// End of the first phase, if it happened.
    pub fn tau(&self) -> Option<usize> {
        self.tau
    }

    /// Round at which each arm was eliminated.
    pub fn eliminated_at(&self) -> &[Option<usize>] {
        &self.eliminated_at
    }

    pub fn committed(&self) -> Option<usize> {
        self.committed
    }

    /// Second-best reported mean frozen at the end of the first phase.
    pub fn phase2_threshold(&self) -> Option<f64> {
        self.phase2_threshold
    }

    /// Statistics frozen just before the most recent pull of `arm`.
    pub fn last_pull(&self, arm: usize) -> Option<&PullSnapshot> {
        self.last_pull[arm].as_ref()
    }

    pub fn halted_at(&self) -> Option<usize> {
        self.halted_at
    }

    /// Rank map over current reported means, unpulled arms ranked as zero.
    pub fn rank_map(&self) -> RankMap {
        let v: Vec<f64> = (0..self.num_arms())
            .map(|k| self.reported_mean(k).unwrap_or(0.0))
            .collect();
        rank_map(&v).expect("at least two arms")
    }

    pub fn radius(&self, arm: usize) -> Result<f64> {
        confidence_radius(self.horizon, self.pulls[arm])
    }

    fn balanced(&self) -> bool {
        let mut counts = self.active_arms().map(|k| self.pulls[k]);
        let first = counts.next();
        counts.all(|c| Some(c) == first)
    }

    /// Arm to pull next: the least-pulled active arm while exploring, the
    /// committed arm afterwards.
    pub fn select_arm(&self) -> Result<usize> {
        match self.phase {
            Phase::Halted => Err(Error::Halted),
            Phase::Exploit => self
                .committed
                .ok_or_else(|| Error::Contract("exploit phase without a committed arm".into())),
            Phase::Explore => argmax_by(self.active_arms(), |k| -(self.pulls[k] as f64))
                .ok_or_else(|| Error::Contract("no active arm".into())),
        }
    }

    /// Runs the elimination test at a round-robin boundary.
    ///
    /// Every active arm dominated by the leader is deactivated at once and
    /// stamped with the current round.
    pub fn elimination_step(&mut self) -> Result<Vec<usize>> {
        if !self.balanced() {
            return Err(Error::Contract(
                "elimination test outside a round-robin boundary".into(),
            ));
        }
        let k = self.num_arms();
        let means: Vec<f64> = (0..k)
            .map(|j| self.reported_mean(j).unwrap_or(0.0))
            .collect();
        let mut radii = vec![f64::INFINITY; k];
        for j in self.active_arms().collect::<Vec<_>>() {
            radii[j] = self.radius(j)?;
        }
        let out = dominated_arms(&means, &radii, &self.active);
        for &j in &out {
            self.active[j] = false;
            self.eliminated_at[j] = Some(self.round);
        }
        Ok(out)
    }

    /// Phase-two test on the committed arm: halt when its upper bound falls
    /// below the frozen second-best mean.
    pub fn defection_check(&self) -> Result<DefectionVerdict> {
        if self.phase != Phase::Exploit {
            return Err(Error::Contract("defection test outside phase two".into()));
        }
        let arm = self
            .committed
            .ok_or_else(|| Error::Contract("no committed arm".into()))?;
        let threshold = self.phase2_threshold.unwrap_or(0.0);
        let mean = self.reported_mean(arm).unwrap_or(0.0);
        if mean + self.radius(arm)? < threshold {
            Ok(DefectionVerdict::Halt)
        } else {
            Ok(DefectionVerdict::Continue)
        }
    }

    /// Folds in the report of the arm pulled this round.
    pub fn observe_report(&mut self, arm: usize, report: f64) -> Result<Observation> {
        if !(report.is_finite() && (0.0..=1.0).contains(&report)) {
            return Err(Error::InvalidInput(format!(
                "report {report} is outside [0, 1]"
            )));
        }
        let expected = self.select_arm()?;
        if arm != expected {
            return Err(Error::Contract(format!(
                "report from arm {} but arm {} was selected",
                arm + 1,
                expected + 1
            )));
        }
        if self.round >= self.horizon {
            return Err(Error::Contract("game is past its horizon".into()));
        }

        let snapshot = self.snapshot_before_pull(report);
        self.last_pull[arm] = Some(snapshot);
        self.round += 1;
        self.pulls[arm] += 1;
        self.report_sums[arm] += report;

        let mut obs = Observation::default();
        match self.phase {
            Phase::Explore => {
                if self.balanced() {
                    obs.eliminated = self.elimination_step()?;
                }
                if self.active_count() == 1 {
                    let survivor = self.active_arms().next().expect("one active arm");
                    self.phase = Phase::Exploit;
                    self.tau = Some(self.round);
                    self.committed = Some(survivor);
                    self.phase2_threshold = (0..self.num_arms())
                        .filter(|&j| j != survivor)
                        .filter_map(|j| self.reported_mean(j))
                        .reduce(f64::max);
                    obs.committed = Some(survivor);
                }
            }
            Phase::Exploit => {
                if self.algorithm == Algorithm::StrategicSe
                    && self.defection_check()? == DefectionVerdict::Halt
                {
                    self.phase = Phase::Halted;
                    self.halted_at = Some(self.round);
                    obs.halted = true;
                }
            }
            Phase::Halted => unreachable!("select_arm rejects halted games"),
        }
        Ok(obs)
    }

    fn snapshot_before_pull(&mut self, report: f64) -> PullSnapshot {
        PullSnapshot {
            round: self.round + 1,
            report,
            prior_means: (0..self.num_arms())
                .map(|j| self.reported_mean(j))
                .collect(),
            prior_active: self.active.clone(),
        }
    }

    /// True once no more rounds will be played.
    pub fn is_over(&self) -> bool {
        self.phase == Phase::Halted || self.round >= self.horizon
    }
}
