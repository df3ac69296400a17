//! The game loop: select, draw, report, update; then pay bonuses.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bonus::{assign_bonuses, BonusReport};
use crate::error::{Error, Result};
use crate::history::{ArmView, OwnRecord};
use crate::player::PlayerState;
use crate::rank::{argmax_by, rank_map};
use crate::rng::{stream, RewardSource, SeededRewards, StreamRole};
use crate::strategy::{ArmStrategy, StrategyId};
use crate::types::{Algorithm, GameConfig, Phase, RoundRecord, Trajectory};

/// Everything a finished game produced.
#[derive(Debug, Clone)]
pub struct GameResult {
    pub epoch: u64,
    pub trajectory: Trajectory,
    pub bonuses: BonusReport,
    pub state: PlayerState,
    /// `S_k^T`, total withheld reward per arm.
    pub savings: Vec<f64>,
}

impl GameResult {
    pub fn config(&self) -> &GameConfig {
        &self.trajectory.config
    }

    pub fn tau(&self) -> Option<usize> {
        self.state.tau()
    }

    pub fn eliminated_at(&self) -> &[Option<usize>] {
        self.state.eliminated_at()
    }

    pub fn halted(&self) -> bool {
        self.trajectory.halted_at.is_some()
    }

    pub fn rounds_played(&self) -> usize {
        self.trajectory.rounds.len()
    }

    /// Rounds played after the end of the first phase.
    pub fn exploit_rounds(&self) -> usize {
        self.tau().map_or(0, |tau| self.rounds_played() - tau)
    }

    pub fn pulls(&self) -> &[u64] {
        self.state.pulls()
    }

    /// The committed arm, or without a commit the active arm with the
    /// highest reported mean at the end of the game.
    pub fn best_arm(&self) -> Option<usize> {
        self.state.committed().or_else(|| {
            argmax_by(self.state.active_arms(), |k| {
                self.state.reported_mean(k).unwrap_or(0.0)
            })
        })
    }

    /// `S_k^T + Psi_k` per arm.
    pub fn utilities(&self) -> Vec<f64> {
        self.savings
            .iter()
            .zip(self.bonuses.values())
            .map(|(s, b)| s + b)
            .collect()
    }
}

/// Instantiates the configured strategy of every arm for one epoch.
pub fn build_strategies(config: &GameConfig, epoch: u64) -> Result<Vec<Box<dyn ArmStrategy>>> {
    let ranks = rank_map(&config.true_means())?;
    config
        .strategy_profile()
        .iter()
        .enumerate()
        .map(|(k, id): (usize, &StrategyId)| {
            id.build(
                ranks.rank_of(k),
                stream(config.master_seed(), epoch, StreamRole::Strategy, k),
            )
        })
        .collect()
}

/// Plays one game of the configured profile; deterministic in
/// `(master_seed, epoch)`.
pub fn run_game(config: impl Into<Arc<GameConfig>>, epoch: u64) -> Result<GameResult> {
    let config = config.into();
    let strategies = build_strategies(&config, epoch)?;
    let mut rewards = SeededRewards::new(config.arms(), config.master_seed(), epoch);
    let mut result = run_with(config, strategies, &mut rewards)?;
    result.epoch = epoch;
    Ok(result)
}

/// Plays one game with explicit strategies and reward source.
pub fn run_with(
    config: Arc<GameConfig>,
    mut strategies: Vec<Box<dyn ArmStrategy>>,
    rewards: &mut dyn RewardSource,
) -> Result<GameResult> {
    let k = config.num_arms();
    let horizon = config.horizon();
    if strategies.len() != k {
        return Err(Error::InvalidConfig(format!(
            "{} strategies for {k} arms",
            strategies.len()
        )));
    }
    let mut state = PlayerState::new(k, horizon, config.algorithm())?;
    let mut traj = Trajectory::new(Arc::clone(&config));
    traj.rounds.reserve(horizon);
    let mut sequence = Vec::with_capacity(horizon);
    let mut own: Vec<Vec<OwnRecord>> = vec![Vec::new(); k];
    let mut savings = vec![0.0; k];

    while !state.is_over() {
        let t = state.round() + 1;
        let arm = state.select_arm()?;
        let phase = state.phase();
        let active_count = state.active_count();
        let reward = rewards.reward(arm, own[arm].len())?;
        if !(reward.is_finite() && (0.0..=1.0).contains(&reward)) {
            return Err(Error::Contract(format!(
                "reward {reward} of arm {} is outside [0, 1]",
                arm + 1
            )));
        }
        let view = ArmView {
            arm,
            round: t,
            pull_sequence: &sequence,
            own: &own[arm],
            current_reward: Some(reward),
        };
        let raw = strategies[arm].report(&view, reward);
        if raw.is_nan() {
            return Err(Error::Contract(format!(
                "arm {} reported NaN at round {t}",
                arm + 1
            )));
        }
        let report = raw.clamp(0.0, reward);
        state.observe_report(arm, report)?;

        traj.rounds.push(RoundRecord {
            t,
            chosen: arm,
            reward,
            report,
            phase,
            active_count,
        });
        sequence.push(arm);
        own[arm].push(OwnRecord { t, reward, report });
        savings[arm] += reward - report;
    }

    traj.halted_at = state.halted_at();
    let bonuses = assign_bonuses(&state, config.bonus_mode())?;
    traj.bonuses = Some(bonuses.clone());
    Ok(GameResult {
        epoch: 0,
        trajectory: traj,
        bonuses,
        state,
        savings,
    })
}

/// Plays every epoch of `config`, in parallel, returned in epoch order.
pub fn run_epochs(config: impl Into<Arc<GameConfig>>) -> Result<Vec<GameResult>> {
    let config = config.into();
    (0..config.epochs() as u64)
        .into_par_iter()
        .map(|e| run_game(Arc::clone(&config), e))
        .collect()
}

/// Outcome of plain successive elimination on truthful arms.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicOutcome {
    pub survivor: Option<usize>,
    pub pulls: Vec<u64>,
    /// End of the elimination phase; the horizon when it never ended.
    pub tau: usize,
}

/// Classic successive elimination with every arm truthful.
pub fn run_classic_se(
    config: &GameConfig,
    rewards: &mut dyn RewardSource,
) -> Result<ClassicOutcome> {
    let k = config.num_arms();
    let cfg = config
        .clone()
        .with_algorithm(Algorithm::ClassicSe)
        .with_profile(vec![StrategyId::Truthful; k])?;
    let strategies = (0..k)
        .map(|_| StrategyId::Truthful.build(0, stream(0, 0, StreamRole::Strategy, 0)))
        .collect::<Result<Vec<_>>>()?;
    let r = run_with(Arc::new(cfg), strategies, rewards)?;
    debug_assert!(r.trajectory.rounds.iter().all(|x| x.phase != Phase::Halted));
    Ok(ClassicOutcome {
        survivor: r.state.committed(),
        pulls: r.state.pulls().to_vec(),
        tau: r.tau().unwrap_or(config.horizon()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bonus::Branch;
    use crate::types::Distribution;
    use approx::assert_relative_eq;

    fn point_masses(a: f64, b: f64, horizon: usize) -> GameConfig {
        GameConfig::truthful(
            vec![
                Distribution::PointMass { value: a },
                Distribution::PointMass { value: b },
            ],
            horizon,
        )
        .unwrap()
    }

    #[test]
    fn point_mass_game_commits_at_closed_form_round() {
        let horizon = 10_000;
        let ln_t = (horizon as f64).ln();
        let n = (1u64..)
            .find(|&n| 0.8 >= 2.0 * (2.0 * ln_t / n as f64).sqrt())
            .unwrap();
        let r = run_game(point_masses(0.9, 0.1, horizon), 0).unwrap();
        assert_eq!(r.tau(), Some(2 * n as usize));
        assert_eq!(r.state.committed(), Some(0));
        assert!(!r.halted());
        assert_eq!(r.rounds_played(), horizon);

        let n1 = (horizon as u64) - n;
        assert_eq!(r.pulls(), &[n1, n]);
        let b = &r.bonuses.entries;
        assert_eq!(b[0].branch, Branch::BestArm);
        assert_relative_eq!(b[0].value, n1 as f64 * 0.8 + 0.9, epsilon = 1e-6);
        assert_eq!(b[1].branch, Branch::Suboptimal);
        assert_relative_eq!(b[1].value, 16.0 * ln_t / 0.8 + 0.1, epsilon = 1e-9);
    }

    #[test]
    fn all_zero_scripts_never_eliminate() {
        let cfg = GameConfig::new(
            vec![Distribution::Bernoulli { p: 0.7 }; 3],
            300,
            vec![StrategyId::Scripted(vec![0.0]); 3],
        )
        .unwrap();
        let r = run_game(cfg, 0).unwrap();
        assert_eq!(r.tau(), None);
        assert_eq!(r.rounds_played(), 300);
        assert!(r.trajectory.rounds.iter().all(|x| x.report == 0.0));
    }

    #[test]
    fn same_seed_same_game() {
        let cfg = GameConfig::new(
            vec![
                Distribution::Bernoulli { p: 0.8 },
                Distribution::Uniform {
                    low: 0.1,
                    high: 0.9,
                },
                Distribution::Beta {
                    alpha: 2.0,
                    beta: 5.0,
                },
            ],
            2000,
            vec![
                StrategyId::untruthful_default(),
                StrategyId::MBounded { budget: 3.0 },
                StrategyId::Truthful,
            ],
        )
        .unwrap()
        .with_seed(99);
        let a = run_game(cfg.clone(), 3).unwrap();
        let b = run_game(cfg, 3).unwrap();
        assert_eq!(a.trajectory.rounds, b.trajectory.rounds);
        assert_eq!(a.bonuses, b.bonuses);
        assert_eq!(a.state, b.state);
    }

    #[test]
    fn epochs_match_sequential_runs() {
        let cfg = GameConfig::truthful(
            vec![
                Distribution::Bernoulli { p: 0.6 },
                Distribution::Bernoulli { p: 0.4 },
            ],
            500,
        )
        .unwrap()
        .with_seed(5)
        .with_epochs(8)
        .unwrap();
        let all = run_epochs(cfg.clone()).unwrap();
        assert_eq!(all.len(), 8);
        for (e, r) in all.iter().enumerate() {
            let solo = run_game(cfg.clone(), e as u64).unwrap();
            assert_eq!(r.epoch, e as u64);
            assert_eq!(r.trajectory.rounds, solo.trajectory.rounds);
        }
        let one = cfg.with_epochs(1).unwrap();
        let single = run_epochs(one.clone()).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(
            single[0].trajectory.rounds,
            run_game(one, 0).unwrap().trajectory.rounds
        );
    }

    #[test]
    fn classic_se_examples() {
        let cfg = point_masses(0.9, 0.1, 10_000);
        let mut tape = SeededRewards::new(cfg.arms(), 0, 0);
        let out = run_classic_se(&cfg, &mut tape).unwrap();
        assert_eq!(out.survivor, Some(0));
        let bound = 32.0 * (10_000f64).ln() / 0.64 + 2.0;
        assert!((out.pulls[1] as f64) <= bound);

        let cfg = point_masses(0.5, 0.5, 1000);
        let mut tape = SeededRewards::new(cfg.arms(), 0, 0);
        let out = run_classic_se(&cfg, &mut tape).unwrap();
        assert_eq!(out.survivor, None);
        assert_eq!(out.tau, 1000);

        let cfg = GameConfig::truthful(
            vec![
                Distribution::Bernoulli { p: 0.9 },
                Distribution::Bernoulli { p: 0.1 },
            ],
            10_000,
        )
        .unwrap();
        let wins = (0..100)
            .filter(|&s| {
                let mut tape = SeededRewards::new(cfg.arms(), s, 0);
                run_classic_se(&cfg, &mut tape).unwrap().survivor == Some(0)
            })
            .count();
        assert!(wins >= 95, "{wins}");
    }

    #[test]
    fn classic_pays_nothing_and_never_halts() {
        let cfg = GameConfig::new(
            vec![
                Distribution::PointMass { value: 0.9 },
                Distribution::PointMass { value: 0.3 },
            ],
            3000,
            vec![
                StrategyId::Scripted(vec![0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.0]),
                StrategyId::Truthful,
            ],
        )
        .unwrap()
        .with_algorithm(Algorithm::ClassicSe);
        let r = run_game(cfg, 0).unwrap();
        assert_eq!(r.bonuses.total(), 0.0);
        assert!(r.bonuses.entries.iter().all(|e| e.branch == Branch::None));
        assert!(!r.halted());
    }

    #[test]
    fn defecting_best_arm_is_halted_and_forfeits() {
        // Truthful until the commit, then zero: scripted on a point mass.
        let ln_t = (10_000f64).ln();
        let n = (1usize..)
            .find(|&n| 0.6 >= 2.0 * (2.0 * ln_t / n as f64).sqrt())
            .unwrap();
        let mut script = vec![0.9; n];
        script.push(0.0);
        let cfg = GameConfig::new(
            vec![
                Distribution::PointMass { value: 0.9 },
                Distribution::PointMass { value: 0.3 },
            ],
            10_000,
            vec![StrategyId::Scripted(script), StrategyId::Truthful],
        )
        .unwrap();
        let r = run_game(cfg, 0).unwrap();
        assert_eq!(r.tau(), Some(2 * n));
        assert!(r.halted());
        let h = r.trajectory.halted_at.unwrap();
        assert_eq!(r.rounds_played(), h);
        assert_eq!(r.bonuses.entries[0].branch, Branch::Forfeited);
        assert_eq!(r.bonuses.value(0), 0.0);
        r.trajectory.check_invariants().unwrap();
    }

    #[test]
    fn identical_arms_case_three_dispatch() {
        let cfg =
            GameConfig::truthful(vec![Distribution::PointMass { value: 0.5 }; 3], 600).unwrap();
        let r = run_game(cfg, 0).unwrap();
        assert_eq!(r.tau(), None);
        let b = &r.bonuses.entries;
        assert_eq!(b[0].branch, Branch::BestArm);
        assert!(b[1..].iter().all(|e| e.branch == Branch::Suboptimal));
        // zero frozen gap pays the cap
        assert!(b[1..].iter().all(|e| e.capped && e.value == 600.0));
    }

    struct NanStrategy;
    impl ArmStrategy for NanStrategy {
        fn report(&mut self, _: &ArmView<'_>, _: f64) -> f64 {
            f64::NAN
        }
    }

    struct Greedy;
    impl ArmStrategy for Greedy {
        fn report(&mut self, _: &ArmView<'_>, _: f64) -> f64 {
            5.0
        }
    }

    #[test]
    fn engine_clamps_and_rejects_nan() {
        let cfg = Arc::new(point_masses(0.6, 0.4, 50));
        let mut tape = SeededRewards::new(cfg.arms(), 0, 0);
        let s: Vec<Box<dyn ArmStrategy>> = vec![Box::new(Greedy), Box::new(Greedy)];
        let r = run_with(Arc::clone(&cfg), s, &mut tape).unwrap();
        assert!(r.trajectory.rounds.iter().all(|x| x.report == x.reward));

        let mut tape = SeededRewards::new(cfg.arms(), 0, 0);
        let s: Vec<Box<dyn ArmStrategy>> = vec![Box::new(NanStrategy), Box::new(Greedy)];
        assert!(matches!(
            run_with(cfg, s, &mut tape),
            Err(Error::Contract(_))
        ));
    }
}
