//! Information sets of the player and of each arm.
//!
//! The player sees the chosen arm and the report of every past round. An arm
//! sees the full pull sequence, its own past rewards and reports, and its
//! current reward when it is the arm being pulled. Other arms' rewards are
//! never visible to it.

use crate::error::{Error, Result};
use crate::types::Trajectory;

/// One entry of the player's history: which arm was pulled and what it reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerObservation {
    pub chosen: usize,
    pub report: f64,
}

/// One past pull of an arm, as the arm itself remembers it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OwnRecord {
    pub t: usize,
    pub reward: f64,
    pub report: f64,
}

/// Borrowed view of an arm's information set at round `round`.
#[derive(Debug, Clone, Copy)]
pub struct ArmView<'a> {
    pub arm: usize,
    pub round: usize,
    /// Arms pulled at rounds `1..round`.
    pub pull_sequence: &'a [usize],
    /// This arm's own past pulls, oldest first.
    pub own: &'a [OwnRecord],
    /// Reward of the current round, present only when this arm is pulled now.
    pub current_reward: Option<f64>,
}

impl ArmView<'_> {
    pub fn pulls(&self) -> usize {
        self.own.len()
    }

    /// Savings accumulated before the current round.
    pub fn savings(&self) -> f64 {
        self.own.iter().map(|r| r.reward - r.report).sum()
    }
}

/// Owned arm history, as reconstructed from a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmHistory {
    pub arm: usize,
    pub round: usize,
    pub pull_sequence: Vec<usize>,
    pub own: Vec<OwnRecord>,
    pub current_reward: Option<f64>,
}

impl ArmHistory {
    pub fn view(&self) -> ArmView<'_> {
        ArmView {
            arm: self.arm,
            round: self.round,
            pull_sequence: &self.pull_sequence,
            own: &self.own,
            current_reward: self.current_reward,
        }
    }
}

fn check_round(traj: &Trajectory, t: usize) -> Result<()> {
    let max = traj.horizon() + 1;
    if t == 0 || t > max {
        return Err(Error::RoundOutOfRange { round: t, max });
    }
    Ok(())
}

/// The player's history before round `t`.
pub fn player_view(traj: &Trajectory, t: usize) -> Result<Vec<PlayerObservation>> {
    check_round(traj, t)?;
    Ok(traj
        .rounds
        .iter()
        .take_while(|r| r.t < t)
        .map(|r| PlayerObservation {
            chosen: r.chosen,
            report: r.report,
        })
        .collect())
}

/// Arm `arm`'s information set at round `t`.
pub fn arm_view(traj: &Trajectory, arm: usize, t: usize) -> Result<ArmHistory> {
    if arm >= traj.num_arms() {
        return Err(Error::ArmOutOfRange {
            arm,
            num_arms: traj.num_arms(),
        });
    }
    check_round(traj, t)?;
    let past = traj.rounds.iter().take_while(|r| r.t < t);
    let pull_sequence = past.clone().map(|r| r.chosen).collect();
    let own = past
        .filter(|r| r.chosen == arm)
        .map(|r| OwnRecord {
            t: r.t,
            reward: r.reward,
            report: r.report,
        })
        .collect();
    let current_reward = traj
        .rounds
        .get(t - 1)
        .filter(|r| r.chosen == arm)
        .map(|r| r.reward);
    Ok(ArmHistory {
        arm,
        round: t,
        pull_sequence,
        own,
        current_reward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{Distribution, GameConfig, Phase, RoundRecord};
    use std::sync::Arc;

    fn traj(rounds: &[(usize, f64, f64)]) -> Trajectory {
        let cfg = GameConfig::truthful(
            vec![
                Distribution::Bernoulli { p: 0.5 },
                Distribution::Bernoulli { p: 0.5 },
                Distribution::Bernoulli { p: 0.5 },
            ],
            10,
        )
        .unwrap();
        let mut tr = Trajectory::new(Arc::new(cfg));
        for (i, &(chosen, reward, report)) in rounds.iter().enumerate() {
            tr.rounds.push(RoundRecord {
                t: i + 1,
                chosen,
                reward,
                report,
                phase: Phase::Explore,
                active_count: 3,
            });
        }
        tr
    }

    #[test]
    fn player_view_projects_reports() {
        let tr = traj(&[(1, 0.8, 0.5)]);
        assert!(player_view(&tr, 1).unwrap().is_empty());
        assert_eq!(
            player_view(&tr, 2).unwrap(),
            vec![PlayerObservation {
                chosen: 1,
                report: 0.5
            }]
        );
        assert!(player_view(&tr, 0).is_err());
        assert!(player_view(&tr, 12).is_err());
    }

    #[test]
    fn player_view_ignores_rewards() {
        let a = traj(&[(0, 0.9, 0.4), (1, 0.7, 0.7), (2, 1.0, 0.0)]);
        let b = traj(&[(0, 0.4, 0.4), (1, 1.0, 0.7), (2, 0.3, 0.0)]);
        for t in 1..=4 {
            assert_eq!(player_view(&a, t).unwrap(), player_view(&b, t).unwrap());
        }
    }

    #[test]
    fn arm_view_contents() {
        let tr = traj(&[(0, 0.9, 0.4), (1, 0.7, 0.7), (0, 1.0, 0.0)]);
        let v = arm_view(&tr, 0, 1).unwrap();
        assert!(v.pull_sequence.is_empty() && v.own.is_empty());
        assert_eq!(v.current_reward, Some(0.9));

        let v = arm_view(&tr, 2, 3).unwrap();
        assert_eq!(v.pull_sequence, vec![0, 1]);
        assert!(v.own.is_empty());
        assert_eq!(v.current_reward, None);

        let v = arm_view(&tr, 0, 3).unwrap();
        assert_eq!(v.own.len(), 1);
        assert_eq!(v.current_reward, Some(1.0));
        assert!((v.view().savings() - 0.5).abs() < 1e-12);

        assert!(matches!(
            arm_view(&tr, 3, 1),
            Err(Error::ArmOutOfRange { .. })
        ));
    }

    #[test]
    fn arm_view_never_leaks_other_rewards() {
        // Distinct reward values per arm make leaks detectable.
        let tr = traj(&[
            (0, 0.11, 0.1),
            (1, 0.22, 0.2),
            (2, 0.33, 0.3),
            (1, 0.44, 0.4),
            (0, 0.55, 0.5),
        ]);
        for arm in 0..3 {
            for t in 1..=6 {
                let v = arm_view(&tr, arm, t).unwrap();
                let foreign: Vec<f64> = tr
                    .rounds
                    .iter()
                    .filter(|r| r.chosen != arm)
                    .map(|r| r.reward)
                    .collect();
                for rec in &v.own {
                    assert!(!foreign.contains(&rec.reward));
                }
                if let Some(r) = v.current_reward {
                    assert!(!foreign.contains(&r));
                }
            }
        }
    }
}
