use crate::model::Outcome;

use super::{ArmStats, Policy};

/// UCB: pulls `argmax mean + sqrt(c ln t / n)` after trying every arm once,
/// recommends the empirical leader.
#[derive(Debug, Clone)]
pub struct Ucb {
    stats: ArmStats,
    c: f64,
}

impl Ucb {
    pub fn new(num_arms: usize, c: f64) -> Self {
        Ucb {
            stats: ArmStats::new(num_arms),
            c,
        }
    }

    fn index(&self, arm: usize, ln_t: f64) -> f64 {
        let n = self.stats.count(arm) as f64;
        self.stats.mean(arm) + (self.c * ln_t / n).sqrt()
    }
}

impl Policy for Ucb {
    fn next_arm(&mut self) -> Option<usize> {
        let counts = self.stats.counts();
        if let Some(unpulled) = counts.iter().position(|&n| n == 0) {
            return Some(unpulled);
        }
        let ln_t = (self.stats.total() as f64).ln();
        let mut best = 0;
        let mut best_index = self.index(0, ln_t);
        for arm in 1..counts.len() {
            let idx = self.index(arm, ln_t);
            if idx > best_index {
                best = arm;
                best_index = idx;
            }
        }
        Some(best)
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        self.stats.record(arm, outcome.reward);
    }

    fn recommend(&self) -> usize {
        self.stats.best()
    }
}
