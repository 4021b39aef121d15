use crate::model::Outcome;

use super::{ArmStats, Policy};

/// Round-robin over all arms; recommends the empirical leader.
#[derive(Debug, Clone)]
pub struct UniformSampling {
    stats: ArmStats,
    next: usize,
}

impl UniformSampling {
    pub fn new(num_arms: usize) -> Self {
        UniformSampling {
            stats: ArmStats::new(num_arms),
            next: 0,
        }
    }
}

impl Policy for UniformSampling {
    fn next_arm(&mut self) -> Option<usize> {
        Some(self.next)
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        self.stats.record(arm, outcome.reward);
        self.next = (arm + 1) % self.stats.counts().len();
    }

    fn recommend(&self) -> usize {
        self.stats.best()
    }
}
