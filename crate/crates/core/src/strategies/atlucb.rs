//! Anytime LUCB for the single best arm.
//!
//! Rounds pull the empirical leader `h` and its strongest challenger `l`
//! (highest upper bound among the rest). Confidence level of stage `s` is
//! `delta_s = delta1 * alpha^(s-1)`. Whenever the current stage's
//! termination test `U(l) - L(h) < epsilon` passes, the stage advances until
//! it no longer passes and the recommendation is refreshed; during stage 1
//! the recommendation tracks the empirical leader every round.
//!
//! Confidence radius (LUCB1): `sqrt(ln(5 K t^4 / (4 delta)) / (2 n))`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::Outcome;

use super::{ArmStats, Policy};

/// Guard on the stage-advance loop.
const MAX_STAGE_ADVANCE: u32 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtLucbParams {
    pub delta1: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for AtLucbParams {
    fn default() -> Self {
        AtLucbParams {
            delta1: 0.01,
            alpha: 0.99,
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AtLucb {
    params: AtLucbParams,
    stats: ArmStats,
    stage: u32,
    round: u64,
    pending: VecDeque<usize>,
    recommendation: usize,
}

impl AtLucb {
    pub fn new(num_arms: usize, params: AtLucbParams) -> Self {
        assert!(num_arms >= 2, "AT-LUCB needs at least two arms");
        AtLucb {
            params,
            stats: ArmStats::new(num_arms),
            stage: 1,
            round: 0,
            pending: VecDeque::new(),
            recommendation: 0,
        }
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    fn ln_delta(&self, stage: u32) -> f64 {
        self.params.delta1.ln() + (stage - 1) as f64 * self.params.alpha.ln()
    }

    fn radius(&self, arm: usize, t: f64, ln_delta: f64) -> f64 {
        let k = self.stats.counts().len() as f64;
        let n = self.stats.count(arm).max(1) as f64;
        let log_term = (5.0 * k / 4.0).ln() + 4.0 * t.ln() - ln_delta;
        (log_term.max(0.0) / (2.0 * n)).sqrt()
    }

    /// Leader and challenger at confidence `exp(ln_delta)`.
    fn pair(&self, t: f64, ln_delta: f64) -> (usize, usize, f64) {
        let k = self.stats.counts().len();
        let h = self.stats.best();
        let mut l = if h == 0 { 1 } else { 0 };
        let mut l_ucb = f64::NEG_INFINITY;
        for a in (0..k).filter(|&a| a != h) {
            let ucb = self.stats.mean(a) + self.radius(a, t, ln_delta);
            if ucb > l_ucb {
                l = a;
                l_ucb = ucb;
            }
        }
        let h_lcb = self.stats.mean(h) - self.radius(h, t, ln_delta);
        (h, l, l_ucb - h_lcb)
    }

    fn terminated(&self, t: f64, stage: u32) -> bool {
        self.pair(t, self.ln_delta(stage)).2 < self.params.epsilon
    }

    fn plan_round(&mut self) {
        self.round += 1;
        let t = self.round as f64;
        if self.terminated(t, self.stage) {
            let mut guard = 0;
            while self.terminated(t, self.stage) && guard < MAX_STAGE_ADVANCE {
                self.stage += 1;
                guard += 1;
            }
            self.recommendation = self.stats.best();
        } else if self.stage == 1 {
            self.recommendation = self.stats.best();
        }
        let (h, l, _) = self.pair(t, self.ln_delta(self.stage));
        self.pending.push_back(h);
        self.pending.push_back(l);
    }
}

impl Policy for AtLucb {
    fn next_arm(&mut self) -> Option<usize> {
        if let Some(&arm) = self.pending.front() {
            return Some(arm);
        }
        if let Some(unpulled) = self.stats.counts().iter().position(|&n| n == 0) {
            return Some(unpulled);
        }
        self.plan_round();
        self.pending.front().copied()
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        if self.pending.front() == Some(&arm) {
            self.pending.pop_front();
        }
        self.stats.record(arm, outcome.reward);
        if self.stage == 1 && self.stats.counts().iter().all(|&n| n > 0) && self.round == 0 {
            self.recommendation = self.stats.best();
        }
    }

    fn recommend(&self) -> usize {
        self.recommendation
    }
}
