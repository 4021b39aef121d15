//! Sequential Halving with Resource Rationing.
//!
//! The budget of every resource is split into `ceil(log2 K)` equal rations.
//! Within a phase the surviving arms are pulled round-robin while every
//! resource still has at least one unit of its ration left
//! (`used <= ration - 1`); since a pull consumes at most one unit, the phase
//! never overdraws its ration. Unused ration rolls over into the next phase.
//! At the end of a phase the top half of the survivors (rounded up) by
//! empirical mean over all pulls so far is kept.

use crate::complexity::ceil_log2;
use crate::model::Outcome;

use super::{top_arms, ArmStats, Policy};

/// Result of checking the phase loop condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShrrStep {
    Pull(usize),
    PhaseEnd,
}

/// Bookkeeping of one completed phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRecord {
    pub phase: usize,
    pub survivors: Vec<usize>,
    pub ration: Vec<f64>,
    pub consumed: Vec<f64>,
    pub pulls: u64,
}

#[derive(Debug, Clone)]
pub struct Shrr {
    budgets: Vec<f64>,
    num_phases: usize,
    phase: usize,
    survivors: Vec<usize>,
    ration: Vec<f64>,
    used: Vec<f64>,
    phase_pulls: u64,
    /// Global step counter, starting at 1.
    t: u64,
    stats: ArmStats,
    history: Vec<PhaseRecord>,
}

impl Shrr {
    pub fn new(num_arms: usize, budgets: &[f64]) -> Self {
        assert!(num_arms >= 1, "SH-RR needs at least one arm");
        let num_phases = ceil_log2(num_arms) as usize;
        let ration = budgets
            .iter()
            .map(|&c| if num_phases == 0 { 0.0 } else { c / num_phases as f64 })
            .collect();
        Shrr {
            budgets: budgets.to_vec(),
            num_phases,
            phase: 0,
            survivors: (0..num_arms).collect(),
            ration,
            used: vec![0.0; budgets.len()],
            phase_pulls: 0,
            t: 1,
            stats: ArmStats::new(num_arms),
            history: Vec::with_capacity(num_phases),
        }
    }

    pub fn num_phases(&self) -> usize {
        self.num_phases
    }

    pub fn phase(&self) -> usize {
        self.phase
    }

    pub fn is_finished(&self) -> bool {
        self.phase >= self.num_phases
    }

    pub fn survivors(&self) -> &[usize] {
        &self.survivors
    }

    /// Ration of the current phase (after the last phase: the leftover
    /// ration that would seed a further phase).
    pub fn ration(&self) -> &[f64] {
        &self.ration
    }

    /// Consumption so far in the current phase.
    pub fn phase_consumption(&self) -> &[f64] {
        &self.used
    }

    pub fn step_counter(&self) -> u64 {
        self.t
    }

    pub fn stats(&self) -> &ArmStats {
        &self.stats
    }

    pub fn history(&self) -> &[PhaseRecord] {
        &self.history
    }

    /// Round-robin pull if every resource has a unit of ration left,
    /// otherwise `PhaseEnd`.
    pub fn step(&self) -> ShrrStep {
        if self.is_finished() {
            return ShrrStep::PhaseEnd;
        }
        let open = self
            .used
            .iter()
            .zip(&self.ration)
            .all(|(used, ration)| *used <= ration - 1.0);
        if open {
            let n = self.survivors.len() as u64;
            ShrrStep::Pull(self.survivors[((self.t - 1) % n) as usize])
        } else {
            ShrrStep::PhaseEnd
        }
    }

    /// Closes the current phase: eliminate, then roll the unused ration
    /// into the next phase's allotment.
    pub fn end_phase(&mut self) {
        if self.is_finished() {
            return;
        }
        self.history.push(PhaseRecord {
            phase: self.phase,
            survivors: self.survivors.clone(),
            ration: self.ration.clone(),
            consumed: self.used.clone(),
            pulls: self.phase_pulls,
        });
        let keep = self.survivors.len().div_ceil(2);
        let stats = &self.stats;
        self.survivors = top_arms(&self.survivors, keep, |a| stats.mean(a));
        let phases = self.num_phases as f64;
        for ((ration, used), budget) in self.ration.iter_mut().zip(&mut self.used).zip(&self.budgets) {
            *ration = budget / phases + (*ration - *used);
            *used = 0.0;
        }
        self.phase_pulls = 0;
        self.phase += 1;
    }
}

impl Policy for Shrr {
    fn next_arm(&mut self) -> Option<usize> {
        loop {
            if self.is_finished() {
                return None;
            }
            match self.step() {
                ShrrStep::Pull(arm) => return Some(arm),
                ShrrStep::PhaseEnd => self.end_phase(),
            }
        }
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        self.stats.record(arm, outcome.reward);
        for (used, d) in self.used.iter_mut().zip(&outcome.consumption) {
            *used += d;
        }
        self.phase_pulls += 1;
        self.t += 1;
    }

    fn recommend(&self) -> usize {
        if self.is_finished() {
            self.survivors[0]
        } else {
            self.stats.best_of(self.survivors.iter().copied()).unwrap_or(0)
        }
    }

    fn is_anytime(&self) -> bool {
        false
    }
}
