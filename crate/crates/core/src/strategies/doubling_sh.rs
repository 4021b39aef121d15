//! Sequential Halving with the doubling trick.
//!
//! Run `j` is a pull-count Sequential Halving with nominal budget
//! `K * 2^j`: `ceil(log2 K)` rounds, each surviving arm pulled
//! `max(1, floor(B / (|S| ceil(log2 K))))` times per round (interleaved),
//! top half by that round's sample means kept. Runs start afresh; the
//! recommendation is the winner of the last completed run.

use std::collections::VecDeque;

use crate::complexity::ceil_log2;
use crate::model::Outcome;

use super::{top_arms, ArmStats, Policy};

#[derive(Debug, Clone)]
pub struct DoublingSh {
    num_arms: usize,
    rounds: usize,
    run: u32,
    survivors: Vec<usize>,
    queue: VecDeque<usize>,
    round_stats: ArmStats,
    all_stats: ArmStats,
    last_winner: Option<usize>,
    run_pulls: u64,
    completed: Vec<(u64, u64)>,
}

impl DoublingSh {
    pub fn new(num_arms: usize) -> Self {
        assert!(num_arms >= 2, "doubling SH needs at least two arms");
        let mut p = DoublingSh {
            num_arms,
            rounds: ceil_log2(num_arms) as usize,
            run: 0,
            survivors: Vec::new(),
            queue: VecDeque::new(),
            round_stats: ArmStats::new(num_arms),
            all_stats: ArmStats::new(num_arms),
            last_winner: None,
            run_pulls: 0,
            completed: Vec::new(),
        };
        p.start_run();
        p
    }

    /// Nominal pull budget of run `j`.
    pub fn run_budget(&self, j: u32) -> u64 {
        (self.num_arms as u64) << j
    }

    /// Index of the run in progress.
    pub fn current_run(&self) -> u32 {
        self.run
    }

    /// `(nominal budget, pulls actually made)` of each completed run.
    pub fn completed_runs(&self) -> &[(u64, u64)] {
        &self.completed
    }

    fn start_run(&mut self) {
        self.survivors = (0..self.num_arms).collect();
        self.run_pulls = 0;
        self.start_round();
    }

    fn start_round(&mut self) {
        self.round_stats.reset();
        let budget = self.run_budget(self.run);
        let per_arm = (budget / (self.survivors.len() * self.rounds) as u64).max(1);
        self.queue.clear();
        for _ in 0..per_arm {
            self.queue.extend(self.survivors.iter().copied());
        }
    }

    fn end_round(&mut self) {
        let keep = self.survivors.len().div_ceil(2);
        let stats = &self.round_stats;
        self.survivors = top_arms(&self.survivors, keep, |a| stats.mean(a));
        if self.survivors.len() == 1 {
            self.last_winner = Some(self.survivors[0]);
            self.completed.push((self.run_budget(self.run), self.run_pulls));
            self.run += 1;
            self.start_run();
        } else {
            self.start_round();
        }
    }
}

impl Policy for DoublingSh {
    fn next_arm(&mut self) -> Option<usize> {
        while self.queue.is_empty() {
            self.end_round();
        }
        self.queue.front().copied()
    }

    fn observe(&mut self, arm: usize, outcome: &Outcome) {
        if self.queue.front() == Some(&arm) {
            self.queue.pop_front();
        }
        self.round_stats.record(arm, outcome.reward);
        self.all_stats.record(arm, outcome.reward);
        self.run_pulls += 1;
    }

    fn recommend(&self) -> usize {
        self.last_winner.unwrap_or_else(|| self.all_stats.best())
    }
}
