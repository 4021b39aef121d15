//! Sequential policies behind one interface.
//!
//! A policy is driven by the harness: it is asked for the next arm, is told
//! the outcome, and can be asked for its current recommendation at any time.
//! [`Shrr`] stops on its own. The baselines are anytime policies that never
//! stop; the harness ends them at the first budget breach.

mod atlucb;
mod doubling_sh;
mod shrr;
mod ucb;
mod uniform;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Outcome;

pub use atlucb::{AtLucb, AtLucbParams};
pub use doubling_sh::DoublingSh;
pub use shrr::{PhaseRecord, Shrr, ShrrStep};
pub use ucb::Ucb;
pub use uniform::UniformSampling;

pub trait Policy: Send {
    /// Next arm to pull, or `None` once the policy has stopped.
    fn next_arm(&mut self) -> Option<usize>;

    /// Feeds back the outcome of pulling `arm`.
    fn observe(&mut self, arm: usize, outcome: &Outcome);

    /// Current recommendation; arm 0 before any data.
    fn recommend(&self) -> usize;

    /// Anytime policies run until the harness stops them at a budget breach.
    fn is_anytime(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Shrr,
    Uniform,
    Ucb,
    #[serde(rename = "atlucb")]
    AtLucb,
    #[serde(rename = "dsh")]
    DoublingSh,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Shrr,
        PolicyKind::Uniform,
        PolicyKind::Ucb,
        PolicyKind::AtLucb,
        PolicyKind::DoublingSh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Shrr => "shrr",
            PolicyKind::Uniform => "uniform",
            PolicyKind::Ucb => "ucb",
            PolicyKind::AtLucb => "atlucb",
            PolicyKind::DoublingSh => "dsh",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("unknown policy {0:?} (expected shrr, uniform, ucb, atlucb or dsh)")]
    UnknownPolicy(String),
    #[error("malformed policy parameter {0:?} (expected key=value)")]
    MalformedParam(String),
    #[error("unknown parameter {key:?} for policy {policy}")]
    UnknownParam { policy: PolicyKind, key: String },
    #[error("invalid value {value:?} for parameter {key:?}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| PolicyError::UnknownPolicy(s.to_string()))
    }
}

/// Tunable constants of the policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// UCB index `mean + sqrt(ucb_c * ln t / n)`.
    pub ucb_c: f64,
    pub atlucb: AtLucbParams,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            ucb_c: 2.0,
            atlucb: AtLucbParams::default(),
        }
    }
}

impl PolicyParams {
    /// Applies `key=value` overrides for `kind`.
    pub fn apply<S: AsRef<str>>(&mut self, kind: PolicyKind, pairs: &[S]) -> Result<(), PolicyError> {
        for pair in pairs {
            let pair = pair.as_ref();
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| PolicyError::MalformedParam(pair.to_string()))?;
            let (key, value) = (key.trim(), value.trim());
            let parsed: f64 = value.parse().map_err(|_| PolicyError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: "not a number".into(),
            })?;
            let invalid = |reason: &str| PolicyError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            };
            match (kind, key) {
                (PolicyKind::Ucb, "c") => {
                    if !(parsed > 0.0 && parsed.is_finite()) {
                        return Err(invalid("must be positive"));
                    }
                    self.ucb_c = parsed;
                }
                (PolicyKind::AtLucb, "delta1") => {
                    if !(parsed > 0.0 && parsed < 1.0) {
                        return Err(invalid("must lie in (0, 1)"));
                    }
                    self.atlucb.delta1 = parsed;
                }
                (PolicyKind::AtLucb, "alpha") => {
                    if !(parsed > 0.0 && parsed < 1.0) {
                        return Err(invalid("must lie in (0, 1)"));
                    }
                    self.atlucb.alpha = parsed;
                }
                (PolicyKind::AtLucb, "epsilon") => {
                    if !(parsed >= 0.0 && parsed.is_finite()) {
                        return Err(invalid("must be >= 0"));
                    }
                    self.atlucb.epsilon = parsed;
                }
                _ => {
                    return Err(PolicyError::UnknownParam {
                        policy: kind,
                        key: key.to_string(),
                    })
                }
            }
        }
        Ok(())
    }
}

/// A policy choice plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub params: PolicyParams,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            params: PolicyParams::default(),
        }
    }

    pub fn build(&self, num_arms: usize, budgets: &[f64]) -> Box<dyn Policy> {
        match self.kind {
            PolicyKind::Shrr => Box::new(Shrr::new(num_arms, budgets)),
            PolicyKind::Uniform => Box::new(UniformSampling::new(num_arms)),
            PolicyKind::Ucb => Box::new(Ucb::new(num_arms, self.params.ucb_c)),
            PolicyKind::AtLucb => Box::new(AtLucb::new(num_arms, self.params.atlucb)),
            PolicyKind::DoublingSh => Box::new(DoublingSh::new(num_arms)),
        }
    }
}

impl From<PolicyKind> for PolicySpec {
    fn from(kind: PolicyKind) -> Self {
        PolicySpec::new(kind)
    }
}

/// Running reward sums and pull counts per arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmStats {
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl ArmStats {
    pub fn new(num_arms: usize) -> Self {
        ArmStats {
            sums: vec![0.0; num_arms],
            counts: vec![0; num_arms],
        }
    }

    pub fn record(&mut self, arm: usize, reward: f64) {
        self.sums[arm] += reward;
        self.counts[arm] += 1;
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.counts[arm]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical mean with a `max(n, 1)` denominator: unpulled arms read 0.
    pub fn mean(&self, arm: usize) -> f64 {
        self.sums[arm] / self.counts[arm].max(1) as f64
    }

    /// Highest empirical mean among `arms`; ties go to the arm listed first.
    pub fn best_of(&self, arms: impl IntoIterator<Item = usize>) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for a in arms {
            let m = self.mean(a);
            match best {
                Some((_, bm)) if m <= bm => {}
                _ => best = Some((a, m)),
            }
        }
        best.map(|(a, _)| a)
    }

    pub fn best(&self) -> usize {
        self.best_of(0..self.sums.len()).unwrap_or(0)
    }

    pub fn reset(&mut self) {
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.counts.iter_mut().for_each(|c| *c = 0);
    }
}

/// Keeps the `keep` arms with the highest score, ordered by (score desc,
/// arm index asc), and returns them in ascending arm order.
pub(crate) fn top_arms(arms: &[usize], keep: usize, score: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut ranked: Vec<usize> = arms.to_vec();
    ranked.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    ranked.truncate(keep);
    ranked.sort_unstable();
    ranked
}
