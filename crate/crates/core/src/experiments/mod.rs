//! Instance families: the synthetic benchmark setups, the
//! deterministic-vs-Bernoulli consumption pair, and the lower-bound
//! constructions. [`sweep`] turns them into plot-ready CSV tables.

pub mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ArmModel, DistributionSpec, Instance, ModelError};

pub use sweep::{
    run_sweep, write_sweep_csv, GeneratorKind, GridSpec, SweepConfig, SweepError, SweepRow, SyntheticSetup,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::InvalidSetup(msg.into())
}

/// Shape of the mean rewards across arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardShape {
    /// `r_1 = 0.9`, every other arm `0.8`.
    OneGroup,
    /// `r_1 = 0.9`, arms `2..=ceil(K/8)` at `0.8`, the rest `0.1`.
    Trap,
    /// `r_1 = 0.9`, `r_i = 0.9 (1 - sqrt(i / K))`.
    Polynomial,
    /// `r_i = 0.9 (1/9)^((i-1)/(K-1))`.
    Geometric,
}

/// How mean consumption lines up with mean reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsumptionPattern {
    /// Better half of the arms consumes 0.9, the rest 0.1.
    #[serde(rename = "hmh")]
    HighMatchHigh,
    /// Better half consumes 0.1, the rest 0.9.
    #[serde(rename = "hml")]
    HighMatchLow,
    /// Two resources: resource 0 as high-match-low, resource 1 as high-match-high.
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsumptionKind {
    Deterministic,
    /// Independent Bernoulli reward and consumptions.
    Uncorrelated,
    /// Shared-uniform coupled Bernoulli reward and consumptions.
    Correlated,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $(<$ty>::$variant => $name),+ }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }
        impl FromStr for $ty {
            type Err = ExperimentError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(invalid(format!("unknown {} {other:?}", stringify!($ty)))),
                }
            }
        }
    };
}

str_enum!(RewardShape {
    OneGroup => "one_group",
    Trap => "trap",
    Polynomial => "polynomial",
    Geometric => "geometric",
});
str_enum!(ConsumptionPattern {
    HighMatchHigh => "hmh",
    HighMatchLow => "hml",
    Mixture => "mixture",
});
str_enum!(ConsumptionKind {
    Deterministic => "deterministic",
    Uncorrelated => "uncorrelated",
    Correlated => "correlated",
});

impl RewardShape {
    pub const ALL: [RewardShape; 4] = [
        RewardShape::OneGroup,
        RewardShape::Trap,
        RewardShape::Polynomial,
        RewardShape::Geometric,
    ];

    /// Mean rewards of the `k` arms, best first.
    pub fn means(self, k: usize) -> Vec<f64> {
        let kf = k as f64;
        (1..=k)
            .map(|i| {
                let fi = i as f64;
                match self {
                    RewardShape::OneGroup => {
                        if i == 1 {
                            0.9
                        } else {
                            0.8
                        }
                    }
                    RewardShape::Trap => {
                        if i == 1 {
                            0.9
                        } else if i <= k.div_ceil(8) {
                            0.8
                        } else {
                            0.1
                        }
                    }
                    RewardShape::Polynomial => {
                        if i == 1 {
                            0.9
                        } else {
                            0.9 * (1.0 - (fi / kf).sqrt())
                        }
                    }
                    RewardShape::Geometric => 0.9 * (1.0f64 / 9.0).powf((fi - 1.0) / (kf - 1.0)),
                }
            })
            .collect()
    }
}

/// One synthetic benchmark configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupSpec {
    pub reward_shape: RewardShape,
    pub consumption_pattern: ConsumptionPattern,
    pub consumption_kind: ConsumptionKind,
    pub num_arms: usize,
    pub budgets: Vec<f64>,
}

impl SetupSpec {
    pub fn num_resources(&self) -> usize {
        self.budgets.len()
    }

    pub fn label(&self) -> String {
        format!(
            "{}/{}/{}",
            self.reward_shape, self.consumption_pattern, self.consumption_kind
        )
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.num_arms < 2 {
            return Err(invalid("synthetic setups need K >= 2"));
        }
        if self.budgets.is_empty() {
            return Err(invalid("at least one budget required"));
        }
        if self.consumption_pattern == ConsumptionPattern::Mixture && self.num_resources() != 2 {
            return Err(invalid("mixture pattern requires exactly two resources"));
        }
        if self.consumption_kind == ConsumptionKind::Deterministic && self.num_resources() == 2 {
            return Err(invalid("deterministic consumption is not offered with two resources"));
        }
        Ok(())
    }
}

/// Builds the instance described by `spec`; arms are ordered best first.
pub fn gen_synthetic(spec: &SetupSpec) -> Result<Instance, ExperimentError> {
    spec.validate()?;
    let k = spec.num_arms;
    let half = k.div_ceil(2);
    let rewards = spec.reward_shape.means(k);
    let level = |i: usize, high_first: bool| {
        let in_first_half = i < half;
        if in_first_half == high_first {
            0.9
        } else {
            0.1
        }
    };
    let arms = rewards
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let means: Vec<f64> = (0..spec.num_resources())
                .map(|l| match spec.consumption_pattern {
                    ConsumptionPattern::HighMatchHigh => level(i, true),
                    ConsumptionPattern::HighMatchLow => level(i, false),
                    ConsumptionPattern::Mixture => level(i, l == 1),
                })
                .collect();
            let reward = DistributionSpec::bernoulli(r);
            match spec.consumption_kind {
                ConsumptionKind::Deterministic => {
                    ArmModel::independent(reward, means.into_iter().map(DistributionSpec::deterministic).collect())
                }
                ConsumptionKind::Uncorrelated => {
                    ArmModel::independent(reward, means.into_iter().map(DistributionSpec::bernoulli).collect())
                }
                ConsumptionKind::Correlated => {
                    ArmModel::shared_uniform(reward, means.into_iter().map(DistributionSpec::bernoulli).collect())
                }
            }
        })
        .collect();
    Ok(Instance::new(arms, spec.budgets.clone())?)
}

/// Two arms with Bernoulli(0.5) / Bernoulli(0.4) rewards, one resource with
/// budget 2, mean consumption `d` per pull: point mass in the first
/// instance, Bernoulli in the second.
pub fn gen_figure1_pair(d: f64) -> Result<(Instance, Instance), ExperimentError> {
    if !(d > 0.0 && d < 1.0) {
        return Err(invalid(format!("d = {d} must lie in (0, 1)")));
    }
    let build = |cons: DistributionSpec| {
        Instance::new(
            vec![
                ArmModel::independent(DistributionSpec::bernoulli(0.5), vec![cons]),
                ArmModel::independent(DistributionSpec::bernoulli(0.4), vec![cons]),
            ],
            vec![2.0],
        )
    };
    Ok((
        build(DistributionSpec::deterministic(d))?,
        build(DistributionSpec::bernoulli(d))?,
    ))
}

fn flipped_rewards(r: &[f64], best: usize) -> Vec<f64> {
    r.iter()
        .enumerate()
        .map(|(k, &rk)| if k == best { 1.0 - rk } else { rk })
        .collect()
}

fn check_descending(values: &[f64], what: &str) -> Result<(), ExperimentError> {
    if values.windows(2).any(|w| w[1] > w[0]) {
        return Err(invalid(format!("{what} must be sorted in decreasing order")));
    }
    Ok(())
}

/// The general-consumption lower-bound family.
///
/// `rewards` must satisfy `1/2 = r_1 > r_2 >= ... >= r_K > 0` (strictly
/// below 1/2 after the first, so that every member has a unique best arm).
/// `consumption[l]` lists the consumption laws of resource `l` in
/// decreasing order of mean, all means in (0, 1]. Member `i` has Gaussian
/// rewards `N(r_k, 1)` except `N(1 - r_i, 1)` at arm `i`; every member
/// assigns arm 0 the second law, arm 1 the first, arm `k >= 2` the k-th.
pub fn gen_theorem2_family(
    rewards: &[f64],
    consumption: &[Vec<DistributionSpec>],
    budgets: &[f64],
) -> Result<Vec<Instance>, ExperimentError> {
    let k = rewards.len();
    if k < 2 {
        return Err(invalid("need K >= 2"));
    }
    if rewards[0] != 0.5 {
        return Err(invalid("r_1 must equal 1/2"));
    }
    if rewards[1..].iter().any(|&r| !(r > 0.0 && r < 0.5)) {
        return Err(invalid("r_k for k >= 2 must lie in (0, 1/2)"));
    }
    check_descending(rewards, "rewards")?;
    if consumption.len() != budgets.len() {
        return Err(invalid("one consumption list per budget required"));
    }
    for (l, laws) in consumption.iter().enumerate() {
        if laws.len() != k {
            return Err(invalid(format!("resource {l}: expected {k} consumption laws")));
        }
        let means: Vec<f64> = laws.iter().map(DistributionSpec::mean).collect();
        if means.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
            return Err(invalid(format!("resource {l}: consumption means must lie in (0, 1]")));
        }
        check_descending(&means, &format!("resource {l} consumption means"))?;
    }
    let cons_of = |arm: usize| -> Vec<DistributionSpec> {
        let rank = match arm {
            0 => 1,
            1 => 0,
            other => other,
        };
        consumption.iter().map(|laws| laws[rank]).collect()
    };
    (0..k)
        .map(|i| {
            let arms = flipped_rewards(rewards, i)
                .into_iter()
                .enumerate()
                .map(|(arm, r)| ArmModel::independent(DistributionSpec::gaussian(r, 1.0), cons_of(arm)))
                .collect();
            Ok(Instance::new(arms, budgets.to_vec())?)
        })
        .collect()
}

/// Deterministic consumption laws with the given decreasing means.
pub fn deterministic_laws(means: &[f64]) -> Vec<DistributionSpec> {
    means.iter().map(|&d| DistributionSpec::deterministic(d)).collect()
}

/// `Uniform(0, 2d)` consumption laws with the given means (each `d <= 1/2`).
pub fn uniform_laws(means: &[f64]) -> Vec<DistributionSpec> {
    means.iter().map(|&d| DistributionSpec::uniform(0.0, 2.0 * d)).collect()
}

/// The Bernoulli-consumption lower-bound family.
///
/// `rewards` must satisfy `1/2 = r_1 > r_2 >= ... >= r_K = 1/4`; consumption
/// of arm `k` on resource `l` is `Bernoulli(scale * base_means[l][k])`.
pub fn gen_theorem3_family(
    rewards: &[f64],
    base_means: &[Vec<f64>],
    scale: f64,
    budgets: &[f64],
) -> Result<Vec<Instance>, ExperimentError> {
    let k = rewards.len();
    if k < 2 {
        return Err(invalid("need K >= 2"));
    }
    if rewards[0] != 0.5 || rewards[k - 1] != 0.25 || rewards[1] >= 0.5 {
        return Err(invalid("rewards must satisfy 1/2 = r_1 > r_2 and r_K = 1/4"));
    }
    check_descending(rewards, "rewards")?;
    if !(scale > 0.0 && scale < 1.0) {
        return Err(invalid("scale must lie in (0, 1)"));
    }
    if base_means.len() != budgets.len() {
        return Err(invalid("one base-mean list per budget required"));
    }
    let mut scaled = Vec::with_capacity(base_means.len());
    for (l, row) in base_means.iter().enumerate() {
        if row.len() != k {
            return Err(invalid(format!("resource {l}: expected {k} base means")));
        }
        check_descending(row, &format!("resource {l} base means"))?;
        let means: Vec<f64> = row.iter().map(|d| scale * d).collect();
        if means.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(invalid(format!("resource {l}: scaled means must lie in (0, 1)")));
        }
        scaled.push(means);
    }
    (0..k)
        .map(|i| {
            let arms = flipped_rewards(rewards, i)
                .into_iter()
                .enumerate()
                .map(|(arm, r)| {
                    ArmModel::independent(
                        DistributionSpec::gaussian(r, 1.0),
                        scaled.iter().map(|m| DistributionSpec::bernoulli(m[arm])).collect(),
                    )
                })
                .collect();
            Ok(Instance::new(arms, budgets.to_vec())?)
        })
        .collect()
}

/// The five sufficient conditions on the scale `c` used by the Bernoulli
/// lower bound, evaluated for challenger arm `challenger` (0-based, >= 1)
/// and weight function `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Theorem3Conditions {
    /// `g(d_{l,k}) < 1 / ln(1/d_{l,(i)})` for all `l, k`.
    pub weight_small: bool,
    /// `ln(1/(1 - d_{l,(i)})) < 1/2` for all `l`.
    pub complement_small: bool,
    /// `128 (g(d_(1))/(r_1-r_2)^2 + sum_{k>=3} g(d_(k))/(r_1-r_k)^2) ln(1/d_(i)) < 1`.
    pub weighted_sum_small: bool,
    /// `C_l > ln 64` for all `l`.
    pub budgets_large: bool,
    /// `ln(1/d_{l,(i)}) > 1` for all `l`.
    pub challenger_rare: bool,
}

impl Theorem3Conditions {
    pub fn all(&self) -> bool {
        self.weight_small
            && self.complement_small
            && self.weighted_sum_small
            && self.budgets_large
            && self.challenger_rare
    }
}

pub fn theorem3_conditions(
    rewards: &[f64],
    base_means: &[Vec<f64>],
    scale: f64,
    budgets: &[f64],
    challenger: usize,
    g: impl Fn(f64) -> f64,
) -> Result<Theorem3Conditions, ExperimentError> {
    let k = rewards.len();
    if challenger == 0 || challenger >= k {
        return Err(invalid("challenger must be an arm index in 1..K"));
    }
    let mut out = Theorem3Conditions {
        weight_small: true,
        complement_small: true,
        weighted_sum_small: true,
        budgets_large: budgets.iter().all(|&c| c > 64f64.ln()),
        challenger_rare: true,
    };
    for row in base_means {
        let d: Vec<f64> = row.iter().map(|x| scale * x).collect();
        let di = d[challenger];
        let log_inv = (1.0 / di).ln();
        out.weight_small &= d.iter().all(|&x| g(x) < 1.0 / log_inv);
        out.complement_small &= (1.0 / (1.0 - di)).ln() < 0.5;
        let gap = |j: usize| rewards[0] - rewards[j];
        let mut weighted = g(d[0]) / gap(1).powi(2);
        for (j, &dj) in d.iter().enumerate().skip(2) {
            weighted += g(dj) / gap(j).powi(2);
        }
        out.weighted_sum_small &= 128.0 * weighted * log_inv < 1.0;
        out.challenger_rare &= log_inv > 1.0;
    }
    Ok(out)
}

/// The counterexample family for the refined (non-reordered) measures:
/// one resource, deterministic consumption `d_1 = 2^-(K-2)`,
/// `d_k = 2^-(K-k)`, Bernoulli rewards `r_1 = 1/2`,
/// `r_k = 1/2 - 2^((k-K-4)/2)`; member `i` flips arm `i` to `1 - r_i`.
pub fn gen_appendix_b5_family(k: usize, budget: f64) -> Result<Vec<Instance>, ExperimentError> {
    if k < 2 {
        return Err(invalid("need K >= 2"));
    }
    let (rewards, cons) = appendix_b5_means(k);
    (0..k)
        .map(|i| {
            let arms = flipped_rewards(&rewards, i)
                .into_iter()
                .zip(&cons)
                .map(|(r, &d)| {
                    ArmModel::independent(DistributionSpec::bernoulli(r), vec![DistributionSpec::deterministic(d)])
                })
                .collect();
            Ok(Instance::new(arms, vec![budget])?)
        })
        .collect()
}

/// `(rewards, consumption)` of the first member of the counterexample family.
pub fn appendix_b5_means(k: usize) -> (Vec<f64>, Vec<f64>) {
    let kf = k as f64;
    let rewards = (1..=k)
        .map(|i| {
            if i == 1 {
                0.5
            } else {
                0.5 - 2f64.powf((i as f64 - kf - 4.0) / 2.0)
            }
        })
        .collect();
    let cons = (1..=k)
        .map(|i| {
            let exponent = if i == 1 { kf - 2.0 } else { kf - i as f64 };
            2f64.powf(-exponent)
        })
        .collect();
    (rewards, cons)
}
