//! Closed-form complexity measures and the failure-probability bounds built
//! from them.
//!
//! Every measure works on mean rewards and mean consumptions only. Gaps are
//! taken in reward-sorted order (`gap[0] == gap[1] == r_(1) - r_(2)`), and
//! except for the refined measures the consumptions of each resource are
//! sorted in decreasing order independently of the rewards, which makes the
//! measures worst-case over arm permutations.

use serde::Serialize;
use thiserror::Error;

use crate::model::{Envelope, Instance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexityError {
    #[error("at least two arms required, got {0}")]
    TooFewArms(usize),
    #[error("sigma2 = {sigma2} exceeds b^2 = {b_squared}")]
    VarianceExceedsRange { sigma2: f64, b_squared: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("arms must be sorted by mean reward (arm {0} beats arm {1})")]
    UnsortedRewards(usize, usize),
}

/// `ceil(log2(k))` computed over the integers; 0 for `k <= 1`.
pub fn ceil_log2(k: usize) -> u32 {
    if k <= 1 {
        0
    } else {
        usize::BITS - (k - 1).leading_zeros()
    }
}

/// Effective consumption `4b / ln(4b^2/sigma^2 + 1) + d`.
///
/// Returns `d` exactly when `sigma2 == 0` (the deterministic limit).
pub fn effective_consumption(b: f64, sigma2: f64, d: f64) -> Result<f64, ComplexityError> {
    if !(b >= 0.0 && sigma2 >= 0.0 && d > 0.0) || !b.is_finite() || !sigma2.is_finite() {
        return Err(ComplexityError::InvalidArgument(format!(
            "need b >= 0, sigma2 >= 0, d > 0 (got b={b}, sigma2={sigma2}, d={d})"
        )));
    }
    let b_squared = b * b;
    if sigma2 > b_squared {
        return Err(ComplexityError::VarianceExceedsRange { sigma2, b_squared });
    }
    if sigma2 == 0.0 {
        return Ok(d);
    }
    Ok(4.0 * b / (4.0 * b_squared / sigma2 + 1.0).ln() + d)
}

/// Gaps in reward-sorted order: `gaps[j] = r_(1) - r_(j+1)` with
/// `gaps[0] = gaps[1]`.
pub fn sorted_gaps(rewards: &[f64]) -> Vec<f64> {
    let mut sorted = rewards.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let top = sorted[0];
    let mut gaps: Vec<f64> = sorted.iter().map(|r| top - r).collect();
    if gaps.len() >= 2 {
        gaps[0] = gaps[1];
    }
    gaps
}

fn sorted_desc(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `max_{2<=k<=K} (w_1 + ... + w_k) / gaps_k^2` with 1-based `k`.
fn max_prefix_ratio(weights: &[f64], gaps: &[f64]) -> f64 {
    let mut prefix = 0.0;
    let mut best = f64::NEG_INFINITY;
    for (k, (w, gap)) in weights.iter().zip(gaps).enumerate() {
        prefix += w;
        if k >= 1 {
            best = best.max(prefix / (gap * gap));
        }
    }
    best
}

fn require_two_arms(instance: &Instance) -> Result<(), ComplexityError> {
    match instance.num_arms() {
        k if k < 2 => Err(ComplexityError::TooFewArms(k)),
        _ => Ok(()),
    }
}

/// Worst-case H2 over arm permutations with a caller-supplied consumption
/// weight `g`: `max_k sum_{a<=k} g(d_(a)) / gap_k^2`.
pub fn h2_weighted(rewards: &[f64], consumption: &[f64], g: impl Fn(f64) -> f64) -> Result<f64, ComplexityError> {
    if rewards.len() < 2 {
        return Err(ComplexityError::TooFewArms(rewards.len()));
    }
    if rewards.len() != consumption.len() {
        return Err(ComplexityError::InvalidArgument(
            "rewards and consumption lengths differ".into(),
        ));
    }
    let gaps = sorted_gaps(rewards);
    let weights: Vec<f64> = sorted_desc(consumption).into_iter().map(g).collect();
    Ok(max_prefix_ratio(&weights, &gaps))
}

/// Effective consumption of every sorted consumption rank, per resource.
pub fn f_per_rank(instance: &Instance) -> Result<Vec<Vec<f64>>, ComplexityError> {
    (0..instance.num_resources())
        .map(|l| {
            let env = instance.envelope()[l];
            sorted_desc(&instance.consumption_means(l))
                .into_iter()
                .map(|d| effective_consumption(env.b, env.sigma2, d))
                .collect()
        })
        .collect()
}

/// Stochastic-consumption H2 per resource, using the instance envelope.
pub fn h2_sto(instance: &Instance) -> Result<Vec<f64>, ComplexityError> {
    h2_sto_with(instance, instance.envelope())
}

/// [`h2_sto`] under an explicit envelope (one entry per resource).
pub fn h2_sto_with(instance: &Instance, envelope: &[Envelope]) -> Result<Vec<f64>, ComplexityError> {
    require_two_arms(instance)?;
    let rewards = instance.reward_means();
    let gaps = sorted_gaps(&rewards);
    (0..instance.num_resources())
        .map(|l| {
            let env = envelope[l];
            let weights = sorted_desc(&instance.consumption_means(l))
                .into_iter()
                .map(|d| effective_consumption(env.b, env.sigma2, d))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(max_prefix_ratio(&weights, &gaps))
        })
        .collect()
}

pub fn h2_det(instance: &Instance) -> Result<Vec<f64>, ComplexityError> {
    require_two_arms(instance)?;
    let rewards = instance.reward_means();
    (0..instance.num_resources())
        .map(|l| h2_weighted(&rewards, &instance.consumption_means(l), |d| d))
        .collect()
}

/// `sum_k d_(k) / gap_(k)^2` per resource.
pub fn h1_det(instance: &Instance) -> Result<Vec<f64>, ComplexityError> {
    require_two_arms(instance)?;
    let gaps = sorted_gaps(&instance.reward_means());
    Ok((0..instance.num_resources())
        .map(|l| {
            sorted_desc(&instance.consumption_means(l))
                .iter()
                .zip(&gaps)
                .map(|(d, gap)| d / (gap * gap))
                .sum()
        })
        .collect())
}

/// Refined (non-reordered) measures for one resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedH {
    pub h1: f64,
    pub h2: f64,
}

/// Refined measures that pair each arm's own consumption with its own gap.
/// Arms must already be sorted by mean reward, best first.
pub fn refined_h(instance: &Instance) -> Result<Vec<RefinedH>, ComplexityError> {
    require_two_arms(instance)?;
    let rewards = instance.reward_means();
    if let Some(k) = (1..rewards.len()).find(|&k| rewards[k] > rewards[k - 1]) {
        return Err(ComplexityError::UnsortedRewards(k, k - 1));
    }
    Ok(refined_in_order(instance, &(0..rewards.len()).collect::<Vec<_>>()))
}

/// [`refined_h`] after a stable sort of the arms by mean reward, so it
/// applies to any instance (e.g. members of a lower-bound family whose best
/// arm is not arm 0).
pub fn refined_h_reward_ordered(instance: &Instance) -> Result<Vec<RefinedH>, ComplexityError> {
    require_two_arms(instance)?;
    let rewards = instance.reward_means();
    let mut order: Vec<usize> = (0..rewards.len()).collect();
    order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]));
    Ok(refined_in_order(instance, &order))
}

fn refined_in_order(instance: &Instance, order: &[usize]) -> Vec<RefinedH> {
    let rewards = instance.reward_means();
    let top = rewards[order[0]];
    let mut gaps: Vec<f64> = order.iter().map(|&k| top - rewards[k]).collect();
    gaps[0] = gaps[1];
    (0..instance.num_resources())
        .map(|l| {
            let d = instance.consumption_means(l);
            let weights: Vec<f64> = order.iter().map(|&k| d[k]).collect();
            let h1 = weights.iter().zip(&gaps).map(|(w, g)| w / (g * g)).sum();
            RefinedH {
                h1,
                h2: max_prefix_ratio(&weights, &gaps),
            }
        })
        .collect()
}

/// H2-type measure with a caller-supplied increasing `g`, `g(0) = 0`.
pub fn tilde_h2_sto(instance: &Instance, g: impl Fn(f64) -> f64) -> Result<Vec<f64>, ComplexityError> {
    require_two_arms(instance)?;
    let rewards = instance.reward_means();
    (0..instance.num_resources())
        .map(|l| h2_weighted(&rewards, &instance.consumption_means(l), &g))
        .collect()
}

/// `g(d) = sqrt(d)`: increasing, `g(0) = 0`, and
/// `1 / (g(d) ln(1/d)) -> infinity` as `d -> 0+`.
pub fn sqrt_weight(d: f64) -> f64 {
    d.sqrt()
}

/// Budget-to-complexity ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma {
    /// `min_l C_l / H2_l` (stochastic H2).
    pub sto: f64,
    /// `min_l C_l / H2det_l`.
    pub det: f64,
}

fn min_ratio(budgets: &[f64], h: &[f64]) -> f64 {
    budgets.iter().zip(h).map(|(c, h)| c / h).fold(f64::INFINITY, f64::min)
}

pub fn gamma(instance: &Instance) -> Result<Gamma, ComplexityError> {
    Ok(Gamma {
        sto: min_ratio(instance.budgets(), &h2_sto(instance)?),
        det: min_ratio(instance.budgets(), &h2_det(instance)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBounds {
    /// `2 L K log2(K) exp(-gamma / (4 ceil(log2 K)))`.
    pub general: f64,
    /// `K log2(K) exp(-gamma_det / (4 ceil(log2 K)))`; valid for
    /// deterministic consumption.
    pub det: f64,
}

/// Both upper-bound expressions evaluated from `gamma` values; not clamped.
pub fn upper_bounds_from_gamma(
    num_arms: usize,
    num_resources: usize,
    gamma: Gamma,
) -> Result<UpperBounds, ComplexityError> {
    if num_arms < 2 {
        return Err(ComplexityError::TooFewArms(num_arms));
    }
    let k = num_arms as f64;
    let phases = ceil_log2(num_arms) as f64;
    let prefactor = k * k.log2();
    Ok(UpperBounds {
        general: 2.0 * num_resources as f64 * prefactor * (-gamma.sto / (4.0 * phases)).exp(),
        det: prefactor * (-gamma.det / (4.0 * phases)).exp(),
    })
}

pub fn upper_bound_value(instance: &Instance) -> Result<UpperBounds, ComplexityError> {
    upper_bounds_from_gamma(instance.num_arms(), instance.num_resources(), gamma(instance)?)
}

/// Lower-bound value for a member of the general-consumption family, and
/// whether the budget condition `96 * min_l 2 C_l / H2det_l >= 1` holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub condition_ok: bool,
}

pub fn lower_bound_from_gamma_det(gamma_det: f64) -> f64 {
    (-108.0 * gamma_det).exp() / 6.0
}

pub fn lower_bound_value_det(instance: &Instance) -> Result<LowerBound, ComplexityError> {
    let h = h2_det(instance)?;
    let gamma_det = min_ratio(instance.budgets(), &h);
    Ok(LowerBound {
        value: lower_bound_from_gamma_det(gamma_det),
        condition_ok: 96.0 * 2.0 * gamma_det >= 1.0,
    })
}

/// Budget condition evaluated over a whole family: the minimum runs over
/// every member and resource.
pub fn family_condition_ok(family: &[Instance]) -> Result<bool, ComplexityError> {
    let mut worst = f64::INFINITY;
    for q in family {
        worst = worst.min(min_ratio(q.budgets(), &h2_det(q)?));
    }
    Ok(96.0 * 2.0 * worst >= 1.0)
}

/// Everything above for one instance, in the JSON shape the CLI prints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    /// `[resource][rank]` effective consumption of the rank-th largest mean.
    pub f_per_rank: Vec<Vec<f64>>,
    pub h2_sto: Vec<f64>,
    pub h2_det: Vec<f64>,
    pub h1_det: Vec<f64>,
    pub h1_refined: Vec<f64>,
    pub h2_refined: Vec<f64>,
    pub gamma: f64,
    pub gamma_det: f64,
    pub upper_bound_general: f64,
    pub upper_bound_det: f64,
    pub gaps: Vec<f64>,
}

pub fn complexity_report(instance: &Instance) -> Result<ComplexityReport, ComplexityError> {
    require_two_arms(instance)?;
    let refined = refined_h_reward_ordered(instance)?;
    let g = gamma(instance)?;
    let bounds = upper_bounds_from_gamma(instance.num_arms(), instance.num_resources(), g)?;
    Ok(ComplexityReport {
        f_per_rank: f_per_rank(instance)?,
        h2_sto: h2_sto(instance)?,
        h2_det: h2_det(instance)?,
        h1_det: h1_det(instance)?,
        h1_refined: refined.iter().map(|r| r.h1).collect(),
        h2_refined: refined.iter().map(|r| r.h2).collect(),
        gamma: g.sto,
        gamma_det: g.det,
        upper_bound_general: bounds.general,
        upper_bound_det: bounds.det,
        gaps: sorted_gaps(&instance.reward_means()),
    })
}
