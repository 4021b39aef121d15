#![allow(dead_code)]

use bairc::model::{ArmModel, DistributionSpec, Instance};
use rand::Rng;

/// Distinct Bernoulli reward means, best first.
pub fn distinct_rewards<R: Rng>(rng: &mut R, k: usize, min_gap: f64) -> Vec<f64> {
    loop {
        let mut r: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
        r.sort_by(|a, b| b.total_cmp(a));
        if r.windows(2).take(1).all(|w| w[0] - w[1] >= min_gap) && r.windows(2).all(|w| w[0] > w[1]) {
            return r;
        }
    }
}

/// Consumption law with mean in roughly `[0.05, 1]`, of a random kind.
pub fn random_consumption<R: Rng>(rng: &mut R, thresholdable: bool) -> DistributionSpec {
    let d: f64 = rng.random_range(0.05..1.0);
    match rng.random_range(0..if thresholdable { 2 } else { 3 }) {
        0 => DistributionSpec::deterministic(d),
        1 => DistributionSpec::bernoulli(d),
        _ => {
            let half = rng.random_range(0.0..d.min(1.0 - d));
            DistributionSpec::uniform(d - half, d + half)
        }
    }
}

/// Random instance with `k` arms, `l` resources and budgets in `budget_range`.
pub fn random_instance<R: Rng>(rng: &mut R, k: usize, l: usize, budget_range: (f64, f64)) -> Instance {
    let rewards = distinct_rewards(rng, k, 0.0);
    let coupled = rng.random_bool(0.3);
    let arms = rewards
        .iter()
        .map(|&r| {
            let cons = (0..l).map(|_| random_consumption(rng, coupled)).collect();
            let reward = DistributionSpec::bernoulli(r);
            if coupled {
                ArmModel::shared_uniform(reward, cons)
            } else {
                ArmModel::independent(reward, cons)
            }
        })
        .collect();
    let budgets = (0..l)
        .map(|_| rng.random_range(budget_range.0..budget_range.1))
        .collect();
    Instance::new(arms, budgets).expect("valid random instance")
}

/// Random multiple of `1/1024` in `[lo, hi]`.
pub fn dyadic<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let a = (lo * 1024.0).ceil() as i64;
    let b = (hi * 1024.0).floor() as i64;
    rng.random_range(a..=b) as f64 / 1024.0
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
