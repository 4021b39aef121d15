//! Problem instances: arms with joint reward/consumption laws, budgets and
//! the per-resource consumption envelope `(b, sigma^2)`.
//!
//! An [`Instance`] is validated once at construction and is immutable
//! afterwards, so it can be shared freely across worker threads. Sampling
//! always takes the caller's random stream; nothing in here touches global
//! randomness.
//!
//! Arm and resource indices are 0-based throughout the crate.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute slack used when checking envelope dominance, so that an
/// envelope computed from the arms themselves always validates.
const ENVELOPE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{path}: {reason}")]
    Field { path: String, reason: String },
    #[error("unique best arm required (arms {first} and {second} share the top mean {mean})")]
    TiedBestArm { first: usize, second: usize, mean: f64 },
}

impl ModelError {
    fn field(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Field {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

/// Description of a scalar random variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Deterministic { value: f64 },
    Bernoulli { mean: f64 },
    Uniform { lo: f64, hi: f64 },
    Gaussian { mean: f64, variance: f64 },
}

impl DistributionSpec {
    pub fn deterministic(value: f64) -> Self {
        DistributionSpec::Deterministic { value }
    }

    pub fn bernoulli(mean: f64) -> Self {
        DistributionSpec::Bernoulli { mean }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        DistributionSpec::Uniform { lo, hi }
    }

    pub fn gaussian(mean: f64, variance: f64) -> Self {
        DistributionSpec::Gaussian { mean, variance }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Bernoulli { mean } => mean,
            DistributionSpec::Uniform { lo, hi } => 0.5 * (lo + hi),
            DistributionSpec::Gaussian { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            DistributionSpec::Deterministic { .. } => 0.0,
            DistributionSpec::Bernoulli { mean } => mean * (1.0 - mean),
            DistributionSpec::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            DistributionSpec::Gaussian { variance, .. } => variance,
        }
    }

    /// Smallest `b` with `|X - E[X]| <= b` almost surely.
    pub fn deviation_bound(&self) -> f64 {
        match *self {
            DistributionSpec::Deterministic { .. } => 0.0,
            DistributionSpec::Bernoulli { mean } => {
                if mean == 0.0 || mean == 1.0 {
                    0.0
                } else {
                    mean.max(1.0 - mean)
                }
            }
            DistributionSpec::Uniform { lo, hi } => 0.5 * (hi - lo),
            DistributionSpec::Gaussian { variance, .. } => {
                if variance == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            DistributionSpec::Deterministic { value } => (value, value),
            DistributionSpec::Bernoulli { mean } => {
                let lo = if mean < 1.0 { 0.0 } else { 1.0 };
                let hi = if mean > 0.0 { 1.0 } else { 0.0 };
                (lo, hi)
            }
            DistributionSpec::Uniform { lo, hi } => (lo, hi),
            DistributionSpec::Gaussian { mean, variance } => {
                if variance == 0.0 {
                    (mean, mean)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Bernoulli { mean } => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionSpec::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            }
            DistributionSpec::Gaussian { mean, variance } => {
                if variance == 0.0 {
                    mean
                } else {
                    // variance validated finite and positive
                    Normal::new(mean, variance.sqrt())
                        .expect("validated gaussian")
                        .sample(rng)
                }
            }
        }
    }

    /// Value of this component under the shared-uniform coupling, given the
    /// common variate `u`. Only meaningful for point masses and Bernoulli.
    fn threshold(&self, u: f64) -> f64 {
        match *self {
            DistributionSpec::Deterministic { value } => value,
            DistributionSpec::Bernoulli { mean } => {
                if u <= mean {
                    1.0
                } else {
                    0.0
                }
            }
            _ => unreachable!("shared-uniform coupling validated to point masses and Bernoulli"),
        }
    }

    fn validate(&self, path: &str) -> Result<(), ModelError> {
        let finite = |x: f64, name: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(ModelError::field(path, format!("{name} must be finite")))
            }
        };
        match *self {
            DistributionSpec::Deterministic { value } => finite(value, "value"),
            DistributionSpec::Bernoulli { mean } => {
                finite(mean, "mean")?;
                if !(0.0..=1.0).contains(&mean) {
                    return Err(ModelError::field(path, format!("bernoulli mean {mean} outside [0, 1]")));
                }
                Ok(())
            }
            DistributionSpec::Uniform { lo, hi } => {
                finite(lo, "lo")?;
                finite(hi, "hi")?;
                if lo > hi {
                    return Err(ModelError::field(path, format!("uniform lo {lo} > hi {hi}")));
                }
                Ok(())
            }
            DistributionSpec::Gaussian { mean, variance } => {
                finite(mean, "mean")?;
                finite(variance, "variance")?;
                if variance < 0.0 {
                    return Err(ModelError::field(path, "gaussian variance must be >= 0"));
                }
                Ok(())
            }
        }
    }

    fn validate_consumption(&self, path: &str) -> Result<(), ModelError> {
        self.validate(path)?;
        if let DistributionSpec::Gaussian { .. } = self {
            return Err(ModelError::field(
                path,
                "gaussian consumption not allowed (support must lie in [0, 1])",
            ));
        }
        let (lo, hi) = self.support();
        if lo < 0.0 || hi > 1.0 {
            return Err(ModelError::field(
                path,
                format!("support [{lo}, {hi}] not contained in [0, 1]"),
            ));
        }
        if self.mean() <= 0.0 {
            return Err(ModelError::field(path, "mean 0 not allowed"));
        }
        Ok(())
    }

    fn is_thresholdable(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Deterministic { .. } | DistributionSpec::Bernoulli { .. }
        )
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Deterministic { value } => write!(f, "Det({value})"),
            DistributionSpec::Bernoulli { mean } => write!(f, "Bern({mean})"),
            DistributionSpec::Uniform { lo, hi } => write!(f, "Unif({lo}, {hi})"),
            DistributionSpec::Gaussian { mean, variance } => write!(f, "N({mean}, {variance})"),
        }
    }
}

/// How the reward and consumptions of one pull are generated jointly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Every component is drawn independently.
    #[default]
    Independent,
    /// One `U ~ Uniform[0, 1]` per pull; each Bernoulli component is `1(U <= p)`.
    SharedUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub reward: DistributionSpec,
    pub consumption: Vec<DistributionSpec>,
    #[serde(default)]
    pub coupling: Coupling,
}

impl ArmModel {
    pub fn independent(reward: DistributionSpec, consumption: Vec<DistributionSpec>) -> Self {
        ArmModel {
            reward,
            consumption,
            coupling: Coupling::Independent,
        }
    }

    pub fn shared_uniform(reward: DistributionSpec, consumption: Vec<DistributionSpec>) -> Self {
        ArmModel {
            reward,
            consumption,
            coupling: Coupling::SharedUniform,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let mut out = Outcome::zeros(self.consumption.len());
        self.sample_into(rng, &mut out);
        out
    }

    /// Like [`ArmModel::sample`] but reuses `out`'s buffer.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Outcome) {
        out.consumption.resize(self.consumption.len(), 0.0);
        match self.coupling {
            Coupling::Independent => {
                out.reward = self.reward.sample(rng);
                for (slot, dist) in out.consumption.iter_mut().zip(&self.consumption) {
                    *slot = dist.sample(rng);
                }
            }
            Coupling::SharedUniform => {
                let u: f64 = rng.random();
                self.outcome_for_variate(u, out);
            }
        }
    }

    /// Deterministic part of the shared-uniform coupling: the outcome
    /// produced by a realized variate `u`.
    pub fn outcome_for_variate(&self, u: f64, out: &mut Outcome) {
        out.reward = self.reward.threshold(u);
        out.consumption.resize(self.consumption.len(), 0.0);
        for (slot, dist) in out.consumption.iter_mut().zip(&self.consumption) {
            *slot = dist.threshold(u);
        }
    }

    fn validate(&self, index: usize, num_resources: usize) -> Result<(), ModelError> {
        let base = format!("arms[{index}]");
        self.reward.validate(&format!("{base}.reward"))?;
        if self.consumption.len() != num_resources {
            return Err(ModelError::field(
                format!("{base}.consumption"),
                format!(
                    "expected {num_resources} entries (one per budget), found {}",
                    self.consumption.len()
                ),
            ));
        }
        for (l, dist) in self.consumption.iter().enumerate() {
            dist.validate_consumption(&format!("{base}.consumption[{l}]"))?;
        }
        if self.coupling == Coupling::SharedUniform {
            if !self.reward.is_thresholdable() {
                return Err(ModelError::field(
                    format!("{base}.coupling"),
                    "shared_uniform requires bernoulli or deterministic reward",
                ));
            }
            if let Some(l) = self.consumption.iter().position(|d| !d.is_thresholdable()) {
                return Err(ModelError::field(
                    format!("{base}.consumption[{l}]"),
                    "shared_uniform requires bernoulli or deterministic consumption",
                ));
            }
        }
        Ok(())
    }
}

/// One pull's realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: f64,
    pub consumption: Vec<f64>,
}

impl Outcome {
    pub fn zeros(num_resources: usize) -> Self {
        Outcome {
            reward: 0.0,
            consumption: vec![0.0; num_resources],
        }
    }
}

/// Almost-sure deviation bound `b` and variance cap `sigma2` for one resource.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub b: f64,
    pub sigma2: f64,
}

impl Envelope {
    pub const ZERO: Envelope = Envelope { b: 0.0, sigma2: 0.0 };

    pub fn new(b: f64, sigma2: f64) -> Self {
        Envelope { b, sigma2 }
    }
}

/// Deviation bound used for Bernoulli consumption when deriving an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BernoulliBound {
    /// `b = 1` for every Bernoulli marginal.
    #[default]
    Unit,
    /// `b = max(d, 1 - d)`.
    Tight,
}

/// Serialized form of an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub arms: Vec<ArmModel>,
    pub budgets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_override: Option<Vec<Envelope>>,
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceSpec", into = "InstanceSpec")]
pub struct Instance {
    arms: Vec<ArmModel>,
    budgets: Vec<f64>,
    envelope: Vec<Envelope>,
    envelope_override: Option<Vec<Envelope>>,
}

/// Exact mean rewards `r[k]` and mean consumptions `d[l][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Means {
    pub rewards: Vec<f64>,
    /// Indexed `[resource][arm]`.
    pub consumption: Vec<Vec<f64>>,
}

impl Instance {
    /// Builds an instance whose envelope is derived from the arms with the
    /// default Bernoulli convention (`b = 1`).
    pub fn new(arms: Vec<ArmModel>, budgets: Vec<f64>) -> Result<Self, ModelError> {
        Self::from_spec(InstanceSpec {
            arms,
            budgets,
            envelope_override: None,
        })
    }

    pub fn with_envelope(arms: Vec<ArmModel>, budgets: Vec<f64>, envelope: Vec<Envelope>) -> Result<Self, ModelError> {
        Self::from_spec(InstanceSpec {
            arms,
            budgets,
            envelope_override: Some(envelope),
        })
    }

    pub fn from_spec(spec: InstanceSpec) -> Result<Self, ModelError> {
        let InstanceSpec {
            arms,
            budgets,
            envelope_override,
        } = spec;
        if arms.is_empty() {
            return Err(ModelError::field("arms", "at least one arm required"));
        }
        if budgets.is_empty() {
            return Err(ModelError::field("budgets", "at least one resource required"));
        }
        for (l, &c) in budgets.iter().enumerate() {
            if !c.is_finite() || c < 0.0 {
                return Err(ModelError::field(
                    format!("budgets[{l}]"),
                    format!("budget {c} must be finite and >= 0"),
                ));
            }
        }
        let num_resources = budgets.len();
        for (k, arm) in arms.iter().enumerate() {
            arm.validate(k, num_resources)?;
        }
        check_unique_best(&arms)?;

        let envelope = match &envelope_override {
            None => derive_envelope(&arms, num_resources, BernoulliBound::Unit),
            Some(env) => {
                validate_envelope(env, &arms, num_resources)?;
                env.clone()
            }
        };
        Ok(Instance {
            arms,
            budgets,
            envelope,
            envelope_override,
        })
    }

    pub fn to_spec(&self) -> InstanceSpec {
        InstanceSpec {
            arms: self.arms.clone(),
            budgets: self.budgets.clone(),
            envelope_override: self.envelope_override.clone(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn num_resources(&self) -> usize {
        self.budgets.len()
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn arm(&self, k: usize) -> &ArmModel {
        &self.arms[k]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    /// Effective envelope: the override if one was given, otherwise the
    /// envelope derived from the arms.
    pub fn envelope(&self) -> &[Envelope] {
        &self.envelope
    }

    pub fn envelope_override(&self) -> Option<&[Envelope]> {
        self.envelope_override.as_deref()
    }

    /// Copy with different budgets (same arms and envelope source).
    pub fn with_budgets(&self, budgets: Vec<f64>) -> Result<Self, ModelError> {
        Self::from_spec(InstanceSpec {
            arms: self.arms.clone(),
            budgets,
            envelope_override: self.envelope_override.clone(),
        })
    }

    /// Copy whose envelope is re-derived from the arms under `convention`.
    /// An explicit override is kept as is.
    pub fn with_bernoulli_bound(&self, convention: BernoulliBound) -> Self {
        let mut out = self.clone();
        if out.envelope_override.is_none() {
            out.envelope = derive_envelope(&out.arms, out.num_resources(), convention);
        }
        out
    }

    pub fn reward_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.reward.mean()).collect()
    }

    /// Mean consumption of every arm for resource `l`.
    pub fn consumption_means(&self, l: usize) -> Vec<f64> {
        self.arms.iter().map(|a| a.consumption[l].mean()).collect()
    }

    /// Index of the unique arm with the highest mean reward.
    pub fn best_arm(&self) -> usize {
        let rewards = self.reward_means();
        let mut best = 0;
        for (k, &r) in rewards.iter().enumerate().skip(1) {
            if r > rewards[best] {
                best = k;
            }
        }
        best
    }
}

impl TryFrom<InstanceSpec> for Instance {
    type Error = ModelError;

    fn try_from(spec: InstanceSpec) -> Result<Self, Self::Error> {
        Instance::from_spec(spec)
    }
}

impl From<Instance> for InstanceSpec {
    fn from(instance: Instance) -> Self {
        InstanceSpec {
            arms: instance.arms,
            budgets: instance.budgets,
            envelope_override: instance.envelope_override,
        }
    }
}

pub fn means(instance: &Instance) -> Means {
    Means {
        rewards: instance.reward_means(),
        consumption: (0..instance.num_resources())
            .map(|l| instance.consumption_means(l))
            .collect(),
    }
}

/// Per-resource envelope derived from the arms: the largest deviation bound
/// and the largest variance over arms, with `sigma2` clamped to `b^2`.
pub fn tight_envelope(instance: &Instance, convention: BernoulliBound) -> Vec<Envelope> {
    derive_envelope(instance.arms(), instance.num_resources(), convention)
}

fn derive_envelope(arms: &[ArmModel], num_resources: usize, convention: BernoulliBound) -> Vec<Envelope> {
    (0..num_resources)
        .map(|l| {
            let mut b: f64 = 0.0;
            let mut sigma2: f64 = 0.0;
            for arm in arms {
                let dist = &arm.consumption[l];
                let arm_b = match (dist, convention) {
                    (DistributionSpec::Bernoulli { .. }, BernoulliBound::Unit) => 1.0,
                    _ => dist.deviation_bound(),
                };
                b = b.max(arm_b);
                sigma2 = sigma2.max(dist.variance());
            }
            Envelope::new(b, sigma2.min(b * b))
        })
        .collect()
}

fn validate_envelope(envelope: &[Envelope], arms: &[ArmModel], num_resources: usize) -> Result<(), ModelError> {
    if envelope.len() != num_resources {
        return Err(ModelError::field(
            "envelope_override",
            format!(
                "expected {num_resources} entries (one per budget), found {}",
                envelope.len()
            ),
        ));
    }
    for (l, env) in envelope.iter().enumerate() {
        let path = format!("envelope_override[{l}]");
        if !env.b.is_finite() || !env.sigma2.is_finite() || env.b < 0.0 || env.sigma2 < 0.0 {
            return Err(ModelError::field(path, "b and sigma2 must be finite and >= 0"));
        }
        if env.sigma2 > env.b * env.b {
            return Err(ModelError::field(
                path,
                format!("sigma2 {} exceeds b^2 = {}", env.sigma2, env.b * env.b),
            ));
        }
        for (k, arm) in arms.iter().enumerate() {
            let dist = &arm.consumption[l];
            if dist.deviation_bound() > env.b + ENVELOPE_SLACK {
                return Err(ModelError::field(
                    path,
                    format!(
                        "b {} does not dominate arm {k} deviation bound {}",
                        env.b,
                        dist.deviation_bound()
                    ),
                ));
            }
            if dist.variance() > env.sigma2 + ENVELOPE_SLACK {
                return Err(ModelError::field(
                    path,
                    format!(
                        "sigma2 {} does not dominate arm {k} variance {}",
                        env.sigma2,
                        dist.variance()
                    ),
                ));
            }
        }
    }
    Ok(())
}

fn check_unique_best(arms: &[ArmModel]) -> Result<(), ModelError> {
    let mut best = 0;
    let mut tie: Option<usize> = None;
    for k in 1..arms.len() {
        let r = arms[k].reward.mean();
        let top = arms[best].reward.mean();
        if r > top {
            best = k;
            tie = None;
        } else if r == top && tie.is_none() {
            tie = Some(k);
        }
    }
    match tie {
        Some(second) => Err(ModelError::TiedBestArm {
            first: best,
            second,
            mean: arms[best].reward.mean(),
        }),
        None => Ok(()),
    }
}
