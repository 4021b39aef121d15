//! Repeated-trial Monte Carlo estimation of the failure probability.
//!
//! Trial `i` of a run with base seed `s` draws its outcomes from a ChaCha8
//! stream keyed by `SHA-256(s, i)`, so every trial is reproducible on its own
//! and results do not depend on scheduling or on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{Instance, Outcome};
use crate::strategies::{Policy, PolicySpec};

pub type TrialRng = ChaCha8Rng;

/// Slack allowed when asserting that a self-stopping policy stayed within
/// budget; absorbs floating-point reassociation of consumption sums.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("pull of arm {arm} failed: {reason}")]
    Pull { arm: usize, reason: String },
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// Source of outcomes for a trial.
pub trait Environment {
    fn num_arms(&self) -> usize;
    fn num_resources(&self) -> usize;
    fn pull(&mut self, arm: usize, rng: &mut TrialRng, out: &mut Outcome) -> Result<(), HarnessError>;
}

/// Samples outcomes from a validated [`Instance`].
#[derive(Debug, Clone, Copy)]
pub struct SimulatedEnv<'a> {
    instance: &'a Instance,
}

impl<'a> SimulatedEnv<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        SimulatedEnv { instance }
    }
}

impl Environment for SimulatedEnv<'_> {
    fn num_arms(&self) -> usize {
        self.instance.num_arms()
    }

    fn num_resources(&self) -> usize {
        self.instance.num_resources()
    }

    fn pull(&mut self, arm: usize, rng: &mut TrialRng, out: &mut Outcome) -> Result<(), HarnessError> {
        self.instance.arm(arm).sample_into(rng, out);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    /// Recommended arm.
    pub psi: usize,
    /// Total pulls, including a breaching pull.
    pub tau: u64,
    pub consumption: Vec<f64>,
    /// No budget was exceeded.
    pub feasible: bool,
    pub pulls: Vec<u64>,
}

/// What the driver reports to an observer after each pull.
#[derive(Debug)]
pub struct PullEvent<'a> {
    pub step: u64,
    pub arm: usize,
    pub outcome: &'a Outcome,
    pub totals: &'a [f64],
    pub budgets: &'a [f64],
}

#[derive(Default)]
pub struct DriveOptions<'o> {
    /// Stop after this many pulls (recommendation taken at that point).
    pub max_pulls: Option<u64>,
    pub observer: Option<&'o mut dyn FnMut(&PullEvent<'_>)>,
}

/// Runs one policy against one environment until the policy stops or, for
/// anytime policies, until a pull pushes some resource total strictly above
/// its budget. In the latter case the recommendation made before the
/// breaching pull is returned and the breaching outcome is not shown to the
/// policy.
pub fn drive(
    env: &mut dyn Environment,
    budgets: &[f64],
    policy: &mut dyn Policy,
    rng: &mut TrialRng,
    mut options: DriveOptions<'_>,
) -> Result<TrialResult, HarnessError> {
    let mut totals = vec![0.0; budgets.len()];
    let mut pulls = vec![0u64; env.num_arms()];
    let mut outcome = Outcome::zeros(env.num_resources());
    let mut tau = 0u64;
    let mut feasible = true;
    let anytime = policy.is_anytime();

    loop {
        if options.max_pulls.is_some_and(|cap| tau >= cap) {
            break;
        }
        let snapshot = if anytime { policy.recommend() } else { 0 };
        let Some(arm) = policy.next_arm() else {
            break;
        };
        env.pull(arm, rng, &mut outcome)?;
        tau += 1;
        pulls[arm] += 1;
        for (t, d) in totals.iter_mut().zip(&outcome.consumption) {
            *t += d;
        }
        if let Some(observer) = options.observer.as_mut() {
            observer(&PullEvent {
                step: tau,
                arm,
                outcome: &outcome,
                totals: &totals,
                budgets,
            });
        }
        if anytime {
            if totals.iter().zip(budgets).any(|(t, c)| t > c) {
                return Ok(TrialResult {
                    psi: snapshot,
                    tau,
                    consumption: totals,
                    feasible: false,
                    pulls,
                });
            }
        } else if totals.iter().zip(budgets).any(|(t, c)| *t > c + FEASIBILITY_SLACK) {
            feasible = false;
        }
        policy.observe(arm, &outcome);
    }
    Ok(TrialResult {
        psi: policy.recommend(),
        tau,
        consumption: totals,
        feasible,
        pulls,
    })
}

/// Per-trial seed: SHA-256 of the base seed and the trial index.
pub fn trial_seed(base_seed: u64, trial: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(b"bairc/trial");
    hasher.update(base_seed.to_le_bytes());
    hasher.update(trial.to_le_bytes());
    hasher.finalize().into()
}

pub fn trial_rng(base_seed: u64, trial: u64) -> TrialRng {
    TrialRng::from_seed(trial_seed(base_seed, trial))
}

/// Derives a child base seed, e.g. one per sweep cell.
pub fn derive_seed(base_seed: u64, label: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"bairc/derive");
    hasher.update(base_seed.to_le_bytes());
    for part in label {
        hasher.update(part.to_le_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// One trial of `policy` on `instance` with the stream of trial 0 of `seed`.
pub fn run_trial(instance: &Instance, policy: &PolicySpec, seed: u64) -> Result<TrialResult, HarnessError> {
    run_indexed_trial(instance, policy, seed, 0)
}

pub fn run_indexed_trial(
    instance: &Instance,
    policy: &PolicySpec,
    base_seed: u64,
    trial: u64,
) -> Result<TrialResult, HarnessError> {
    let mut env = SimulatedEnv::new(instance);
    let mut p = policy.build(instance.num_arms(), instance.budgets());
    let mut rng = trial_rng(base_seed, trial);
    drive(
        &mut env,
        instance.budgets(),
        p.as_mut(),
        &mut rng,
        DriveOptions::default(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FailureStats {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl FailureStats {
    pub fn from_counts(failures: u64, trials: u64, seed: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(failures, trials);
        FailureStats {
            trials,
            failures,
            p_hat: if trials == 0 {
                0.0
            } else {
                failures as f64 / trials as f64
            },
            ci_lo,
            ci_hi,
            seed,
        }
    }
}

/// Wilson score interval at 95% confidence.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = (center - half).max(0.0).min(p);
    let hi = (center + half).min(1.0).max(p);
    (lo, hi)
}

/// Runs `f` on a pool with `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// All trial results, in trial order.
pub fn run_trials(
    instance: &Instance,
    policy: &PolicySpec,
    trials: u64,
    base_seed: u64,
    threads: usize,
) -> Result<Vec<TrialResult>, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    with_threads(threads, || {
        (0..trials)
            .into_par_iter()
            .map(|i| run_indexed_trial(instance, policy, base_seed, i))
            .collect()
    })?
}

/// Empirical `Pr(psi != best arm)` over `trials` independent trials.
pub fn estimate_failure(
    instance: &Instance,
    policy: &PolicySpec,
    trials: u64,
    base_seed: u64,
    threads: usize,
) -> Result<FailureStats, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    with_threads(threads, || {
        estimate_failure_in_pool(instance, policy, trials, base_seed)
    })?
}

/// Like [`estimate_failure`], on the current rayon pool.
pub fn estimate_failure_in_pool(
    instance: &Instance,
    policy: &PolicySpec,
    trials: u64,
    base_seed: u64,
) -> Result<FailureStats, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let best = instance.best_arm();
    let failures = (0..trials)
        .into_par_iter()
        .map(|i| run_indexed_trial(instance, policy, base_seed, i).map(|r| u64::from(r.psi != best)))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(FailureStats::from_counts(failures, trials, base_seed))
}

/// Failure statistics of already collected trials.
pub fn summarize(results: &[TrialResult], best_arm: usize, seed: u64) -> FailureStats {
    let failures = results.iter().filter(|r| r.psi != best_arm).count() as u64;
    FailureStats::from_counts(failures, results.len() as u64, seed)
}

/// Writes per-trial rows `trial_id,psi,tau,feasible,consumption_1..L`.
pub fn write_trials_csv<W: std::io::Write>(out: W, results: &[TrialResult], num_resources: usize) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["trial_id".to_string(), "psi".into(), "tau".into(), "feasible".into()];
    header.extend((1..=num_resources).map(|l| format!("consumption_{l}")));
    w.write_record(&header)?;
    for (i, r) in results.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            r.psi.to_string(),
            r.tau.to_string(),
            r.feasible.to_string(),
        ];
        row.extend(r.consumption.iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
