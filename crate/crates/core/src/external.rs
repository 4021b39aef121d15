//! Arms backed by external programs.
//!
//! A pull runs the arm's command once. The reward is the float on the last
//! non-empty line of its standard output, clamped to `[0, 1]`; the single
//! resource consumed is wall time, `min(1, elapsed / budget_scale)`. A
//! command that outlives its timeout is killed and scores `(0; 1)`.
//! The child sees the pull's seed in `BAIRC_SEED`.

use std::io::Read;
use std::path::Path;
use std::process::{Command, ExitStatus, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{drive, trial_rng, DriveOptions, Environment, HarnessError, TrialResult, TrialRng};
use crate::model::Outcome;
use crate::strategies::PolicySpec;

pub const SEED_ENV_VAR: &str = "BAIRC_SEED";

const POLL_INTERVAL: Duration = Duration::from_millis(2);

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("empty command")]
    EmptyCommand,
    #[error("budget_scale must be positive, got {0}")]
    BadScale(f64),
    #[error("timeout must be positive, got {0}")]
    BadTimeout(f64),
    #[error("could not start {command:?}: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("{command:?} exited with {status}")]
    Exit { command: String, status: ExitStatus },
    #[error("could not parse a reward from last output line {line:?}")]
    Parse { line: String },
    #[error("i/o while running {command:?}: {source}")]
    Io { command: String, source: std::io::Error },
    #[error("invalid external instance: {0}")]
    Instance(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalArmSpec {
    /// Program and arguments.
    pub command: Vec<String>,
    /// Seconds per unit of consumption.
    pub budget_scale: f64,
    /// Seconds before the run is killed.
    pub timeout: f64,
}

impl ExternalArmSpec {
    pub fn validate(&self) -> Result<(), ExternalError> {
        if self.command.is_empty() {
            return Err(ExternalError::EmptyCommand);
        }
        if !(self.budget_scale > 0.0 && self.budget_scale.is_finite()) {
            return Err(ExternalError::BadScale(self.budget_scale));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(ExternalError::BadTimeout(self.timeout));
        }
        Ok(())
    }

    fn display(&self) -> String {
        self.command.join(" ")
    }
}

/// Result of one external run before it becomes an [`Outcome`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalPull {
    pub reward: f64,
    pub consumption: f64,
    /// Parsed reward lay outside `[0, 1]` and was clamped.
    pub clamped: bool,
    pub timed_out: bool,
}

impl ExternalPull {
    pub fn outcome(&self) -> Outcome {
        Outcome {
            reward: self.reward,
            consumption: vec![self.consumption],
        }
    }
}

/// Reward and consumption from a finished run's output and duration.
pub fn interpret_run(stdout: &str, elapsed_secs: f64, budget_scale: f64) -> Result<ExternalPull, ExternalError> {
    let line = stdout.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
    let raw: f64 = line
        .parse()
        .map_err(|_| ExternalError::Parse { line: line.to_string() })?;
    if raw.is_nan() {
        return Err(ExternalError::Parse { line: line.to_string() });
    }
    let reward = raw.clamp(0.0, 1.0);
    Ok(ExternalPull {
        reward,
        consumption: (elapsed_secs / budget_scale).clamp(0.0, 1.0),
        clamped: reward != raw,
        timed_out: false,
    })
}

/// The outcome charged for a run that hit its timeout.
pub fn timeout_pull() -> ExternalPull {
    ExternalPull {
        reward: 0.0,
        consumption: 1.0,
        clamped: false,
        timed_out: true,
    }
}

/// Runs `arm` once.
pub fn pull_external<R: RngCore + ?Sized>(arm: &ExternalArmSpec, rng: &mut R) -> Result<ExternalPull, ExternalError> {
    arm.validate()?;
    let command = arm.display();
    let io_err = |source| ExternalError::Io {
        command: command.clone(),
        source,
    };
    let start = Instant::now();
    let mut child = Command::new(&arm.command[0])
        .args(&arm.command[1..])
        .env(SEED_ENV_VAR, rng.next_u64().to_string())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|source| ExternalError::Spawn {
            command: command.clone(),
            source,
        })?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = String::new();
        stdout.read_to_string(&mut buf).map(|_| buf)
    });
    let timeout = Duration::from_secs_f64(arm.timeout);
    let status = loop {
        if let Some(status) = child.try_wait().map_err(io_err)? {
            break Some(status);
        }
        if start.elapsed() >= timeout {
            // already-exited races are fine to ignore
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        thread::sleep(POLL_INTERVAL);
    };
    let elapsed = start.elapsed().as_secs_f64();
    let Some(status) = status else {
        let _ = reader.join();
        return Ok(timeout_pull());
    };
    let out = reader.join().unwrap_or_else(|_| Ok(String::new())).map_err(io_err)?;
    if !status.success() {
        return Err(ExternalError::Exit { command, status });
    }
    interpret_run(&out, elapsed, arm.budget_scale)
}

/// Instance file for external arms: a single time resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalInstance {
    pub external_arms: Vec<ExternalArmSpec>,
    /// Time budget in consumption units.
    pub budget: f64,
    /// Known best arm, if any; enables failure estimation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_arm: Option<usize>,
}

impl ExternalInstance {
    pub fn from_json_str(text: &str) -> Result<Self, ExternalError> {
        let inst: ExternalInstance = serde_json::from_str(text).map_err(|e| ExternalError::Instance(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_path(path: &Path) -> Result<Self, ExternalError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExternalError::Io {
            command: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), ExternalError> {
        if self.external_arms.is_empty() {
            return Err(ExternalError::Instance("at least one arm required".into()));
        }
        for (k, arm) in self.external_arms.iter().enumerate() {
            arm.validate()
                .map_err(|e| ExternalError::Instance(format!("external_arms[{k}]: {e}")))?;
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(ExternalError::Instance(format!(
                "budget: {} is not a finite non-negative number",
                self.budget
            )));
        }
        if let Some(best) = self.best_arm {
            if best >= self.external_arms.len() {
                return Err(ExternalError::Instance(format!("best_arm: {best} out of range")));
            }
        }
        Ok(())
    }

    pub fn budgets(&self) -> [f64; 1] {
        [self.budget]
    }
}

/// [`Environment`] over external arms; counts clamped rewards and timeouts.
#[derive(Debug)]
pub struct ExternalEnv<'a> {
    arms: &'a [ExternalArmSpec],
    pub clamp_warnings: u64,
    pub timeouts: u64,
}

impl<'a> ExternalEnv<'a> {
    pub fn new(arms: &'a [ExternalArmSpec]) -> Self {
        ExternalEnv {
            arms,
            clamp_warnings: 0,
            timeouts: 0,
        }
    }
}

impl Environment for ExternalEnv<'_> {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn num_resources(&self) -> usize {
        1
    }

    fn pull(&mut self, arm: usize, rng: &mut TrialRng, out: &mut Outcome) -> Result<(), HarnessError> {
        let pull = pull_external(&self.arms[arm], rng).map_err(|e| HarnessError::Pull {
            arm,
            reason: e.to_string(),
        })?;
        self.clamp_warnings += u64::from(pull.clamped);
        self.timeouts += u64::from(pull.timed_out);
        out.reward = pull.reward;
        out.consumption[0] = pull.consumption;
        Ok(())
    }
}

/// Trials on external arms, run one after another.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRun {
    pub results: Vec<TrialResult>,
    pub clamp_warnings: u64,
    pub timeouts: u64,
}

pub fn run_external_trials(
    instance: &ExternalInstance,
    policy: &PolicySpec,
    trials: u64,
    base_seed: u64,
) -> Result<ExternalRun, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::NoTrials);
    }
    let budgets = instance.budgets();
    let mut env = ExternalEnv::new(&instance.external_arms);
    let mut results = Vec::with_capacity(trials as usize);
    for i in 0..trials {
        let mut p = policy.build(instance.external_arms.len(), &budgets);
        let mut rng = trial_rng(base_seed, i);
        results.push(drive(
            &mut env,
            &budgets,
            p.as_mut(),
            &mut rng,
            DriveOptions::default(),
        )?);
    }
    Ok(ExternalRun {
        results,
        clamp_warnings: env.clamp_warnings,
        timeouts: env.timeouts,
    })
}
