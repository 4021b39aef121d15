//! Grid sweeps over instance families, emitted as CSV.
//!
//! Config (JSON):
//!
//! ```json
//! {
//!   "generator": "figure1",
//!   "grid": {"kind": "inverse_arithmetic", "start": 2, "stop": 20, "step": 2},
//!   "policies": ["shrr"],
//!   "trials": 1000,
//!   "seed": 7,
//!   "out": "fig1.csv"
//! }
//! ```
//!
//! For `figure1` the grid runs over the mean consumption `d` and every point
//! yields the instances `det` and `sto`. For `synthetic` the grid runs over
//! the budget `C` (shared by all resources) and every point yields one
//! instance per entry of `setups`.

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    gen_figure1_pair, gen_synthetic, ConsumptionKind, ConsumptionPattern, ExperimentError, RewardShape, SetupSpec,
};
use crate::harness::{derive_seed, estimate_failure_in_pool, with_threads, FailureStats, HarnessError};
use crate::model::Instance;
use crate::strategies::{PolicyKind, PolicySpec};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Figure1,
    Synthetic,
}

/// Grid of x values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `x = 1/v` for `v = start, start + step, ...` up to `stop`.
    InverseArithmetic {
        start: f64,
        stop: f64,
        step: f64,
    },
    /// `x = start * ratio^j` for `j < count`.
    Geometric {
        start: f64,
        ratio: f64,
        count: usize,
    },
    Values {
        values: Vec<f64>,
    },
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>, SweepError> {
        match *self {
            GridSpec::InverseArithmetic { start, stop, step } => {
                if !(start > 0.0 && step > 0.0 && start.is_finite() && stop.is_finite()) {
                    return Err(SweepError::Config(
                        "inverse_arithmetic needs start > 0 and step > 0".into(),
                    ));
                }
                let mut out = Vec::new();
                let mut j = 0u32;
                loop {
                    let v = start + f64::from(j) * step;
                    if v > stop * (1.0 + 1e-12) {
                        break;
                    }
                    out.push(1.0 / v);
                    j += 1;
                }
                Ok(out)
            }
            GridSpec::Geometric { start, ratio, count } => {
                if !(start > 0.0 && ratio > 0.0) {
                    return Err(SweepError::Config("geometric needs start > 0 and ratio > 0".into()));
                }
                Ok((0..count).map(|j| start * ratio.powi(j as i32)).collect())
            }
            GridSpec::Values { ref values } => Ok(values.clone()),
        }
    }
}

/// A synthetic setup without its budget, which comes from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSetup {
    pub reward_shape: RewardShape,
    pub consumption_pattern: ConsumptionPattern,
    pub consumption_kind: ConsumptionKind,
    pub num_arms: usize,
    #[serde(default = "one")]
    pub num_resources: usize,
}

fn one() -> usize {
    1
}

impl SyntheticSetup {
    pub fn with_budget(&self, budget: f64) -> SetupSpec {
        SetupSpec {
            reward_shape: self.reward_shape,
            consumption_pattern: self.consumption_pattern,
            consumption_kind: self.consumption_kind,
            num_arms: self.num_arms,
            budgets: vec![budget; self.num_resources],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub generator: GeneratorKind,
    pub grid: GridSpec,
    pub policies: Vec<PolicyKind>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub setups: Vec<SyntheticSetup>,
}

impl SweepConfig {
    pub fn from_json_str(text: &str) -> Result<Self, SweepError> {
        serde_json::from_str(text).map_err(|e| SweepError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.trials == 0 {
            return Err(SweepError::Config("trials must be >= 1".into()));
        }
        if self.policies.is_empty() {
            return Err(SweepError::Config("at least one policy required".into()));
        }
        match self.generator {
            GeneratorKind::Figure1 if !self.setups.is_empty() => Err(SweepError::Config(
                "setups only apply to the synthetic generator".into(),
            )),
            GeneratorKind::Synthetic if self.setups.is_empty() => Err(SweepError::Config(
                "synthetic generator needs at least one setup".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Labelled instances at grid value `x`.
    pub fn instances_at(&self, x: f64) -> Result<Vec<(String, Instance)>, SweepError> {
        match self.generator {
            GeneratorKind::Figure1 => {
                let (det, sto) = gen_figure1_pair(x)?;
                Ok(vec![("det".into(), det), ("sto".into(), sto)])
            }
            GeneratorKind::Synthetic => self
                .setups
                .iter()
                .map(|s| {
                    let spec = s.with_budget(x);
                    let label = format!("{}/K{}/L{}", spec.label(), spec.num_arms, spec.num_resources());
                    Ok((label, gen_synthetic(&spec)?))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub x: f64,
    pub policy: PolicyKind,
    pub instance_label: String,
    pub stats: FailureStats,
}

/// Runs every (grid point, instance, policy) cell. Rows come back in that
/// nesting order regardless of thread count; cell seeds derive from the
/// base seed and the cell's indices.
pub fn run_sweep(config: &SweepConfig, threads: usize) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let mut cells = Vec::new();
    for (gi, x) in config.grid.points()?.into_iter().enumerate() {
        for (ii, (label, instance)) in config.instances_at(x)?.into_iter().enumerate() {
            for (pi, &policy) in config.policies.iter().enumerate() {
                let seed = derive_seed(config.seed, &[gi as u64, ii as u64, pi as u64]);
                cells.push((x, label.clone(), instance.clone(), policy, seed));
            }
        }
    }
    let trials = config.trials;
    with_threads(threads, || {
        cells
            .into_par_iter()
            .map(|(x, instance_label, instance, policy, seed)| {
                let stats = estimate_failure_in_pool(&instance, &PolicySpec::new(policy), trials, seed)?;
                Ok(SweepRow {
                    x,
                    policy,
                    instance_label,
                    stats,
                })
            })
            .collect()
    })?
}

/// CSV with columns `x,policy,instance_label,p_hat,ci_lo,ci_hi,trials`.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "policy", "instance_label", "p_hat", "ci_lo", "ci_hi", "trials"])?;
    for r in rows {
        w.write_record([
            r.x.to_string(),
            r.policy.to_string(),
            r.instance_label.clone(),
            r.stats.p_hat.to_string(),
            r.stats.ci_lo.to_string(),
            r.stats.ci_hi.to_string(),
            r.stats.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure1(grid: GridSpec) -> SweepConfig {
        SweepConfig {
            generator: GeneratorKind::Figure1,
            grid,
            policies: vec![PolicyKind::Shrr],
            trials: 50,
            seed: 3,
            out: None,
            threads: None,
            setups: vec![],
        }
    }

    #[test]
    fn inverse_arithmetic_points() {
        let g = GridSpec::InverseArithmetic {
            start: 2.0,
            stop: 20.0,
            step: 2.0,
        };
        let pts = g.points().unwrap();
        assert_eq!(pts.len(), 10);
        assert_eq!(pts[0], 0.5);
        assert_eq!(pts[9], 0.05);
    }

    #[test]
    fn figure1_row_count() {
        let cfg = figure1(GridSpec::InverseArithmetic {
            start: 2.0,
            stop: 20.0,
            step: 2.0,
        });
        let rows = run_sweep(&cfg, 2).unwrap();
        assert_eq!(rows.len(), 20);
        assert_eq!(rows[0].instance_label, "det");
        assert_eq!(rows[1].instance_label, "sto");
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let cfg = figure1(GridSpec::Values { values: vec![] });
        let rows = run_sweep(&cfg, 1).unwrap();
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,policy,instance_label,p_hat,ci_lo,ci_hi,trials\n"
        );
    }

    #[test]
    fn generator_errors_propagate() {
        let cfg = figure1(GridSpec::Values { values: vec![1.5] });
        assert!(matches!(run_sweep(&cfg, 1), Err(SweepError::Experiment(_))));
    }

    #[test]
    fn config_parses_from_json() {
        let cfg = SweepConfig::from_json_str(
            r#"{"generator":"synthetic","grid":{"kind":"values","values":[100]},
                "policies":["shrr","dsh"],"trials":10,"seed":1,
                "setups":[{"reward_shape":"trap","consumption_pattern":"hml",
                           "consumption_kind":"correlated","num_arms":8}]}"#,
        )
        .unwrap();
        let rows = run_sweep(&cfg, 1).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].instance_label, "trap/hml/correlated/K8/L1");
        assert!(SweepConfig::from_json_str(r#"{"generator":"nope"}"#).is_err());
    }
}
