//! Best arm identification under resource constraints.
//!
//! - [`model`]: instances, distributions and validation.
//! - [`complexity`]: hardness measures and failure-probability bounds.
//! - [`strategies`]: SH-RR and the anytime baselines.
//! - [`harness`]: reproducible Monte Carlo estimation of failure probabilities.
//! - [`experiments`]: instance families and CSV sweeps.
//! - [`external`]: arms backed by external programs, consuming wall time.
//! - [`cli`]: the `bairc` command line.

pub mod cli;
pub mod complexity;
pub mod experiments;
pub mod external;
pub mod harness;
pub mod model;
pub mod strategies;

pub use complexity::{complexity_report, ComplexityReport};
pub use harness::{estimate_failure, run_trial, run_trials, FailureStats, TrialResult};
pub use model::{ArmModel, Coupling, DistributionSpec, Envelope, Instance, ModelError, Outcome};
pub use strategies::{Policy, PolicyKind, PolicySpec, Shrr};
