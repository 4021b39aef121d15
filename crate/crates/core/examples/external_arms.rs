// Arms backed by shell commands; consumption is wall-clock time.

use std::error::Error;

use bairc::external::{run_external_trials, ExternalArmSpec, ExternalInstance, ExternalRun};
use bairc::strategies::{PolicyKind, PolicySpec};

pub fn run_example() -> Result<ExternalRun, Box<dyn Error>> {
    let arm = |score: &str| ExternalArmSpec {
        command: vec!["sh".into(), "-c".into(), format!("echo {score}")],
        budget_scale: 0.01,
        timeout: 5.0,
    };
    let instance = ExternalInstance {
        external_arms: vec![arm("0.9"), arm("0.4"), arm("0.2")],
        budget: 6.0,
        best_arm: Some(0),
    };
    instance.validate()?;
    Ok(run_external_trials(
        &instance,
        &PolicySpec::new(PolicyKind::Shrr),
        3,
        5,
    )?)
}

fn main() -> Result<(), Box<dyn Error>> {
    let run = run_example()?;
    for (i, r) in run.results.iter().enumerate() {
        println!(
            "trial {i}: arm {} after {} pulls, {:.2} time units",
            r.psi, r.tau, r.consumption[0]
        );
    }
    println!("clamped outputs: {}, timeouts: {}", run.clamp_warnings, run.timeouts);
    Ok(())
}
