// One SH-RR trial on a small two-resource instance, with the per-phase log.

use std::error::Error;

use bairc::harness::{drive, trial_rng, DriveOptions, SimulatedEnv, TrialResult};
use bairc::model::{ArmModel, DistributionSpec, Instance};
use bairc::strategies::{PhaseRecord, Shrr};

pub fn run_example() -> Result<(TrialResult, Vec<PhaseRecord>), Box<dyn Error>> {
    let arm = |r: f64, cpu: f64, mem: f64| {
        ArmModel::independent(
            DistributionSpec::bernoulli(r),
            vec![
                DistributionSpec::bernoulli(cpu),
                DistributionSpec::uniform(0.0, 2.0 * mem),
            ],
        )
    };
    let instance = Instance::new(
        vec![
            arm(0.8, 0.3, 0.2),
            arm(0.6, 0.1, 0.4),
            arm(0.55, 0.5, 0.1),
            arm(0.3, 0.2, 0.2),
        ],
        vec![150.0, 120.0],
    )?;

    let mut env = SimulatedEnv::new(&instance);
    let mut shrr = Shrr::new(instance.num_arms(), instance.budgets());
    let mut rng = trial_rng(2024, 0);
    let result = drive(
        &mut env,
        instance.budgets(),
        &mut shrr,
        &mut rng,
        DriveOptions::default(),
    )?;
    Ok((result, shrr.history().to_vec()))
}

fn main() -> Result<(), Box<dyn Error>> {
    let (result, phases) = run_example()?;
    for p in &phases {
        println!(
            "phase {}: survivors {:?}, pulls {}, ration {:.2?}, consumed {:.2?}",
            p.phase, p.survivors, p.pulls, p.ration, p.consumed
        );
    }
    println!(
        "recommended arm {} after {} pulls; consumption {:.2?}; feasible {}",
        result.psi, result.tau, result.consumption, result.feasible
    );
    Ok(())
}
