// Hardness measures for a synthetic instance and how they shift with the
// consumption law.

use std::error::Error;

use bairc::complexity::{complexity_report, ComplexityReport};
use bairc::experiments::{gen_synthetic, ConsumptionKind, ConsumptionPattern, RewardShape, SetupSpec};

pub fn run_example() -> Result<Vec<(ConsumptionKind, ComplexityReport)>, Box<dyn Error>> {
    [
        ConsumptionKind::Deterministic,
        ConsumptionKind::Uncorrelated,
        ConsumptionKind::Correlated,
    ]
    .into_iter()
    .map(|kind| {
        let inst = gen_synthetic(&SetupSpec {
            reward_shape: RewardShape::Polynomial,
            consumption_pattern: ConsumptionPattern::HighMatchHigh,
            consumption_kind: kind,
            num_arms: 8,
            budgets: vec![200.0],
        })?;
        Ok((kind, complexity_report(&inst)?))
    })
    .collect()
}

fn main() -> Result<(), Box<dyn Error>> {
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "consumption", "H2det", "H2sto", "H2refined", "gamma", "bound"
    );
    for (kind, r) in run_example()? {
        println!(
            "{:<14} {:>10.2} {:>10.2} {:>10.2} {:>10.3} {:>10.3e}",
            kind.name(),
            r.h2_det[0],
            r.h2_sto[0],
            r.h2_refined[0],
            r.gamma,
            r.upper_bound_general
        );
    }
    Ok(())
}
