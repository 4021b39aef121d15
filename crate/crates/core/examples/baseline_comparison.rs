// Every policy on one synthetic instance, then a small sweep written as CSV.

use std::error::Error;

use bairc::experiments::{
    gen_synthetic, run_sweep, write_sweep_csv, ConsumptionKind, ConsumptionPattern, RewardShape, SetupSpec, SweepConfig,
};
use bairc::harness::{estimate_failure, FailureStats};
use bairc::strategies::{PolicyKind, PolicySpec};

pub type Table = Vec<(PolicyKind, FailureStats)>;

pub fn run_example(trials: u64) -> Result<(Table, String), Box<dyn Error>> {
    let inst = gen_synthetic(&SetupSpec {
        reward_shape: RewardShape::Trap,
        consumption_pattern: ConsumptionPattern::HighMatchLow,
        consumption_kind: ConsumptionKind::Uncorrelated,
        num_arms: 16,
        budgets: vec![100.0],
    })?;
    let table = PolicyKind::ALL
        .into_iter()
        .map(|kind| Ok((kind, estimate_failure(&inst, &PolicySpec::new(kind), trials, 11, 0)?)))
        .collect::<Result<Vec<_>, Box<dyn Error>>>()?;

    let config: SweepConfig = serde_json::from_value(serde_json::json!({
        "generator": "synthetic",
        "grid": {"kind": "values", "values": [50, 100, 200]},
        "policies": ["shrr", "uniform"],
        "trials": trials,
        "seed": 11,
        "setups": [{"reward_shape": "trap", "consumption_pattern": "hml",
                    "consumption_kind": "uncorrelated", "num_arms": 16}]
    }))?;
    let rows = run_sweep(&config, 0)?;
    let mut csv = Vec::new();
    write_sweep_csv(&mut csv, &rows)?;
    Ok((table, String::from_utf8(csv)?))
}

fn main() -> Result<(), Box<dyn Error>> {
    let (table, csv) = run_example(2000)?;
    for (kind, s) in table {
        println!(
            "{:<8} p_hat {:.4}  95% CI [{:.4}, {:.4}]",
            kind.name(),
            s.p_hat,
            s.ci_lo,
            s.ci_hi
        );
    }
    println!();
    print!("{csv}");
    Ok(())
}
