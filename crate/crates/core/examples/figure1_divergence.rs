// Same means, different consumption laws: deterministic `d` against
// Bernoulli(`d`) on a two-arm instance with budget 2.

use std::error::Error;

use bairc::experiments::gen_figure1_pair;
use bairc::harness::{estimate_failure, FailureStats};
use bairc::strategies::{PolicyKind, PolicySpec};

pub type Row = (f64, FailureStats, FailureStats);

pub fn run_example(trials: u64) -> Result<Vec<Row>, Box<dyn Error>> {
    let policy = PolicySpec::new(PolicyKind::Shrr);
    [0.5, 0.25, 0.125, 0.0625]
        .into_iter()
        .map(|d| {
            let (det, sto) = gen_figure1_pair(d)?;
            let a = estimate_failure(&det, &policy, trials, 7, 0)?;
            let b = estimate_failure(&sto, &policy, trials, 7, 0)?;
            Ok((d, a, b))
        })
        .collect()
}

fn main() -> Result<(), Box<dyn Error>> {
    println!("{:>8} {:>24} {:>24}", "d", "deterministic", "bernoulli");
    for (d, det, sto) in run_example(20_000)? {
        println!(
            "{d:>8} {:>8.4} [{:.4}, {:.4}] {:>8.4} [{:.4}, {:.4}]",
            det.p_hat, det.ci_lo, det.ci_hi, sto.p_hat, sto.ci_lo, sto.ci_hi
        );
    }
    Ok(())
}
