// The hard families behind the lower bounds, and what the complexity
// measures say about them.

use std::error::Error;

use bairc::complexity::{h2_det, h2_sto, lower_bound_value_det, refined_h_reward_ordered};
use bairc::experiments::{deterministic_laws, gen_appendix_b5_family, gen_theorem2_family, gen_theorem3_family};

#[derive(Debug)]
pub struct Summary {
    pub det_family_size: usize,
    pub det_lower_bound: f64,
    /// `(scale, H2sto / H2det)` for shrinking Bernoulli consumption.
    pub sto_ratios: Vec<(f64, f64)>,
    /// `(K, H2det, refined H2)` on the refined-measure family.
    pub refined: Vec<(usize, f64, f64)>,
}

pub fn run_example() -> Result<Summary, Box<dyn Error>> {
    let fam = gen_theorem2_family(
        &[0.5, 0.375, 0.25, 0.125],
        &[deterministic_laws(&[0.5, 0.25, 0.125, 0.0625])],
        &[40.0],
    )?;
    let lb = lower_bound_value_det(&fam[0])?;

    let mut sto_ratios = Vec::new();
    for e in 1..=4 {
        let scale = 10f64.powi(-e);
        let q = &gen_theorem3_family(&[0.5, 0.4, 0.25], &[vec![0.8, 0.4, 0.2]], scale, &[100.0])?[0];
        sto_ratios.push((scale, h2_sto(q)?[0] / h2_det(q)?[0]));
    }

    let refined = [4, 8, 16, 32]
        .into_iter()
        .map(|k| {
            let q = &gen_appendix_b5_family(k, 100.0)?[0];
            Ok((k, h2_det(q)?[0], refined_h_reward_ordered(q)?[0].h2))
        })
        .collect::<Result<_, Box<dyn Error>>>()?;

    Ok(Summary {
        det_family_size: fam.len(),
        det_lower_bound: lb.value,
        sto_ratios,
        refined,
    })
}

fn main() -> Result<(), Box<dyn Error>> {
    let s = run_example()?;
    println!(
        "deterministic family: {} instances, lower bound {:.3e}",
        s.det_family_size, s.det_lower_bound
    );
    for (scale, ratio) in &s.sto_ratios {
        println!("bernoulli scale {scale:>7}: H2sto / H2det = {ratio:.1}");
    }
    for (k, det, refined) in &s.refined {
        println!("K = {k:>2}: H2det = {det:>9.1}, refined H2 = {refined:.1}");
    }
    Ok(())
}
