mod common;

use bairc::complexity::{h1_det, h2_det, h2_sto, lower_bound_value_det, refined_h, refined_h_reward_ordered};
use bairc::experiments::{
    deterministic_laws, gen_appendix_b5_family, gen_figure1_pair, gen_theorem2_family, gen_theorem3_family,
    uniform_laws,
};
use bairc::harness::estimate_failure;
use bairc::model::DistributionSpec;
use bairc::strategies::{PolicyKind, PolicySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn theorem2_family_structure_randomized() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 0..200 {
        let k = rng.random_range(2..=10);
        let l = rng.random_range(1..=3);
        let mut r = vec![0.5];
        r.extend((1..k).map(|_| common::dyadic(&mut rng, 1.0 / 1024.0, 511.0 / 1024.0)));
        r[1..].sort_by(|a, b| b.total_cmp(a));
        let consumption: Vec<Vec<DistributionSpec>> = (0..l)
            .map(|_| {
                let mut d: Vec<f64> = (0..k).map(|_| common::dyadic(&mut rng, 1.0 / 1024.0, 0.5)).collect();
                d.sort_by(|a, b| b.total_cmp(a));
                if n % 2 == 0 {
                    deterministic_laws(&d)
                } else {
                    uniform_laws(&d)
                }
            })
            .collect();
        let budgets: Vec<f64> = (0..l).map(|_| rng.random_range(1.0..500.0)).collect();
        let fam = gen_theorem2_family(&r, &consumption, &budgets).unwrap();
        assert_eq!(fam.len(), k);
        let h1_first = h1_det(&fam[0]).unwrap();
        let h2_first = h2_det(&fam[0]).unwrap();
        for (i, q) in fam.iter().enumerate() {
            assert_eq!(q.best_arm(), i);
            for arm in 0..k {
                assert_eq!(q.arm(arm).consumption, fam[0].arm(arm).consumption);
            }
            let h1 = h1_det(q).unwrap();
            let h2 = h2_det(q).unwrap();
            for j in 0..l {
                assert!(h1[j] <= h1_first[j]);
                assert!(h2[j] <= h2_first[j]);
            }
        }
        let lb = lower_bound_value_det(&fam[0]).unwrap();
        assert!(lb.value >= 0.0 && lb.value <= 1.0 / 6.0);
    }
}

#[test]
fn theorem3_stochastic_complexity_grows_as_scale_shrinks() {
    let r = [0.5, 0.4, 0.25];
    let base = vec![vec![0.8, 0.4, 0.2]];
    let mut last = 0.0;
    for e in 1..=5 {
        let c = 10f64.powi(-e);
        let fam = gen_theorem3_family(&r, &base, c, &[100.0]).unwrap();
        let ratio = h2_sto(&fam[0]).unwrap()[0] / h2_det(&fam[0]).unwrap()[0];
        assert!(ratio > last, "c = {c}: {ratio}");
        last = ratio;
        for q in &fam {
            for arm in 0..3 {
                assert_eq!(q.arm(arm).consumption, fam[0].arm(arm).consumption);
            }
        }
    }
    assert!(last > 100.0);
}

#[test]
fn b5_family_refined_values() {
    for k in 4..=12 {
        let fam = gen_appendix_b5_family(k, 50.0).unwrap();
        let first = refined_h(&fam[0]).unwrap()[0];
        assert!(common::rel_close(first.h2, 32.0, 1e-9), "K={k}: {}", first.h2);
        assert!(common::rel_close(first.h1, 16.0 * k as f64, 1e-9));
        for q in &fam {
            assert!(refined_h_reward_ordered(q).unwrap()[0].h2 <= 32.0 * (1.0 + 1e-9));
        }
        // the worst-case H2det keeps growing with K while the refined one stays at 32
        assert!(h2_det(&fam[0]).unwrap()[0] > 32.0);
    }
    assert!(gen_appendix_b5_family(1, 1.0).is_err());
}

/// Exact SH-RR failure rates on the figure-1 pair (budget 2, one phase):
/// binomial sums over the deterministic pull count, and over the negative
/// binomial pull count for Bernoulli consumption.
#[test]
fn figure1_simulation_matches_exact_rates() {
    let cases = [
        (0.5, 0.3, 0.274_760_094_745_384_5),
        (0.0625, 0.345_768_32, 0.262_771_181_984_638_8),
    ];
    let n = 100_000;
    for (d, det_exact, sto_exact) in cases {
        let (det, sto) = gen_figure1_pair(d).unwrap();
        for (inst, exact) in [(det, det_exact), (sto, sto_exact)] {
            let s = estimate_failure(&inst, &PolicySpec::new(PolicyKind::Shrr), n, 31, 0).unwrap();
            let se = (exact * (1.0 - exact) / n as f64).sqrt();
            assert!((s.p_hat - exact).abs() <= 4.0 * se, "d={d}: {} vs {exact}", s.p_hat);
        }
    }
}
