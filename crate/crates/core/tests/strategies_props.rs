mod common;

use bairc::harness::{
    drive, estimate_failure, run_indexed_trial, trial_rng, DriveOptions, PullEvent, SimulatedEnv, FEASIBILITY_SLACK,
};
use bairc::model::Instance;
use bairc::strategies::{PolicyKind, PolicySpec, Shrr};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, k: usize, l: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    common::random_instance(&mut rng, k, l, (0.0, 120.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn shrr_feasible_and_conserves_ration(seed in any::<u64>(), k in 1usize..40, l in 1usize..4) {
        let inst = if k == 1 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let two = common::random_instance(&mut rng, 2, l, (0.0, 120.0));
            Instance::new(vec![two.arm(0).clone()], two.budgets().to_vec()).unwrap()
        } else {
            instance(seed, k, l)
        };
        let mut env = SimulatedEnv::new(&inst);
        let mut shrr = Shrr::new(inst.num_arms(), inst.budgets());
        let mut rng = trial_rng(seed, 0);
        let mut worst_excess = f64::NEG_INFINITY;
        let mut watch = |e: &PullEvent<'_>| {
            for (t, c) in e.totals.iter().zip(e.budgets) {
                worst_excess = worst_excess.max(t - c);
            }
        };
        let opts = DriveOptions { observer: Some(&mut watch), ..DriveOptions::default() };
        let res = drive(&mut env, inst.budgets(), &mut shrr, &mut rng, opts).unwrap();
        prop_assert!(res.feasible);
        prop_assert!(worst_excess <= FEASIBILITY_SLACK);

        let phases = shrr.num_phases() as f64;
        for l in 0..inst.num_resources() {
            let used: f64 = shrr.history().iter().map(|h| h.consumed[l]).sum();
            prop_assert!((used - res.consumption[l]).abs() <= 1e-9);
            if phases > 0.0 {
                // total use = C + Ration(0) - Ration(final)
                let c = inst.budgets()[l];
                let expected = c + c / phases - shrr.ration()[l];
                prop_assert!((used - expected).abs() <= 1e-9 * c.max(1.0), "{used} vs {expected}");
            }
        }
        for h in shrr.history() {
            prop_assert!(h.consumed.iter().zip(&h.ration).all(|(i, r)| *i <= r + FEASIBILITY_SLACK));
        }
    }

    #[test]
    fn shrr_round_robin_balanced(seed in any::<u64>(), k in 2usize..33) {
        let inst = instance(seed, k, 1);
        let mut env = SimulatedEnv::new(&inst);
        let mut shrr = Shrr::new(k, inst.budgets());
        let mut rng = trial_rng(seed, 1);
        let mut arms = Vec::new();
        let mut log = |e: &PullEvent<'_>| arms.push(e.arm);
        let opts = DriveOptions { observer: Some(&mut log), ..DriveOptions::default() };
        drive(&mut env, inst.budgets(), &mut shrr, &mut rng, opts).unwrap();
        let mut start = 0usize;
        for h in shrr.history() {
            let mut counts = vec![0u64; k];
            for &a in &arms[start..start + h.pulls as usize] {
                prop_assert!(h.survivors.contains(&a));
                counts[a] += 1;
            }
            let c: Vec<u64> = h.survivors.iter().map(|&a| counts[a]).collect();
            prop_assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
            start += h.pulls as usize;
        }
        prop_assert_eq!(start, arms.len());
    }

    #[test]
    fn baselines_overshoot_by_less_than_one(seed in any::<u64>(), k in 2usize..20, l in 1usize..4, p in 1usize..5) {
        let inst = instance(seed, k, l);
        let policy = PolicySpec::new(PolicyKind::ALL[p]);
        let r = run_indexed_trial(&inst, &policy, seed, 0).unwrap();
        prop_assert!(!r.feasible, "anytime policies only stop at a breach");
        prop_assert!(r.consumption.iter().zip(inst.budgets()).any(|(t, c)| t > c));
        for (t, c) in r.consumption.iter().zip(inst.budgets()) {
            prop_assert!(*t < c + 1.0 + 1e-12);
        }
        prop_assert_eq!(r.pulls.iter().sum::<u64>(), r.tau);
    }

    #[test]
    fn trials_are_deterministic(seed in any::<u64>(), k in 2usize..12, p in 0usize..5) {
        let inst = instance(seed, k, 2);
        let policy = PolicySpec::new(PolicyKind::ALL[p]);
        let a = run_indexed_trial(&inst, &policy, seed, 3).unwrap();
        let b = run_indexed_trial(&inst, &policy, seed, 3).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn failure_estimate_independent_of_thread_count() {
    let inst = instance(77, 12, 2);
    for kind in PolicyKind::ALL {
        let spec = PolicySpec::new(kind);
        let one = estimate_failure(&inst, &spec, 400, 9, 1).unwrap();
        let many = estimate_failure(&inst, &spec, 400, 9, 4).unwrap();
        assert_eq!(one, many, "{kind}");
    }
}

#[test]
fn shrr_learns_on_easy_instance() {
    use bairc::experiments::{gen_synthetic, ConsumptionKind, ConsumptionPattern, RewardShape, SetupSpec};
    let inst = gen_synthetic(&SetupSpec {
        reward_shape: RewardShape::Geometric,
        consumption_pattern: ConsumptionPattern::HighMatchLow,
        consumption_kind: ConsumptionKind::Deterministic,
        num_arms: 8,
        budgets: vec![25.0],
    })
    .unwrap();
    let shrr = estimate_failure(&inst, &PolicySpec::new(PolicyKind::Shrr), 2000, 1, 0).unwrap();
    let uniform = estimate_failure(&inst, &PolicySpec::new(PolicyKind::Uniform), 2000, 1, 0).unwrap();
    assert!(
        shrr.p_hat < 0.2 && shrr.ci_hi < uniform.ci_lo,
        "{shrr:?} vs {uniform:?}"
    );
}
