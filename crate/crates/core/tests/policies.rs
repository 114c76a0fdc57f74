use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tenantshare_core::offline::offline_optimal_value;
use tenantshare_core::policies::{Lemma, ONLINE_POLICIES};
use tenantshare_core::workloads::{fuzz_loads, FuzzParams};
use tenantshare_core::{
    build_policy, run, Error, LoadMatrix, MonitorMode, PolicySpec, QueueState, RunOptions, SlaVector,
};

/// SLAs at or above the theory floor `2 epsilon / N`.
fn floored_sla(rng: &mut ChaCha8Rng, n: usize, eps: f64) -> SlaVector {
    let floor = 2.0 * eps / n as f64;
    let total = rng.random_range(0.8..=1.0);
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let s: f64 = raw.iter().sum();
    SlaVector::new(raw.iter().map(|r| floor + (total - n as f64 * floor) * r / s).collect()).unwrap()
}

fn spec(name: &str, eps: f64, eta: f64) -> PolicySpec {
    if name.starts_with("alg") {
        PolicySpec::new(name).with("epsilon", eps).with("eta", eta)
    } else {
        PolicySpec::new(name)
    }
}

#[test]
fn lemma_monitors_stay_silent_on_fuzz_loads() {
    let (eps, eta) = (0.1, 1.0 / 3.0);
    let mut checked = [0u64; 4];
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + seed as usize % 5;
        let sla = floored_sla(&mut rng, n, eps);
        let loads = fuzz_loads(&FuzzParams::balanced(n, 2000, seed)).unwrap();
        for name in ["alg1", "alg2"] {
            let mut p = build_policy(&spec(name, eps, eta), &sla, MonitorMode::Strict).unwrap();
            run(p.as_mut(), &mut loads.replay(), &sla, 2000, &RunOptions::default()).unwrap();
            let r = p.lemma_report().unwrap();
            assert_eq!(r.total_violations(), 0, "{name} seed {seed}: {:?}", r.first_violations);
            for (k, l) in [
                Lemma::UnderUtilizedBoost,
                Lemma::Monotone,
                Lemma::BelowSlaBoost,
                Lemma::SaturatedBoost,
            ]
            .into_iter()
            .enumerate()
            {
                checked[k] += r.checks(l);
            }
        }
    }
    // every lemma must actually have been exercised
    assert!(checked.iter().all(|&c| c > 0), "{checked:?}");
}

#[test]
fn non_mw_allocations_are_sub_stochastic() {
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let n = 2 + seed as usize % 5;
        let sla = floored_sla(&mut rng, n, 0.1);
        let loads = fuzz_loads(&FuzzParams::balanced(n, 2000, seed)).unwrap();
        for name in ["static", "po", "owm"] {
            let mut p = build_policy(&spec(name, 0.1, 0.3), &sla, MonitorMode::Off).unwrap();
            let tr = run(p.as_mut(), &mut loads.replay(), &sla, 2000, &RunOptions::default()).unwrap();
            for r in tr.records() {
                assert!(r.allocation.iter().all(|&h| h >= 0.0));
                assert!(r.allocation.iter().sum::<f64>() <= 1.0 + 1e-12);
                assert!(r.work.iter().sum::<f64>() <= r.allocation.iter().sum::<f64>() + 1e-12);
            }
            tr.check_conservation(1e-9).unwrap();
        }
    }
}

#[test]
fn owm_is_within_the_greedy_work_bound() {
    // work(OWM) + 2 N^2 / eps >= optimum with capacity 1 - 2 eps / N
    for seed in 0..20u64 {
        let n = 2 + seed as usize % 4;
        let loads = fuzz_loads(&FuzzParams::balanced(n, 3000, seed)).unwrap();
        let sla = SlaVector::uniform(n).unwrap();
        let mut p = build_policy(&PolicySpec::new("owm"), &sla, MonitorMode::Off).unwrap();
        let work = run(p.as_mut(), &mut loads.replay(), &sla, 3000, &RunOptions::default())
            .unwrap()
            .total_work();
        for eps in [0.05, 0.2, 0.5] {
            let nf = n as f64;
            let opt = offline_optimal_value(&loads, 2.0 * eps / nf).unwrap();
            assert!(work + 2.0 * nf * nf / eps >= opt, "seed {seed} eps {eps}");
        }
    }
}

#[test]
fn policies_see_only_the_active_set() {
    // Both queues start deep enough that neither empties within the horizon,
    // so all three load sequences produce the same feedback.
    let sla = SlaVector::new(vec![0.4, 0.6]).unwrap();
    let steps = 12;
    let sequences = [
        LoadMatrix::from_rows(vec![vec![0.5, 0.5]; steps]).unwrap(),
        LoadMatrix::from_rows(vec![vec![1.0, 0.0]; steps]).unwrap(),
        LoadMatrix::from_rows(vec![vec![0.0, 1.0]; steps]).unwrap(),
    ];
    let opts = RunOptions {
        initial_queue: Some(QueueState::new(vec![20.0, 20.0]).unwrap()),
        ..RunOptions::default()
    };
    for name in ONLINE_POLICIES {
        let traces: Vec<_> = sequences
            .iter()
            .map(|l| {
                let mut p = build_policy(&spec(name, 0.1, 0.3), &sla, MonitorMode::Off).unwrap();
                run(p.as_mut(), &mut l.replay(), &sla, steps, &opts).unwrap()
            })
            .collect();
        for k in 0..steps {
            let base = traces[0].record(k);
            assert!(base.active.iter().all(|&a| a));
            for other in &traces[1..] {
                let r = other.record(k);
                assert_eq!(base.active, r.active);
                assert_eq!(base.allocation, r.allocation, "{name} step {}", k + 1);
            }
        }
    }
}

#[test]
fn factory_errors_name_the_problem() {
    let sla = SlaVector::uniform(2).unwrap();
    let err = build_policy(&PolicySpec::new("mw"), &sla, MonitorMode::Off)
        .err()
        .unwrap();
    assert!(matches!(err, Error::Config(ref m) if m.contains("'mw'")));
    let err = build_policy(&PolicySpec::new("alg1").with("epsilon", 0.1), &sla, MonitorMode::Off)
        .err()
        .unwrap();
    assert!(err.to_string().contains("eta"));
    let err = build_policy(&PolicySpec::new("po").with("eta", 0.1), &sla, MonitorMode::Off)
        .err()
        .unwrap();
    assert!(err.to_string().contains("eta"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_policy_conserves_work(
        n in 2usize..=5,
        seed in any::<u64>(),
        p in 0.1f64..0.9,
        which in 0usize..5,
    ) {
        let steps = 300;
        let loads = fuzz_loads(&FuzzParams { n, steps, seed, p, mean: 1.0 }).unwrap();
        let sla = SlaVector::uniform(n).unwrap();
        let mut pol = build_policy(&spec(ONLINE_POLICIES[which], 0.1, 0.3), &sla, MonitorMode::Strict)
            .unwrap();
        let tr = run(pol.as_mut(), &mut loads.replay(), &sla, steps, &RunOptions::default()).unwrap();
        prop_assert!(tr.check_conservation(1e-9).is_ok());
        let opt = offline_optimal_value(&loads, 0.0).unwrap();
        prop_assert!(tr.total_work() <= opt + 1e-9);
        for r in tr.records() {
            for i in 0..n {
                prop_assert_eq!(r.active[i], tr.queue_before(r.t).unwrap()[i] > 1e-12);
            }
        }
    }
}
