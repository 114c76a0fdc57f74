use proptest::prelude::*;
use tenantshare_core::metrics::{
    cumulative_work, default_window_stride, queue_comparison, queue_two_norm, sla_window_stats, work_difference,
};
use tenantshare_core::policies::{MwPolicy, MwVariant, StaticPolicy};
use tenantshare_core::workloads::{fuzz_loads, FuzzParams};
use tenantshare_core::{
    build_policy, run, LoadMatrix, MonitorMode, PolicyParams, PolicySpec, QueueState, RunOptions, SimulationTrace,
    SlaVector,
};

fn run_named(name: &str, loads: &LoadMatrix, sla: &SlaVector) -> SimulationTrace {
    let spec = if name.starts_with("alg") {
        PolicySpec::new(name).with("epsilon", 0.1).with("eta", 0.3)
    } else {
        PolicySpec::new(name)
    };
    let mut p = build_policy(&spec, sla, MonitorMode::Off).unwrap();
    run(
        p.as_mut(),
        &mut loads.replay(),
        sla,
        loads.steps(),
        &RunOptions::default(),
    )
    .unwrap()
}

#[test]
fn window_statistic_matches_engine_replay() {
    let sla = SlaVector::new(vec![0.2, 0.3, 0.5]).unwrap();
    let loads = fuzz_loads(&FuzzParams::balanced(3, 400, 3)).unwrap();
    let tr = run_named("alg2", &loads, &sla);
    let tau = 50;
    let stats = sla_window_stats(&tr, &loads, &sla, tau, 37).unwrap();
    assert_eq!(stats.t.last().copied(), Some(1 + 37 * 9));
    for (k, &start) in stats.t.iter().enumerate() {
        let rows: Vec<Vec<f64>> = (start - 1..start - 1 + tau).map(|s| loads.row(s).to_vec()).collect();
        let window = LoadMatrix::from_rows(rows).unwrap();
        let opts = RunOptions {
            initial_queue: Some(QueueState::new(tr.queue_before(start).unwrap().to_vec()).unwrap()),
            ..RunOptions::default()
        };
        let mut p = StaticPolicy::new(sla.clone());
        let st = run(&mut p, &mut window.replay(), &sla, tau, &opts).unwrap();
        for i in 0..3 {
            let alg: f64 = (start..start + tau).map(|s| tr.record(s - 1).work[i]).sum();
            let want = st.work_per_user()[i] - alg;
            assert!((stats.row(k)[i] - want).abs() < 1e-9, "start {start} user {i}");
        }
    }
}

#[test]
fn full_window_equals_total_difference() {
    let sla = SlaVector::new(vec![0.2, 0.3, 0.5]).unwrap();
    let loads = fuzz_loads(&FuzzParams::balanced(3, 500, 8)).unwrap();
    let tr = run_named("alg1", &loads, &sla);
    let st = run_named("static", &loads, &sla);
    let stats = sla_window_stats(&tr, &loads, &sla, 500, 500).unwrap();
    assert_eq!(stats.t, vec![1]);
    for i in 0..3 {
        let want = st.work_per_user()[i] - tr.work_per_user()[i];
        assert!((stats.row(0)[i] - want).abs() < 1e-9);
    }
}

#[test]
fn default_stride_bounds_window_count() {
    assert_eq!(default_window_stride(20_000), 1);
    assert_eq!(default_window_stride(20_001), 2);
    assert_eq!(default_window_stride(3_000_000), 150);
}

#[test]
fn queue_comparison_within_implied_constant() {
    for steps in [10_000usize, 100_000] {
        let eps = (steps as f64).powf(-0.25);
        let sla = SlaVector::new(vec![0.3, 0.3, 0.4]).unwrap();
        let loads = fuzz_loads(&FuzzParams::balanced(3, steps, 21)).unwrap();
        let params = PolicyParams::new(eps, 0.3, 3).unwrap();
        let mut alg = MwPolicy::new(sla.clone(), params, MwVariant::Basic).unwrap();
        let opts = RunOptions {
            stride: 100,
            ..RunOptions::default()
        };
        let a = run(&mut alg, &mut loads.replay(), &sla, steps, &opts).unwrap();
        let mut st = StaticPolicy::new(sla.clone());
        let b = run(&mut st, &mut loads.replay(), &sla, steps, &opts).unwrap();
        let cmp = queue_comparison(&a, &b, &sla, eps, 0.3).unwrap();
        assert!(cmp.within_bound(), "{cmp:?}");
        assert!(cmp.c_fit <= cmp.c_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_invariants(seed in any::<u64>(), n in 2usize..=4, a in 0usize..5, b in 0usize..5) {
        let names = ["alg1", "alg2", "static", "po", "owm"];
        let sla = SlaVector::uniform(n).unwrap();
        let loads = fuzz_loads(&FuzzParams::balanced(n, 200, seed)).unwrap();
        let ta = run_named(names[a], &loads, &sla);
        let tb = run_named(names[b], &loads, &sla);

        let cw = cumulative_work(&ta);
        let done = cw.last().unwrap() + ta.final_queue().total();
        prop_assert!((done - loads.total()).abs() <= 1e-9 * loads.total().max(1.0));

        let ab = work_difference(&ta, &tb).unwrap();
        let ba = work_difference(&tb, &ta).unwrap();
        prop_assert!(ab.values.iter().zip(&ba.values).all(|(x, y)| *x == -*y));

        let qn = queue_two_norm(&ta);
        prop_assert_eq!(qn.values.len(), ta.len());
        let (mn, mx, mean) = (
            qn.values.iter().copied().fold(f64::INFINITY, f64::min),
            qn.max().unwrap(),
            qn.mean().unwrap(),
        );
        prop_assert!(mn <= mean + 1e-12 && mean <= mx + 1e-12);

        let stats = sla_window_stats(&ta, &loads, &sla, 20, 7).unwrap();
        for s in &stats.per_user {
            prop_assert!(s.min <= s.mean + 1e-12 && s.mean <= s.max + 1e-12 && s.std >= 0.0);
        }
    }
}
