//! Randomized properties of the metric, the dynamics and the sampler,
//! checked against independent oracles.

use fluidq::dynamics::{simulate, simulate_fifo, simulate_sjf, simulate_srpt, Policy};
use fluidq::fluid::{self, SweepParams};
use fluidq::measure::{prohorov, prohorov_bruteforce, AtomicMeasure, Integrand, IntegrandSpec, Window};
use fluidq::par::Execution;
use fluidq::primitives::{quantize, sample_trace, DistributionSpec, ModelConfig, PrimitiveTrace};
use fluidq::rng::{child_seed, stream_seed, SplitMix64, STREAM_INTERARRIVAL};
use proptest::prelude::*;

fn measure(max_atoms: usize) -> impl Strategy<Value = AtomicMeasure> {
    // Quarter-grid locations so that distances repeat.
    prop::collection::vec((0u32..24, 1u32..12), 0..=max_atoms)
        .prop_map(|v| AtomicMeasure::from_atoms(v.into_iter().map(|(x, m)| (x as f64 * 0.25, m as f64 * 0.25))).unwrap())
}

fn trace() -> impl Strategy<Value = PrimitiveTrace> {
    let initial = prop::collection::vec(1u32..12, 0..6);
    let arrivals = prop::collection::vec((0u32..8, 1u32..12), 0..25);
    (initial, arrivals).prop_map(|(init, arr)| {
        let mut t = 0.0;
        let (mut epochs, mut sizes) = (Vec::new(), Vec::new());
        for (gap, size) in arr {
            t += gap as f64 * 0.25;
            epochs.push(t);
            sizes.push(size as f64 * 0.25);
        }
        PrimitiveTrace::new(init.into_iter().map(|s| s as f64 * 0.25).collect(), epochs, sizes).unwrap()
    })
}

/// Workload by the sup formula `W(t) = X(t) - min(0, inf_{s<=t} X(s))` with
/// `X(t) = W(0) + V(t) - t`, evaluated by brute force.
fn workload_oracle(trace: &PrimitiveTrace, t: f64) -> f64 {
    let w0: f64 = trace.initial_sizes.iter().sum();
    let v = |s: f64| -> f64 {
        trace.arrival_epochs.iter().zip(&trace.service_sizes).filter(|(a, _)| **a <= s).map(|(_, w)| w).sum()
    };
    let x = |s: f64| w0 + v(s) - s;
    // The infimum of X over [0, t] is attained at 0, t, or just before an arrival.
    let mut inf = x(0.0).min(x(t));
    for &a in trace.arrival_epochs.iter().filter(|&&a| a <= t) {
        let before: f64 = trace.arrival_epochs.iter().zip(&trace.service_sizes).filter(|(b, _)| **b < a).map(|(_, w)| w).sum();
        inf = inf.min(w0 + before - a);
    }
    x(t) - inf.min(0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prohorov_matches_bruteforce(a in measure(6), b in measure(6)) {
        let d = prohorov(&a, &b);
        let brute = prohorov_bruteforce(&a, &b).unwrap();
        prop_assert!((d - brute).abs() <= 1e-9, "flow {d} brute {brute}");
    }

    #[test]
    fn prohorov_is_a_metric(a in measure(6), b in measure(6), c in measure(6)) {
        let (ab, ba) = (prohorov(&a, &b), prohorov(&b, &a));
        prop_assert_eq!(ab, ba);
        prop_assert_eq!(prohorov(&a, &a), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(prohorov(&a, &c) <= ab + prohorov(&b, &c) + 1e-9);
        if a != b {
            prop_assert!(ab > 0.0);
        }
    }

    #[test]
    fn shift_moves_at_most_its_length(a in measure(6), h in 0u32..8) {
        let h = h as f64 * 0.125;
        prop_assert!(prohorov(&a, &a.shift(h)) <= h + 1e-12);
    }

    #[test]
    fn bounded_by_larger_mass(a in measure(6), b in measure(6)) {
        prop_assert!(prohorov(&a, &b) <= a.total_mass().max(b.total_mass()) + 1e-12);
    }

    #[test]
    fn integrals_are_additive_and_monotone(a in measure(6), b in measure(6), lo in 0u32..12, len in 0u32..12) {
        let (lo, hi) = (lo as f64 * 0.25, (lo + len) as f64 * 0.25);
        for g in [Integrand::One, Integrand::Chi, Integrand::ChiSquared] {
            let f = IntegrandSpec::new(g, Window::closed(lo, hi));
            let sum = a.integrate(&f) + b.integrate(&f);
            prop_assert!((a.add(&b).integrate(&f) - sum).abs() <= 1e-9 * (1.0 + sum));
            let wider = IntegrandSpec::new(g, Window::closed(0.0, hi + 1.0));
            prop_assert!(a.integrate(&f) <= a.integrate(&wider) + 1e-12);
            let scaled = a.scale_mass(3.0).integrate(&f);
            prop_assert!((scaled - 3.0 * a.integrate(&f)).abs() <= 1e-9 * (1.0 + scaled));
        }
    }

    #[test]
    fn dynamics_invariants(tr in trace(), h in 1u32..40) {
        let horizon = h as f64 * 0.5;
        for policy in Policy::ALL {
            let tl = simulate(&tr, horizon, policy).unwrap();
            let again = simulate(&tr, horizon, policy).unwrap();
            prop_assert_eq!(again.events(), tl.events());
            prop_assert_eq!(again.snapshots(), tl.snapshots());
            for s in tl.snapshots() {
                let oracle = workload_oracle(&tr, s.time);
                prop_assert!((s.workload - oracle).abs() <= 1e-9, "{policy} W({}) = {} vs {oracle}", s.time, s.workload);
                prop_assert!((s.service + s.idle - s.time).abs() <= 1e-9);
                let residuals = tl.residuals_at(s.time).unwrap();
                prop_assert!((residuals.iter().sum::<f64>() - s.workload).abs() <= 1e-9);
                prop_assert_eq!(residuals.iter().filter(|&&x| x > 0.0).count(), s.queue_length);
            }
            // The server never idles while work is present.
            for w in tl.snapshots().windows(2) {
                if w[0].workload > 0.0 {
                    prop_assert!(w[1].idle - w[0].idle <= 1e-9);
                }
            }
        }
        let fifo = simulate_fifo(&tr, horizon).unwrap();
        let done: Vec<f64> = fifo.jobs().iter().map(|j| j.completion).filter(|c| c.is_finite()).collect();
        prop_assert!(done.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn frontier_registries_agree(tr in trace(), h in 1u32..40) {
        let horizon = h as f64 * 0.5;
        let sjf = simulate_sjf(&tr, horizon).unwrap();
        let srpt = simulate_srpt(&tr, horizon).unwrap();
        prop_assert_eq!(sjf.frontier_records(), srpt.frontier_records());
        for s in sjf.snapshots() {
            prop_assert_eq!(sjf.frontier_at(s.time).unwrap(), srpt.frontier_at(s.time).unwrap());
            prop_assert!(srpt.queue_length_at(s.time).unwrap() <= s.queue_length);
        }
    }
}

fn model(interarrival: DistributionSpec, service: DistributionSpec, horizon: f64, seed: u64) -> ModelConfig {
    ModelConfig {
        interarrival,
        service: service.clone(),
        initial_density: 0.0,
        initial_size: service,
        horizon,
        base_seed: seed,
        first_gap: None,
    }
}

#[test]
fn exponential_epochs_follow_inverse_cdf() {
    let m = model(DistributionSpec::Exponential { rate: 2.5 }, DistributionSpec::Deterministic { value: 0.1 }, 20.0, 99);
    let tr = sample_trace(&m, 3.0, 4).unwrap();
    let mut rng = SplitMix64::new(stream_seed(child_seed(99, 3.0, 4), STREAM_INTERARRIVAL));
    let mut t = 0.0;
    for &a in &tr.arrival_epochs {
        let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        t += quantize(-(1.0 - u).ln() / 2.5);
        assert!((a - t).abs() <= 1e-12, "{a} vs {t}");
    }
    assert!(tr.arrival_epochs.len() > 100);
}

#[test]
fn renewal_counts_and_means() {
    // Mean-1 laws: sample means within 3 standard errors, arrival count within
    // 3 standard deviations of the renewal mean.
    let laws = [
        (DistributionSpec::Exponential { rate: 1.0 }, 1.0),
        (DistributionSpec::Uniform { lo: 0.5, hi: 1.5 }, 1.0 / 12.0),
        (DistributionSpec::Pareto { shape: 3.5, scale: 2.5 / 3.5 }, {
            let (a, x) = (3.5f64, 2.5f64 / 3.5);
            a * x * x / ((a - 1.0).powi(2) * (a - 2.0))
        }),
        (DistributionSpec::DiscreteAtoms { atoms: vec![(0.5, 0.5), (1.5, 0.5)] }, 0.25),
    ];
    for (law, var) in laws {
        let horizon = 20_000.0;
        let m = model(law.clone(), law.clone(), horizon, 5);
        let tr = sample_trace(&m, 1.0, 0).unwrap();
        let n = tr.arrival_epochs.len() as f64;
        let mean: f64 = tr.service_sizes.iter().sum::<f64>() / n;
        assert!((mean - 1.0).abs() <= 3.0 * (var / n).sqrt(), "{law:?}: mean {mean}");
        assert!((n - horizon).abs() <= 3.0 * (horizon * var).sqrt() + 1.0, "{law:?}: {n} arrivals");
    }
}

#[test]
fn deterministic_load_deviation_is_one_job() {
    let m = model(DistributionSpec::Deterministic { value: 1.0 }, DistributionSpec::Deterministic { value: 0.75 }, 8.0, 1);
    let rho = 0.75;
    for r in [1.0, 4.0, 32.0] {
        let tr = sample_trace(&m, r, 0).unwrap();
        let dev = fluid::load_deviation(&tr.arrival_epochs, &tr.service_sizes, r, rho, m.horizon);
        assert!(dev <= 0.75 / r + 1e-12, "r = {r}: {dev}");
        assert!(dev >= 0.75 / r - 1e-12);
    }
}

#[test]
fn epochs_only_raise_the_supremum() {
    let m = model(DistributionSpec::Exponential { rate: 1.0 }, DistributionSpec::Exponential { rate: 1.25 }, 6.0, 8);
    let grid_only = SweepParams { r_list: vec![3.0, 9.0], replicates: 3, h: Some(0.1), epoch_cap: 0, ..SweepParams::default() };
    let full = SweepParams { epoch_cap: usize::MAX, ..grid_only.clone() };
    let a = fluid::sweep(&m, &grid_only, Execution::Sequential).unwrap();
    let b = fluid::sweep(&m, &full, Execution::Sequential).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!(!x.epochs_included && y.epochs_included);
        assert!(x.sup_prohorov <= y.sup_prohorov);
        assert!(x.sup_below_frontier <= y.sup_below_frontier);
        assert!(x.points < y.points);
    }
}
