use degroot_core::dynamics::spread;
use degroot_core::empirical::improvement::{estimate, weighted_probability, Tally};
use degroot_core::empirical::BootstrapConfig;
use degroot_core::metrics::{
    crowd_error, crowd_error_change_from_alpha, diversity, individual_error,
};
use degroot_core::{
    asymptotic_consensus, degroot_step, generate, influence_centralization,
    leading_influence_vector, CentralityVector, CrowdStats, GeneratorParams, InfluenceMatrix,
    NetworkKind, PowerIterationOptions,
};
use proptest::prelude::*;

fn network(n: usize, seed: u64) -> InfluenceMatrix {
    generate(
        NetworkKind::RandomRowStochastic,
        n,
        seed,
        &GeneratorParams::default(),
    )
    .unwrap()
}

fn net_and_opinions() -> impl Strategy<Value = (InfluenceMatrix, Vec<f64>)> {
    (2usize..10, any::<u64>()).prop_flat_map(|(n, seed)| {
        (
            Just(network(n, seed)),
            prop::collection::vec(-50.0..50.0f64, n),
        )
    })
}

fn centrality_and_biases() -> impl Strategy<Value = (CentralityVector, Vec<f64>)> {
    (2usize..12).prop_flat_map(|n| {
        (
            prop::collection::vec(0.01..1.0f64, n),
            prop::collection::vec(-20.0..20.0f64, n),
        )
            .prop_map(|(w, e)| {
                let total: f64 = w.iter().sum();
                (
                    CentralityVector::new(w.iter().map(|x| x / total).collect()).unwrap(),
                    e,
                )
            })
    })
}

proptest! {
    #[test]
    fn step_never_widens_opinions((m, x) in net_and_opinions()) {
        let y = degroot_step(&m, &x).unwrap();
        prop_assert!(spread(&y) <= spread(&x) + 1e-12);
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(y.iter().all(|&v| v >= lo - 1e-12 && v <= hi + 1e-12));
    }

    #[test]
    fn consensus_is_shift_equivariant((m, x) in net_and_opinions(), c in -100.0..100.0f64) {
        let v = leading_influence_vector(&m, PowerIterationOptions::default()).unwrap();
        let shifted: Vec<f64> = x.iter().map(|a| a + c).collect();
        let a = asymptotic_consensus(&v, &x).unwrap();
        let b = asymptotic_consensus(&v, &shifted).unwrap();
        prop_assert!((b - a - c).abs() <= 1e-9);
    }

    #[test]
    fn influence_vector_is_stationary((m, _x) in net_and_opinions()) {
        let v = leading_influence_vector(&m, PowerIterationOptions::default()).unwrap();
        let n = m.n();
        let vs = v.as_slice();
        prop_assert!((vs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(vs.iter().all(|&p| p >= 0.0));
        for j in 0..n {
            let vw: f64 = (0..n).map(|i| vs[i] * m.weight(i, j)).sum();
            prop_assert!((vw - vs[j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn bias_shift_bounded_by_centralization((v, e) in centrality_and_biases()) {
        let Ok(s) = CrowdStats::compute(&v, &e) else { return Ok(()) };
        let cap = ((v.len() - 1) as f64).sqrt();
        prop_assert!(s.c_v >= 0.0 && s.c_v <= cap + 1e-12);
        prop_assert!(s.delta_z().abs() <= s.c_v + 1e-12);
        prop_assert!(s.alpha.abs() <= s.z.abs() * s.c_v * (1.0 + 1e-12) + 1e-15);
        prop_assert!((s.alpha - s.alpha_decomposed()).abs() <= 1e-9 * s.alpha.abs().max(1.0));
        // the dot product agrees with the standardized shift
        let shift = v.as_slice().iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() - s.mean_bias;
        prop_assert!((shift / s.s_e - s.delta_z()).abs() <= 1e-9 * s.delta_z().abs().max(1.0));
    }

    #[test]
    fn alpha_form_matches_correlation_form((v, e) in centrality_and_biases()) {
        let Ok(s) = CrowdStats::compute(&v, &e) else { return Ok(()) };
        prop_assume!(s.z.abs() > 1e-3);
        let via_alpha = crowd_error_change_from_alpha(s.alpha, s.z).unwrap();
        prop_assert!((via_alpha - s.crowd_change()).abs() <= 1e-8 * s.crowd_change().abs().max(1.0));
    }

    #[test]
    fn crowd_beats_averages(e in prop::collection::vec(-1e3..1e3f64, 1..30)) {
        let lhs = crowd_error(&e);
        let rhs = individual_error(&e) - diversity(&e);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * individual_error(&e).max(1e-300));
        prop_assert!(lhs <= individual_error(&e) * (1.0 + 1e-12));
    }

    #[test]
    fn duplicating_an_experiment_changes_nothing(
        rows in prop::collection::vec((0usize..3, 0usize..6, 1usize..6), 1..12),
        copies in 2usize..4,
    ) {
        let tallies: Vec<Tally> = rows
            .iter()
            .map(|&(x, s, extra)| Tally {
                experiment_id: format!("x{x}"),
                successes: s,
                eligible: s + extra,
            })
            .collect();
        let mut dup = tallies.clone();
        for t in tallies.iter().filter(|t| t.experiment_id == "x0") {
            for _ in 1..copies {
                dup.push(t.clone());
            }
        }
        let a = weighted_probability(&tallies).unwrap();
        let b = weighted_probability(&dup).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn estimates_are_probabilities(
        rows in prop::collection::vec((0usize..3, 0usize..6, 0usize..6), 1..10),
        seed in any::<u64>(),
    ) {
        let tallies: Vec<Tally> = rows
            .iter()
            .map(|&(x, s, extra)| Tally { experiment_id: format!("x{x}"), successes: s, eligible: s + extra })
            .collect();
        let est = estimate(&tallies, &BootstrapConfig { resamples: 100, level: 0.9, seed }).unwrap();
        match (est.probability, est.ci) {
            (Some(p), Some((lo, hi))) => {
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
            }
            (None, None) => prop_assert_eq!(est.eligible, 0),
            other => prop_assert!(false, "inconsistent estimate {:?}", other),
        }
    }
}

#[test]
fn uniform_centrality_is_zero() {
    for n in 2..20 {
        assert!(influence_centralization(&CentralityVector::uniform(n)).abs() < 1e-12);
    }
}
