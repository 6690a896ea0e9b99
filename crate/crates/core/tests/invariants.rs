use proptest::prelude::*;

use lossy_boson::network::{build_random, build_reck, extract_losses, shortest_paths};
use lossy_boson::oracle::{dilated_lossy_distribution, exact_distribution, tv_distance};
use lossy_boson::sampler::{evaluation_bound, shot_rng, Sampler};
use lossy_boson::{
    default_strategy, permanent_repeated, ExtractionResult, LossyNetwork, OccupationVector, PipelineConfig,
    UnbalancedSimulation, UnitaryMatrix,
};

fn occupation(max_modes: usize, max_photons: usize) -> impl Strategy<Value = OccupationVector> {
    (1..=max_modes)
        .prop_flat_map(move |m| proptest::collection::vec(0..=max_photons, m))
        .prop_filter("photon budget", move |v| v.iter().sum::<usize>() <= max_photons)
        .prop_map(|v| OccupationVector::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_conserve_photons_and_report_exact_probabilities(s in occupation(5, 4), seed in any::<u64>()) {
        let u = UnitaryMatrix::seeded(s.modes(), seed);
        let sampler = Sampler::new(&u, &s).unwrap();
        let out = sampler.draw(&mut shot_rng(seed, 0)).unwrap();
        prop_assert_eq!(out.outcome.photons(), s.photons());
        prop_assert_eq!(out.permanent_evaluations as u128, evaluation_bound(&s));
        let exact = exact_distribution(&u, &s).unwrap();
        let p = exact.probability(&out.outcome);
        prop_assert!(p > 0.0);
        prop_assert!((out.probability - p).abs() <= 1e-9 * p.max(1e-12));
    }

    #[test]
    fn permanent_is_invariant_under_transposition(s in occupation(5, 5), seed in any::<u64>()) {
        let u = UnitaryMatrix::seeded(s.modes(), seed);
        let mut t = vec![0; s.modes()];
        t[(seed as usize) % s.modes()] = s.photons();
        let t = OccupationVector::new(t).unwrap();
        let a = permanent_repeated(&u, &s, &t).unwrap();
        let b = permanent_repeated(&u.transpose(), &t, &s).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn extraction_preserves_the_channel(m in 2usize..=4, elements in 1usize..=4, seed in any::<u64>(), n in 1usize..=3) {
        let net = build_random(m, elements, 0.25, seed).unwrap();
        let mut input = vec![0; m];
        for k in 0..n {
            input[(seed as usize + k) % m] += 1;
        }
        let input = OccupationVector::new(input).unwrap();
        let extracted = extract_losses(&net).unwrap();
        prop_assert!(extracted.front.as_slice().iter().all(|&f| f > 0.0 && f <= 1.0));
        let a = dilated_lossy_distribution(&net, &input).unwrap();
        let b = dilated_lossy_distribution(&extracted.as_network().unwrap(), &input).unwrap();
        prop_assert!(tv_distance(&a, &b) < 1e-9);
    }

    #[test]
    fn network_files_round_trip(m in 2usize..=6, elements in 0usize..=10, seed in any::<u64>()) {
        let net = build_random(m, elements, 0.1, seed).unwrap();
        let text = net.to_json();
        let back = LossyNetwork::from_json(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.to_json(), text);
        let ext = extract_losses(&net).unwrap();
        let reread = ExtractionResult::from_json(&ext.to_json()).unwrap();
        prop_assert_eq!(reread.front, ext.front);
        prop_assert_eq!(reread.residual, ext.residual);
    }
}

#[test]
fn uniform_reck_front_is_a_power_of_eta() {
    for m in 2..=7 {
        let eta = 0.9;
        let net = build_reck(m, eta, 5).unwrap();
        let ext = extract_losses(&net).unwrap();
        let paths = shortest_paths(&net);
        for (f, &s) in ext.front.as_slice().iter().zip(&paths) {
            assert!((f - eta.powi(s as i32)).abs() < 1e-15);
        }
    }
}

#[test]
fn pipeline_is_reproducible_and_keeps_photon_budget() {
    let net = build_reck(5, 0.7, 8).unwrap();
    let input = OccupationVector::standard(3, 5).unwrap();
    let sim = UnbalancedSimulation::prepare(&net, &input, default_strategy(), &PipelineConfig::default()).unwrap();
    let a = sim.run(300, 1).unwrap();
    assert_eq!(a, sim.run(300, 1).unwrap());
    assert_ne!(a, sim.run(300, 2).unwrap());
    for shot in &a {
        assert!(shot.system.photons() <= input.photons());
        assert_eq!(shot.sample.outcome.photons(), shot.emitted.photons());
    }
}

#[test]
fn lossless_network_gets_the_exact_certificate() {
    let net = build_reck(4, 1.0, 3).unwrap();
    let input = OccupationVector::standard(2, 4).unwrap();
    let sim = UnbalancedSimulation::prepare(&net, &input, default_strategy(), &PipelineConfig::default()).unwrap();
    let cert = sim.certificate();
    assert_eq!(cert.delta, 0.0);
    assert_eq!(cert.strategy, "exact");
    assert_eq!(cert.c_threshold, None);
}
