//! Qubit and block invariants checked on sampled inputs.

use perthro::qubit::{self, MeasurementConfig, QubitState};
use perthro::rng::seeded;
use perthro::PerthroBlock;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn probability_has_period_two(a in -20.0f64..20.0, k in -6i32..=6) {
        let p = qubit::probability_excited(a).unwrap();
        let q = qubit::probability_excited(a + 2.0 * f64::from(k)).unwrap();
        prop_assert!((p - q).abs() <= TOL);
    }

    #[test]
    fn ground_and_excited_are_complementary(a in -20.0f64..20.0) {
        let s = qubit::probability_excited(a).unwrap() + qubit::probability_ground(a).unwrap();
        prop_assert!((s - 1.0).abs() <= TOL);
    }

    #[test]
    fn pulse_sequences_compose_additively(amps in prop::collection::vec(-3.0f64..3.0, 1..10)) {
        let mut state = QubitState::ground();
        for &a in &amps {
            state = state.apply_pulse(a).unwrap();
        }
        let total: f64 = amps.iter().sum();
        let direct = qubit::probability_excited(total).unwrap();
        prop_assert!((state.probability_excited() - direct).abs() <= TOL);
    }

    #[test]
    fn states_stay_normalised(theta in -10.0f64..10.0, phi in -10.0f64..10.0, a in -5.0f64..5.0) {
        let s = QubitState::from_angles(theta, phi).unwrap().apply_pulse(a).unwrap();
        let (alpha, beta) = s.amplitudes();
        prop_assert!((alpha.norm_sqr() + beta.norm_sqr() - 1.0).abs() <= TOL);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&s.theta()));
        prop_assert!((0.0..std::f64::consts::TAU).contains(&s.phi()));
    }

    #[test]
    fn block_forward_matches_pulse_simulation(seed in any::<u64>(), n in 1usize..12, d in 1usize..6) {
        let mut rng = seeded(seed);
        let block = PerthroBlock::random(n, d, 2.0, &mut rng).unwrap();
        let x: Vec<f64> = (0..d).map(|k| (k as f64 * 0.37 + seed as f64 * 1e-19).sin()).collect();
        let direct = block.forward(&x).unwrap();
        let played = block.forward_via_pulse_sim(&x).unwrap();
        for (a, b) in direct.output.iter().zip(&played) {
            prop_assert!((a - b).abs() <= TOL);
        }
        for z in &direct.output {
            prop_assert!((0.0..=1.0).contains(z));
        }
        // The cumulative phase before pulse i is the sum of earlier pre-activations.
        let pre = block.preactivations(&x).unwrap();
        let mut acc = 0.0;
        for (i, s) in pre.iter().enumerate() {
            prop_assert!((direct.rho[i] - acc).abs() <= TOL);
            acc += s;
        }
    }
}

#[test]
fn shot_estimates_are_within_four_sigma() {
    let shots = 10_000u32;
    for (k, p) in [0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0]
        .into_iter()
        .enumerate()
    {
        let cfg = MeasurementConfig::with_shots(shots, 1000 + k as u64);
        let est = qubit::sample_shots(p, &cfg).unwrap().estimate;
        let bound = 4.0 * (p * (1.0 - p) / f64::from(shots)).sqrt();
        assert!((est - p).abs() <= bound, "p={p}: estimate {est}, bound {bound}");
    }
}

#[test]
fn pulse_order_matters_for_all_but_the_last_output() {
    let block = PerthroBlock::from_rows(&[vec![0.3], vec![1.1], vec![-0.4]], vec![0.0; 3]).unwrap();
    let swapped = PerthroBlock::from_rows(&[vec![1.1], vec![0.3], vec![-0.4]], vec![0.0; 3]).unwrap();
    let a = block.forward(&[1.0]).unwrap().output;
    let b = swapped.forward(&[1.0]).unwrap().output;
    assert!((a[0] - b[0]).abs() > 1e-3);
    assert!((a[2] - b[2]).abs() <= TOL);
}
