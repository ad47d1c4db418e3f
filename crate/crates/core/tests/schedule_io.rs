//! Schedule compilation, simulation and serialization.

use perthro::circuit::{Circuit, Head};
use perthro::pulse::{CalibrationResult, ExcitationModel, GaussianPulse};
use perthro::rng::seeded;
use perthro::schedule::{
    compile_batch, compile_schedule, simulate_schedule, verify_schedule, wrap_amplitude, PulseSchedule,
    MAX_PULSES_PER_TRAIN,
};
use perthro::{qubit, Execution};
use proptest::prelude::*;
use rand::Rng;

fn calibration() -> CalibrationResult {
    CalibrationResult {
        resonant_frequency_hz: Some(4.97e9),
        pi_amplitude: 1.0,
        fit: ExcitationModel::default(),
        residual: 0.0,
    }
}

fn random_circuit(seed: u64) -> (Circuit, Vec<f64>) {
    let mut rng = seeded(seed);
    let inputs = rng.random_range(1..6);
    let depth = rng.random_range(1..4);
    let pulses: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=16)).collect();
    let c = Circuit::random(inputs, &pulses, Head::Identity, 3.0, &mut rng).unwrap();
    let x = (0..inputs).map(|_| rng.random_range(-2.0..2.0)).collect();
    (c, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chunked_schedule_reproduces_forward(seed in any::<u64>()) {
        let (c, x) = random_circuit(seed);
        let sched = compile_schedule(&c, &x, Some(&calibration()), &GaussianPulse::default()).unwrap();
        for block in &sched.blocks {
            for train in &block.trains {
                prop_assert!((1..=MAX_PULSES_PER_TRAIN).contains(&train.amplitudes.len()));
                prop_assert!(train.amplitudes.iter().all(|a| (0.0..2.0).contains(a)));
            }
        }
        let worst = verify_schedule(&sched, &c, &x, Some(&calibration())).unwrap();
        prop_assert!(worst <= 1e-12);
    }

    #[test]
    fn wrapping_preserves_probability(a in -50.0f64..50.0) {
        let w = wrap_amplitude(a);
        prop_assert!((0.0..2.0).contains(&w));
        let p = qubit::probability_excited(a).unwrap();
        let q = qubit::probability_excited(w).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
    }

    #[test]
    fn json_round_trip_is_byte_identical(seed in any::<u64>()) {
        let (c, x) = random_circuit(seed);
        let sched = compile_schedule(&c, &x, Some(&calibration()), &GaussianPulse::default()).unwrap();
        let text = sched.to_json().unwrap();
        let again = PulseSchedule::from_json(&text).unwrap().to_json().unwrap();
        prop_assert_eq!(text, again);
    }
}

#[test]
fn reset_markers_follow_block_sizes() {
    let mut rng = seeded(3);
    let c = Circuit::random(4, &[6, 12, 3], Head::Softmax { num_classes: 3 }, 0.5, &mut rng).unwrap();
    let sched = compile_schedule(
        &c,
        &[0.1, 0.2, 0.3, 0.4],
        Some(&calibration()),
        &GaussianPulse::default(),
    )
    .unwrap();
    let resets: Vec<usize> = sched.blocks.iter().map(|b| b.reset_count()).collect();
    assert_eq!(resets, vec![1, 2, 0]);
    let trains: Vec<Vec<usize>> = sched
        .blocks
        .iter()
        .map(|b| b.trains.iter().map(|t| t.amplitudes.len()).collect())
        .collect();
    assert_eq!(trains, vec![vec![4, 2], vec![4, 4, 4], vec![3]]);
    assert_eq!(simulate_schedule(&sched).unwrap().len(), 3);
}

#[test]
fn batch_compilation_matches_per_sample_in_both_modes() {
    let (c, _) = random_circuit(9);
    let inputs: Vec<Vec<f64>> = (0..20)
        .map(|k| (0..c.input_dim()).map(|j| ((k * 7 + j) as f64).sin()).collect())
        .collect();
    let cal = calibration();
    let tpl = GaussianPulse::default();
    let seq = compile_batch(&c, &inputs, Some(&cal), &tpl, Execution::Sequential).unwrap();
    let par = compile_batch(&c, &inputs, Some(&cal), &tpl, Execution::Parallel).unwrap();
    assert_eq!(seq, par);
    for (x, s) in inputs.iter().zip(&seq) {
        assert_eq!(s, &compile_schedule(&c, x, Some(&cal), &tpl).unwrap());
    }
}

#[test]
fn tampered_amplitude_fails_verification() {
    let (c, x) = random_circuit(21);
    let mut sched = compile_schedule(&c, &x, Some(&calibration()), &GaussianPulse::default()).unwrap();
    let a = &mut sched.blocks[0].trains[0].amplitudes[0];
    *a = wrap_amplitude(*a + 0.3);
    assert!(verify_schedule(&sched, &c, &x, None).is_err());
}
