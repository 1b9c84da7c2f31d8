//! Noiseless periodic sequences are exactly representable: once growth has
//! stopped, prediction must reproduce the cycle.

use gwrnet::{split_window, GwrParams, PredictiveGwr, PredictiveGwrNetwork, RegressorSample};
use proptest::prelude::*;

const PERIOD_4: [f64; 4] = [0.0, 1.0, 0.5, -1.0];
const PERIOD_7: [f64; 7] = [0.0, 0.8, 0.3, -0.5, 1.0, -0.9, 0.4];

/// Index of `cycle[t - back]`, wrapping around.
fn at(t: usize, back: usize, n: usize) -> usize {
    (t as isize - back as isize).rem_euclid(n as isize) as usize
}

/// Every distinct window of the cycle, newest first.
fn windows(cycle: &[f64], p: usize, steps: usize) -> Vec<RegressorSample<f64>> {
    let n = cycle.len();
    (0..n)
        .map(|t| {
            let w: Vec<f64> = (0..p + steps).map(|j| cycle[at(t, j, n)]).collect();
            split_window(&w, p, steps, 1).unwrap()
        })
        .collect()
}

/// Trains until `quiet` consecutive epochs pass without any insertion or
/// removal, then returns the number of epochs used.
fn train_to_saturation(net: &mut PredictiveGwr, samples: &[RegressorSample<f64>], quiet: usize) -> usize {
    let mut calm = 0;
    for epoch in 1..=20_000 {
        let mut changed = false;
        for s in samples {
            let r = net.train_step(s).unwrap();
            changed |= r.inserted.is_some() || r.removed_neurons > 0;
        }
        calm = if changed { 0 } else { calm + 1 };
        if calm >= quiet {
            return epoch;
        }
    }
    panic!("growth never stopped");
}

fn trained(cycle: &[f64], p: usize, steps: usize) -> (PredictiveGwr, Vec<RegressorSample<f64>>) {
    let samples = windows(cycle, p, steps);
    let mut net =
        PredictiveGwrNetwork::init(&samples[0], &samples[1], p, 1, steps, GwrParams::default()).unwrap();
    train_to_saturation(&mut net, &samples, 1000);
    (net, samples)
}

fn check_cycle(cycle: &[f64], p: usize) {
    let (net, samples) = trained(cycle, p, 1);
    let (mse, mae) = net.prediction_error(&samples).unwrap();
    assert!(mse < 1e-6, "period {}: one-step mse {mse}", cycle.len());
    assert!(mae < 1e-3);
    let n = cycle.len();
    for t in 0..n {
        let x_in: Vec<f64> = (0..p).map(|j| cycle[at(t, j, n)]).collect();
        let preds = net.predict_recursive(&x_in, 8).unwrap();
        for (k, pred) in preds.iter().enumerate() {
            let truth = cycle[(t + k + 1) % n];
            assert!((pred[0] - truth).abs() < 1e-3, "t {t} step {k}");
            assert!((pred[0] - truth).powi(2) < 1e-6);
        }
        assert_eq!(preds[0], net.predict_one(&x_in).unwrap());
    }
}

#[test]
fn period_four_is_reproduced() {
    check_cycle(&PERIOD_4, 2);
}

#[test]
fn period_seven_is_reproduced() {
    check_cycle(&PERIOD_7, 2);
}

#[test]
fn vector_mode_reproduces_two_periods() {
    let (net, samples) = trained(&PERIOD_4, 2, 8);
    for s in &samples {
        let out = net.predict_vector(&s.x_in).unwrap();
        assert_eq!(out.len(), 8);
        for (pred, truth) in out.iter().zip(s.x_out.iter()) {
            assert!((pred[0] - truth).abs() < 1e-3);
        }
    }
    assert!(net.predict_recursive(&samples[0].x_in, 2).is_err());
}

#[test]
fn growth_beats_a_two_neuron_network() {
    let samples = windows(&PERIOD_7, 2, 1);
    let capped = GwrParams {
        max_neurons: Some(2),
        ..GwrParams::default()
    };
    let mut small = PredictiveGwrNetwork::init(&samples[0], &samples[1], 2, 1, 1, capped).unwrap();
    let (grown, _) = trained(&PERIOD_7, 2, 1);
    for _ in 0..2000 {
        for s in &samples {
            small.train_step(s).unwrap();
        }
    }
    assert_eq!(small.len(), 2);
    let (mse_small, _) = small.prediction_error(&samples).unwrap();
    let (mse_grown, _) = grown.prediction_error(&samples).unwrap();
    assert!(mse_grown <= mse_small, "{mse_grown} vs {mse_small}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Two-pass accumulation oracle for the error metrics.
    #[test]
    fn prediction_error_matches_naive_sums(
        xs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..20),
    ) {
        let (net, _) = trained(&PERIOD_4, 2, 1);
        let samples: Vec<RegressorSample<f64>> = xs
            .iter()
            .map(|v| RegressorSample { x_in: v[..2].to_vec(), x_out: v[2..].to_vec() })
            .collect();
        let (mse, mae) = net.prediction_error(&samples).unwrap();
        let preds: Vec<f64> = samples.iter().map(|s| net.predict_one(&s.x_in).unwrap()[0]).collect();
        let sq: Vec<f64> = preds.iter().zip(&samples).map(|(p, s)| (p - s.x_out[0]).powi(2)).collect();
        let ab: Vec<f64> = preds.iter().zip(&samples).map(|(p, s)| (p - s.x_out[0]).abs()).collect();
        prop_assert!((mse - sq.iter().sum::<f64>() / sq.len() as f64).abs() < 1e-12);
        prop_assert!((mae - ab.iter().sum::<f64>() / ab.len() as f64).abs() < 1e-12);
        prop_assert!(mse >= 0.0);
        if mse == 0.0 { prop_assert_eq!(mae, 0.0); }
    }
}
