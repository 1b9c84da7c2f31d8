use gwrnet::data::{self, corrupt_dropout, generate_synthetic, MotionSequence, SyntheticSpec, DEFAULT_SUITE};
use gwrnet::{
    GwrF32, GwrNetwork, GwrParams, Hierarchy, HierarchyConfig, PredictiveGwr, PredictiveGwrNetwork,
    RegressorSample, WindowEncoder,
};
use proptest::prelude::*;

fn short_config() -> HierarchyConfig {
    HierarchyConfig {
        tau1: 2,
        tau2: 3,
        ..HierarchyConfig::default()
    }
}

fn demo(pattern: usize, seed: u64) -> MotionSequence<f64> {
    let mut spec = SyntheticSpec::new(DEFAULT_SUITE[pattern], seed);
    spec.duration_s = 6.0;
    spec.noise_std = 0.01;
    generate_synthetic(&spec).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gwr_snapshots_are_lossless(seed in any::<u64>(), steps in 0usize..300) {
        let mut x = seed;
        let mut next = move || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (x >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let mut net = GwrNetwork::init(&[next(), next()], &[next(), next()], GwrParams::default()).unwrap();
        for _ in 0..steps {
            net.train_step(&[next(), next()]).unwrap();
        }
        let text = net.to_snapshot();
        let back = GwrNetwork::<f64>::from_snapshot(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.to_snapshot(), text);

        let single: GwrF32 = GwrNetwork::init(&[next() as f32], &[next() as f32], GwrParams::default()).unwrap();
        prop_assert_eq!(GwrF32::from_snapshot(&single.to_snapshot()).unwrap(), single);
    }

    #[test]
    fn predictive_snapshots_are_lossless(values in prop::collection::vec(-3.0f64..3.0, 12..60)) {
        let samples: Vec<RegressorSample<f64>> = values
            .windows(3)
            .map(|w| RegressorSample { x_in: vec![w[1], w[0]], x_out: vec![w[2]] })
            .collect();
        let mut net = PredictiveGwrNetwork::init(&samples[0], &samples[1], 2, 1, 1, GwrParams::default()).unwrap();
        for s in &samples {
            net.train_step(s).unwrap();
        }
        let back = PredictiveGwr::from_snapshot(&net.to_snapshot()).unwrap();
        prop_assert_eq!(back, net);
    }
}

#[test]
fn hierarchy_archive_round_trip_preserves_predictions() {
    let seq = demo(2, 1);
    let mut h = Hierarchy::new(short_config()).unwrap();
    h.train_sequence(&seq, 5).unwrap();
    let text = h.to_snapshot().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.gwrh");
    std::fs::write(&path, &text).unwrap();
    let back = Hierarchy::<f64>::from_snapshot(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, h);
    assert_eq!(
        back.evaluate_sequence(&seq, 6).unwrap(),
        h.evaluate_sequence(&seq, 6).unwrap()
    );
}

#[test]
fn encoders_never_straddle_sequence_boundaries() {
    // Tag every element with (sequence, frame) and check each window.
    let corpus = [5usize, 7];
    let mut enc = WindowEncoder::new(3, 2).unwrap();
    for (s, &len) in corpus.iter().enumerate() {
        enc.reset();
        for t in 0..len {
            if let Some(o) = enc.push(&[s as f64, t as f64]).unwrap() {
                for j in 0..3 {
                    assert_eq!(o[2 * j], s as f64);
                    assert_eq!(o[2 * j + 1], (t - j) as f64);
                }
            }
        }
    }
}

#[test]
fn gaps_split_training_windows() {
    let seq = demo(0, 2);
    let lossy = corrupt_dropout(&seq, 0.3, 10, 5).unwrap().corrupted;
    assert!(lossy.gap_count() > 0);
    let mut h = Hierarchy::new(short_config()).unwrap();
    let report = h.train_sequence(&lossy, 2).unwrap();
    // Predictive windows per epoch: each segment contributes len - (min_frames - 1).
    let need = h.config().min_frames();
    let windows: usize = lossy
        .segments()
        .iter()
        .map(|s| s.len().saturating_sub(need - 1))
        .sum();
    let second = &report.epochs[1].layers[2];
    assert_eq!(second.steps, windows);
}

#[test]
fn dataset_directory_feeds_training() {
    let dir = tempfile::tempdir().unwrap();
    let items: Vec<(MotionSequence<f64>, u32)> = (0..3).map(|r| (demo(6, r), r as u32)).collect();
    data::save_dataset(dir.path(), &items).unwrap();
    let loaded = data::load_dataset::<f64>(dir.path()).unwrap();
    assert_eq!(loaded.len(), 3);
    let mut h = Hierarchy::new(short_config()).unwrap();
    for (entry, seq) in &loaded {
        assert_eq!(entry.pattern, "wave-left");
        h.train_sequence(seq, 2).unwrap();
    }
    assert!(h.is_trained());
}
