use gwrnet::data::{generate_synthetic, SyntheticSpec, DEFAULT_SUITE};
use gwrnet::{Hierarchy64, HierarchyConfig, Sequence};

fn main() -> gwrnet::Result<()> {
    let spec = SyntheticSpec { duration_s: 20.0, noise_std: 0.002, ..SyntheticSpec::new(DEFAULT_SUITE[6], 1) };
    let seq: Sequence = generate_synthetic(&spec)?;

    let mut h = Hierarchy64::new(HierarchyConfig::default())?;
    h.train_sequence(&seq, 50)?;
    let records = h.evaluate_sequence(&seq, 6)?;
    let text = h.to_snapshot()?;
    assert_eq!(Hierarchy64::from_snapshot(&text)?, h);
    println!("{} forecasts, {:?} neurons", records.len(), h.neuron_counts());
    Ok(())
}
