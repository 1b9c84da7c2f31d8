//! The standard Growing-When-Required network used for the first two layers.

use crate::engine::{Edge, Engine, Neuron, NeuronId, StepReport};
use crate::error::{GwrError, Result};
use crate::params::GwrParams;
use crate::scalar::Scalar;
use crate::snapshot::{read_engine, write_engine, Lines};

/// Network activity for an input at Euclidean distance `‖x - w_b‖` from its BMU:
/// `exp(-‖x - w_b‖)`, in `(0, 1]`.
pub fn activation<T: Scalar>(x: &[T], bmu_weight: &[T]) -> Result<T> {
    crate::engine::check_vector(x, bmu_weight.len())?;
    crate::engine::check_vector(bmu_weight, x.len())?;
    Ok((-crate::scalar::distance(x, bmu_weight)).exp())
}

/// Aggregate of one pass over a sample list.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport<T> {
    /// Mean BMU distance observed while training.
    pub mean_quantization_error: T,
    pub neuron_count: usize,
    pub inserted: usize,
    pub removed_neurons: usize,
}

/// A growing network of prototype neurons linked by aged edges.
///
/// Created from two seed samples; every later sample goes through
/// [`train_step`](Self::train_step).
#[derive(Debug, Clone, PartialEq)]
pub struct GwrNetwork<T> {
    engine: Engine<T>,
}

impl<T: Scalar> GwrNetwork<T> {
    /// Two neurons placed at the given samples, firing 1, no edges.
    pub fn init(first: &[T], second: &[T], params: GwrParams) -> Result<Self> {
        if first.is_empty() {
            return Err(GwrError::Empty("seed sample"));
        }
        if first.len() != second.len() {
            return Err(GwrError::DimensionMismatch {
                expected: first.len(),
                actual: second.len(),
            });
        }
        let dim = first.len();
        Ok(GwrNetwork {
            engine: Engine::seeded(dim, dim, params, first, second)?,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.engine.match_dim()
    }

    pub fn params(&self) -> &GwrParams {
        self.engine.params()
    }

    pub fn len(&self) -> usize {
        self.engine.neurons().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Neurons in ascending id order.
    pub fn neurons(&self) -> &[Neuron<T>] {
        self.engine.neurons()
    }

    pub fn neuron(&self, id: NeuronId) -> Option<&Neuron<T>> {
        self.engine.neuron(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.engine.edges()
    }

    pub fn edge_count(&self) -> usize {
        self.engine.edge_count()
    }

    pub fn neighbors(&self, id: NeuronId) -> impl Iterator<Item = NeuronId> + '_ {
        self.engine.neighbors(id)
    }

    /// Number of training steps applied since initialization.
    pub fn train_steps(&self) -> u64 {
        self.engine.steps()
    }

    /// Distance evaluations performed so far by any lookup or training step.
    pub fn distance_evaluations(&self) -> u64 {
        self.engine.distance_evaluations()
    }

    /// The two neurons nearest to `x`; equal distances go to the smaller id.
    pub fn find_bmus(&self, x: &[T]) -> Result<(NeuronId, NeuronId)> {
        let (b, s, _) = self.engine.find_bmus(x)?;
        let n = self.engine.neurons();
        Ok((n[b].id, n[s].id))
    }

    pub fn train_step(&mut self, x: &[T]) -> Result<StepReport<T>> {
        self.engine.train_step(x)
    }

    pub fn train_epoch<S: AsRef<[T]>>(&mut self, samples: &[S]) -> Result<EpochReport<T>> {
        if samples.is_empty() {
            return Err(GwrError::Empty("training samples"));
        }
        let mut total = T::zero();
        let (mut inserted, mut removed) = (0, 0);
        for x in samples {
            let r = self.engine.train_step(x.as_ref())?;
            total += r.distance;
            inserted += usize::from(r.inserted.is_some());
            removed += r.removed_neurons;
        }
        Ok(EpochReport {
            mean_quantization_error: total / T::lit(samples.len() as f64),
            neuron_count: self.len(),
            inserted,
            removed_neurons: removed,
        })
    }

    /// BMU weight and activity for `x`, without touching the network.
    pub fn quantize(&self, x: &[T]) -> Result<(&[T], T)> {
        let (b, _, d2) = self.engine.find_bmus(x)?;
        Ok((&self.engine.neurons()[b].weight, (-d2.sqrt()).exp()))
    }

    /// Text snapshot in the `gwrnet-network` format (kind `gwr`).
    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        write_engine(&mut out, "gwr", &[], &self.engine);
        out
    }

    pub fn from_snapshot(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let net = Self::read_from(&mut lines)?;
        if !lines.peek_done() {
            return Err(lines.error("trailing content after network"));
        }
        Ok(net)
    }

    pub(crate) fn read_from(lines: &mut Lines<'_>) -> Result<Self> {
        let (engine, _) = read_engine(lines, "gwr", &[])?;
        if engine.match_dim() != engine.weight_dim() {
            return Err(lines.error("gwr network must not carry output weights"));
        }
        Ok(GwrNetwork { engine })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GwrParams {
        GwrParams::default()
    }

    #[test]
    fn init_places_two_neurons_without_edges() {
        let net = GwrNetwork::<f64>::init(&[0.0, 0.0], &[1.0, 1.0], params()).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.edge_count(), 0);
        assert_eq!(net.neurons()[0].weight(), &[0.0, 0.0]);
        assert_eq!(net.neurons()[1].weight(), &[1.0, 1.0]);
        assert!(net.neurons().iter().all(|n| n.firing() == 1.0));
    }

    #[test]
    fn init_accepts_coincident_seeds() {
        let net = GwrNetwork::<f64>::init(&[0.3], &[0.3], params()).unwrap();
        assert_eq!(net.len(), 2);
        assert_eq!(net.find_bmus(&[0.3]).unwrap(), (0, 1));
    }

    #[test]
    fn init_rejects_bad_input() {
        assert_eq!(
            GwrNetwork::<f64>::init(&[0.0], &[1.0, 2.0], params()).unwrap_err(),
            GwrError::DimensionMismatch { expected: 1, actual: 2 }
        );
        assert_eq!(
            GwrNetwork::<f64>::init(&[f64::NAN], &[1.0], params()).unwrap_err(),
            GwrError::NonFinite
        );
        assert!(GwrNetwork::<f64>::init(&[], &[], params()).is_err());
    }

    #[test]
    fn nearest_neighbor_bmus() {
        let net = GwrNetwork::<f64>::init(&[0.0, 0.0], &[1.0, 1.0], params()).unwrap();
        assert_eq!(net.find_bmus(&[0.1, 0.0]).unwrap(), (0, 1));
        assert_eq!(net.find_bmus(&[0.9, 0.7]).unwrap(), (1, 0));
        assert!(matches!(
            net.find_bmus(&[0.0]),
            Err(GwrError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_neuron_network_has_no_bmu_pair() {
        let text = "gwrnet-network 1\nkind gwr\nmatch_dim 1\nweight_dim 1\n\
            activation_threshold 0.98\nfiring_threshold 0.1\nlearning_rate_bmu 0.1\n\
            learning_rate_neighbor 0.01\nfiring_rho_bmu 0.3\nfiring_rho_neighbor 0.1\n\
            firing_kappa 1.05\nmax_edge_age 100\nmax_epochs 50\nmax_neurons none\n\
            next_id 1\ntrain_steps 0\nneurons 1\nn 0 1.0 0.5\nedges 0\nend\n";
        let net = GwrNetwork::<f64>::from_snapshot(text).unwrap();
        assert_eq!(net.find_bmus(&[0.5]).unwrap_err(), GwrError::TooFewNeurons(1));
        assert!(net.quantize(&[0.5]).is_err());
    }

    #[test]
    fn activation_values() {
        assert_eq!(activation(&[0.2, 0.4], &[0.2, 0.4]).unwrap(), 1.0);
        let ln2 = std::f64::consts::LN_2;
        assert!((activation(&[ln2], &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        // Inverting exp(-d) at a_T = 0.98: insertion requires d > -ln(0.98).
        let d = -(0.98f64).ln();
        assert!((d - 0.020_202_707).abs() < 1e-9);
        assert!(activation(&[d * 0.999], &[0.0]).unwrap() > 0.98);
        assert!(activation(&[d * 1.001], &[0.0]).unwrap() < 0.98);
    }

    #[test]
    fn constant_stream_at_a_neuron_is_a_fixed_point() {
        let mut net = GwrNetwork::<f64>::init(&[0.5, -0.5], &[2.0, 2.0], params()).unwrap();
        for _ in 0..500 {
            let r = net.train_step(&[0.5, -0.5]).unwrap();
            assert_eq!(r.activity, 1.0);
            assert!(r.inserted.is_none());
        }
        assert_eq!(net.len(), 2);
        assert_eq!(net.neuron(0).unwrap().weight(), &[0.5, -0.5]);
    }

    #[test]
    fn firing_gate_blocks_insertion_on_fresh_network() {
        let mut net = GwrNetwork::<f64>::init(&[0.0, 0.0], &[1.0, 1.0], params()).unwrap();
        let x = [-5.0, 3.0];
        let r = net.train_step(&x).unwrap();
        assert!(r.activity < 0.98);
        assert_eq!(r.bmu_firing, 1.0);
        assert!(r.inserted.is_none());
        assert_eq!(net.len(), 2);
        // w_b += eps_b * 1 * (x - w_b) with w_b = 0.
        let w = net.neuron(0).unwrap().weight();
        assert!((w[0] - (-0.5)).abs() < 1e-15);
        assert!((w[1] - 0.3).abs() < 1e-15);
        // The second BMU is a neighbor now and moves by eps_n.
        let s = net.neuron(1).unwrap().weight();
        assert!((s[0] - (1.0 + 0.01 * (-6.0))).abs() < 1e-15);
        assert!((net.neuron(0).unwrap().firing() - 0.7).abs() < 1e-15);
        assert!((net.neuron(1).unwrap().firing() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn insertion_after_habituation() {
        let mut net = GwrNetwork::<f64>::init(&[0.0], &[10.0], params()).unwrap();
        // Habituate neuron 0 on its own position.
        for _ in 0..20 {
            net.train_step(&[0.0]).unwrap();
        }
        assert!(net.neuron(0).unwrap().firing() < 0.1);
        let r = net.train_step(&[1.0]).unwrap();
        let id = r.inserted.expect("insertion");
        assert_eq!(net.neuron(id).unwrap().weight(), &[0.5]);
        assert_eq!(net.neuron(0).unwrap().weight(), &[0.0]);
        let mut ns: Vec<_> = net.neighbors(id).collect();
        ns.sort();
        assert_eq!(ns, vec![0, 1]);
        assert!(!net.neighbors(0).any(|n| n == 1));
    }

    #[test]
    fn max_neurons_caps_growth() {
        let p = GwrParams { max_neurons: Some(3), ..params() };
        let mut net = GwrNetwork::<f64>::init(&[0.0], &[10.0], p).unwrap();
        for i in 0..2000 {
            net.train_step(&[(i % 40) as f64 * 0.25]).unwrap();
        }
        assert_eq!(net.len(), 3);
    }

    #[test]
    fn quantize_is_pure() {
        let mut net = GwrNetwork::<f64>::init(&[0.0], &[10.0], params()).unwrap();
        for i in 0..300 {
            net.train_step(&[(i % 7) as f64]).unwrap();
        }
        let before = net.clone();
        let (w1, a1) = net.quantize(&[2.2]).map(|(w, a)| (w.to_vec(), a)).unwrap();
        let (w2, a2) = net.quantize(&[2.2]).map(|(w, a)| (w.to_vec(), a)).unwrap();
        assert_eq!((w1.clone(), a1), (w2, a2));
        assert_eq!(net, before);
        let (b, _) = net.find_bmus(&[2.2]).unwrap();
        assert_eq!(w1, net.neuron(b).unwrap().weight());
        assert_eq!(a1, activation(&[2.2], &w1).unwrap());
        let stored = net.neurons()[0].weight().to_vec();
        assert_eq!(net.quantize(&stored).unwrap(), (stored.as_slice(), 1.0));
    }

    #[test]
    fn epoch_of_one_matches_one_step() {
        let mut a = GwrNetwork::<f64>::init(&[0.0, 1.0], &[3.0, 1.0], params()).unwrap();
        let mut b = a.clone();
        let rep = a.train_epoch(&[[2.0, 2.0]]).unwrap();
        let step = b.train_step(&[2.0, 2.0]).unwrap();
        assert_eq!(a, b);
        assert_eq!(rep.mean_quantization_error, step.distance);
        assert!(a.train_epoch::<[f64; 2]>(&[]).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let mut net = GwrNetwork::<f64>::init(&[0.1, 0.2], &[1.0, -1.0], params()).unwrap();
        for i in 0..400 {
            let t = i as f64 * 0.37;
            net.train_step(&[t.sin(), (0.5 * t).cos()]).unwrap();
        }
        let text = net.to_snapshot();
        let back = GwrNetwork::<f64>::from_snapshot(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.to_snapshot(), text);
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let net = GwrNetwork::<f64>::init(&[0.1], &[1.0], params()).unwrap();
        let text = net.to_snapshot();
        assert!(GwrNetwork::<f64>::from_snapshot(&text.replace("kind gwr", "kind pgwr")).is_err());
        assert!(GwrNetwork::<f64>::from_snapshot(&text.replace("n 1 1.0 1.0", "n 1 1.0")).is_err());
        assert!(GwrNetwork::<f64>::from_snapshot(&text.replace("end", "")).is_err());
        assert!(GwrNetwork::<f64>::from_snapshot(&format!("{text}junk\n")).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let mut net = GwrNetwork::<f32>::init(&[0.0, 0.0], &[1.0, 1.0], params()).unwrap();
        for i in 0..200 {
            net.train_step(&[(i % 5) as f32 * 0.3, 0.1]).unwrap();
        }
        let back = GwrNetwork::<f32>::from_snapshot(&net.to_snapshot()).unwrap();
        assert_eq!(back, net);
    }
}
