//! Growing-When-Required mechanics shared by [`GwrNetwork`](crate::GwrNetwork)
//! and [`PredictiveGwrNetwork`](crate::PredictiveGwrNetwork).
//!
//! Every neuron carries one weight vector of `weight_dim` components. Only the
//! leading `match_dim` components take part in best-matching-unit search and
//! in the activity; the remaining ones (the output weights of a predictive
//! network) are adapted and interpolated alongside but never matched.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{GwrError, Result};
use crate::params::{decay_firing, GwrParams};
use crate::scalar::{all_finite, squared_distance, Scalar};

/// Stable neuron identifier. Ids are never reused within a network.
pub type NeuronId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Neuron<T> {
    pub(crate) id: NeuronId,
    pub(crate) weight: Vec<T>,
    pub(crate) firing: T,
}

impl<T: Scalar> Neuron<T> {
    pub fn id(&self) -> NeuronId {
        self.id
    }

    pub fn weight(&self) -> &[T] {
        &self.weight
    }

    /// Firing counter: 1 when created, decaying toward `1 - 1/kappa`.
    pub fn firing(&self) -> T {
        self.firing
    }
}

/// An undirected edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub a: NeuronId,
    pub b: NeuronId,
    pub age: u32,
}

/// What a single training step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    pub bmu: NeuronId,
    pub second: NeuronId,
    /// Distance between the (matched part of the) input and the BMU.
    pub distance: T,
    pub activity: T,
    /// Firing counter of the BMU before the step.
    pub bmu_firing: T,
    /// Id of the neuron inserted on this step, if any.
    pub inserted: Option<NeuronId>,
    pub removed_edges: usize,
    pub removed_neurons: usize,
}

#[derive(Debug, Clone, Copy)]
struct Rates<T> {
    activation_threshold: T,
    firing_threshold: T,
    eps_b: T,
    eps_n: T,
    rho_b: T,
    rho_n: T,
    kappa: T,
}

impl<T: Scalar> Rates<T> {
    fn new(p: &GwrParams) -> Self {
        Rates {
            activation_threshold: T::lit(p.activation_threshold),
            firing_threshold: T::lit(p.firing_threshold),
            eps_b: T::lit(p.learning_rate_bmu),
            eps_n: T::lit(p.learning_rate_neighbor),
            rho_b: T::lit(p.firing_rho_bmu),
            rho_n: T::lit(p.firing_rho_neighbor),
            kappa: T::lit(p.firing_kappa),
        }
    }
}

fn rows_of<T: Scalar>(neurons: &[Neuron<T>], match_dim: usize) -> Vec<T> {
    neurons.iter().flat_map(|n| n.weight[..match_dim].iter().copied()).collect()
}

fn key(a: NeuronId, b: NeuronId) -> (NeuronId, NeuronId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug)]
pub(crate) struct Engine<T> {
    match_dim: usize,
    weight_dim: usize,
    params: GwrParams,
    rates: Rates<T>,
    /// Sorted by ascending id; a linear scan in this order breaks ties by smallest id.
    neurons: Vec<Neuron<T>>,
    /// Matching parts of all weights, row by row in neuron order, so the BMU
    /// scan reads one contiguous block.
    rows: Vec<T>,
    edges: BTreeMap<(NeuronId, NeuronId), u32>,
    adjacency: BTreeMap<NeuronId, BTreeSet<NeuronId>>,
    next_id: NeuronId,
    steps: u64,
    distance_evals: AtomicU64,
}

impl<T: Clone> Clone for Engine<T> {
    fn clone(&self) -> Self {
        Engine {
            match_dim: self.match_dim,
            weight_dim: self.weight_dim,
            params: self.params,
            rates: self.rates.clone(),
            neurons: self.neurons.clone(),
            rows: self.rows.clone(),
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
            next_id: self.next_id,
            steps: self.steps,
            distance_evals: AtomicU64::new(self.distance_evals.load(Ordering::Relaxed)),
        }
    }
}

impl<T: PartialEq> PartialEq for Engine<T> {
    /// Structural equality; the instrumentation counter is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.match_dim == other.match_dim
            && self.weight_dim == other.weight_dim
            && self.params == other.params
            && self.neurons == other.neurons
            && self.edges == other.edges
            && self.next_id == other.next_id
            && self.steps == other.steps
    }
}

/// Squared distance with four independent partial sums, for the BMU scan.
/// Gives up with `None` once the partial sum exceeds `bound`; partial sums
/// never decrease, so the full distance would exceed it too. Rounding
/// differs from [`squared_distance`] in the last bits.
#[inline]
fn scan_distance<T: Scalar>(a: &[T], b: &[T], bound: T) -> Option<T> {
    let mut acc = [T::zero(); 4];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            let d = x[k] - y[k];
            acc[k % 4] += d * d;
        }
        if (acc[0] + acc[1]) + (acc[2] + acc[3]) > bound {
            return None;
        }
    }
    let mut tail = T::zero();
    for (&x, &y) in ra.iter().zip(rb) {
        let d = x - y;
        tail += d * d;
    }
    Some((acc[0] + acc[1]) + (acc[2] + acc[3]) + tail)
}

pub(crate) fn check_vector<T: Scalar>(x: &[T], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(GwrError::DimensionMismatch {
            expected,
            actual: x.len(),
        });
    }
    if !all_finite(x) {
        return Err(GwrError::NonFinite);
    }
    Ok(())
}

impl<T: Scalar> Engine<T> {
    pub(crate) fn seeded(
        match_dim: usize,
        weight_dim: usize,
        params: GwrParams,
        first: &[T],
        second: &[T],
    ) -> Result<Self> {
        params.validate()?;
        if match_dim == 0 || match_dim > weight_dim {
            return Err(GwrError::InvalidParams(format!(
                "match dimension {match_dim} must be in 1..={weight_dim}"
            )));
        }
        check_vector(first, weight_dim)?;
        check_vector(second, weight_dim)?;
        let neurons: Vec<Neuron<T>> = [first, second]
            .iter()
            .enumerate()
            .map(|(i, w)| Neuron {
                id: i as NeuronId,
                weight: w.to_vec(),
                firing: T::one(),
            })
            .collect();
        Ok(Engine {
            match_dim,
            weight_dim,
            params,
            rates: Rates::new(&params),
            rows: rows_of(&neurons, match_dim),
            neurons,
            edges: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            next_id: 2,
            steps: 0,
            distance_evals: AtomicU64::new(0),
        })
    }

    /// Rebuilds a network from persisted parts, validating every structural invariant.
    pub(crate) fn from_parts(
        match_dim: usize,
        weight_dim: usize,
        params: GwrParams,
        neurons: Vec<Neuron<T>>,
        edges: Vec<Edge>,
        next_id: NeuronId,
        steps: u64,
    ) -> Result<Self> {
        params.validate()?;
        let invalid = |m: String| Err(GwrError::InvalidParams(m));
        if match_dim == 0 || match_dim > weight_dim {
            return invalid(format!("match dimension {match_dim} must be in 1..={weight_dim}"));
        }
        if neurons.is_empty() {
            return Err(GwrError::Empty("network has no neurons"));
        }
        for pair in neurons.windows(2) {
            if pair[0].id >= pair[1].id {
                return invalid("neuron ids must be strictly increasing".into());
            }
        }
        for n in &neurons {
            check_vector(&n.weight, weight_dim)?;
            if !n.firing.is_finite() || n.firing > T::one() {
                return invalid(format!("neuron {} has invalid firing {}", n.id, n.firing));
            }
            if n.id >= next_id {
                return invalid(format!("neuron id {} is not below next_id {next_id}", n.id));
            }
        }
        let mut engine = Engine {
            match_dim,
            weight_dim,
            params,
            rates: Rates::new(&params),
            rows: rows_of(&neurons, match_dim),
            neurons,
            edges: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            next_id,
            steps,
            distance_evals: AtomicU64::new(0),
        };
        for e in edges {
            if e.a == e.b || engine.index_of(e.a).is_none() || engine.index_of(e.b).is_none() {
                return invalid(format!("edge {}-{} references an unknown neuron", e.a, e.b));
            }
            if e.age > params.max_edge_age {
                return invalid(format!("edge {}-{} is older than max_edge_age", e.a, e.b));
            }
            if engine.edges.contains_key(&key(e.a, e.b)) {
                return invalid(format!("duplicate edge {}-{}", e.a, e.b));
            }
            engine.connect(e.a, e.b);
            engine.edges.insert(key(e.a, e.b), e.age);
        }
        Ok(engine)
    }

    pub(crate) fn match_dim(&self) -> usize {
        self.match_dim
    }

    pub(crate) fn weight_dim(&self) -> usize {
        self.weight_dim
    }

    pub(crate) fn params(&self) -> &GwrParams {
        &self.params
    }

    pub(crate) fn neurons(&self) -> &[Neuron<T>] {
        &self.neurons
    }

    pub(crate) fn next_id(&self) -> NeuronId {
        self.next_id
    }

    pub(crate) fn steps(&self) -> u64 {
        self.steps
    }

    pub(crate) fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(a, b), &age)| Edge { a, b, age })
    }

    pub(crate) fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub(crate) fn neighbors(&self, id: NeuronId) -> impl Iterator<Item = NeuronId> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub(crate) fn index_of(&self, id: NeuronId) -> Option<usize> {
        self.neurons.binary_search_by_key(&id, |n| n.id).ok()
    }

    pub(crate) fn neuron(&self, id: NeuronId) -> Option<&Neuron<T>> {
        self.index_of(id).map(|i| &self.neurons[i])
    }

    #[cfg(test)]
    pub(crate) fn neuron_mut(&mut self, id: NeuronId) -> Option<&mut Neuron<T>> {
        self.index_of(id).map(move |i| &mut self.neurons[i])
    }

    /// Number of distance evaluations performed so far (instrumentation).
    pub(crate) fn distance_evaluations(&self) -> u64 {
        self.distance_evals.load(Ordering::Relaxed)
    }

    /// First and second best-matching units of `query` (length `match_dim`)
    /// as neuron indices, plus the squared distance to the first.
    pub(crate) fn find_bmus(&self, query: &[T]) -> Result<(usize, usize, T)> {
        check_vector(query, self.match_dim)?;
        if self.neurons.len() < 2 {
            return Err(GwrError::TooFewNeurons(self.neurons.len()));
        }
        let m = self.match_dim;
        let mut best = (usize::MAX, T::infinity());
        let mut second = (usize::MAX, T::infinity());
        for (i, row) in self.rows.chunks_exact(m).enumerate() {
            let Some(d) = scan_distance(query, row, second.1) else { continue };
            if d < best.1 {
                second = best;
                best = (i, d);
            } else if d < second.1 {
                second = (i, d);
            }
        }
        self.distance_evals
            .fetch_add(self.neurons.len() as u64, Ordering::Relaxed);
        // Only reachable if every distance is +inf, i.e. weights overflowed.
        if best.0 == usize::MAX || second.0 == usize::MAX {
            return Err(GwrError::NonFinite);
        }
        let d = squared_distance(query, &self.neurons[best.0].weight[..m]);
        Ok((best.0, second.0, d))
    }

    /// One GWR iteration on `sample` (length `weight_dim`).
    pub(crate) fn train_step(&mut self, sample: &[T]) -> Result<StepReport<T>> {
        check_vector(sample, self.weight_dim)?;
        let (ib, is, d2) = self.find_bmus(&sample[..self.match_dim])?;
        let b = self.neurons[ib].id;
        let s = self.neurons[is].id;
        let distance = d2.sqrt();
        let activity = (-distance).exp();
        let bmu_firing = self.neurons[ib].firing;
        let r = self.rates;
        self.steps += 1;

        // Age the BMU's edges, then refresh (or create) the b-s edge.
        let incident: Vec<NeuronId> = self.neighbors(b).collect();
        for &n in &incident {
            if let Some(age) = self.edges.get_mut(&key(b, n)) {
                *age += 1;
            }
        }
        self.add_edge(b, s);

        let room = self
            .params
            .max_neurons
            .is_none_or(|cap| self.neurons.len() < cap);
        let mut inserted = None;
        if activity < r.activation_threshold && bmu_firing < r.firing_threshold && room {
            let half = T::lit(0.5);
            let weight: Vec<T> = sample
                .iter()
                .zip(&self.neurons[ib].weight)
                .map(|(&x, &w)| half * (x + w))
                .collect();
            let id = self.next_id;
            self.next_id += 1;
            self.rows.extend_from_slice(&weight[..self.match_dim]);
            self.neurons.push(Neuron {
                id,
                weight,
                firing: T::one(),
            });
            self.add_edge(id, b);
            self.add_edge(id, s);
            self.remove_edge(b, s);
            inserted = Some(id);
        } else {
            let neighbors: Vec<NeuronId> = self.neighbors(b).collect();
            self.adapt(ib, sample, r.eps_b, r.rho_b);
            for n in neighbors {
                let i = self.index_of(n).expect("adjacency references live neurons");
                self.adapt(i, sample, r.eps_n, r.rho_n);
            }
        }

        let (removed_edges, removed_neurons) = self.prune(b);
        Ok(StepReport {
            bmu: b,
            second: s,
            distance,
            activity,
            bmu_firing,
            inserted,
            removed_edges,
            removed_neurons,
        })
    }

    /// Moves neuron `i` toward `sample` by `eps * h`, then decays its firing counter.
    fn adapt(&mut self, i: usize, sample: &[T], eps: T, rho: T) {
        let kappa = self.rates.kappa;
        let n = &mut self.neurons[i];
        let rate = eps * n.firing;
        for (w, &x) in n.weight.iter_mut().zip(sample) {
            *w += rate * (x - *w);
        }
        let m = self.match_dim;
        self.rows[i * m..(i + 1) * m].copy_from_slice(&n.weight[..m]);
        n.firing = decay_firing(n.firing, rho, kappa);
    }

    fn add_edge(&mut self, a: NeuronId, b: NeuronId) {
        self.edges.insert(key(a, b), 0);
        self.connect(a, b);
    }

    fn connect(&mut self, a: NeuronId, b: NeuronId) {
        self.adjacency.entry(a).or_default().insert(b);
        self.adjacency.entry(b).or_default().insert(a);
    }

    fn remove_edge(&mut self, a: NeuronId, b: NeuronId) -> bool {
        let removed = self.edges.remove(&key(a, b)).is_some();
        for (x, y) in [(a, b), (b, a)] {
            if let Some(set) = self.adjacency.get_mut(&x) {
                set.remove(&y);
                if set.is_empty() {
                    self.adjacency.remove(&x);
                }
            }
        }
        removed
    }

    /// Drops the over-age edges around `b` (the only ones aged this step) and
    /// the neurons they leave isolated, never going below two neurons.
    fn prune(&mut self, b: NeuronId) -> (usize, usize) {
        let max_age = self.params.max_edge_age;
        let stale: Vec<NeuronId> = self
            .neighbors(b)
            .filter(|&n| self.edges[&key(b, n)] > max_age)
            .collect();
        for &n in &stale {
            self.remove_edge(b, n);
        }
        let removed_edges = stale.len();
        let mut removed_neurons = 0;
        for n in stale {
            if self.neurons.len() <= 2 {
                break;
            }
            if !self.adjacency.contains_key(&n) {
                let i = self.index_of(n).expect("stale neighbor exists");
                self.neurons.remove(i);
                let m = self.match_dim;
                self.rows.drain(i * m..(i + 1) * m);
                removed_neurons += 1;
            }
        }
        (removed_edges, removed_neurons)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GwrParams;

    #[test]
    fn scan_rows_track_weights() {
        let params = GwrParams {
            activation_threshold: 0.99,
            firing_threshold: 0.9,
            max_edge_age: 3,
            ..GwrParams::default()
        };
        let mut e = Engine::<f64>::seeded(3, 5, params, &[0.0; 5], &[1.0; 5]).unwrap();
        let mut x = 0.3f64;
        let mut removed = 0;
        for _ in 0..2000 {
            let s: Vec<f64> = (0..5)
                .map(|_| {
                    x = (x * 3.7 + 0.13).fract();
                    4.0 * x - 2.0
                })
                .collect();
            removed += e.train_step(&s).unwrap().removed_neurons;
            assert_eq!(e.rows, rows_of(&e.neurons, 3));
        }
        assert!(removed > 0 && e.neurons.len() > 10);
        let (ib, is, _) = e.find_bmus(&[0.1, 0.2, 0.3]).unwrap();
        let mut d: Vec<(f64, usize)> = e
            .neurons
            .iter()
            .enumerate()
            .map(|(i, n)| (squared_distance(&[0.1, 0.2, 0.3], &n.weight[..3]), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        assert_eq!((ib, is), (d[0].1, d[1].1));
    }

    #[test]
    fn bounded_scan_gives_up_only_above_the_bound() {
        let a = [1.0; 11];
        let b = [0.0; 11];
        assert_eq!(scan_distance(&a, &b, f64::INFINITY), Some(11.0));
        assert_eq!(scan_distance(&a, &b, 11.0), Some(11.0));
        assert_eq!(scan_distance(&a, &b, 7.5), None);
        // The tail is never cut short.
        assert_eq!(scan_distance(&a, &b, 8.0), Some(11.0));
    }
}
