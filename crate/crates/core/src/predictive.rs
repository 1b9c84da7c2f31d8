//! Predictive GWR: neurons carry a regressor (input) weight and a target
//! (output) weight. Matching and growth look at the regressor only; both
//! weights are adapted with the same factor, so each neuron becomes a local
//! model mapping a window of past elements to the element(s) that follow.

use crate::engine::{check_vector, Edge, Engine, NeuronId, StepReport};
use crate::error::{GwrError, Result};
use crate::params::GwrParams;
use crate::scalar::Scalar;
use crate::snapshot::{read_engine, write_engine, Lines};

/// One training pair: the last `p` elements (newest first) and the
/// `output_steps` elements that follow them (in temporal order).
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSample<T> {
    pub x_in: Vec<T>,
    pub x_out: Vec<T>,
}

/// Splits a newest-first window of `p + output_steps` elements into a
/// regressor sample.
///
/// The newest `output_steps` blocks become `x_out`, reordered oldest first
/// (`x(t+1) … x(t+h)`); the remaining `p` blocks stay newest first as `x_in`.
pub fn split_window<T: Scalar>(
    window: &[T],
    p: usize,
    output_steps: usize,
    element_dim: usize,
) -> Result<RegressorSample<T>> {
    let expected = (p + output_steps) * element_dim;
    if p == 0 || output_steps == 0 || element_dim == 0 {
        return Err(GwrError::InvalidParams(
            "regressor order, output steps and element dimension must be positive".into(),
        ));
    }
    if window.len() != expected {
        return Err(GwrError::DimensionMismatch {
            expected,
            actual: window.len(),
        });
    }
    let (out_part, in_part) = window.split_at(output_steps * element_dim);
    let x_out = out_part
        .chunks_exact(element_dim)
        .rev()
        .flatten()
        .copied()
        .collect();
    Ok(RegressorSample {
        x_in: in_part.to_vec(),
        x_out,
    })
}

/// Borrowed view of one predictive neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveNeuron<'a, T> {
    pub id: NeuronId,
    pub w_in: &'a [T],
    pub w_out: &'a [T],
    pub firing: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictiveGwrNetwork<T> {
    engine: Engine<T>,
    regressor_order: usize,
    element_dim: usize,
    output_steps: usize,
}

impl<T: Scalar> PredictiveGwrNetwork<T> {
    /// Seeds the network with two samples. `output_steps == 1` gives a
    /// recursive-mode network; larger values train vector prediction.
    pub fn init(
        first: &RegressorSample<T>,
        second: &RegressorSample<T>,
        regressor_order: usize,
        element_dim: usize,
        output_steps: usize,
        params: GwrParams,
    ) -> Result<Self> {
        if regressor_order == 0 || element_dim == 0 || output_steps == 0 {
            return Err(GwrError::InvalidParams(
                "regressor order, element dimension and output steps must be positive".into(),
            ));
        }
        let in_dim = regressor_order * element_dim;
        let out_dim = output_steps * element_dim;
        let a = Self::concat(first, in_dim, out_dim)?;
        let b = Self::concat(second, in_dim, out_dim)?;
        Ok(PredictiveGwrNetwork {
            engine: Engine::seeded(in_dim, in_dim + out_dim, params, &a, &b)?,
            regressor_order,
            element_dim,
            output_steps,
        })
    }

    fn concat(s: &RegressorSample<T>, in_dim: usize, out_dim: usize) -> Result<Vec<T>> {
        check_vector(&s.x_in, in_dim)?;
        check_vector(&s.x_out, out_dim)?;
        let mut v = Vec::with_capacity(in_dim + out_dim);
        v.extend_from_slice(&s.x_in);
        v.extend_from_slice(&s.x_out);
        Ok(v)
    }

    pub fn regressor_order(&self) -> usize {
        self.regressor_order
    }

    pub fn element_dim(&self) -> usize {
        self.element_dim
    }

    pub fn output_steps(&self) -> usize {
        self.output_steps
    }

    pub fn input_dim(&self) -> usize {
        self.regressor_order * self.element_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_steps * self.element_dim
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

    pub fn train_steps(&self) -> u64 {
        self.engine.steps()
    }

    pub fn distance_evaluations(&self) -> u64 {
        self.engine.distance_evaluations()
    }

    pub fn neurons(&self) -> impl Iterator<Item = PredictiveNeuron<'_, T>> + '_ {
        let split = self.input_dim();
        self.engine.neurons().iter().map(move |n| PredictiveNeuron {
            id: n.id,
            w_in: &n.weight[..split],
            w_out: &n.weight[split..],
            firing: n.firing,
        })
    }

    pub fn neuron(&self, id: NeuronId) -> Option<PredictiveNeuron<'_, T>> {
        let split = self.input_dim();
        self.engine.neuron(id).map(|n| PredictiveNeuron {
            id: n.id,
            w_in: &n.weight[..split],
            w_out: &n.weight[split..],
            firing: n.firing,
        })
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.engine.edges()
    }

    pub fn neighbors(&self, id: NeuronId) -> impl Iterator<Item = NeuronId> + '_ {
        self.engine.neighbors(id)
    }

    /// Splits a window laid out for this network.
    pub fn split_window(&self, window: &[T]) -> Result<RegressorSample<T>> {
        split_window(window, self.regressor_order, self.output_steps, self.element_dim)
    }

    /// First and second BMU computed on the regressor weights only.
    pub fn find_bmus(&self, x_in: &[T]) -> Result<(NeuronId, NeuronId)> {
        let (b, s, _) = self.engine.find_bmus(x_in)?;
        let n = self.engine.neurons();
        Ok((n[b].id, n[s].id))
    }

    pub fn train_step(&mut self, sample: &RegressorSample<T>) -> Result<StepReport<T>> {
        let v = Self::concat(sample, self.input_dim(), self.output_dim())?;
        self.engine.train_step(&v)
    }

    /// Output weight of the regressor BMU: the next `output_steps` elements.
    pub fn predict_one(&self, x_in: &[T]) -> Result<&[T]> {
        let (b, _, _) = self.engine.find_bmus(x_in)?;
        Ok(&self.engine.neurons()[b].weight[self.input_dim()..])
    }

    /// Multi-step prediction by feeding every prediction back into the
    /// regressor. Returns the elements for `t+1 … t+horizon`.
    pub fn predict_recursive(&self, x_in: &[T], horizon: usize) -> Result<Vec<Vec<T>>> {
        if self.output_steps != 1 {
            return Err(GwrError::VectorMode);
        }
        if horizon == 0 {
            return Err(GwrError::InvalidParams("horizon must be at least 1".into()));
        }
        check_vector(x_in, self.input_dim())?;
        let d = self.element_dim;
        let mut regressor = x_in.to_vec();
        let mut out = Vec::with_capacity(horizon);
        for step in 0..horizon {
            let next = self.predict_one(&regressor)?.to_vec();
            if step + 1 < horizon {
                regressor.truncate(regressor.len() - d);
                regressor.splice(0..0, next.iter().copied());
            }
            out.push(next);
        }
        Ok(out)
    }

    /// The output weight of the BMU split into its `output_steps` elements.
    pub fn predict_vector(&self, x_in: &[T]) -> Result<Vec<Vec<T>>> {
        Ok(self
            .predict_one(x_in)?
            .chunks_exact(self.element_dim)
            .map(<[T]>::to_vec)
            .collect())
    }

    /// Mean squared and mean absolute one-step error over `samples`,
    /// averaged over samples and components.
    pub fn prediction_error<'s, I>(&self, samples: I) -> Result<(T, T)>
    where
        I: IntoIterator<Item = &'s RegressorSample<T>>,
    {
        let (mut se, mut ae, mut count) = (T::zero(), T::zero(), 0usize);
        for s in samples {
            check_vector(&s.x_out, self.output_dim())?;
            let pred = self.predict_one(&s.x_in)?;
            for (&p, &y) in pred.iter().zip(&s.x_out) {
                let e = p - y;
                se += e * e;
                ae += e.abs();
            }
            count += pred.len();
        }
        if count == 0 {
            return Err(GwrError::Empty("prediction samples"));
        }
        let n = T::lit(count as f64);
        Ok((se / n, ae / n))
    }

    pub fn to_snapshot(&self) -> String {
        let mut out = String::new();
        self.write_to(&mut out);
        out
    }

    pub(crate) fn write_to(&self, out: &mut String) {
        write_engine(
            out,
            "pgwr",
            &[
                ("regressor_order", self.regressor_order.to_string()),
                ("element_dim", self.element_dim.to_string()),
                ("output_steps", self.output_steps.to_string()),
            ],
            &self.engine,
        );
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
        let (engine, extra) =
            read_engine(lines, "pgwr", &["regressor_order", "element_dim", "output_steps"])?;
        let field = |k: &str| -> Result<usize> {
            extra[k]
                .parse()
                .map_err(|_| lines.error(format!("invalid `{k}`")))
        };
        let (p, d, steps) = (field("regressor_order")?, field("element_dim")?, field("output_steps")?);
        if p == 0 || d == 0 || steps == 0 || engine.match_dim() != p * d || engine.weight_dim() != (p + steps) * d {
            return Err(lines.error("predictive dimensions do not match the weight layout"));
        }
        Ok(PredictiveGwrNetwork {
            engine,
            regressor_order: p,
            element_dim: d,
            output_steps: steps,
        })
    }

    #[cfg(test)]
    pub(crate) fn output_weight_mut(&mut self, id: NeuronId) -> Option<&mut [T]> {
        let split = self.input_dim();
        self.engine.neuron_mut(id).map(|n| &mut n.weight[split..])
    }
}
