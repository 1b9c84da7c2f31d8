use serde::{Deserialize, Serialize};

use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

/// Training parameters of one GWR layer.
///
/// Defaults are the values used for every layer of the motion hierarchy,
/// with the edge age set for the first layer (upper layers use
/// [`GwrParams::for_layer`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GwrParams {
    /// Insertion happens only while the BMU activity is below this value.
    pub activation_threshold: f64,
    /// Insertion happens only once the BMU firing counter dropped below this value.
    pub firing_threshold: f64,
    pub learning_rate_bmu: f64,
    pub learning_rate_neighbor: f64,
    pub firing_rho_bmu: f64,
    pub firing_rho_neighbor: f64,
    pub firing_kappa: f64,
    pub max_edge_age: u32,
    pub max_epochs: u32,
    /// Optional hard cap on the network size; no cap when `None`.
    pub max_neurons: Option<usize>,
}

impl Default for GwrParams {
    fn default() -> Self {
        GwrParams {
            activation_threshold: 0.98,
            firing_threshold: 0.1,
            learning_rate_bmu: 0.1,
            learning_rate_neighbor: 0.01,
            firing_rho_bmu: 0.3,
            firing_rho_neighbor: 0.1,
            firing_kappa: 1.05,
            max_edge_age: 100,
            max_epochs: 50,
            max_neurons: None,
        }
    }
}

impl GwrParams {
    /// Default parameters for hierarchy layer `layer` (0-based), whose
    /// maximum edge age grows with depth: 100, 200, 300.
    pub fn for_layer(layer: usize) -> Self {
        GwrParams {
            max_edge_age: 100 * (layer as u32 + 1),
            ..GwrParams::default()
        }
    }

    pub fn with_activation_threshold(mut self, a_t: f64) -> Self {
        self.activation_threshold = a_t;
        self
    }

    pub fn with_max_edge_age(mut self, age: u32) -> Self {
        self.max_edge_age = age;
        self
    }

    /// Fixed point of the firing counter decay, `1 - 1/kappa`.
    pub fn firing_fixed_point(&self) -> f64 {
        1.0 - 1.0 / self.firing_kappa
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        let fail = |msg: String| Err(GwrError::InvalidParams(msg));
        if !open_unit(self.activation_threshold) {
            return fail(format!(
                "activation_threshold must lie in (0, 1), got {}",
                self.activation_threshold
            ));
        }
        if !open_unit(self.firing_threshold) {
            return fail(format!(
                "firing_threshold must lie in (0, 1), got {}",
                self.firing_threshold
            ));
        }
        if !(self.learning_rate_neighbor > 0.0
            && self.learning_rate_neighbor <= self.learning_rate_bmu
            && self.learning_rate_bmu < 1.0)
        {
            return fail(format!(
                "learning rates must satisfy 0 < eps_n <= eps_b < 1, got eps_b={} eps_n={}",
                self.learning_rate_bmu, self.learning_rate_neighbor
            ));
        }
        if !(self.firing_rho_bmu > 0.0 && self.firing_rho_neighbor > 0.0) {
            return fail("firing rho values must be positive".into());
        }
        if !(self.firing_kappa > 1.0) {
            return fail(format!("firing_kappa must exceed 1, got {}", self.firing_kappa));
        }
        // rho * kappa <= 1 keeps the decay monotone, so counters never undershoot 1 - 1/kappa.
        for rho in [self.firing_rho_bmu, self.firing_rho_neighbor] {
            if rho * self.firing_kappa > 1.0 {
                return fail(format!(
                    "firing rho * kappa must not exceed 1, got {}",
                    rho * self.firing_kappa
                ));
            }
        }
        if self.max_edge_age < 1 {
            return fail("max_edge_age must be at least 1".into());
        }
        if self.max_epochs < 1 {
            return fail("max_epochs must be at least 1".into());
        }
        if let Some(n) = self.max_neurons {
            if n < 2 {
                return fail("max_neurons must be at least 2".into());
            }
        }
        Ok(())
    }
}

/// Fields given for one layer of a hierarchy config; the rest come from
/// [`GwrParams::for_layer`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsPatch {
    activation_threshold: Option<f64>,
    firing_threshold: Option<f64>,
    learning_rate_bmu: Option<f64>,
    learning_rate_neighbor: Option<f64>,
    firing_rho_bmu: Option<f64>,
    firing_rho_neighbor: Option<f64>,
    firing_kappa: Option<f64>,
    max_edge_age: Option<u32>,
    max_epochs: Option<u32>,
    max_neurons: Option<usize>,
}

pub(crate) fn deserialize_layer<'de, D: serde::Deserializer<'de>>(
    layer: usize,
    d: D,
) -> std::result::Result<GwrParams, D::Error> {
    let p = ParamsPatch::deserialize(d)?;
    let base = GwrParams::for_layer(layer);
    Ok(GwrParams {
        activation_threshold: p.activation_threshold.unwrap_or(base.activation_threshold),
        firing_threshold: p.firing_threshold.unwrap_or(base.firing_threshold),
        learning_rate_bmu: p.learning_rate_bmu.unwrap_or(base.learning_rate_bmu),
        learning_rate_neighbor: p.learning_rate_neighbor.unwrap_or(base.learning_rate_neighbor),
        firing_rho_bmu: p.firing_rho_bmu.unwrap_or(base.firing_rho_bmu),
        firing_rho_neighbor: p.firing_rho_neighbor.unwrap_or(base.firing_rho_neighbor),
        firing_kappa: p.firing_kappa.unwrap_or(base.firing_kappa),
        max_edge_age: p.max_edge_age.unwrap_or(base.max_edge_age),
        max_epochs: p.max_epochs.unwrap_or(base.max_epochs),
        max_neurons: p.max_neurons.or(base.max_neurons),
    })
}

/// One application of the firing counter decay `dh = rho * kappa * (1 - h) - rho`.
#[inline]
pub fn decay_firing<T: Scalar>(h: T, rho: T, kappa: T) -> T {
    h + rho * kappa * (T::one() - h) - rho
}
