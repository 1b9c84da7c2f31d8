//! Hierarchical Growing-When-Required networks for incremental learning and
//! multi-step prediction of multidimensional motion sequences.
//!
//! Two GWR layers quantize body poses and short pose trajectories; a
//! predictive GWR layer on top maps windows of past trajectory prototypes to
//! the next ones. Predictions feed a delay compensation stage that picks the
//! motor command best matching the expected robot configuration.
//!
//! Every network is generic over the floating point type; the aliases below
//! fix it to `f64` (the default everywhere in the tooling) or `f32`.

pub mod data;
pub mod delay;
pub mod encoding;
mod engine;
pub mod error;
pub mod gwr;
pub mod hierarchy;
pub mod params;
pub mod predictive;
pub mod scalar;
pub mod snapshot;

pub use delay::{run_pipeline, select_command, DelayModel, LagReport, PipelineMode, PredictionBuffer};
pub use encoding::WindowEncoder;
pub use engine::{Edge, Neuron, NeuronId, StepReport};
pub use error::{GwrError, Result};
pub use hierarchy::{Hierarchy, HierarchyConfig, TrainScope};
pub use gwr::{activation, EpochReport, GwrNetwork};
pub use params::GwrParams;
pub use predictive::{split_window, PredictiveGwrNetwork, PredictiveNeuron, RegressorSample};
pub use scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Gwr = GwrNetwork<f64>;
pub type GwrF32 = GwrNetwork<f32>;
pub type PredictiveGwr = PredictiveGwrNetwork<f64>;
pub type PredictiveGwrF32 = PredictiveGwrNetwork<f32>;
pub type Hierarchy64 = Hierarchy<f64>;
pub type HierarchyF32 = Hierarchy<f32>;
pub type Sequence = data::MotionSequence<f64>;
