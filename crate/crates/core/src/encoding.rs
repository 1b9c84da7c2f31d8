use std::collections::VecDeque;

use crate::engine::check_vector;
use crate::error::{GwrError, Result};
use crate::scalar::Scalar;

/// Sliding window over the last `tau` BMU weights of a layer.
///
/// Once full, every push yields `w(t) ⊕ w(t-1) ⊕ … ⊕ w(t-tau+1)`, newest
/// block first. Nothing is emitted while warming up, and [`reset`](Self::reset)
/// starts a new warm-up so windows never straddle a sequence boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEncoder<T> {
    tau: usize,
    element_dim: usize,
    /// Newest first.
    buffer: VecDeque<Vec<T>>,
}

impl<T: Scalar> WindowEncoder<T> {
    pub fn new(tau: usize, element_dim: usize) -> Result<Self> {
        if tau == 0 || element_dim == 0 {
            return Err(GwrError::InvalidParams(format!(
                "window length and element dimension must be positive, got tau={tau} dim={element_dim}"
            )));
        }
        Ok(WindowEncoder {
            tau,
            element_dim,
            buffer: VecDeque::with_capacity(tau),
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn element_dim(&self) -> usize {
        self.element_dim
    }

    pub fn output_dim(&self) -> usize {
        self.tau * self.element_dim
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_full(&self) -> bool {
        self.buffer.len() == self.tau
    }

    pub fn push(&mut self, bmu_weight: &[T]) -> Result<Option<Vec<T>>> {
        check_vector(bmu_weight, self.element_dim)?;
        if self.buffer.len() == self.tau {
            self.buffer.pop_back();
        }
        self.buffer.push_front(bmu_weight.to_vec());
        if !self.is_full() {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(self.output_dim());
        for block in &self.buffer {
            out.extend_from_slice(block);
        }
        Ok(Some(out))
    }

    pub fn reset(&mut self) {
        self.buffer.clear();
    }
}
