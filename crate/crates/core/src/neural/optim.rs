use serde::{Deserialize, Serialize};

use super::network::Network;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if !ok {
            return Err(Error::Config(format!("invalid optimizer settings {self:?}")));
        }
        Ok(())
    }
}

/// Adaptive-moment optimizer; moment buffers follow `Network::params_mut`
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub config: AdamConfig,
    pub step: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(config: AdamConfig, net: &mut Network) -> Self {
        let sizes: Vec<usize> = net.params_mut().iter().map(|p| p.value.len()).collect();
        Self {
            config,
            step: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Applies the accumulated gradients.
    pub fn update(&mut self, net: &mut Network) {
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let bc1 = 1.0 - c.beta1.powi(t);
        let bc2 = 1.0 - c.beta2.powi(t);
        for ((p, m), v) in net.params_mut().into_iter().zip(&mut self.m).zip(&mut self.v) {
            for i in 0..p.value.len() {
                let g = p.grad[i];
                m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
                v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                p.value[i] -= c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
            }
        }
    }

    /// Moment buffers flattened, `m` then `v`.
    pub fn flat_state(&self) -> Vec<f64> {
        self.m.iter().chain(&self.v).flatten().copied().collect()
    }

    pub fn load_flat_state(&mut self, step: u64, values: &[f64]) -> Result<()> {
        let total: usize = self.m.iter().chain(&self.v).map(Vec::len).sum();
        if values.len() != total {
            return Err(Error::ShapeMismatch(format!(
                "optimizer state has {} values, expected {total}",
                values.len()
            )));
        }
        let mut it = values.iter();
        for buf in self.m.iter_mut().chain(self.v.iter_mut()) {
            for x in buf.iter_mut() {
                *x = *it.next().expect("length checked");
            }
        }
        self.step = step;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::arch::{ArchitectureVariant, Dimensionality};
    use crate::neural::network::build_network;

    #[test]
    fn first_step_moves_each_weight_by_the_learning_rate() {
        let v = ArchitectureVariant::custom("t", Dimensionality::OneD, 2, 1, 1).unwrap();
        let mut net = build_network(&v, [2, 1, 4], 0).unwrap();
        let before = net.head.weight.clone();
        net.head.grad_weight = vec![3.0, -0.5];
        let mut adam = Adam::new(AdamConfig::default(), &mut net);
        adam.update(&mut net);
        for (a, b) in before.iter().zip(&net.head.weight) {
            assert!(((a - b).abs() - 1e-3).abs() < 1e-9);
        }
        // zero gradient leaves the stem untouched
        let stem = net.stem.conv.weight.clone();
        let fresh = build_network(&v, [2, 1, 4], 0).unwrap();
        assert_eq!(stem, fresh.stem.conv.weight);
    }

    #[test]
    fn state_round_trip() {
        let v = ArchitectureVariant::custom("t", Dimensionality::OneD, 2, 1, 1).unwrap();
        let mut net = build_network(&v, [2, 1, 4], 0).unwrap();
        let mut adam = Adam::new(AdamConfig::default(), &mut net);
        net.head.grad_weight = vec![1.0, 2.0];
        adam.update(&mut net);
        let flat = adam.flat_state();
        let mut other = Adam::new(AdamConfig::default(), &mut net);
        other.load_flat_state(adam.step, &flat).unwrap();
        assert_eq!(other, adam);
        assert!(other.load_flat_state(1, &flat[1..]).is_err());
    }
}
