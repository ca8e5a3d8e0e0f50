use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named contiguous block inside a flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
}

impl ParamBlock {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Layout of a flat parameter vector as a sequence of named blocks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamLayout {
    blocks: Vec<ParamBlock>,
    total: usize,
}

impl ParamLayout {
    pub fn push(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> usize {
        let offset = self.total;
        self.blocks.push(ParamBlock {
            name: name.into(),
            offset,
            rows,
            cols,
        });
        self.total += rows * cols;
        self.blocks.len() - 1
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn blocks(&self) -> &[ParamBlock] {
        &self.blocks
    }

    pub fn block(&self, id: usize) -> &ParamBlock {
        &self.blocks[id]
    }

    /// Name of the block holding flat index `i`.
    pub fn block_name_of(&self, i: usize) -> &str {
        self.blocks
            .iter()
            .find(|b| b.range().contains(&i))
            .map_or("<out of range>", |b| b.name.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        AdamConfig {
            learning_rate,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid Adam settings {self:?}")))
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment accumulators for one flat parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    pub config: AdamConfig,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
    step: u64,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        OptimizerState {
            config,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update. Gradients are checked for finiteness
    /// before anything is modified.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], layout: &ParamLayout) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::shape(
                "optimizer step",
                self.first_moment.len(),
                format!("params {} / grads {}", params.len(), grads.len()),
            ));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                block: layout.block_name_of(i).to_string(),
            });
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);

        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_layout() -> ParamLayout {
        let mut l = ParamLayout::default();
        l.push("w", 1, 1);
        l
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let layout = scalar_layout();
        let mut state = OptimizerState::new(AdamConfig::default(), 1);
        let mut p = [1.5];
        for _ in 0..10 {
            state.step(&mut p, &[0.0], &layout).unwrap();
        }
        assert_eq!(p, [1.5]);
        assert_eq!(state.step_count(), 10);
    }

    #[test]
    fn constant_gradient_decreases_monotonically() {
        let layout = scalar_layout();
        let mut state = OptimizerState::new(AdamConfig::default(), 1);
        let mut p = [0.0];
        let mut prev = p[0];
        for _ in 0..200 {
            state.step(&mut p, &[0.7], &layout).unwrap();
            assert!(p[0] < prev);
            prev = p[0];
        }
    }

    #[test]
    fn first_step_magnitude() {
        // m_hat = v_hat = 1 after bias correction, so delta = -lr / (1 + eps)
        let layout = scalar_layout();
        let mut state = OptimizerState::new(AdamConfig::default(), 1);
        let mut p = [0.0];
        state.step(&mut p, &[1.0], &layout).unwrap();
        let expected = -0.001 / (1.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-18);
    }

    #[test]
    fn deterministic() {
        let layout = scalar_layout();
        let mut a = OptimizerState::new(AdamConfig::default(), 1);
        let mut b = a.clone();
        let (mut pa, mut pb) = ([0.3], [0.3]);
        for g in [0.1, -2.0, 5.0, 0.0] {
            a.step(&mut pa, &[g], &layout).unwrap();
            b.step(&mut pb, &[g], &layout).unwrap();
        }
        assert_eq!(pa[0].to_bits(), pb[0].to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_gradient_names_block() {
        let mut layout = ParamLayout::default();
        layout.push("trunk0.w", 2, 1);
        layout.push("mean.b", 1, 1);
        let mut state = OptimizerState::new(AdamConfig::default(), 3);
        let mut p = [0.0; 3];
        let err = state.step(&mut p, &[0.0, 0.0, f64::NAN], &layout).unwrap_err();
        match err {
            Error::NonFiniteGradient { block } => assert_eq!(block, "mean.b"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(state.step_count(), 0);
    }
}
