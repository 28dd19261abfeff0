//! Curiosity model `C(s, a)`: predicts the encoded next state and a scalar curiosity
//! value regressed onto its own state-prediction error.

use rand::Rng;

use crate::agent::{state_action_row, Experience, ReplayBuffer, BATCH_SIZE};
use crate::dialog::{StateVector, STATE_DIM};
use crate::error::{Error, Result};
use crate::nn::{Activation, LossKind, Matrix, MlpModel, ModelCheckpoint, ModelSpec, TrainBatch};
use crate::ontology::AGENT_ACTION_COUNT;

pub const CURIOSITY_HIDDEN: usize = 80;

const NEXT_STATE_HEAD: usize = 0;
const VALUE_HEAD: usize = 1;

pub fn curiosity_model_spec() -> ModelSpec {
    let h = [CURIOSITY_HIDDEN];
    ModelSpec::build(
        STATE_DIM + AGENT_ACTION_COUNT,
        &[CURIOSITY_HIDDEN, CURIOSITY_HIDDEN],
        &[
            ("next_state", &h, STATE_DIM, Activation::Linear, LossKind::Mse),
            ("curiosity", &h, 1, Activation::Linear, LossKind::Mse),
        ],
    )
}

/// Squared Euclidean distance between two encoded states.
pub fn prediction_error(actual: &[f64], predicted: &[f64]) -> f64 {
    actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum()
}

#[derive(Debug, Clone)]
pub struct CuriosityModel {
    pub net: MlpModel,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuriosityScores {
    /// Per-action curiosity value, clamped at zero.
    pub values: Vec<f64>,
    /// Predicted next state per candidate action.
    pub predicted_next: Matrix,
}

impl CuriosityModel {
    pub fn new(seed: u64) -> Result<Self> {
        Ok(CuriosityModel {
            net: MlpModel::new(curiosity_model_spec(), seed)?,
            learning_rate: crate::nn::DEFAULT_LEARNING_RATE,
        })
    }

    fn candidate_inputs(state: &StateVector) -> Result<Matrix> {
        if state.len() != STATE_DIM {
            return Err(Error::Shape {
                expected: STATE_DIM,
                actual: state.len(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..AGENT_ACTION_COUNT)
            .map(|a| state_action_row(state.as_slice(), a, AGENT_ACTION_COUNT))
            .collect();
        Matrix::from_rows(&rows)
    }

    /// Curiosity values `c_a = max(0, raw_a)` for all 29 candidate actions.
    pub fn curiosity_values(&self, state: &StateVector) -> Result<Vec<f64>> {
        let x = Self::candidate_inputs(state)?;
        let raw = self.net.forward_head(&x, VALUE_HEAD)?;
        Ok(raw.data.iter().map(|v| v.max(0.0)).collect())
    }

    /// Curiosity values and predicted next states for every candidate action.
    pub fn curiosity_scores(&self, state: &StateVector) -> Result<CuriosityScores> {
        let x = Self::candidate_inputs(state)?;
        let out = self.net.forward(&x)?;
        Ok(CuriosityScores {
            values: out[VALUE_HEAD].data.iter().map(|v| v.max(0.0)).collect(),
            predicted_next: out[NEXT_STATE_HEAD].clone(),
        })
    }

    /// Minibatch updates on samples drawn uniformly from `real ∪ sim`. Returns the mean
    /// loss, or `None` when both buffers are empty.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        real: &ReplayBuffer,
        sim: &ReplayBuffer,
        n_batches: usize,
        rng: &mut R,
    ) -> Result<Option<f64>> {
        let total_len = real.len() + sim.len();
        if total_len == 0 {
            log::warn!("curiosity update skipped: both buffers are empty");
            return Ok(None);
        }
        if n_batches == 0 {
            return Ok(None);
        }
        let mut total = 0.0;
        for _ in 0..n_batches {
            let batch: Vec<&Experience> = (0..BATCH_SIZE)
                .map(|_| {
                    let i = rng.gen_range(0..total_len);
                    if i < real.len() {
                        real.get(i).expect("in range")
                    } else {
                        sim.get(i - real.len()).expect("in range")
                    }
                })
                .collect();
            total += self.train_on(&batch)?;
        }
        Ok(Some(total / n_batches as f64))
    }

    /// One step on explicit experiences. The curiosity target is the squared error of
    /// the next-state prediction made before this step, held fixed during the step.
    pub fn train_on(&mut self, batch: &[&Experience]) -> Result<f64> {
        let targets = self.curiosity_targets(batch)?;
        let rows: Vec<Vec<f64>> = batch
            .iter()
            .map(|e| state_action_row(e.state.as_slice(), e.action, AGENT_ACTION_COUNT))
            .collect();
        let next = Matrix::from_rows(&batch.iter().map(|e| e.next_state.as_slice()).collect::<Vec<_>>())?;
        let value = Matrix {
            rows: batch.len(),
            cols: 1,
            data: targets,
        };
        let tb = TrainBatch::new(Matrix::from_rows(&rows)?, 2)
            .with_target(NEXT_STATE_HEAD, next)
            .with_target(VALUE_HEAD, value);
        self.net.train_minibatch(&tb, self.learning_rate)
    }

    /// Prediction-error targets `‖φ(s') − φ(ŝ')‖²` under the current parameters.
    pub fn curiosity_targets(&self, batch: &[&Experience]) -> Result<Vec<f64>> {
        let rows: Vec<Vec<f64>> = batch
            .iter()
            .map(|e| state_action_row(e.state.as_slice(), e.action, AGENT_ACTION_COUNT))
            .collect();
        let predicted = self.net.forward_head(&Matrix::from_rows(&rows)?, NEXT_STATE_HEAD)?;
        Ok(batch
            .iter()
            .enumerate()
            .map(|(i, e)| prediction_error(e.next_state.as_slice(), predicted.row(i)))
            .collect())
    }

    pub fn to_checkpoint(&self) -> ModelCheckpoint {
        self.net.to_checkpoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_definition() {
        let a = vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        assert_eq!(prediction_error(&a, &a), 0.0);
        let b = vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0];
        assert_eq!(prediction_error(&a, &b), 4.0);
    }

    #[test]
    fn values_are_nonnegative_for_all_actions() {
        let cm = CuriosityModel::new(5).unwrap();
        let mut s = vec![0.0; STATE_DIM];
        s[0] = 1.0;
        s[60] = 1.0;
        let v = cm.curiosity_values(&StateVector(s.clone())).unwrap();
        assert_eq!(v.len(), 29);
        assert!(v.iter().all(|c| *c >= 0.0));
        let scores = cm.curiosity_scores(&StateVector(s)).unwrap();
        assert_eq!(scores.values, v);
        assert_eq!((scores.predicted_next.rows, scores.predicted_next.cols), (29, 129));
    }

    #[test]
    fn zero_weights_give_identical_values() {
        let mut cm = CuriosityModel::new(5).unwrap();
        let n = cm.net.parameter_count();
        let mut p = vec![0.0; n];
        p[n - 1] = 0.75;
        cm.net.set_params(&p).unwrap();
        let v = cm.curiosity_values(&StateVector(vec![1.0; STATE_DIM])).unwrap();
        assert!(v.iter().all(|c| *c == 0.75));
        p[n - 1] = -0.5;
        cm.net.set_params(&p).unwrap();
        let v = cm.curiosity_values(&StateVector(vec![1.0; STATE_DIM])).unwrap();
        assert!(v.iter().all(|c| *c == 0.0));
    }
}
