//! DQN dialog policy with real and simulated replay buffers.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curiosity::CuriosityModel;
use crate::dialog::{StateVector, STATE_DIM};
use crate::error::{Error, Result};
use crate::nn::{Activation, LossKind, Matrix, MlpModel, ModelCheckpoint, ModelSpec, TrainBatch};
use crate::ontology::AGENT_ACTION_COUNT;

pub const BATCH_SIZE: usize = 16;
pub const BUFFER_CAPACITY: usize = 5000;
pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const Q_HIDDEN: usize = 80;

/// One transition `(s, a, r, a_user, s', done)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: StateVector,
    pub action: usize,
    pub reward: f64,
    pub user_action: usize,
    pub next_state: StateVector,
    pub done: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BufferKind {
    /// Experiences from dialogs with the user simulator.
    Real,
    /// Experiences produced by planning against the world model.
    Simulated,
}

/// Bounded FIFO replay buffer; the oldest entry is evicted first.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    kind: BufferKind,
    capacity: usize,
    entries: VecDeque<Experience>,
}

impl ReplayBuffer {
    pub fn new(kind: BufferKind, capacity: usize) -> Self {
        ReplayBuffer {
            kind,
            capacity: capacity.max(1),
            entries: VecDeque::with_capacity(capacity.max(1)),
        }
    }

    pub fn kind(&self) -> BufferKind {
        self.kind
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn store(&mut self, experience: Experience) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(experience);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.entries.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Experience> {
        self.entries.get(index)
    }

    /// `n` entries drawn uniformly with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Experience> {
        if self.entries.is_empty() {
            return Vec::new();
        }
        (0..n)
            .map(|_| &self.entries[rng.gen_range(0..self.entries.len())])
            .collect()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Input row `state ‖ onehot(action)` used by the world and curiosity models.
pub fn state_action_row(state: &[f64], action: usize, n_actions: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(state.len() + n_actions);
    row.extend_from_slice(state);
    row.extend((0..n_actions).map(|a| if a == action { 1.0 } else { 0.0 }));
    row
}

pub fn q_network_spec() -> ModelSpec {
    ModelSpec::build(
        STATE_DIM,
        &[Q_HIDDEN],
        &[("q", &[], AGENT_ACTION_COUNT, Activation::Linear, LossKind::Mse)],
    )
}

#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub q_net: MlpModel,
    pub target_net: MlpModel,
    pub gamma: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    /// Minibatch updates applied to `q_net` so far.
    pub updates: u64,
}

impl DqnAgent {
    pub fn new(seed: u64) -> Result<Self> {
        let q_net = MlpModel::new(q_network_spec(), seed)?;
        let target_net = q_net.clone();
        Ok(DqnAgent {
            q_net,
            target_net,
            gamma: DEFAULT_GAMMA,
            epsilon: DEFAULT_EPSILON,
            learning_rate: crate::nn::DEFAULT_LEARNING_RATE,
            updates: 0,
        })
    }

    pub fn n_actions(&self) -> usize {
        AGENT_ACTION_COUNT
    }

    pub fn q_values(&self, state: &StateVector) -> Result<Vec<f64>> {
        let x = Matrix::from_rows(&[state.as_slice()])?;
        Ok(self.q_net.forward_head(&x, 0)?.data)
    }

    /// With probability ε a uniform action, otherwise `argmax(Q + bonus)`.
    /// One uniform draw decides exploration; a second picks the random action.
    fn select_with_bonus<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        bonus: Option<&[f64]>,
        rng: &mut R,
    ) -> Result<usize> {
        let explore = rng.gen::<f64>() < self.epsilon;
        if explore {
            return Ok(rng.gen_range(0..self.n_actions()));
        }
        let mut q = self.q_values(state)?;
        if let Some(c) = bonus {
            if c.len() != q.len() {
                return Err(Error::Shape {
                    expected: q.len(),
                    actual: c.len(),
                });
            }
            for (qa, ca) in q.iter_mut().zip(c) {
                *qa += ca;
            }
        }
        Ok(argmax(&q))
    }

    pub fn select_action_eps_greedy<R: Rng + ?Sized>(&self, state: &StateVector, rng: &mut R) -> Result<usize> {
        self.select_with_bonus(state, None, rng)
    }

    /// `argmax_a [Q(s, a) + c_a]` with unweighted curiosity values, after the same
    /// ε-exploration draw as [`DqnAgent::select_action_eps_greedy`].
    pub fn select_action_curiosity<R: Rng + ?Sized>(
        &self,
        curiosity: &CuriosityModel,
        state: &StateVector,
        rng: &mut R,
    ) -> Result<usize> {
        let explore = rng.gen::<f64>() < self.epsilon;
        if explore {
            return Ok(rng.gen_range(0..self.n_actions()));
        }
        let c = curiosity.curiosity_values(state)?;
        let q = self.q_values(state)?;
        let sums: Vec<f64> = q.iter().zip(&c).map(|(a, b)| a + b).collect();
        Ok(argmax(&sums))
    }

    /// Same as [`DqnAgent::select_action_curiosity`] with precomputed curiosity values.
    pub fn select_action_with_values<R: Rng + ?Sized>(
        &self,
        state: &StateVector,
        curiosity_values: &[f64],
        rng: &mut R,
    ) -> Result<usize> {
        self.select_with_bonus(state, Some(curiosity_values), rng)
    }

    pub fn greedy_action(&self, state: &StateVector) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    /// Q-learning target for one transition.
    pub fn td_target(&self, reward: f64, done: bool, max_next_q: f64) -> f64 {
        if done {
            reward
        } else {
            reward + self.gamma * max_next_q
        }
    }

    /// `n_batches` minibatch updates of `q_net` on samples from `buffer`; the target
    /// network only supplies bootstrap values. Returns the mean loss, or `None` when
    /// the buffer is empty.
    pub fn dqn_update<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer,
        n_batches: usize,
        rng: &mut R,
    ) -> Result<Option<f64>> {
        if buffer.is_empty() {
            log::warn!("dqn update skipped: {:?} buffer is empty", buffer.kind());
            return Ok(None);
        }
        if n_batches == 0 {
            return Ok(None);
        }
        let mut total = 0.0;
        for _ in 0..n_batches {
            let batch = buffer.sample(BATCH_SIZE, rng);
            let inputs = Matrix::from_rows(&batch.iter().map(|e| e.state.as_slice()).collect::<Vec<_>>())?;
            let next = Matrix::from_rows(&batch.iter().map(|e| e.next_state.as_slice()).collect::<Vec<_>>())?;
            let next_q = self.target_net.forward_head(&next, 0)?;
            let mut targets = Matrix::zeros(batch.len(), self.n_actions());
            let mut mask = Matrix::zeros(batch.len(), self.n_actions());
            for (i, e) in batch.iter().enumerate() {
                let max_next = next_q.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let y = self.td_target(e.reward, e.done, max_next);
                targets.row_mut(i)[e.action] = y;
                mask.row_mut(i)[e.action] = 1.0;
            }
            let tb = TrainBatch::new(inputs, 1).with_target(0, targets).with_mask(0, mask);
            total += self.q_net.train_minibatch(&tb, self.learning_rate)?;
            self.updates += 1;
        }
        Ok(Some(total / n_batches as f64))
    }

    /// Copies the online network into the target network.
    pub fn sync_target(&mut self) {
        self.target_net
            .copy_params_from(&self.q_net)
            .expect("target and online nets share a spec");
    }

    pub fn to_checkpoint(&self) -> AgentCheckpoint {
        AgentCheckpoint {
            q_net: self.q_net.to_checkpoint(),
            target_net: self.target_net.to_checkpoint(),
            epsilon: self.epsilon,
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            updates: self.updates,
        }
    }

    pub fn from_checkpoint(ckpt: AgentCheckpoint) -> Result<Self> {
        let q_net = MlpModel::from_checkpoint(ckpt.q_net)?;
        let target_net = MlpModel::from_checkpoint(ckpt.target_net)?;
        if q_net.spec() != target_net.spec() {
            return Err(Error::Format("target and online network specs differ".into()));
        }
        Ok(DqnAgent {
            q_net,
            target_net,
            gamma: ckpt.gamma,
            epsilon: ckpt.epsilon,
            learning_rate: ckpt.learning_rate,
            updates: ckpt.updates,
        })
    }
}

/// Agent bundle: both networks plus the exploration and discount settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentCheckpoint {
    pub q_net: ModelCheckpoint,
    pub target_net: ModelCheckpoint,
    pub epsilon: f64,
    pub gamma: f64,
    pub learning_rate: f64,
    pub updates: u64,
}
