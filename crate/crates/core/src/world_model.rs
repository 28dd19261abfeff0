//! Learned user model `M(s, a)` and planning against it.

use rand::Rng;

use crate::agent::{state_action_row, BufferKind, DqnAgent, Experience, ReplayBuffer, BATCH_SIZE};
use crate::curiosity::CuriosityModel;
use crate::dialog::{opening_act, realize_agent_action, DialogState, STATE_DIM};
use crate::error::{Error, Result};
use crate::goal::UserGoal;
use crate::kb::KnowledgeBase;
use crate::nn::{Activation, LossKind, Matrix, MlpModel, ModelCheckpoint, ModelSpec, TrainBatch};
use crate::ontology::{ActionRoster, DialogAct, Intent, Slot, AGENT_ACTION_COUNT, USER_ACTION_COUNT};

pub const WORLD_HIDDEN: usize = 80;
pub const TERMINATION_THRESHOLD: f64 = 0.5;

const USER_HEAD: usize = 0;
const REWARD_HEAD: usize = 1;
const TERM_HEAD: usize = 2;

pub fn world_model_spec() -> ModelSpec {
    let h = [WORLD_HIDDEN];
    ModelSpec::build(
        STATE_DIM + AGENT_ACTION_COUNT,
        &[WORLD_HIDDEN, WORLD_HIDDEN],
        &[
            ("user_action", &h, USER_ACTION_COUNT, Activation::Softmax, LossKind::CrossEntropy),
            ("reward", &h, 1, Activation::Linear, LossKind::Mse),
            ("termination", &h, 1, Activation::Sigmoid, LossKind::BinaryCrossEntropy),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldPrediction {
    pub user_action_probs: Vec<f64>,
    pub reward: f64,
    pub p_done: f64,
}

/// How planning decodes the user-action head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserActDecoding {
    #[default]
    Argmax,
    Sample,
}

#[derive(Debug, Clone)]
pub struct WorldModel {
    pub net: MlpModel,
    pub learning_rate: f64,
}

impl WorldModel {
    pub fn new(seed: u64) -> Result<Self> {
        Ok(WorldModel {
            net: MlpModel::new(world_model_spec(), seed)?,
            learning_rate: crate::nn::DEFAULT_LEARNING_RATE,
        })
    }

    pub fn predict(&self, state: &[f64], action: usize) -> Result<WorldPrediction> {
        if state.len() != STATE_DIM {
            return Err(Error::Shape {
                expected: STATE_DIM,
                actual: state.len(),
            });
        }
        if action >= AGENT_ACTION_COUNT {
            return Err(Error::InvalidArgument(format!("agent action {action} out of range")));
        }
        let x = Matrix::from_rows(&[state_action_row(state, action, AGENT_ACTION_COUNT)])?;
        let out = self.net.forward(&x)?;
        Ok(WorldPrediction {
            user_action_probs: out[USER_HEAD].row(0).to_vec(),
            reward: out[REWARD_HEAD].get(0, 0),
            p_done: out[TERM_HEAD].get(0, 0),
        })
    }

    /// Minibatch updates on real experience only: cross-entropy on the user action,
    /// squared error on the reward and binary cross-entropy on termination, summed.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        real: &ReplayBuffer,
        n_batches: usize,
        rng: &mut R,
    ) -> Result<Option<f64>> {
        if real.kind() != BufferKind::Real {
            return Err(Error::ContractViolation(
                "the world model learns from real experience only".into(),
            ));
        }
        if real.is_empty() {
            log::warn!("world model update skipped: real buffer is empty");
            return Ok(None);
        }
        if n_batches == 0 {
            return Ok(None);
        }
        let mut total = 0.0;
        for _ in 0..n_batches {
            let batch = real.sample(BATCH_SIZE, rng);
            total += self.train_on(&batch)?;
        }
        Ok(Some(total / n_batches as f64))
    }

    /// One RMSProp step on an explicit set of experiences.
    pub fn train_on(&mut self, batch: &[&Experience]) -> Result<f64> {
        let rows: Vec<Vec<f64>> = batch
            .iter()
            .map(|e| state_action_row(e.state.as_slice(), e.action, AGENT_ACTION_COUNT))
            .collect();
        let n = batch.len();
        let mut user = Matrix::zeros(n, USER_ACTION_COUNT);
        let mut reward = Matrix::zeros(n, 1);
        let mut term = Matrix::zeros(n, 1);
        for (i, e) in batch.iter().enumerate() {
            user.row_mut(i)[e.user_action] = 1.0;
            reward.row_mut(i)[0] = e.reward;
            term.row_mut(i)[0] = if e.done { 1.0 } else { 0.0 };
        }
        let tb = TrainBatch::new(Matrix::from_rows(&rows)?, 3)
            .with_target(USER_HEAD, user)
            .with_target(REWARD_HEAD, reward)
            .with_target(TERM_HEAD, term);
        self.net.train_minibatch(&tb, self.learning_rate)
    }

    pub fn to_checkpoint(&self) -> ModelCheckpoint {
        self.net.to_checkpoint()
    }
}

/// Fills a roster user template with values from the simulated user's goal.
/// Slots the goal has no value for are dropped.
pub fn realize_user_template(roster: &ActionRoster, index: usize, goal: &UserGoal) -> DialogAct {
    let template = &roster.user_actions[index];
    let mut act = DialogAct::bare(template.intent);
    act.request_slots.extend(template.request_slots.iter().copied());
    for slot in &template.inform_slots {
        if let Some(v) = goal.inform_slots.get(slot) {
            act.inform_slots.insert(*slot, v.clone());
        }
    }
    if act.intent == Intent::Request && act.request_slots.is_empty() {
        act.request_slots.insert(Slot::Ticket);
    }
    act
}

/// How the planning agent picks actions.
pub enum PlanningPolicy<'a> {
    EpsGreedy,
    Curiosity(&'a CuriosityModel),
}

pub struct PlanningSetup<'a> {
    pub kb: &'a KnowledgeBase,
    pub roster: &'a ActionRoster,
    pub max_turns: usize,
    pub rounds: usize,
    pub dialogs_per_round: usize,
    pub decoding: UserActDecoding,
}

/// Runs `rounds × dialogs_per_round` simulated dialogs in which the world model plays
/// the user. Next states come from the same tracker used for real dialogs. Returns the
/// number of experiences appended to `sim_buffer`.
pub fn plan<R, G>(
    setup: &PlanningSetup<'_>,
    agent: &DqnAgent,
    policy: PlanningPolicy<'_>,
    wm: &WorldModel,
    mut sample_goal: G,
    sim_buffer: &mut ReplayBuffer,
    rng: &mut R,
) -> Result<usize>
where
    R: Rng + ?Sized,
    G: FnMut(&mut R) -> Result<UserGoal>,
{
    if sim_buffer.kind() != BufferKind::Simulated {
        return Err(Error::ContractViolation(
            "planning writes to the simulated buffer only".into(),
        ));
    }
    let mut stored = 0;
    for _ in 0..setup.rounds * setup.dialogs_per_round {
        let goal = sample_goal(rng)?;
        let first = opening_act(&goal, rng);
        let mut state = DialogState::start(&first, goal.request_slots.clone(), setup.kb);
        loop {
            let s = state.encode();
            let action = match policy {
                PlanningPolicy::EpsGreedy => agent.select_action_eps_greedy(&s, rng)?,
                PlanningPolicy::Curiosity(cm) => agent.select_action_curiosity(cm, &s, rng)?,
            };
            let pred = wm.predict(s.as_slice(), action)?;
            let user_action = match setup.decoding {
                UserActDecoding::Argmax => crate::agent::argmax(&pred.user_action_probs),
                UserActDecoding::Sample => sample_categorical(&pred.user_action_probs, rng),
            };
            let agent_act = realize_agent_action(setup.roster, action, &state, setup.kb)?;
            state.apply_agent_act(&agent_act);
            let user_act = realize_user_template(setup.roster, user_action, &goal);
            state.apply_user_act(&user_act, setup.kb);
            let done = pred.p_done > TERMINATION_THRESHOLD || state.turn >= setup.max_turns;
            sim_buffer.store(Experience {
                state: s,
                action,
                reward: pred.reward,
                user_action,
                next_state: state.encode(),
                done,
            });
            stored += 1;
            if done {
                break;
            }
        }
    }
    Ok(stored)
}

fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}
