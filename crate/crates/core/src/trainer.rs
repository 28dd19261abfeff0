//! Training loop: warm start, direct RL, world-model learning, planning, curiosity
//! training and stage-boundary evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{BufferKind, DqnAgent, ReplayBuffer, BATCH_SIZE, BUFFER_CAPACITY, DEFAULT_EPSILON};
use crate::curiosity::CuriosityModel;
use crate::curriculum::{build_buffers, sample_goal, DifficultyLevel, GoalBuffers, Schedule, ScheduleName, Stage, TOTAL_EPOCHS};
use crate::dialog::{run_episode, run_rule_episode, RewardConfig, DEFAULT_MAX_TURNS};
use crate::error::{Error, Result};
use crate::goal::{default_goal_counts, generate_goal_set, load_goals, UserGoal, MAX_REQUEST_SLOTS};
use crate::kb::{generate_kb, KnowledgeBase};
use crate::nn::DEFAULT_LEARNING_RATE;
use crate::ontology::{ActionRoster, AGENT_ACTION_COUNT};
use crate::world_model::{plan, PlanningPolicy, PlanningSetup, UserActDecoding, WorldModel};

pub const DEFAULT_KB_SIZE: usize = 991;
pub const DEFAULT_DATA_SEED: u64 = 7;
pub const STAGES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "DQN")]
    Dqn,
    #[serde(rename = "DDQ")]
    Ddq,
    #[serde(rename = "C-DDQ")]
    CDdq,
    #[serde(rename = "S-DDQ")]
    SDdq,
    #[serde(rename = "SC-DDQ")]
    ScDdq,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Dqn, Method::Ddq, Method::CDdq, Method::SDdq, Method::ScDdq];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dqn => "DQN",
            Method::Ddq => "DDQ",
            Method::CDdq => "C-DDQ",
            Method::SDdq => "S-DDQ",
            Method::ScDdq => "SC-DDQ",
        }
    }

    pub fn uses_planning(self) -> bool {
        self != Method::Dqn
    }

    pub fn uses_curiosity(self) -> bool {
        matches!(self, Method::CDdq | Method::ScDdq)
    }

    pub fn is_scheduled(self) -> bool {
        matches!(self, Method::SDdq | Method::ScDdq)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == upper)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub method: Method,
    pub schedule: ScheduleName,
    /// Required when `schedule` is `CUSTOM`.
    pub custom_stages: Option<[Stage; 4]>,
    /// Label used in the run id.
    pub seed: u64,
    /// Master seed for every random stream; defaults to `seed`.
    pub rng_seed: Option<u64>,
    pub epochs: usize,
    pub real_dialogs_per_epoch: usize,
    pub planning_rounds: usize,
    pub warm_start_dialogs: usize,
    pub warm_start_batches: usize,
    /// Minibatches per network update; `None` means one pass over the buffer.
    pub update_batches: Option<usize>,
    pub epsilon: f64,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    pub max_turns: usize,
    pub eval_episodes: usize,
    pub eval_with_curiosity: bool,
    pub planning_decoding: UserActDecoding,
    pub kb_size: usize,
    pub goal_counts: BTreeMap<usize, usize>,
    pub data_seed: u64,
    pub kb_path: Option<PathBuf>,
    pub goals_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub write_checkpoints: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            method: Method::Ddq,
            schedule: ScheduleName::Random,
            custom_stages: None,
            seed: 1,
            rng_seed: None,
            epochs: TOTAL_EPOCHS,
            real_dialogs_per_epoch: 30,
            planning_rounds: 5,
            warm_start_dialogs: 100,
            warm_start_batches: 50,
            update_batches: None,
            epsilon: DEFAULT_EPSILON,
            learning_rate: DEFAULT_LEARNING_RATE,
            buffer_capacity: BUFFER_CAPACITY,
            max_turns: DEFAULT_MAX_TURNS,
            eval_episodes: 50,
            eval_with_curiosity: false,
            planning_decoding: UserActDecoding::Argmax,
            kb_size: DEFAULT_KB_SIZE,
            goal_counts: default_goal_counts(),
            data_seed: DEFAULT_DATA_SEED,
            kb_path: None,
            goals_path: None,
            out_dir: PathBuf::from("runs"),
            write_checkpoints: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }

    pub fn run_id(&self) -> String {
        format!("{}_{}_{}", self.method, self.schedule, self.seed)
    }

    pub fn master_seed(&self) -> u64 {
        self.rng_seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.method.is_scheduled() && self.schedule == ScheduleName::Random {
            return Err(Error::config(
                "schedule",
                format!("{} needs a non-RANDOM schedule", self.method),
            ));
        }
        if self.schedule == ScheduleName::Custom && self.custom_stages.is_none() {
            return Err(Error::config("custom_stages", "required for a CUSTOM schedule"));
        }
        if self.epochs < STAGES {
            return Err(Error::config("epochs", format!("must be at least {STAGES}")));
        }
        if self.real_dialogs_per_epoch == 0 {
            return Err(Error::config("real_dialogs_per_epoch", "must be positive"));
        }
        if self.update_batches == Some(0) {
            return Err(Error::config("update_batches", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::config("epsilon", "must lie in [0, 1]"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::config("learning_rate", "must be positive and finite"));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::config("buffer_capacity", "must be positive"));
        }
        if self.max_turns == 0 {
            return Err(Error::config("max_turns", "must be positive"));
        }
        if self.eval_episodes == 0 {
            return Err(Error::config("eval_episodes", "must be positive"));
        }
        if self.kb_size == 0 {
            return Err(Error::config("kb_size", "must be positive"));
        }
        if let Some(k) = self.goal_counts.keys().find(|k| !(1..=MAX_REQUEST_SLOTS).contains(*k)) {
            return Err(Error::config(
                "goal_counts",
                format!("request-slot count {k} outside 1..={MAX_REQUEST_SLOTS}"),
            ));
        }
        for (field, path) in [("kb_path", &self.kb_path), ("goals_path", &self.goals_path)] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(Error::config(field, format!("{} does not exist", p.display())));
                }
            }
        }
        self.schedule()?;
        Ok(())
    }

    pub fn schedule(&self) -> Result<Schedule> {
        match (self.schedule, self.custom_stages) {
            (ScheduleName::Custom, Some(stages)) => {
                Schedule::custom(stages).map_err(|e| Error::config("custom_stages", e.to_string()))
            }
            (name, _) => Schedule::named(name).map_err(|e| Error::config("schedule", e.to_string())),
        }
    }

    /// Loads or generates the knowledge base and goal set.
    pub fn load_data(&self) -> Result<(KnowledgeBase, Vec<UserGoal>)> {
        let kb = match &self.kb_path {
            Some(p) => KnowledgeBase::load(p)?,
            None => generate_kb(self.data_seed, self.kb_size)?,
        };
        let goals = match &self.goals_path {
            Some(p) => load_goals(p)?,
            None => generate_goal_set(&kb, &self.goal_counts, self.data_seed)?,
        };
        Ok((kb, goals))
    }
}

/// Schedule epoch for training epoch `epoch` of `total`; identity when `total = 300`.
pub fn schedule_epoch(epoch: usize, total: usize) -> usize {
    epoch * TOTAL_EPOCHS / total
}

/// Per-run master seed for an experiment grid, independent of execution order.
pub fn derive_run_seed(master_seed: u64, method: Method, schedule: ScheduleName, seed_index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(method.as_str().as_bytes());
    h.update([0]);
    h.update(schedule.as_str().as_bytes());
    h.update(seed_index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// Independent random streams of one run, all derived from the master seed.
#[derive(Debug, Clone)]
struct Streams {
    env: ChaCha8Rng,
    agent: ChaCha8Rng,
    replay: ChaCha8Rng,
    planning: ChaCha8Rng,
}

const INIT_STREAM: u64 = 0;
const ENV_STREAM: u64 = 1;
const AGENT_STREAM: u64 = 2;
const REPLAY_STREAM: u64 = 3;
const PLANNING_STREAM: u64 = 4;
const EVAL_STREAM: u64 = 5;

fn stream(master: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// One step of an epoch, logged in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    DetermineLevel,
    RealDialogs,
    DqnReal,
    WorldModel,
    Planning,
    DqnSimulated,
    Curiosity,
    SyncTarget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    /// 1-based stage.
    pub stage: usize,
    pub level: DifficultyLevel,
    pub train_success: f64,
    pub mean_reward: f64,
    pub action_counts: Vec<u64>,
    pub agent_turns: usize,
    pub dqn_loss: Option<f64>,
    pub world_loss: Option<f64>,
    pub curiosity_loss: Option<f64>,
    pub real_buffer_len: usize,
    pub sim_buffer_len: usize,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub checkpoint_epoch: usize,
    pub stage: usize,
    pub level: DifficultyLevel,
    pub episodes: usize,
    pub success_rate: f64,
    /// Mean of user plus agent turns.
    pub avg_turns: f64,
}

/// Full mutable state of one training run.
pub struct Trainer {
    pub config: RunConfig,
    pub kb: KnowledgeBase,
    pub roster: ActionRoster,
    pub reward: RewardConfig,
    pub goals: GoalBuffers,
    pub schedule: Schedule,
    pub agent: DqnAgent,
    pub world: Option<WorldModel>,
    pub curiosity: Option<CuriosityModel>,
    pub real: ReplayBuffer,
    pub sim: ReplayBuffer,
    pub stage_actions: [Vec<u64>; STAGES],
    streams: Streams,
}

impl Trainer {
    pub fn new(config: RunConfig, kb: KnowledgeBase, goals: &[UserGoal]) -> Result<Self> {
        config.validate()?;
        let schedule = config.schedule()?;
        let goals = build_buffers(goals)?;
        let master = config.master_seed();
        let mut init = stream(master, INIT_STREAM);
        let mut agent = DqnAgent::new(init.gen())?;
        agent.epsilon = config.epsilon;
        agent.learning_rate = config.learning_rate;
        let world_seed: u64 = init.gen();
        let curiosity_seed: u64 = init.gen();
        let world = if config.method.uses_planning() {
            let mut wm = WorldModel::new(world_seed)?;
            wm.learning_rate = config.learning_rate;
            Some(wm)
        } else {
            None
        };
        let curiosity = if config.method.uses_curiosity() {
            let mut cm = CuriosityModel::new(curiosity_seed)?;
            cm.learning_rate = config.learning_rate;
            Some(cm)
        } else {
            None
        };
        Ok(Trainer {
            reward: RewardConfig::for_max_turns(config.max_turns)?,
            roster: ActionRoster::default(),
            real: ReplayBuffer::new(BufferKind::Real, config.buffer_capacity),
            sim: ReplayBuffer::new(BufferKind::Simulated, config.buffer_capacity),
            stage_actions: std::array::from_fn(|_| vec![0; AGENT_ACTION_COUNT]),
            streams: Streams {
                env: stream(master, ENV_STREAM),
                agent: stream(master, AGENT_STREAM),
                replay: stream(master, REPLAY_STREAM),
                planning: stream(master, PLANNING_STREAM),
            },
            config,
            kb,
            goals,
            schedule,
            agent,
            world,
            curiosity,
        })
    }

    /// Loads data per the config and builds a trainer.
    pub fn from_config(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let (kb, goals) = config.load_data()?;
        Trainer::new(config, kb, &goals)
    }

    fn n_batches(&self, buffer_len: usize) -> usize {
        self.config
            .update_batches
            .unwrap_or_else(|| (buffer_len / BATCH_SIZE).max(1))
    }

    /// 1-based stage and level for a training epoch.
    pub fn stage_of(&self, epoch: usize) -> Result<(usize, DifficultyLevel)> {
        let e = schedule_epoch(epoch, self.config.epochs);
        Ok((self.schedule.stage_index(e)?, self.schedule.stage_for_epoch(e)?))
    }

    /// Whether an evaluation follows training epoch `epoch`.
    pub fn is_stage_end(&self, epoch: usize) -> Result<bool> {
        if epoch + 1 >= self.config.epochs {
            return Ok(true);
        }
        Ok(self.stage_of(epoch)?.0 != self.stage_of(epoch + 1)?.0)
    }

    /// Fills the real buffer with rule-agent dialogs on stage-1 goals, then pre-trains
    /// the Q-network on them. Returns the number of stored experiences.
    pub fn warm_start(&mut self) -> Result<usize> {
        if !self.real.is_empty() {
            return Err(Error::ContractViolation("warm start needs an empty real buffer".into()));
        }
        let level = self.schedule.stages[0].level;
        let mut stored = 0;
        for _ in 0..self.config.warm_start_dialogs {
            let goal = sample_goal(&self.goals, level, &mut self.streams.env)?;
            let ep = run_rule_episode(&self.kb, &self.roster, self.reward, &goal, &mut self.streams.env)?;
            stored += ep.experiences.len();
            for e in ep.experiences {
                self.real.store(e);
            }
        }
        if self.config.warm_start_batches > 0 {
            self.agent
                .dqn_update(&self.real, self.config.warm_start_batches, &mut self.streams.replay)?;
            self.agent.sync_target();
        }
        Ok(stored)
    }

    /// One epoch of the training loop.
    pub fn run_epoch(&mut self, epoch: usize) -> Result<EpochReport> {
        let mut phases = vec![Phase::DetermineLevel];
        let (stage, level) = self.stage_of(epoch)?;

        phases.push(Phase::RealDialogs);
        let mut action_counts = vec![0u64; AGENT_ACTION_COUNT];
        let mut successes = 0usize;
        let mut reward_sum = 0.0;
        let mut agent_turns = 0usize;
        for _ in 0..self.config.real_dialogs_per_epoch {
            let goal = sample_goal(&self.goals, level, &mut self.streams.env)?;
            let agent = &self.agent;
            let curiosity = self.curiosity.as_ref();
            let agent_rng = &mut self.streams.agent;
            let ep = run_episode(&self.kb, &self.roster, self.reward, &goal, &mut self.streams.env, |_, s| {
                match curiosity {
                    Some(cm) => agent.select_action_curiosity(cm, s, agent_rng),
                    None => agent.select_action_eps_greedy(s, agent_rng),
                }
            })?;
            successes += usize::from(ep.success);
            reward_sum += ep.total_reward;
            agent_turns += ep.agent_turns;
            for &a in &ep.actions {
                action_counts[a] += 1;
            }
            for e in ep.experiences {
                self.real.store(e);
            }
        }
        for (acc, c) in self.stage_actions[stage - 1].iter_mut().zip(&action_counts) {
            *acc += c;
        }

        phases.push(Phase::DqnReal);
        let n = self.n_batches(self.real.len());
        let mut dqn_loss = self.agent.dqn_update(&self.real, n, &mut self.streams.replay)?;

        let mut world_loss = None;
        if let Some(wm) = self.world.as_mut() {
            phases.push(Phase::WorldModel);
            let n = self.config.update_batches.unwrap_or((self.real.len() / BATCH_SIZE).max(1));
            world_loss = wm.train(&self.real, n, &mut self.streams.replay)?;

            phases.push(Phase::Planning);
            let setup = PlanningSetup {
                kb: &self.kb,
                roster: &self.roster,
                max_turns: self.config.max_turns,
                rounds: self.config.planning_rounds,
                dialogs_per_round: self.config.real_dialogs_per_epoch,
                decoding: self.config.planning_decoding,
            };
            let policy = match self.curiosity.as_ref() {
                Some(cm) => PlanningPolicy::Curiosity(cm),
                None => PlanningPolicy::EpsGreedy,
            };
            let goals = &self.goals;
            plan(
                &setup,
                &self.agent,
                policy,
                wm,
                |rng| sample_goal(goals, level, rng),
                &mut self.sim,
                &mut self.streams.planning,
            )?;

            phases.push(Phase::DqnSimulated);
            let n = self.n_batches(self.sim.len());
            if let Some(l) = self.agent.dqn_update(&self.sim, n, &mut self.streams.replay)? {
                dqn_loss = Some(dqn_loss.map_or(l, |r| (r + l) / 2.0));
            }
        }

        let mut curiosity_loss = None;
        if let Some(cm) = self.curiosity.as_mut() {
            phases.push(Phase::Curiosity);
            let n = self
                .config
                .update_batches
                .unwrap_or(((self.real.len() + self.sim.len()) / BATCH_SIZE).max(1));
            curiosity_loss = cm.train(&self.real, &self.sim, n, &mut self.streams.replay)?;
        }

        phases.push(Phase::SyncTarget);
        self.agent.sync_target();

        let dialogs = self.config.real_dialogs_per_epoch as f64;
        Ok(EpochReport {
            epoch,
            stage,
            level,
            train_success: successes as f64 / dialogs,
            mean_reward: reward_sum / dialogs,
            action_counts,
            agent_turns,
            dqn_loss,
            world_loss,
            curiosity_loss,
            real_buffer_len: self.real.len(),
            sim_buffer_len: self.sim.len(),
            phases,
        })
    }

    /// Evaluates the current policy on goals from `level` with its own random stream.
    pub fn evaluate(&self, level: DifficultyLevel, checkpoint_epoch: usize, stage: usize) -> Result<EvalReport> {
        let mut rng = stream(self.config.master_seed() ^ checkpoint_epoch as u64, EVAL_STREAM);
        let curiosity = if self.config.eval_with_curiosity {
            self.curiosity.as_ref()
        } else {
            None
        };
        let summary = evaluate_policy(
            &self.agent,
            curiosity,
            &self.kb,
            &self.roster,
            self.reward,
            self.goals.level(level),
            self.config.eval_episodes,
            &mut rng,
        )?;
        Ok(EvalReport {
            checkpoint_epoch,
            stage,
            level,
            episodes: self.config.eval_episodes,
            success_rate: summary.success_rate,
            avg_turns: summary.avg_turns,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub success_rate: f64,
    pub avg_turns: f64,
}

/// Runs `n` dialogs with a frozen agent acting greedily (ε = 0). With `curiosity`,
/// actions maximise `Q + c` instead.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_policy<R: Rng + ?Sized>(
    agent: &DqnAgent,
    curiosity: Option<&CuriosityModel>,
    kb: &KnowledgeBase,
    roster: &ActionRoster,
    reward: RewardConfig,
    goals: &[UserGoal],
    n: usize,
    rng: &mut R,
) -> Result<EvalSummary> {
    if goals.is_empty() {
        return Err(Error::Sampling("no goals to evaluate on".into()));
    }
    let mut successes = 0usize;
    let mut turns = 0usize;
    for _ in 0..n {
        let goal = &goals[rng.gen_range(0..goals.len())];
        let ep = run_episode(kb, roster, reward, goal, rng, |_, s| match curiosity {
            Some(cm) => {
                let c = cm.curiosity_values(s)?;
                let q = agent.q_values(s)?;
                let sums: Vec<f64> = q.iter().zip(&c).map(|(a, b)| a + b).collect();
                Ok(crate::agent::argmax(&sums))
            }
            None => agent.greedy_action(s),
        })?;
        successes += usize::from(ep.success);
        turns += 2 * ep.agent_turns;
    }
    Ok(EvalSummary {
        success_rate: successes as f64 / n as f64,
        avg_turns: turns as f64 / n as f64,
    })
}

/// Same as [`evaluate_policy`] for the rule-based agent.
pub fn evaluate_rule_agent<R: Rng + ?Sized>(
    kb: &KnowledgeBase,
    roster: &ActionRoster,
    reward: RewardConfig,
    goals: &[UserGoal],
    n: usize,
    rng: &mut R,
) -> Result<EvalSummary> {
    if goals.is_empty() {
        return Err(Error::Sampling("no goals to evaluate on".into()));
    }
    let mut successes = 0usize;
    let mut turns = 0usize;
    for _ in 0..n {
        let goal = &goals[rng.gen_range(0..goals.len())];
        let ep = run_rule_episode(kb, roster, reward, goal, rng)?;
        successes += usize::from(ep.success);
        turns += 2 * ep.agent_turns;
    }
    Ok(EvalSummary {
        success_rate: successes as f64 / n as f64,
        avg_turns: turns as f64 / n as f64,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub run_id: String,
    pub epochs: Vec<EpochReport>,
    pub evals: Vec<EvalReport>,
    pub stage_actions: [Vec<u64>; STAGES],
    pub run_dir: Option<PathBuf>,
}

/// Warm start, every epoch and the four stage-end evaluations, without touching disk.
pub fn train_in_memory(trainer: &mut Trainer) -> Result<RunOutput> {
    train_with_hook(trainer, |_, _| Ok(()))
}

fn train_with_hook<F>(trainer: &mut Trainer, mut at_stage_end: F) -> Result<RunOutput>
where
    F: FnMut(&Trainer, &EvalReport) -> Result<()>,
{
    trainer.warm_start()?;
    let mut epochs = Vec::with_capacity(trainer.config.epochs);
    let mut evals = Vec::with_capacity(STAGES);
    for epoch in 0..trainer.config.epochs {
        let report = trainer.run_epoch(epoch).map_err(|e| Error::Epoch {
            epoch,
            source: Box::new(e),
        })?;
        log::debug!(
            "epoch {epoch} stage {} success {:.2} reward {:.2}",
            report.stage,
            report.train_success,
            report.mean_reward
        );
        if trainer.is_stage_end(epoch)? {
            let level = if report.stage == STAGES {
                DifficultyLevel::All
            } else {
                report.level
            };
            let eval = trainer.evaluate(level, epoch + 1, report.stage)?;
            log::info!(
                "{} after epoch {}: success {:.2}, turns {:.1}",
                trainer.config.run_id(),
                epoch + 1,
                eval.success_rate,
                eval.avg_turns
            );
            at_stage_end(trainer, &eval)?;
            evals.push(eval);
        }
        epochs.push(report);
    }
    Ok(RunOutput {
        run_id: trainer.config.run_id(),
        epochs,
        evals,
        stage_actions: trainer.stage_actions.clone(),
        run_dir: None,
    })
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    run_id: &'a str,
    method: &'a str,
    schedule: &'a str,
    seed: u64,
    epoch: usize,
    stage: usize,
    train_success: f64,
    mean_reward: f64,
    dqn_loss: Option<f64>,
    world_loss: Option<f64>,
    curiosity_loss: Option<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct EvalRow {
    pub run_id: String,
    pub checkpoint_epoch: usize,
    pub success_rate: f64,
    pub avg_turns: f64,
}

#[derive(Serialize, Deserialize)]
pub struct ActionRow {
    pub run_id: String,
    pub stage: usize,
    pub action_index: usize,
    pub count: u64,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path.display().to_string(), format!("{other:?}")),
    }
}

fn write_checkpoints(trainer: &Trainer, dir: &Path) -> Result<()> {
    crate::io::write_json(&dir.join("agent.json"), &trainer.agent.to_checkpoint())?;
    if let Some(wm) = &trainer.world {
        crate::io::write_json(&dir.join("world_model.json"), &wm.to_checkpoint())?;
    }
    if let Some(cm) = &trainer.curiosity {
        crate::io::write_json(&dir.join("curiosity.json"), &cm.to_checkpoint())?;
    }
    Ok(())
}

/// Runs a full experiment and writes `metrics.csv`, `eval.csv`, `actions.csv`,
/// `config.json` and stage checkpoints under `out_dir/{run_id}`.
pub fn run_experiment(config: RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let run_dir = config.out_dir.join(config.run_id());
    let mut trainer = Trainer::from_config(config)?;
    std::fs::create_dir_all(&run_dir).map_err(|e| Error::io(&run_dir, e))?;
    crate::io::write_json(&run_dir.join("config.json"), &trainer.config)?;
    let write_ckpt = trainer.config.write_checkpoints;
    let ckpt_root = run_dir.join("checkpoints");
    let mut out = train_with_hook(&mut trainer, |t, eval| {
        if write_ckpt {
            write_checkpoints(t, &ckpt_root.join(format!("epoch_{}", eval.checkpoint_epoch)))?;
        }
        Ok(())
    })?;
    write_run_files(&trainer.config, &out, &run_dir)?;
    out.run_dir = Some(run_dir);
    Ok(out)
}

pub fn write_run_files(config: &RunConfig, out: &RunOutput, run_dir: &Path) -> Result<()> {
    let run_id = config.run_id();
    let path = run_dir.join("metrics.csv");
    let mut w = csv_writer(&path)?;
    for r in &out.epochs {
        w.serialize(MetricsRow {
            run_id: &run_id,
            method: config.method.as_str(),
            schedule: config.schedule.as_str(),
            seed: config.seed,
            epoch: r.epoch,
            stage: r.stage,
            train_success: r.train_success,
            mean_reward: r.mean_reward,
            dqn_loss: r.dqn_loss,
            world_loss: r.world_loss,
            curiosity_loss: r.curiosity_loss,
        })
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = run_dir.join("eval.csv");
    let mut w = csv_writer(&path)?;
    for e in &out.evals {
        w.serialize(EvalRow {
            run_id: run_id.clone(),
            checkpoint_epoch: e.checkpoint_epoch,
            success_rate: e.success_rate,
            avg_turns: e.avg_turns,
        })
        .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = run_dir.join("actions.csv");
    let mut w = csv_writer(&path)?;
    for (stage, counts) in out.stage_actions.iter().enumerate() {
        for (action_index, &count) in counts.iter().enumerate() {
            w.serialize(ActionRow {
                run_id: run_id.clone(),
                stage: stage + 1,
                action_index,
                count,
            })
            .map_err(|e| csv_error(&path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(())
}
