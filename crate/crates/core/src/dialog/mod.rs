//! The dialog environment: user simulator, state tracker and rule-based agent.

pub mod rule_agent;
pub mod simulator;
pub mod state;

use rand::Rng;

pub use rule_agent::{rule_agent_action, rule_based_agent_act};
pub use simulator::{
    judge_success, opening_act, realize_agent_action, user_response, write_transcript, DialogEnv,
    RewardConfig, Speaker, StepOutcome, TranscriptEntry, DEFAULT_MAX_TURNS, REQUEST_PRIORITY,
};
pub use state::{encode_state, DialogState, StateVector, STATE_DIM};

use crate::agent::Experience;
use crate::error::{Error, Result};
use crate::goal::UserGoal;
use crate::kb::KnowledgeBase;
use crate::ontology::ActionRoster;

/// Everything recorded from one finished real episode.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub experiences: Vec<Experience>,
    pub transcript: Vec<TranscriptEntry>,
    pub success: bool,
    pub agent_turns: usize,
    pub total_reward: f64,
    pub actions: Vec<usize>,
}

/// Runs one episode against the user simulator. `policy` maps the tracker state and
/// its encoding to an agent action index.
pub fn run_episode<R, P>(
    kb: &KnowledgeBase,
    roster: &ActionRoster,
    reward: RewardConfig,
    goal: &UserGoal,
    env_rng: &mut R,
    mut policy: P,
) -> Result<EpisodeResult>
where
    R: Rng + ?Sized,
    P: FnMut(&DialogState, &StateVector) -> Result<usize>,
{
    let mut env = DialogEnv::reset(kb, reward, goal, env_rng)?;
    let mut experiences = Vec::new();
    let mut actions = Vec::new();
    let mut total_reward = 0.0;
    while !env.is_done() {
        let s = env.state().encode();
        let action = policy(env.state(), &s)?;
        let act = realize_agent_action(roster, action, env.state(), kb)?;
        let outcome = env.step(&act)?;
        let user_action = roster.user_action_index(&outcome.user_act).ok_or_else(|| {
            Error::ContractViolation(format!(
                "user act {:?} has no roster template",
                outcome.user_act
            ))
        })?;
        total_reward += outcome.reward;
        actions.push(action);
        experiences.push(Experience {
            state: s,
            action,
            reward: outcome.reward,
            user_action,
            next_state: env.state().encode(),
            done: outcome.done,
        });
    }
    Ok(EpisodeResult {
        experiences,
        transcript: env.transcript().to_vec(),
        success: env.success().unwrap_or(false),
        agent_turns: env.agent_turns(),
        total_reward,
        actions,
    })
}

/// Runs the rule-based agent for one episode.
pub fn run_rule_episode<R: Rng + ?Sized>(
    kb: &KnowledgeBase,
    roster: &ActionRoster,
    reward: RewardConfig,
    goal: &UserGoal,
    env_rng: &mut R,
) -> Result<EpisodeResult> {
    run_episode(kb, roster, reward, goal, env_rng, |state, _| {
        Ok(rule_agent_action(roster, state))
    })
}
