//! Rule-based user simulator with reward emission and success judgment.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dialog::state::DialogState;
use crate::error::{Error, Result};
use crate::goal::UserGoal;
use crate::kb::{KnowledgeBase, MovieRecord};
use crate::ontology::{ActionRoster, DialogAct, Intent, Slot};

pub const DEFAULT_MAX_TURNS: usize = 40;

/// Order in which the user voices its request slots.
pub const REQUEST_PRIORITY: [Slot; 7] = [
    Slot::StartTime,
    Slot::Theater,
    Slot::Date,
    Slot::City,
    Slot::Price,
    Slot::VideoFormat,
    Slot::Ticket,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub max_turns: usize,
    pub per_turn: f64,
    pub success_bonus: f64,
    pub failure_penalty: f64,
}

impl RewardConfig {
    /// Per-turn -1, success 2L, failure -L.
    pub fn for_max_turns(max_turns: usize) -> Result<Self> {
        if max_turns == 0 {
            return Err(Error::InvalidArgument("max_turns must be positive".into()));
        }
        Ok(RewardConfig {
            max_turns,
            per_turn: -1.0,
            success_bonus: 2.0 * max_turns as f64,
            failure_penalty: -(max_turns as f64),
        })
    }
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self::for_max_turns(DEFAULT_MAX_TURNS).expect("positive default")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub user_act: DialogAct,
    pub reward: f64,
    pub done: bool,
    /// `Some` only once the episode is over.
    pub success: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    User,
    Agent,
}

/// One line of the JSON-lines transcript log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub turn: usize,
    pub speaker: Speaker,
    #[serde(flatten)]
    pub act: DialogAct,
    pub reward: Option<f64>,
}

pub fn write_transcript<W: Write>(entries: &[TranscriptEntry], mut out: W) -> std::io::Result<()> {
    for entry in entries {
        serde_json::to_writer(&mut out, entry)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Builds the user's opening act: a request for the highest-priority goal request slot,
/// carrying one to three goal constraints (the movie name whenever the goal has one).
pub fn opening_act<R: Rng + ?Sized>(goal: &UserGoal, rng: &mut R) -> DialogAct {
    let requested = REQUEST_PRIORITY
        .iter()
        .copied()
        .find(|s| goal.request_slots.contains(s))
        .or_else(|| goal.request_slots.iter().next().copied())
        .unwrap_or(Slot::Ticket);
    let mut act = DialogAct::request(requested);
    if goal.inform_slots.is_empty() {
        return act;
    }
    let carry = rng.gen_range(1..=goal.inform_slots.len().min(3));
    let mut pool: Vec<Slot> = goal
        .inform_slots
        .keys()
        .copied()
        .filter(|s| *s != Slot::MovieName)
        .collect();
    pool.shuffle(rng);
    let mut chosen = Vec::with_capacity(carry);
    if goal.inform_slots.contains_key(&Slot::MovieName) {
        chosen.push(Slot::MovieName);
    }
    chosen.extend(pool.into_iter().take(carry - chosen.len()));
    for slot in chosen {
        act.inform_slots.insert(slot, goal.inform_slots[&slot].clone());
    }
    act
}

/// Record the agent would currently offer: the first match for all known constraints,
/// falling back to the user's stated constraints alone.
pub fn offered_record<'kb>(state: &DialogState, kb: &'kb KnowledgeBase) -> Option<&'kb MovieRecord> {
    kb.first_match(&state.constraints())
        .or_else(|| kb.first_match(&state.user_informed))
}

/// Turns a roster action index into a concrete agent act for the current state.
pub fn realize_agent_action(
    roster: &ActionRoster,
    index: usize,
    state: &DialogState,
    kb: &KnowledgeBase,
) -> Result<DialogAct> {
    let template = roster
        .agent_actions
        .get(index)
        .ok_or_else(|| Error::InvalidArgument(format!("agent action index {index} out of range")))?;
    let mut act = DialogAct::bare(template.intent);
    act.request_slots.extend(template.request_slots.iter().copied());
    for slot in &template.inform_slots {
        if *slot == Slot::TaskComplete {
            match kb.first_match(&state.constraints()) {
                Some(record) => {
                    act.inform_slots.insert(Slot::TaskComplete, "booked".into());
                    for (s, v) in &record.values {
                        act.inform_slots.insert(*s, v.clone());
                    }
                }
                None => {
                    act.inform_slots.insert(Slot::TaskComplete, "none".into());
                }
            }
        } else {
            let value = offered_record(state, kb)
                .and_then(|r| r.get(*slot))
                .unwrap_or("none")
                .to_string();
            act.inform_slots.insert(*slot, value);
        }
    }
    Ok(act)
}

fn same(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

/// Next thing the user asks for: the highest-priority unanswered request, or,
/// once only `ticket` remains, the booking request with the party size.
fn pending_request(goal: &UserGoal, outstanding: &BTreeSet<Slot>) -> DialogAct {
    let next = REQUEST_PRIORITY
        .iter()
        .copied()
        .find(|s| *s != Slot::Ticket && outstanding.contains(s));
    match next {
        Some(slot) => DialogAct::request(slot),
        None => {
            let mut act = DialogAct::request(Slot::Ticket);
            if let Some(n) = goal.inform_slots.get(&Slot::NumberOfPeople) {
                act.inform_slots.insert(Slot::NumberOfPeople, n.clone());
            }
            act
        }
    }
}

/// The user's reply to a non-terminal agent act. `state` is the tracker state
/// before the agent act was applied.
pub fn user_response(
    state: &DialogState,
    agent_act: &DialogAct,
    goal: &UserGoal,
    kb: &KnowledgeBase,
) -> DialogAct {
    match agent_act.intent {
        Intent::Request => {
            let slot = agent_act.request_slots.iter().next().copied();
            match slot.and_then(|s| goal.inform_slots.get(&s).map(|v| (s, v))) {
                Some((s, v)) => DialogAct::inform(s, v.clone()),
                None => DialogAct::bare(Intent::NotSure),
            }
        }
        Intent::Inform => {
            let mut outstanding = state.user_requested_outstanding.clone();
            for (slot, value) in &agent_act.inform_slots {
                if let Some(wanted) = goal.inform_slots.get(slot) {
                    if !same(wanted, value) {
                        return DialogAct::bare(Intent::Deny);
                    }
                } else if outstanding.contains(slot) && *slot != Slot::Ticket {
                    let mut check = goal.inform_slots.clone();
                    for answered in goal.request_slots.iter() {
                        if *answered == Slot::Ticket || outstanding.contains(answered) {
                            continue;
                        }
                        if let Some(v) = state.agent_informed.get(answered) {
                            check.insert(*answered, v.clone());
                        }
                    }
                    check.insert(*slot, value.clone());
                    if kb.first_match(&check).is_none() {
                        return DialogAct::bare(Intent::Deny);
                    }
                    outstanding.remove(slot);
                }
            }
            pending_request(goal, &outstanding)
        }
        Intent::ConfirmQuestion => DialogAct::bare(Intent::ConfirmAnswer),
        _ => pending_request(goal, &state.user_requested_outstanding),
    }
}

/// Whether the booked ticket satisfies the goal: the booked record matches every goal
/// constraint and every requested slot was last informed with that record's value.
pub fn judge_success(goal: &UserGoal, transcript: &[TranscriptEntry], kb: &KnowledgeBase) -> bool {
    let Some(pos) = transcript
        .iter()
        .rposition(|e| e.speaker == Speaker::Agent && e.act.is_booking())
    else {
        return false;
    };
    let booked: BTreeMap<Slot, String> = transcript[pos]
        .act
        .inform_slots
        .iter()
        .filter(|(s, _)| **s != Slot::TaskComplete)
        .map(|(s, v)| (*s, v.clone()))
        .collect();
    if booked.is_empty() {
        return false;
    }
    let Some(record) = kb.first_match(&booked) else {
        return false;
    };
    if !record.matches(&goal.inform_slots) {
        return false;
    }
    goal.request_slots
        .iter()
        .filter(|s| **s != Slot::Ticket)
        .all(|slot| {
            let last = transcript[..pos]
                .iter()
                .rev()
                .filter(|e| e.speaker == Speaker::Agent && e.act.intent == Intent::Inform)
                .find_map(|e| e.act.inform_slots.get(slot));
            match (last, record.get(*slot)) {
                (Some(said), Some(have)) => same(said, have),
                _ => false,
            }
        })
}

/// One user-simulator episode against a fixed knowledge base.
#[derive(Debug, Clone)]
pub struct DialogEnv<'a> {
    kb: &'a KnowledgeBase,
    reward: RewardConfig,
    goal: UserGoal,
    state: DialogState,
    transcript: Vec<TranscriptEntry>,
    done: bool,
    success: Option<bool>,
}

impl<'a> DialogEnv<'a> {
    /// Starts an episode for `goal`, returning the initial state and the user's opening act.
    pub fn reset<R: Rng + ?Sized>(
        kb: &'a KnowledgeBase,
        reward: RewardConfig,
        goal: &UserGoal,
        rng: &mut R,
    ) -> Result<Self> {
        goal.validate()
            .map_err(|e| Error::EnvironmentSetup(e.to_string()))?;
        if !goal.is_satisfiable(kb) {
            return Err(Error::EnvironmentSetup(
                "goal constraints match no knowledge-base record".into(),
            ));
        }
        let first = opening_act(goal, rng);
        let state = DialogState::start(&first, goal.request_slots.clone(), kb);
        Ok(DialogEnv {
            kb,
            reward,
            goal: goal.clone(),
            state,
            transcript: vec![TranscriptEntry {
                turn: 0,
                speaker: Speaker::User,
                act: first,
                reward: None,
            }],
            done: false,
            success: None,
        })
    }

    pub fn state(&self) -> &DialogState {
        &self.state
    }

    pub fn goal(&self) -> &UserGoal {
        &self.goal
    }

    pub fn kb(&self) -> &'a KnowledgeBase {
        self.kb
    }

    pub fn first_user_act(&self) -> &DialogAct {
        &self.transcript[0].act
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn success(&self) -> Option<bool> {
        self.success
    }

    /// Agent turns taken so far.
    pub fn agent_turns(&self) -> usize {
        self.state.turn
    }

    /// Applies one agent act and returns the user's reaction.
    pub fn step(&mut self, agent_act: &DialogAct) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::ContractViolation(
                "step called on a finished episode".into(),
            ));
        }
        let before = self.state.clone();
        self.state.apply_agent_act(agent_act);
        self.transcript.push(TranscriptEntry {
            turn: self.transcript.len(),
            speaker: Speaker::Agent,
            act: agent_act.clone(),
            reward: None,
        });

        let (user_act, terminal) = if agent_act.is_booking() {
            let ok = judge_success(&self.goal, &self.transcript, self.kb);
            let reply = if ok { Intent::Thanks } else { Intent::Deny };
            (DialogAct::bare(reply), Some(ok))
        } else if agent_act.intent == Intent::Closing {
            (DialogAct::bare(Intent::Closing), Some(false))
        } else {
            let reply = user_response(&before, agent_act, &self.goal, self.kb);
            let timed_out = self.state.turn >= self.reward.max_turns;
            (reply, timed_out.then_some(false))
        };

        let mut reward = self.reward.per_turn;
        if let Some(ok) = terminal {
            reward += if ok {
                self.reward.success_bonus
            } else {
                self.reward.failure_penalty
            };
            self.done = true;
            self.success = Some(ok);
        }
        self.state.apply_user_act(&user_act, self.kb);
        self.transcript.push(TranscriptEntry {
            turn: self.transcript.len(),
            speaker: Speaker::User,
            act: user_act.clone(),
            reward: Some(reward),
        });
        Ok(StepOutcome {
            user_act,
            reward,
            done: self.done,
            success: self.success,
        })
    }
}
