//! Dialog state tracking and the fixed-length binary state encoding.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::kb::KnowledgeBase;
use crate::ontology::{DialogAct, Intent, Slot};

/// Length of the turn one-hot block.
pub const TURN_BUCKETS: usize = 40;
/// Length of the knowledge-base match-count block: {0}, {1}, {>=2}.
pub const KB_BUCKETS: usize = 3;
/// Length of an encoded state.
pub const STATE_DIM: usize = Intent::COUNT
    + Slot::COUNT
    + Slot::COUNT
    + Intent::COUNT
    + Slot::COUNT
    + Slot::COUNT
    + TURN_BUCKETS
    + KB_BUCKETS;

/// Tracker record of one conversation.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DialogState {
    /// Agent turns taken so far.
    pub turn: usize,
    pub last_user_act: Option<DialogAct>,
    pub last_agent_act: Option<DialogAct>,
    /// Constraints the user has stated, with their values.
    pub user_informed: BTreeMap<Slot, String>,
    /// Goal request slots the agent has not yet answered acceptably.
    pub user_requested_outstanding: BTreeSet<Slot>,
    /// Latest value the agent offered per slot, dropped again when the user denies it.
    pub agent_informed: BTreeMap<Slot, String>,
    pub agent_requested: BTreeSet<Slot>,
    pub kb_match_count: usize,
}

impl DialogState {
    /// Fresh state after the user's opening act.
    pub fn start(
        first_user_act: &DialogAct,
        outstanding: BTreeSet<Slot>,
        kb: &KnowledgeBase,
    ) -> Self {
        let mut state = DialogState {
            user_requested_outstanding: outstanding,
            ..DialogState::default()
        };
        state.apply_user_act(first_user_act, kb);
        state
    }

    /// Everything currently known to constrain the booking: the user's stated values,
    /// then the agent's own offers for slots the user has not stated.
    pub fn constraints(&self) -> BTreeMap<Slot, String> {
        let mut c = self.agent_informed.clone();
        c.remove(&Slot::TaskComplete);
        for (slot, value) in &self.user_informed {
            c.insert(*slot, value.clone());
        }
        c
    }

    pub fn apply_agent_act(&mut self, act: &DialogAct) {
        self.turn += 1;
        self.agent_requested.extend(act.request_slots.iter().copied());
        for (slot, value) in &act.inform_slots {
            self.agent_informed.insert(*slot, value.clone());
        }
        self.last_agent_act = Some(act.clone());
    }

    pub fn apply_user_act(&mut self, act: &DialogAct, kb: &KnowledgeBase) {
        for (slot, value) in &act.inform_slots {
            self.user_informed.insert(*slot, value.clone());
        }
        if let Some(agent) = &self.last_agent_act {
            if agent.intent == Intent::Inform && !agent.is_booking() {
                for slot in agent.inform_slots.keys() {
                    if act.intent == Intent::Deny {
                        self.agent_informed.remove(slot);
                    } else {
                        self.user_requested_outstanding.remove(slot);
                    }
                }
            }
        }
        self.last_user_act = Some(act.clone());
        self.kb_match_count = kb.count_matches(&self.constraints());
    }

    /// Binary encoding of this state; see [`encode_state`].
    pub fn encode(&self) -> StateVector {
        encode_state(self)
    }
}

/// Fixed-length binary feature vector of a dialog state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Encodes a state as
/// `onehot(user intent) | user informed | outstanding requests | onehot(agent intent)
///  | agent informed | agent requested | onehot(turn) | onehot(kb bucket)`.
pub fn encode_state(state: &DialogState) -> StateVector {
    let mut v = vec![0.0; STATE_DIM];
    let mut offset = 0;
    if let Some(act) = &state.last_user_act {
        v[offset + act.intent.index()] = 1.0;
    }
    offset += Intent::COUNT;
    for slot in state.user_informed.keys() {
        v[offset + slot.index()] = 1.0;
    }
    offset += Slot::COUNT;
    for slot in &state.user_requested_outstanding {
        v[offset + slot.index()] = 1.0;
    }
    offset += Slot::COUNT;
    if let Some(act) = &state.last_agent_act {
        v[offset + act.intent.index()] = 1.0;
    }
    offset += Intent::COUNT;
    for slot in state.agent_informed.keys() {
        v[offset + slot.index()] = 1.0;
    }
    offset += Slot::COUNT;
    for slot in &state.agent_requested {
        v[offset + slot.index()] = 1.0;
    }
    offset += Slot::COUNT;
    v[offset + state.turn.min(TURN_BUCKETS - 1)] = 1.0;
    offset += TURN_BUCKETS;
    let bucket = state.kb_match_count.min(KB_BUCKETS - 1);
    v[offset + bucket] = 1.0;
    StateVector(v)
}
