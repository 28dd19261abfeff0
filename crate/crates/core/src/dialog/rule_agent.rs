//! Hand-crafted warm-start policy.

use crate::dialog::simulator::realize_agent_action;
use crate::dialog::state::DialogState;
use crate::error::Result;
use crate::kb::KnowledgeBase;
use crate::ontology::{ActionRoster, DialogAct, Intent, Slot, RULE_AGENT_SLOTS};

/// Roster index of the rule-based agent's next action.
///
/// The agent asks for movie name, start time, city, date, theater and party size in
/// that order, skipping what the user already said or was already asked. Once those
/// are covered it answers the user's outstanding requests from the current match and
/// finally books.
pub fn rule_agent_action(roster: &ActionRoster, state: &DialogState) -> usize {
    let next_request = RULE_AGENT_SLOTS
        .iter()
        .find(|s| !state.user_informed.contains_key(s) && !state.agent_requested.contains(s));
    if let Some(slot) = next_request {
        if let Some(i) = roster.agent_index(Intent::Request, &[], &[*slot]) {
            return i;
        }
    }
    if state.kb_match_count > 0 {
        let to_inform = state.user_requested_outstanding.iter().find(|s| {
            s.is_informable() && !state.agent_informed.contains_key(s)
        });
        if let Some(slot) = to_inform {
            if let Some(i) = roster.agent_index(Intent::Inform, &[*slot], &[]) {
                return i;
            }
        }
    }
    roster
        .agent_index(Intent::Inform, &[Slot::TaskComplete], &[])
        .expect("roster has a booking action")
}

pub fn rule_based_agent_act(
    roster: &ActionRoster,
    state: &DialogState,
    kb: &KnowledgeBase,
) -> Result<DialogAct> {
    realize_agent_action(roster, rule_agent_action(roster, state), state, kb)
}
