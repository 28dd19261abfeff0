//! User goals and the seeded goal-set generator.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::ontology::{Slot, RULE_AGENT_SLOTS};

pub const MAX_REQUEST_SLOTS: usize = 5;

/// Slots a goal may ask the agent for besides `ticket`.
pub const REQUESTABLE_POOL: [Slot; 6] = [
    Slot::StartTime,
    Slot::Theater,
    Slot::Date,
    Slot::City,
    Slot::Price,
    Slot::VideoFormat,
];

/// A user goal: constraints the user knows and slots the user wants answered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UserGoal {
    pub request_slots: BTreeSet<Slot>,
    pub inform_slots: BTreeMap<Slot, String>,
}

impl UserGoal {
    pub fn validate(&self) -> Result<()> {
        if !self.request_slots.contains(&Slot::Ticket) {
            return Err(Error::InvalidGoal("`ticket` must be a request slot".into()));
        }
        let n = self.request_slots.len();
        if !(1..=MAX_REQUEST_SLOTS).contains(&n) {
            return Err(Error::InvalidGoal(format!(
                "goal has {n} request slots, expected 1..={MAX_REQUEST_SLOTS}"
            )));
        }
        if let Some(s) = self
            .request_slots
            .iter()
            .find(|s| self.inform_slots.contains_key(s))
        {
            return Err(Error::InvalidGoal(format!(
                "slot `{s}` is both requested and informed"
            )));
        }
        Ok(())
    }

    pub fn is_satisfiable(&self, kb: &KnowledgeBase) -> bool {
        kb.first_match(&self.inform_slots).is_some()
    }
}

/// Request-slot-count → number of goals, as in the reference movie corpus.
pub fn default_goal_counts() -> BTreeMap<usize, usize> {
    BTreeMap::from([(1, 61), (2, 16), (3, 17), (4, 34), (5, 9)])
}

/// Draws goals whose inform values are copied from a single KB record, so every
/// goal is satisfiable by construction.
pub fn generate_goal_set(
    kb: &KnowledgeBase,
    counts: &BTreeMap<usize, usize>,
    seed: u64,
) -> Result<Vec<UserGoal>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut goals = Vec::new();
    for (&n_request, &wanted) in counts {
        if !(1..=MAX_REQUEST_SLOTS).contains(&n_request) {
            return Err(Error::InvalidArgument(format!(
                "request-slot count {n_request} outside 1..={MAX_REQUEST_SLOTS}"
            )));
        }
        if wanted == 0 {
            continue;
        }
        let subsets = subsets_of_size(&REQUESTABLE_POOL, n_request - 1);
        let mut candidates = BTreeSet::new();
        for record in &kb.records {
            for extra in &subsets {
                let mut request_slots: BTreeSet<Slot> = extra.iter().copied().collect();
                request_slots.insert(Slot::Ticket);
                let inform_slots = RULE_AGENT_SLOTS
                    .iter()
                    .filter(|s| !request_slots.contains(s))
                    .map(|s| (*s, record.values[s].clone()))
                    .collect();
                candidates.insert(UserGoal {
                    request_slots,
                    inform_slots,
                });
            }
        }
        if candidates.len() < wanted {
            return Err(Error::GenerationFailure(format!(
                "{wanted} goals with {n_request} request slots requested but only {} distinct goals exist",
                candidates.len()
            )));
        }
        let mut candidates: Vec<UserGoal> = candidates.into_iter().collect();
        candidates.shuffle(&mut rng);
        candidates.truncate(wanted);
        goals.extend(candidates);
    }
    Ok(goals)
}

fn subsets_of_size(pool: &[Slot], k: usize) -> Vec<Vec<Slot>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if pool.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in pool.iter().enumerate() {
        for mut rest in subsets_of_size(&pool[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn save_goals(goals: &[UserGoal], path: &Path) -> Result<()> {
    crate::io::write_json(path, goals)
}

pub fn load_goals(path: &Path) -> Result<Vec<UserGoal>> {
    let goals: Vec<UserGoal> = crate::io::read_json(path)?;
    for (i, g) in goals.iter().enumerate() {
        g.validate().map_err(|e| Error::parse(format!("goal {i}"), e))?;
    }
    Ok(goals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::generate_kb;

    #[test]
    fn default_counts_give_137_goals() {
        let kb = generate_kb(7, 991).unwrap();
        let goals = generate_goal_set(&kb, &default_goal_counts(), 7).unwrap();
        assert_eq!(goals.len(), 137);
        for g in &goals {
            g.validate().unwrap();
            assert!(g.request_slots.contains(&Slot::Ticket));
            assert!(!kb.query(&g.inform_slots).is_empty());
        }
        let distinct: BTreeSet<_> = goals.iter().collect();
        assert_eq!(distinct.len(), 137);
    }

    #[test]
    fn minimal_goal_requests_only_ticket() {
        let kb = generate_kb(7, 20).unwrap();
        let goals = generate_goal_set(&kb, &BTreeMap::from([(1, 1)]), 3).unwrap();
        assert_eq!(goals.len(), 1);
        assert_eq!(goals[0].request_slots, BTreeSet::from([Slot::Ticket]));
    }

    #[test]
    fn too_many_goals_is_a_generation_failure() {
        let kb = generate_kb(7, 1).unwrap();
        let err = generate_goal_set(&kb, &BTreeMap::from([(1, 2)]), 3).unwrap_err();
        assert!(matches!(err, Error::GenerationFailure(_)));
    }

    #[test]
    fn generation_is_deterministic() {
        let kb = generate_kb(7, 200).unwrap();
        let a = generate_goal_set(&kb, &default_goal_counts(), 1).unwrap();
        let b = generate_goal_set(&kb, &default_goal_counts(), 1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn subset_enumeration_counts() {
        assert_eq!(subsets_of_size(&REQUESTABLE_POOL, 0).len(), 1);
        assert_eq!(subsets_of_size(&REQUESTABLE_POOL, 2).len(), 15);
        assert_eq!(subsets_of_size(&REQUESTABLE_POOL, 4).len(), 15);
        assert!(subsets_of_size(&REQUESTABLE_POOL, 7).is_empty());
    }
}
