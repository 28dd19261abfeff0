//! Movie-ticket dialog ontology: slots, intents, dialog acts and the action rosters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = Self::ALL.len();

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(index: usize) -> Option<Self> {
                Self::ALL.get(index).copied()
            }

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::parse(
                        stringify!($name),
                        format!("unknown {} `{}`", stringify!($name).to_lowercase(), other),
                    )),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_enum! {
    /// The sixteen slots of the movie-ticket schema, indexed 0..15.
    Slot {
        City => "city",
        Closing => "closing",
        Date => "date",
        DistanceConstraints => "distanceconstraints",
        Greeting => "greeting",
        MovieName => "moviename",
        NumberOfPeople => "numberofpeople",
        Price => "price",
        StartTime => "starttime",
        State => "state",
        TaskComplete => "taskcomplete",
        Theater => "theater",
        TheaterChain => "theater_chain",
        Ticket => "ticket",
        VideoFormat => "video_format",
        Zip => "zip",
    }
}

string_enum! {
    /// The eleven dialog intents, indexed 0..10.
    Intent {
        Request => "request",
        Inform => "inform",
        Deny => "deny",
        ConfirmQuestion => "confirm_question",
        ConfirmAnswer => "confirm_answer",
        Greeting => "greeting",
        Closing => "closing",
        NotSure => "not_sure",
        MultipleChoice => "multiple_choice",
        Thanks => "thanks",
        Welcome => "welcome",
    }
}

/// Slots stored on every knowledge-base record. The first six are the slots the
/// rule-based agent collects, in the order it asks for them.
pub const INFORMABLE_SLOTS: [Slot; 11] = [
    Slot::MovieName,
    Slot::StartTime,
    Slot::City,
    Slot::Date,
    Slot::Theater,
    Slot::NumberOfPeople,
    Slot::State,
    Slot::TheaterChain,
    Slot::Price,
    Slot::VideoFormat,
    Slot::Zip,
];

/// Slots the rule-based agent requests, in order.
pub const RULE_AGENT_SLOTS: [Slot; 6] = [
    Slot::MovieName,
    Slot::StartTime,
    Slot::City,
    Slot::Date,
    Slot::Theater,
    Slot::NumberOfPeople,
];

impl Slot {
    pub fn is_informable(self) -> bool {
        INFORMABLE_SLOTS.contains(&self)
    }
}

/// A semantic-frame dialog act.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialogAct {
    pub intent: Intent,
    #[serde(default)]
    pub inform_slots: BTreeMap<Slot, String>,
    #[serde(default)]
    pub request_slots: BTreeSet<Slot>,
}

impl DialogAct {
    pub fn bare(intent: Intent) -> Self {
        DialogAct {
            intent,
            inform_slots: BTreeMap::new(),
            request_slots: BTreeSet::new(),
        }
    }

    pub fn request(slot: Slot) -> Self {
        let mut act = Self::bare(Intent::Request);
        act.request_slots.insert(slot);
        act
    }

    pub fn inform(slot: Slot, value: impl Into<String>) -> Self {
        let mut act = Self::bare(Intent::Inform);
        act.inform_slots.insert(slot, value.into());
        act
    }

    pub fn with_inform(mut self, slot: Slot, value: impl Into<String>) -> Self {
        self.inform_slots.insert(slot, value.into());
        self
    }

    /// Checks the structural invariants of a dialog act.
    pub fn validate(&self) -> Result<()> {
        if self.intent == Intent::Request && self.request_slots.is_empty() {
            return Err(Error::InvalidArgument(
                "request act without request slots".into(),
            ));
        }
        if let Some(slot) = self
            .request_slots
            .iter()
            .find(|s| self.inform_slots.contains_key(s))
        {
            return Err(Error::InvalidArgument(format!(
                "slot `{slot}` is both informed and requested"
            )));
        }
        Ok(())
    }

    pub fn is_booking(&self) -> bool {
        self.intent == Intent::Inform && self.inform_slots.contains_key(&Slot::TaskComplete)
    }
}

/// Template of a roster action: intent plus the slots it mentions, without values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionTemplate {
    pub intent: Intent,
    #[serde(default)]
    pub inform_slots: Vec<Slot>,
    #[serde(default)]
    pub request_slots: Vec<Slot>,
}

impl ActionTemplate {
    fn new(intent: Intent, inform: &[Slot], request: &[Slot]) -> Self {
        ActionTemplate {
            intent,
            inform_slots: inform.to_vec(),
            request_slots: request.to_vec(),
        }
    }
}

pub const AGENT_ACTION_COUNT: usize = 29;
pub const USER_ACTION_COUNT: usize = 35;
pub const ROSTER_VERSION: u32 = 1;

/// Ordered agent and user action templates. Indices are stable for a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRoster {
    #[serde(default = "default_roster_version")]
    pub version: u32,
    pub agent_actions: Vec<ActionTemplate>,
    pub user_actions: Vec<ActionTemplate>,
}

fn default_roster_version() -> u32 {
    ROSTER_VERSION
}

const USER_INFORM_SLOTS: [Slot; 13] = [
    Slot::MovieName,
    Slot::StartTime,
    Slot::City,
    Slot::Date,
    Slot::Theater,
    Slot::NumberOfPeople,
    Slot::State,
    Slot::TheaterChain,
    Slot::Price,
    Slot::VideoFormat,
    Slot::Zip,
    Slot::DistanceConstraints,
    Slot::TaskComplete,
];

const USER_REQUEST_SLOTS: [Slot; 13] = [
    Slot::MovieName,
    Slot::StartTime,
    Slot::City,
    Slot::Date,
    Slot::Theater,
    Slot::NumberOfPeople,
    Slot::State,
    Slot::TheaterChain,
    Slot::Price,
    Slot::VideoFormat,
    Slot::Zip,
    Slot::Ticket,
    Slot::TaskComplete,
];

impl Default for ActionRoster {
    fn default() -> Self {
        let mut agent = Vec::with_capacity(AGENT_ACTION_COUNT);
        for slot in INFORMABLE_SLOTS {
            agent.push(ActionTemplate::new(Intent::Request, &[], &[slot]));
        }
        for slot in INFORMABLE_SLOTS {
            agent.push(ActionTemplate::new(Intent::Inform, &[slot], &[]));
        }
        agent.push(ActionTemplate::new(Intent::Inform, &[Slot::TaskComplete], &[]));
        for intent in [
            Intent::Closing,
            Intent::Thanks,
            Intent::ConfirmQuestion,
            Intent::ConfirmAnswer,
            Intent::Deny,
            Intent::NotSure,
        ] {
            agent.push(ActionTemplate::new(intent, &[], &[]));
        }

        let mut user = Vec::with_capacity(USER_ACTION_COUNT);
        for slot in USER_INFORM_SLOTS {
            user.push(ActionTemplate::new(Intent::Inform, &[slot], &[]));
        }
        for slot in USER_REQUEST_SLOTS {
            user.push(ActionTemplate::new(Intent::Request, &[], &[slot]));
        }
        for intent in [
            Intent::Thanks,
            Intent::Closing,
            Intent::Deny,
            Intent::ConfirmQuestion,
            Intent::ConfirmAnswer,
            Intent::NotSure,
            Intent::Greeting,
        ] {
            user.push(ActionTemplate::new(intent, &[], &[]));
        }
        // "tickets for <movie>" opener and "I want N tickets" acceptance.
        user.push(ActionTemplate::new(
            Intent::Request,
            &[Slot::MovieName],
            &[Slot::Ticket],
        ));
        user.push(ActionTemplate::new(
            Intent::Request,
            &[Slot::NumberOfPeople],
            &[Slot::Ticket],
        ));

        let roster = ActionRoster {
            version: ROSTER_VERSION,
            agent_actions: agent,
            user_actions: user,
        };
        assert_eq!(roster.agent_actions.len(), AGENT_ACTION_COUNT);
        assert_eq!(roster.user_actions.len(), USER_ACTION_COUNT);
        roster
    }
}

impl ActionRoster {
    pub fn validate(&self) -> Result<()> {
        if self.version != ROSTER_VERSION {
            return Err(Error::parse(
                "roster",
                format!("unsupported roster version {}", self.version),
            ));
        }
        if self.agent_actions.len() != AGENT_ACTION_COUNT {
            return Err(Error::parse(
                "roster.agent_actions",
                format!(
                    "expected {AGENT_ACTION_COUNT} agent actions, found {}",
                    self.agent_actions.len()
                ),
            ));
        }
        if self.user_actions.len() != USER_ACTION_COUNT {
            return Err(Error::parse(
                "roster.user_actions",
                format!(
                    "expected {USER_ACTION_COUNT} user actions, found {}",
                    self.user_actions.len()
                ),
            ));
        }
        Ok(())
    }

    /// Index of the agent template with exactly this intent and slot lists.
    pub fn agent_index(&self, intent: Intent, inform: &[Slot], request: &[Slot]) -> Option<usize> {
        self.agent_actions.iter().position(|t| {
            t.intent == intent && t.inform_slots == inform && t.request_slots == request
        })
    }

    /// Maps a concrete user act onto its roster template index.
    pub fn user_action_index(&self, act: &DialogAct) -> Option<usize> {
        let find = |intent: Intent, inform: &[Slot], request: &[Slot]| {
            self.user_actions.iter().position(|t| {
                t.intent == intent && t.inform_slots == inform && t.request_slots == request
            })
        };
        match act.intent {
            Intent::Request => {
                let requested = *act.request_slots.iter().next()?;
                if requested == Slot::Ticket {
                    for carried in [Slot::MovieName, Slot::NumberOfPeople] {
                        if act.inform_slots.contains_key(&carried) {
                            if let Some(i) = find(Intent::Request, &[carried], &[Slot::Ticket]) {
                                return Some(i);
                            }
                        }
                    }
                }
                find(Intent::Request, &[], &[requested])
            }
            Intent::Inform => {
                let informed = *act.inform_slots.keys().next()?;
                find(Intent::Inform, &[informed], &[])
            }
            other => find(other, &[], &[]),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let roster: ActionRoster = crate::io::read_json(path)?;
        roster.validate()?;
        Ok(roster)
    }
}

/// Fixed-template surface rendering, used for human-readable logs only.
pub fn render(act: &DialogAct) -> String {
    let slot_phrase = |slot: Slot| match slot {
        Slot::MovieName => "movie",
        Slot::StartTime => "time",
        Slot::City => "city",
        Slot::Date => "date",
        Slot::Theater => "theater",
        Slot::NumberOfPeople => "number of tickets",
        Slot::State => "state",
        Slot::TheaterChain => "theater chain",
        Slot::Price => "price",
        Slot::VideoFormat => "video format",
        Slot::Zip => "zip code",
        Slot::Ticket => "tickets",
        other => other.as_str(),
    };
    let informs = act
        .inform_slots
        .iter()
        .filter(|(slot, _)| **slot != Slot::TaskComplete)
        .map(|(slot, value)| format!("{} {}", slot_phrase(*slot), value))
        .collect::<Vec<_>>()
        .join(", ");
    match act.intent {
        Intent::Request => {
            let wanted = act
                .request_slots
                .iter()
                .map(|s| slot_phrase(*s))
                .collect::<Vec<_>>()
                .join(" and ");
            if informs.is_empty() {
                format!("Which {wanted} would you like?")
            } else {
                format!("I am looking for {wanted} with {informs}.")
            }
        }
        Intent::Inform if act.is_booking() => {
            if informs.is_empty() {
                "I could not find a matching ticket.".to_string()
            } else {
                format!("Great - I was able to purchase tickets: {informs}.")
            }
        }
        Intent::Inform => format!("{informs} is available."),
        Intent::Deny => "That does not work for me.".to_string(),
        Intent::ConfirmQuestion => "Could you confirm that?".to_string(),
        Intent::ConfirmAnswer => "Yes, that is right.".to_string(),
        Intent::Greeting => "Hello!".to_string(),
        Intent::Closing => "Goodbye.".to_string(),
        Intent::NotSure => "I am not sure.".to_string(),
        Intent::MultipleChoice => "Which one of these?".to_string(),
        Intent::Thanks => "Thank you.".to_string(),
        Intent::Welcome => "You are welcome.".to_string(),
    }
}
