//! Synthetic movie-showing knowledge base.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Slot, INFORMABLE_SLOTS};

/// One showing: a value for every informable slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MovieRecord {
    pub values: BTreeMap<Slot, String>,
}

impl MovieRecord {
    pub fn get(&self, slot: Slot) -> Option<&str> {
        self.values.get(&slot).map(String::as_str)
    }

    pub fn matches(&self, constraints: &BTreeMap<Slot, String>) -> bool {
        constraints.iter().all(|(slot, wanted)| {
            self.values
                .get(slot)
                .is_some_and(|have| normalize(have) == normalize(wanted))
        })
    }

    fn validate(&self, index: usize) -> Result<()> {
        for slot in INFORMABLE_SLOTS {
            match self.values.get(&slot) {
                Some(v) if !v.trim().is_empty() => {}
                _ => {
                    return Err(Error::parse(
                        format!("kb record {index}"),
                        format!("missing or empty value for slot `{slot}`"),
                    ))
                }
            }
        }
        if let Some(extra) = self.values.keys().find(|s| !s.is_informable()) {
            return Err(Error::parse(
                format!("kb record {index}"),
                format!("slot `{extra}` is not stored in the knowledge base"),
            ));
        }
        Ok(())
    }
}

fn normalize(s: &str) -> String {
    s.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub records: Vec<MovieRecord>,
    pub seed: Option<u64>,
}

const MOVIES: &[&str] = &[
    "race", "zootopia", "deadpool", "star wars", "the witch", "kung fu panda 3",
    "london has fallen", "the revenant", "risen", "eddie the eagle", "gods of egypt",
    "the big short", "hail caesar", "spotlight", "room", "brooklyn", "the jungle book",
    "batman v superman", "captain america", "the boss", "hardcore henry", "miracles from heaven",
    "allegiant", "10 cloverfield lane", "the divergent series", "whiskey tango foxtrot",
    "triple 9", "the brothers grimsby", "how to be single", "the finest hours",
    "the 5th wave", "kung fu panda", "the lady in the van", "creed", "the martian",
    "inside out", "the hateful eight", "joy", "carol", "the danish girl",
];

const CITIES: &[(&str, &str, &str)] = &[
    ("seattle", "wa", "98101"),
    ("portland", "oregon", "97232"),
    ("los angeles", "ca", "90028"),
    ("birmingham", "al", "35243"),
    ("chicago", "il", "60614"),
    ("houston", "tx", "77002"),
    ("boston", "ma", "02116"),
    ("denver", "co", "80202"),
    ("atlanta", "ga", "30309"),
    ("miami", "fl", "33131"),
];

const THEATERS: &[(&str, &str)] = &[
    ("amc pacific place 11", "amc"),
    ("regal meridian 16", "regal"),
    ("carmike summit 16", "carmike"),
];

const DATES: &[&str] = &[
    "today", "tomorrow", "tonight", "friday", "saturday", "sunday", "this weekend",
];

const START_TIMES: &[&str] = &[
    "10:00 am", "11:30 am", "12:05 pm", "1:30 pm", "3:00 pm", "4:30 pm",
    "6:00 pm", "7:15 pm", "8:30 pm", "9:45 pm", "10:00 pm", "11:00 pm",
];

const PRICES: &[&str] = &["$8", "$10", "$12", "$15"];
const FORMATS: &[&str] = &["standard", "3d", "imax"];

/// Generates a deterministic knowledge base of `n_movies` showings.
pub fn generate_kb(seed: u64, n_movies: usize) -> Result<KnowledgeBase> {
    if n_movies == 0 {
        return Err(Error::InvalidArgument(
            "knowledge base needs at least one record".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n_movies)
        .map(|_| {
            let (city, state, zip) = *CITIES.choose(&mut rng).expect("non-empty pool");
            let theater_index = rng.gen_range(0..THEATERS.len());
            let (theater_base, chain) = THEATERS[theater_index];
            let theater = format!("{theater_base} {city}");
            let people = rng.gen_range(1..=6).to_string();
            let mut values = BTreeMap::new();
            values.insert(Slot::MovieName, pick(&mut rng, MOVIES));
            values.insert(Slot::StartTime, pick(&mut rng, START_TIMES));
            values.insert(Slot::City, city.to_string());
            values.insert(Slot::Date, pick(&mut rng, DATES));
            values.insert(Slot::Theater, theater);
            values.insert(Slot::NumberOfPeople, people);
            values.insert(Slot::State, state.to_string());
            values.insert(Slot::TheaterChain, chain.to_string());
            values.insert(Slot::Price, pick(&mut rng, PRICES));
            values.insert(Slot::VideoFormat, pick(&mut rng, FORMATS));
            values.insert(Slot::Zip, zip.to_string());
            MovieRecord { values }
        })
        .collect();
    Ok(KnowledgeBase {
        records,
        seed: Some(seed),
    })
}

fn pick(rng: &mut ChaCha8Rng, pool: &[&str]) -> String {
    pool.choose(rng).expect("non-empty pool").to_string()
}

impl KnowledgeBase {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records matching every constraint, in knowledge-base order.
    pub fn query(&self, constraints: &BTreeMap<Slot, String>) -> Vec<&MovieRecord> {
        self.records
            .iter()
            .filter(|r| r.matches(constraints))
            .collect()
    }

    pub fn first_match(&self, constraints: &BTreeMap<Slot, String>) -> Option<&MovieRecord> {
        self.records.iter().find(|r| r.matches(constraints))
    }

    pub fn count_matches(&self, constraints: &BTreeMap<Slot, String>) -> usize {
        self.records.iter().filter(|r| r.matches(constraints)).count()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, &self.records)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let records: Vec<MovieRecord> = crate::io::read_json(path)?;
        Self::from_records(records)
    }

    pub fn from_records(records: Vec<MovieRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::parse("kb", "knowledge base file has no records"));
        }
        for (i, r) in records.iter().enumerate() {
            r.validate(i)?;
        }
        Ok(KnowledgeBase {
            records,
            seed: None,
        })
    }
}

/// Free-function form of [`KnowledgeBase::query`].
pub fn kb_query<'a>(kb: &'a KnowledgeBase, constraints: &BTreeMap<Slot, String>) -> Vec<&'a MovieRecord> {
    kb.query(constraints)
}
