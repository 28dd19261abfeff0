//! Offline goal classifier and the epoch → difficulty schedules.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::goal::UserGoal;

pub const TOTAL_EPOCHS: usize = 300;
pub const STAGE_BOUNDS: [usize; 5] = [0, 70, 140, 210, 300];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyLevel {
    Easy,
    Middle,
    Difficult,
    All,
}

impl DifficultyLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            DifficultyLevel::Easy => "easy",
            DifficultyLevel::Middle => "middle",
            DifficultyLevel::Difficult => "difficult",
            DifficultyLevel::All => "all",
        }
    }
}

impl fmt::Display for DifficultyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn classify_goal(goal: &UserGoal) -> Result<DifficultyLevel> {
    match goal.request_slots.len() {
        0 => Err(Error::InvalidGoal("goal has no request slots".into())),
        1 => Ok(DifficultyLevel::Easy),
        2 | 3 => Ok(DifficultyLevel::Middle),
        _ => Ok(DifficultyLevel::Difficult),
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoalBuffers {
    pub easy: Vec<UserGoal>,
    pub middle: Vec<UserGoal>,
    pub difficult: Vec<UserGoal>,
    pub total: Vec<UserGoal>,
}

impl GoalBuffers {
    pub fn level(&self, level: DifficultyLevel) -> &[UserGoal] {
        match level {
            DifficultyLevel::Easy => &self.easy,
            DifficultyLevel::Middle => &self.middle,
            DifficultyLevel::Difficult => &self.difficult,
            DifficultyLevel::All => &self.total,
        }
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        (self.easy.len(), self.middle.len(), self.difficult.len())
    }
}

pub fn build_buffers(goals: &[UserGoal]) -> Result<GoalBuffers> {
    let mut buffers = GoalBuffers::default();
    for goal in goals {
        let bucket = match classify_goal(goal)? {
            DifficultyLevel::Easy => &mut buffers.easy,
            DifficultyLevel::Middle => &mut buffers.middle,
            _ => &mut buffers.difficult,
        };
        bucket.push(goal.clone());
        buffers.total.push(goal.clone());
    }
    Ok(buffers)
}

/// Uniform draw from one buffer.
pub fn sample_goal<R: Rng + ?Sized>(
    buffers: &GoalBuffers,
    level: DifficultyLevel,
    rng: &mut R,
) -> Result<UserGoal> {
    let pool = buffers.level(level);
    if pool.is_empty() {
        return Err(Error::Sampling(format!("the {level} goal buffer is empty")));
    }
    Ok(pool[rng.gen_range(0..pool.len())].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScheduleName {
    #[serde(rename = "EMD")]
    Emd,
    #[serde(rename = "EDD")]
    Edd,
    #[serde(rename = "EED")]
    Eed,
    #[serde(rename = "DME")]
    Dme,
    #[serde(rename = "DEE")]
    Dee,
    #[serde(rename = "DDM")]
    Ddm,
    #[serde(rename = "RANDOM")]
    Random,
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl ScheduleName {
    pub const NAMED: [ScheduleName; 7] = [
        ScheduleName::Emd,
        ScheduleName::Edd,
        ScheduleName::Eed,
        ScheduleName::Dme,
        ScheduleName::Dee,
        ScheduleName::Ddm,
        ScheduleName::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleName::Emd => "EMD",
            ScheduleName::Edd => "EDD",
            ScheduleName::Eed => "EED",
            ScheduleName::Dme => "DME",
            ScheduleName::Dee => "DEE",
            ScheduleName::Ddm => "DDM",
            ScheduleName::Random => "RANDOM",
            ScheduleName::Custom => "CUSTOM",
        }
    }

    /// Easy-first schedules.
    pub fn is_easy_first(self) -> bool {
        matches!(self, ScheduleName::Emd | ScheduleName::Edd | ScheduleName::Eed)
    }
}

impl fmt::Display for ScheduleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.to_ascii_uppercase();
        ScheduleName::NAMED
            .into_iter()
            .chain([ScheduleName::Custom])
            .find(|n| n.as_str() == upper)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown schedule `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub start: usize,
    pub end: usize,
    pub level: DifficultyLevel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub name: ScheduleName,
    pub stages: [Stage; 4],
}

impl Schedule {
    pub fn named(name: ScheduleName) -> Result<Self> {
        use DifficultyLevel::*;
        let levels = match name {
            ScheduleName::Emd => [Easy, Middle, Difficult],
            ScheduleName::Edd => [Easy, Difficult, Difficult],
            ScheduleName::Eed => [Easy, Easy, Difficult],
            ScheduleName::Dme => [Difficult, Middle, Easy],
            ScheduleName::Dee => [Difficult, Easy, Easy],
            ScheduleName::Ddm => [Difficult, Difficult, Middle],
            ScheduleName::Random => [All, All, All],
            ScheduleName::Custom => {
                return Err(Error::InvalidArgument(
                    "a custom schedule needs explicit stages".into(),
                ))
            }
        };
        Ok(Schedule {
            name,
            stages: std::array::from_fn(|i| Stage {
                start: STAGE_BOUNDS[i],
                end: STAGE_BOUNDS[i + 1],
                level: if i < 3 { levels[i] } else { All },
            }),
        })
    }

    /// Four contiguous stages covering `0..300`.
    pub fn custom(stages: [Stage; 4]) -> Result<Self> {
        let mut expected_start = 0;
        for (i, s) in stages.iter().enumerate() {
            if s.start != expected_start || s.end <= s.start {
                return Err(Error::InvalidArgument(format!(
                    "stage {} must start at epoch {expected_start} and be nonempty",
                    i + 1
                )));
            }
            expected_start = s.end;
        }
        if expected_start != TOTAL_EPOCHS {
            return Err(Error::InvalidArgument(format!(
                "stages end at epoch {expected_start}, not {TOTAL_EPOCHS}"
            )));
        }
        Ok(Schedule {
            name: ScheduleName::Custom,
            stages,
        })
    }

    /// 1-based stage index for a schedule epoch.
    pub fn stage_index(&self, epoch: usize) -> Result<usize> {
        self.stages
            .iter()
            .position(|s| (s.start..s.end).contains(&epoch))
            .map(|i| i + 1)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("epoch {epoch} outside 0..{TOTAL_EPOCHS}"))
            })
    }

    pub fn stage_for_epoch(&self, epoch: usize) -> Result<DifficultyLevel> {
        Ok(self.stages[self.stage_index(epoch)? - 1].level)
    }
}

pub fn stage_for_epoch(schedule: &Schedule, epoch: usize) -> Result<DifficultyLevel> {
    schedule.stage_for_epoch(epoch)
}
