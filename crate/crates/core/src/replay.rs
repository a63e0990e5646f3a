//! Newline-delimited JSON episode logs.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rewards::RewardBreakdown;
use crate::world::{Action, MavState, PersonState, StepEvents, WorldState};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Encode(#[from] serde_json::Error),
}

/// One logged step. `actions`, `events` and `rewards` describe the transition
/// that produced this state and are empty for the initial record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub step: u64,
    pub time: f64,
    pub mavs: Vec<MavState>,
    pub person: PersonState,
    #[serde(default)]
    pub actions: Vec<Action>,
    #[serde(default)]
    pub events: Option<StepEvents>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rewards: Vec<RewardBreakdown>,
}

impl ReplayRecord {
    pub fn snapshot(world: &WorldState) -> Self {
        Self {
            step: world.step,
            time: world.time(),
            mavs: world.mavs.clone(),
            person: world.person,
            actions: Vec::new(),
            events: None,
            rewards: Vec::new(),
        }
    }
}

pub struct ReplayWriter<W: Write> {
    out: W,
}

impl<W: Write> ReplayWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, record: &ReplayRecord) -> Result<(), ReplayError> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, ReplayError> {
        self.out.flush()?;
        Ok(self.out)
    }
}

pub fn read_replay<R: BufRead>(input: R) -> Result<Vec<ReplayRecord>, ReplayError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| ReplayError::Parse {
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}
