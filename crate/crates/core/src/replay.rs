//! Rebuilding board state from an event log.

use thiserror::Error;

use crate::event::{BoardEvent, WireError};
use crate::ids::BoardId;
use crate::state::{ApplyError, BoardState};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("log gap: expected seq {expected}, found {found}")]
    GapInLog { expected: u64, found: u64 },
    #[error("invalid event at seq {seq}: {reason}")]
    InvalidEventAt { seq: u64, reason: String },
    #[error("unreadable record after seq {last_valid_seq}: {source}")]
    Unreadable {
        last_valid_seq: u64,
        #[source]
        source: WireError,
    },
}

impl ReplayError {
    /// Highest seq that was applied before the failure.
    pub fn last_valid_seq(&self) -> u64 {
        match self {
            ReplayError::GapInLog { expected, .. } => expected - 1,
            ReplayError::InvalidEventAt { seq, .. } => seq - 1,
            ReplayError::Unreadable { last_valid_seq, .. } => *last_valid_seq,
        }
    }
}

impl From<ApplyError> for ReplayError {
    fn from(err: ApplyError) -> Self {
        match err {
            ApplyError::OutOfSequence { expected, found } => {
                ReplayError::GapInLog { expected, found }
            }
            ApplyError::WrongBoard { seq, .. } | ApplyError::TimeRegression { seq } => {
                ReplayError::InvalidEventAt {
                    seq,
                    reason: err.to_string(),
                }
            }
            ApplyError::Rejected { seq, ref source } => ReplayError::InvalidEventAt {
                seq,
                reason: source.to_string(),
            },
        }
    }
}

/// Folds `events` over an empty board, failing fast on the first bad event.
pub fn replay<'a>(
    board_id: BoardId,
    client_env: &str,
    events: impl IntoIterator<Item = &'a BoardEvent>,
) -> Result<BoardState, ReplayError> {
    replay_onto(BoardState::new(board_id, client_env), events)
}

/// Continues from an existing state, e.g. a snapshot plus the log suffix.
pub fn replay_onto<'a>(
    mut state: BoardState,
    events: impl IntoIterator<Item = &'a BoardEvent>,
) -> Result<BoardState, ReplayError> {
    for event in events {
        state.apply(event)?;
    }
    Ok(state)
}

/// Parses and folds a log in the line format. Blank lines are skipped.
pub fn replay_lines(board_id: BoardId, client_env: &str, text: &str) -> Result<BoardState, ReplayError> {
    let mut state = BoardState::new(board_id, client_env);
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let event = BoardEvent::from_line(line).map_err(|source| ReplayError::Unreadable {
            last_valid_seq: state.last_applied_seq,
            source,
        })?;
        state.apply(&event)?;
    }
    Ok(state)
}

/// One board's log, for batch replay.
#[derive(Debug, Clone)]
pub struct BoardLog {
    pub board_id: BoardId,
    pub client_env: String,
    pub events: Vec<BoardEvent>,
}

fn replay_one(log: &BoardLog) -> Result<BoardState, ReplayError> {
    replay(log.board_id.clone(), &log.client_env, &log.events)
}

pub fn replay_many_sequential(logs: &[BoardLog]) -> Vec<Result<BoardState, ReplayError>> {
    logs.iter().map(replay_one).collect()
}

#[cfg(feature = "parallel")]
pub fn replay_many_parallel(logs: &[BoardLog]) -> Vec<Result<BoardState, ReplayError>> {
    use rayon::prelude::*;
    logs.par_iter().map(replay_one).collect()
}

/// Replays independent boards, in parallel when the `parallel` feature is on.
pub fn replay_many(logs: &[BoardLog]) -> Vec<Result<BoardState, ReplayError>> {
    #[cfg(feature = "parallel")]
    {
        replay_many_parallel(logs)
    }
    #[cfg(not(feature = "parallel"))]
    {
        replay_many_sequential(logs)
    }
}
