//! On-disk layout: `<data-dir>/boards/<board>/{board.json,events.jsonl}`.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{to_canonical_json, BoardEvent, SCHEMA_VERSION};
use crate::ids::BoardId;
use crate::replay::ReplayError;
use crate::state::BoardState;

const META_FILE: &str = "board.json";
const LOG_FILE: &str = "events.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsyncPolicy {
    /// `fdatasync` before every acknowledgement.
    EveryEvent,
    /// At most one `fdatasync` per interval, plus explicit [`LogWriter::sync`].
    Interval(Duration),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("data directory {path} is not writable: {source}")]
    DataDirUnwritable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt log for board {board}: last valid seq {last_valid_seq} ({reason})")]
    CorruptLog {
        board: String,
        last_valid_seq: u64,
        reason: String,
    },
    #[error("bad board metadata in {path}: {reason}")]
    BadMeta { path: PathBuf, reason: String },
    #[error("board {0} already exists")]
    BoardExists(BoardId),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardMeta {
    pub v: u32,
    pub board_id: BoardId,
    pub client_env: String,
}

/// Append handle for one board's log.
#[derive(Debug)]
pub struct LogWriter {
    file: File,
    policy: FsyncPolicy,
    last_sync: Instant,
    dirty: bool,
}

impl LogWriter {
    fn open(path: &Path, policy: FsyncPolicy) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Self {
            file,
            policy,
            last_sync: Instant::now(),
            dirty: false,
        })
    }

    /// Writes one record and its newline in a single call.
    pub fn append(&mut self, event: &BoardEvent) -> io::Result<()> {
        let mut line = event.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.dirty = true;
        match self.policy {
            FsyncPolicy::EveryEvent => self.sync(),
            FsyncPolicy::Interval(every) if self.last_sync.elapsed() >= every => self.sync(),
            FsyncPolicy::Interval(_) => Ok(()),
        }
    }

    pub fn sync(&mut self) -> io::Result<()> {
        if self.dirty {
            self.file.sync_data()?;
            self.dirty = false;
        }
        self.last_sync = Instant::now();
        Ok(())
    }
}

/// A board read back from disk.
#[derive(Debug)]
pub struct RecoveredBoard {
    pub meta: BoardMeta,
    pub state: BoardState,
    pub events: Vec<BoardEvent>,
    pub writer: LogWriter,
}

#[derive(Debug, Clone)]
pub struct DataDir {
    root: PathBuf,
    policy: FsyncPolicy,
}

impl DataDir {
    /// Creates the directory tree if needed and probes that it is writable.
    pub fn open(root: impl Into<PathBuf>, policy: FsyncPolicy) -> Result<Self, StoreError> {
        let root = root.into();
        let unwritable = |source| StoreError::DataDirUnwritable {
            path: root.clone(),
            source,
        };
        fs::create_dir_all(root.join("boards")).map_err(unwritable)?;
        let probe = root.join(".write-probe");
        File::create(&probe)
            .and_then(|mut f| f.write_all(b"ok"))
            .and_then(|_| fs::remove_file(&probe))
            .map_err(unwritable)?;
        Ok(Self { root, policy })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn board_dir(&self, board: &BoardId) -> PathBuf {
        self.root.join("boards").join(board.as_str())
    }

    pub fn log_path(&self, board: &BoardId) -> PathBuf {
        self.board_dir(board).join(LOG_FILE)
    }

    pub fn create_board(&self, board: &BoardId, client_env: &str) -> Result<LogWriter, StoreError> {
        let dir = self.board_dir(board);
        if dir.join(META_FILE).exists() {
            return Err(StoreError::BoardExists(board.clone()));
        }
        fs::create_dir_all(&dir)?;
        let meta = BoardMeta {
            v: SCHEMA_VERSION,
            board_id: board.clone(),
            client_env: client_env.to_string(),
        };
        let mut file = File::create(dir.join(META_FILE))?;
        file.write_all(to_canonical_json(&meta).as_bytes())?;
        file.write_all(b"\n")?;
        file.sync_all()?;
        let writer = LogWriter::open(&dir.join(LOG_FILE), self.policy)?;
        File::open(&dir)?.sync_all()?;
        Ok(writer)
    }

    fn read_meta(&self, dir: &Path) -> Result<BoardMeta, StoreError> {
        let path = dir.join(META_FILE);
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| StoreError::BadMeta {
            path,
            reason: e.to_string(),
        })
    }

    /// Reads every board's metadata and raw log text.
    fn read_all(&self) -> Result<Vec<(BoardMeta, String)>, StoreError> {
        let mut out = Vec::new();
        let mut dirs: Vec<PathBuf> = fs::read_dir(self.root.join("boards"))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.join(META_FILE).is_file())
            .collect();
        dirs.sort();
        for dir in dirs {
            let meta = self.read_meta(&dir)?;
            let log = dir.join(LOG_FILE);
            let text = if log.exists() {
                fs::read_to_string(&log)?
            } else {
                String::new()
            };
            out.push((meta, text));
        }
        Ok(out)
    }

    /// Replays every board on disk; boards are independent and replay in parallel.
    pub fn recover(&self) -> Result<Vec<RecoveredBoard>, StoreError> {
        let raw = self.read_all()?;
        let parsed = crate::parallel::map(&raw, |(meta, text)| parse_and_replay(meta, text));
        let mut boards = Vec::with_capacity(parsed.len());
        for ((meta, _), result) in raw.into_iter().zip(parsed) {
            let (state, events) = result.map_err(|err| StoreError::CorruptLog {
                board: meta.board_id.to_string(),
                last_valid_seq: err.last_valid_seq(),
                reason: err.to_string(),
            })?;
            let writer = LogWriter::open(&self.log_path(&meta.board_id), self.policy)?;
            boards.push(RecoveredBoard {
                meta,
                state,
                events,
                writer,
            });
        }
        Ok(boards)
    }
}

/// A record missing its trailing newline is a torn write and counts as corrupt.
fn parse_and_replay(meta: &BoardMeta, text: &str) -> Result<(BoardState, Vec<BoardEvent>), ReplayError> {
    let mut state = BoardState::new(meta.board_id.clone(), &meta.client_env);
    let mut events = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let (line, complete, next) = match rest.find('\n') {
            Some(i) => (&rest[..i], true, &rest[i + 1..]),
            None => (rest, false, ""),
        };
        rest = next;
        if line.trim().is_empty() && complete {
            continue;
        }
        let parsed = BoardEvent::from_line(line).map_err(|source| ReplayError::Unreadable {
            last_valid_seq: state.last_applied_seq,
            source,
        })?;
        if !complete {
            return Err(ReplayError::InvalidEventAt {
                seq: state.last_applied_seq + 1,
                reason: "record is missing its line terminator".into(),
            });
        }
        state.apply(&parsed)?;
        events.push(parsed);
    }
    Ok((state, events))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unwritable_data_dir_fails() {
        let tmp = tempfile::tempdir().unwrap();
        let file = tmp.path().join("plain-file");
        fs::write(&file, b"x").unwrap();
        let err = DataDir::open(file.join("sub"), FsyncPolicy::EveryEvent).unwrap_err();
        assert!(matches!(err, StoreError::DataDirUnwritable { .. }));
    }

    #[test]
    fn empty_data_dir_has_no_boards() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::open(tmp.path(), FsyncPolicy::EveryEvent).unwrap();
        assert!(dir.recover().unwrap().is_empty());
    }

    #[test]
    fn duplicate_board_rejected() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = DataDir::open(tmp.path(), FsyncPolicy::EveryEvent).unwrap();
        let id = BoardId::new("acme").unwrap();
        dir.create_board(&id, "acme").unwrap();
        assert!(matches!(
            dir.create_board(&id, "acme"),
            Err(StoreError::BoardExists(_))
        ));
        let boards = dir.recover().unwrap();
        assert_eq!(boards.len(), 1);
        assert_eq!(boards[0].state.last_applied_seq, 0);
    }
}
