//! Board events and their line-oriented wire format.
//!
//! Every record is one line of JSON with keys sorted at every level and a
//! `v` schema-version field. The same canonical writer produces board
//! snapshots, so byte equality of two encodings is value equality.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::ids::{Actor, BoardId};
use crate::ops::Op;
use crate::time::Timestamp;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardEvent {
    pub v: u32,
    pub board: BoardId,
    pub seq: u64,
    pub actor: Actor,
    pub server_time: Timestamp,
    pub op: Op,
}

impl BoardEvent {
    pub fn new(board: BoardId, seq: u64, actor: Actor, server_time: Timestamp, op: Op) -> Self {
        Self {
            v: SCHEMA_VERSION,
            board,
            seq,
            actor,
            server_time,
            op,
        }
    }

    /// One canonical line, without the trailing newline.
    pub fn to_line(&self) -> String {
        to_canonical_json(self)
    }

    pub fn from_line(line: &str) -> Result<Self, WireError> {
        let event: BoardEvent = serde_json::from_str(line)?;
        if event.v != SCHEMA_VERSION {
            return Err(WireError::UnsupportedVersion(event.v));
        }
        Ok(event)
    }
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed event record: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u32),
}

/// Serializes `value` as compact JSON with object keys in byte order.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("board values serialize to JSON");
    let mut out = String::new();
    write_canonical(&value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push('{');
            for (i, (key, val)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("string serializes"));
                out.push(':');
                write_canonical(val, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalar serializes")),
    }
}
