//! Identifiers shared across the board: objects, actors, boards and canvases.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IdError {
    #[error("malformed entity id `{0}`")]
    Entity(String),
    #[error("malformed actor id `{0}`")]
    Actor(String),
    #[error("malformed board id `{0}`")]
    Board(String),
    #[error("malformed canvas reference `{0}`")]
    Canvas(String),
}

/// Board-scoped object identifier.
///
/// Ids are allocated from a per-board counter during event application, so
/// replaying a log reproduces them exactly. Rendered as `e<n>`; ordering is
/// numeric, which is also allocation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(u64);

impl EntityId {
    pub const fn new(raw: u64) -> Self {
        Self(raw)
    }

    pub const fn raw(self) -> u64 {
        self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl FromStr for EntityId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('e')
            .filter(|digits| !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|digits| digits.parse().ok())
            .map(EntityId)
            .ok_or_else(|| IdError::Entity(s.to_string()))
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= 64
        && s.bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.' | b'@'))
}

macro_rules! token_id {
    ($(#[$meta:meta])* $name:ident, $err:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Result<Self, IdError> {
                let value = value.into();
                if is_token(&value) {
                    Ok(Self(value))
                } else {
                    Err(IdError::$err(value))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $name {
            type Err = IdError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                Self::new(s).map_err(serde::de::Error::custom)
            }
        }
    };
}

token_id!(
    /// Actor identifier, as presented by the trusted identity header.
    ActorId,
    Actor
);

token_id!(
    /// One board per client environment; names the event log directory.
    BoardId,
    Board
);

/// Minimal hunter profile carried on every event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Actor {
    pub id: ActorId,
    pub display_name: String,
    pub role: String,
}

impl Actor {
    pub const DEFAULT_ROLE: &'static str = "threat-hunter";

    /// Profile with display name equal to the id and the default role.
    pub fn named(id: ActorId) -> Self {
        Self {
            display_name: id.as_str().to_string(),
            role: Self::DEFAULT_ROLE.to_string(),
            id,
        }
    }

    pub fn with_display_name(mut self, display_name: impl Into<String>) -> Self {
        let display_name = display_name.into();
        if !display_name.trim().is_empty() {
            self.display_name = display_name;
        }
        self
    }

    pub fn with_role(mut self, role: impl Into<String>) -> Self {
        let role = role.into();
        if !role.trim().is_empty() {
            self.role = role;
        }
        self
    }
}

/// A canvas within one board: the shared team canvas or one hunter's own.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CanvasRef {
    Team,
    Personal(ActorId),
}

impl CanvasRef {
    pub fn owner(&self) -> Option<&ActorId> {
        match self {
            CanvasRef::Team => None,
            CanvasRef::Personal(owner) => Some(owner),
        }
    }

    /// Personal canvases are private to their owner.
    pub fn accessible_by(&self, actor: &ActorId) -> bool {
        self.owner().is_none_or(|owner| owner == actor)
    }
}

impl fmt::Display for CanvasRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanvasRef::Team => f.write_str("team"),
            CanvasRef::Personal(owner) => write!(f, "personal:{owner}"),
        }
    }
}

impl FromStr for CanvasRef {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "team" {
            return Ok(CanvasRef::Team);
        }
        s.strip_prefix("personal:")
            .and_then(|owner| ActorId::new(owner).ok())
            .map(CanvasRef::Personal)
            .ok_or_else(|| IdError::Canvas(s.to_string()))
    }
}

impl Serialize for CanvasRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CanvasRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
