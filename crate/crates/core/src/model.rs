//! Board objects: waypoints, leads, annotations, connectors, placements and storylines.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ids::{ActorId, CanvasRef, EntityId};
use crate::time::{Period, Timestamp};
use crate::view::ViewState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaypointKind {
    Event,
    EventGroup,
    User,
    Timeframe,
}

impl WaypointKind {
    pub const ALL: [WaypointKind; 4] = [
        WaypointKind::Event,
        WaypointKind::EventGroup,
        WaypointKind::User,
        WaypointKind::Timeframe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WaypointKind::Event => "event",
            WaypointKind::EventGroup => "event-group",
            WaypointKind::User => "user",
            WaypointKind::Timeframe => "timeframe",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum Priority {
    #[default]
    None,
    Low,
    Medium,
    High,
}

impl Priority {
    pub const ALL: [Priority; 4] = [Priority::None, Priority::Low, Priority::Medium, Priority::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Priority::None => "none",
            Priority::Low => "low",
            Priority::Medium => "medium",
            Priority::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub id: EntityId,
    pub name: String,
    pub kind: WaypointKind,
    pub notes: String,
    pub details: String,
    pub event_period: Period,
    pub priority: Priority,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_state: Option<ViewState>,
    pub created_by: ActorId,
    pub created_at: Timestamp,
    pub updated_at: Timestamp,
}

/// Waypoint fields supplied by the hunter at creation.
///
/// When `event_period` is absent it is taken from the attached view's time
/// window, then from the creation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointDraft {
    pub name: String,
    #[serde(default = "default_kind")]
    pub kind: WaypointKind,
    #[serde(default)]
    pub notes: String,
    #[serde(default)]
    pub details: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_period: Option<Period>,
    #[serde(default)]
    pub priority: Priority,
}

fn default_kind() -> WaypointKind {
    WaypointKind::Event
}

impl WaypointDraft {
    pub fn new(name: impl Into<String>, kind: WaypointKind) -> Self {
        Self {
            name: name.into(),
            kind,
            notes: String::new(),
            details: String::new(),
            event_period: None,
            priority: Priority::None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WaypointPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<WaypointKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_period: Option<Period>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Priority>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lead {
    pub id: EntityId,
    pub title: String,
    pub notes: String,
    pub status: LeadStatus,
    pub created_by: ActorId,
    pub created_at: Timestamp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_at: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: EntityId,
    pub text: String,
    pub created_by: ActorId,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub id: EntityId,
    pub endpoint_a: EntityId,
    pub endpoint_b: EntityId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub created_by: ActorId,
    pub created_at: Timestamp,
}

impl Connector {
    pub fn touches(&self, id: EntityId) -> bool {
        self.endpoint_a == id || self.endpoint_b == id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub canvas: CanvasRef,
    pub object_id: EntityId,
    pub x: f64,
    pub y: f64,
    pub z_order: u64,
}

impl Placement {
    pub fn point(&self) -> Point {
        Point { x: self.x, y: self.y }
    }
}

/// Placements on one canvas. `next_z` grows with every new placement so
/// overlapping nodes stack in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CanvasLayout {
    pub next_z: u64,
    pub items: BTreeMap<EntityId, Placement>,
}

/// Saved investigation thread. Members are live references; only their
/// coordinates are frozen at save time. Connectors are members but carry
/// no coordinates of their own, they are drawn between their endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Storyline {
    pub id: EntityId,
    pub title: String,
    pub member_ids: BTreeSet<EntityId>,
    pub member_placements: BTreeMap<EntityId, Point>,
    pub shared: bool,
    pub created_by: ActorId,
    pub created_at: Timestamp,
    pub last_modified: Timestamp,
}

/// What kind of board object an id refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Waypoint,
    Lead,
    Annotation,
    Connector,
}

impl ObjectKind {
    /// Connectors are rendered between endpoints and never placed directly.
    pub fn is_placeable(self) -> bool {
        !matches!(self, ObjectKind::Connector)
    }
}
