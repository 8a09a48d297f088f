//! Saved analytics views and the waypoint list (filter and sort).

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Priority, Waypoint, WaypointDraft, WaypointKind};
use crate::state::BoardState;
use crate::time::{Period, Timestamp};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("query representation is empty")]
    EmptyQuery,
}

impl ViewError {
    pub fn code(&self) -> &'static str {
        match self {
            ViewError::EmptyQuery => "EmptyQuery",
        }
    }
}

/// A bookmark of an analytics tool view.
///
/// `query_representation` is opaque: it is stored and returned verbatim and
/// never parsed or normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewState {
    pub source_tool_id: String,
    pub query_representation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_window: Option<Period>,
    pub captured_at: Timestamp,
}

pub fn capture_view(
    source_tool_id: impl Into<String>,
    query_representation: impl Into<String>,
    time_window: Option<Period>,
    captured_at: Timestamp,
) -> Result<ViewState, ViewError> {
    let query_representation = query_representation.into();
    if query_representation.is_empty() {
        return Err(ViewError::EmptyQuery);
    }
    Ok(ViewState {
        source_tool_id: source_tool_id.into(),
        query_representation,
        time_window,
        captured_at,
    })
}

const SUMMARY_LIMIT: usize = 240;

/// Waypoint draft prefilled from a captured view. The name is left blank.
pub fn prefill_draft(view: &ViewState) -> WaypointDraft {
    let mut details = format!("{}: {}", view.source_tool_id, view.query_representation);
    if details.chars().count() > SUMMARY_LIMIT {
        details = details.chars().take(SUMMARY_LIMIT - 1).collect();
        details.push('…');
    }
    WaypointDraft {
        name: String::new(),
        kind: WaypointKind::Event,
        notes: String::new(),
        details,
        event_period: Some(
            view.time_window
                .unwrap_or_else(|| Period::instant(view.captured_at)),
        ),
        priority: Priority::None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaypointFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<BTreeSet<WaypointKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_at_least: Option<Priority>,
    /// Case-insensitive substring over name and notes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_query: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period_overlaps: Option<Period>,
}

impl WaypointFilter {
    pub fn matches(&self, waypoint: &Waypoint) -> bool {
        if let Some(kinds) = &self.kinds {
            if !kinds.contains(&waypoint.kind) {
                return false;
            }
        }
        if let Some(min) = self.priority_at_least {
            if waypoint.priority < min {
                return false;
            }
        }
        if let Some(query) = &self.text_query {
            let needle = query.to_lowercase();
            if !waypoint.name.to_lowercase().contains(&needle)
                && !waypoint.notes.to_lowercase().contains(&needle)
            {
                return false;
            }
        }
        if let Some(period) = &self.period_overlaps {
            if !waypoint.event_period.overlaps(period) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortField {
    #[default]
    CreatedAt,
    Name,
    Priority,
    EventPeriodStart,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortDirection {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SortKey {
    pub field: SortField,
    pub direction: SortDirection,
}

impl SortKey {
    pub fn new(field: SortField, direction: SortDirection) -> Self {
        Self { field, direction }
    }

    /// Total order: the sort field in the requested direction, then id ascending.
    pub fn compare(&self, a: &Waypoint, b: &Waypoint) -> Ordering {
        let primary = match self.field {
            SortField::CreatedAt => a.created_at.cmp(&b.created_at),
            SortField::Name => a.name.cmp(&b.name),
            SortField::Priority => a.priority.cmp(&b.priority),
            SortField::EventPeriodStart => a.event_period.start().cmp(&b.event_period.start()),
        };
        let primary = match self.direction {
            SortDirection::Asc => primary,
            SortDirection::Desc => primary.reverse(),
        };
        primary.then_with(|| a.id.cmp(&b.id))
    }
}

/// Live waypoints matching `filter`, in `sort` order.
pub fn list_waypoints<'a>(
    state: &'a BoardState,
    filter: &WaypointFilter,
    sort: SortKey,
) -> Vec<&'a Waypoint> {
    let mut out: Vec<&Waypoint> = state
        .waypoints
        .values()
        .filter(|w| !state.is_archived(w.id) && filter.matches(w))
        .collect();
    out.sort_by(|a, b| sort.compare(a, b));
    out
}
