//! Handover reports and the design-heuristic evaluation rubric.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checklist::{ChecklistStatus, ItemStatus};
use crate::event::to_canonical_json;
use crate::ids::{ActorId, BoardId, EntityId};
use crate::model::{LeadStatus, Priority, WaypointKind};
use crate::state::BoardState;
use crate::time::{Period, Timestamp};
use crate::view::ViewState;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("storyline {0} not found")]
    StorylineNotFound(EntityId),
    #[error("checklist {0} does not belong to this board")]
    ChecklistMismatch(EntityId),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::StorylineNotFound(_) => "StorylineNotFound",
            ReportError::ChecklistMismatch(_) => "ChecklistMismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandoverReport {
    pub board_id: BoardId,
    pub client_env: String,
    pub seq: u64,
    pub generated_at: Timestamp,
    pub storyline: StorylineSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checklist: Option<ChecklistSection>,
    pub notes: Vec<NoteEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorylineSection {
    pub id: EntityId,
    pub title: String,
    pub shared: bool,
    pub created_by: ActorId,
    /// Ordered by event period start, then creation order.
    pub waypoints: Vec<WaypointEntry>,
    /// Open leads first.
    pub leads: Vec<LeadEntry>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointEntry {
    pub id: EntityId,
    pub name: String,
    pub kind: WaypointKind,
    pub priority: Priority,
    pub event_period: Period,
    pub notes: String,
    pub archived: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saved_query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadEntry {
    pub id: EntityId,
    pub title: String,
    pub status: LeadStatus,
    pub notes: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_at: Option<Timestamp>,
    pub archived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub connector: EntityId,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub archived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChecklistSection {
    pub id: EntityId,
    pub session_owner: ActorId,
    pub status: ChecklistStatus,
    pub completed_with_override: bool,
    pub done: Vec<ItemEntry>,
    pub pending: Vec<ItemEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resume_bookmark: Option<ViewState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemEntry {
    pub id: EntityId,
    pub text: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteEntry {
    pub id: EntityId,
    pub text: String,
    pub created_by: ActorId,
    pub archived: bool,
}

/// Builds a handover report for one storyline, optionally with a checklist.
///
/// `generated_at` is supplied by the caller so reports over the same log
/// prefix are reproducible.
pub fn generate_handover(
    state: &BoardState,
    storyline_id: EntityId,
    checklist_id: Option<EntityId>,
    generated_at: Timestamp,
) -> Result<HandoverReport, ReportError> {
    let storyline = state
        .storylines
        .get(&storyline_id)
        .ok_or(ReportError::StorylineNotFound(storyline_id))?;
    let checklist = checklist_id
        .map(|id| state.checklists.get(&id).ok_or(ReportError::ChecklistMismatch(id)))
        .transpose()?;

    let members = &storyline.member_ids;
    let mut waypoints: Vec<WaypointEntry> = members
        .iter()
        .filter_map(|id| state.waypoints.get(id))
        .map(|w| WaypointEntry {
            id: w.id,
            name: w.name.clone(),
            kind: w.kind,
            priority: w.priority,
            event_period: w.event_period,
            notes: w.notes.clone(),
            archived: state.is_archived(w.id),
            saved_query: w.view_state.as_ref().map(|v| v.query_representation.clone()),
        })
        .collect();
    // Ids are allocated in seq order, so id order is creation order.
    waypoints.sort_by(|a, b| {
        a.event_period
            .start()
            .cmp(&b.event_period.start())
            .then(a.id.cmp(&b.id))
    });

    let mut leads: Vec<LeadEntry> = members
        .iter()
        .filter_map(|id| state.leads.get(id))
        .map(|l| LeadEntry {
            id: l.id,
            title: l.title.clone(),
            status: l.status,
            notes: l.notes.clone(),
            closed_at: l.closed_at,
            archived: state.is_archived(l.id),
        })
        .collect();
    leads.sort_by_key(|l| (l.status == LeadStatus::Closed, l.id));

    let name_of = |id: EntityId| -> String {
        if let Some(w) = state.waypoints.get(&id) {
            w.name.clone()
        } else if let Some(l) = state.leads.get(&id) {
            l.title.clone()
        } else if let Some(a) = state.annotations.get(&id) {
            a.text.clone()
        } else {
            id.to_string()
        }
    };
    let relations = members
        .iter()
        .filter_map(|id| state.connectors.get(id))
        .map(|c| Relation {
            connector: c.id,
            from: name_of(c.endpoint_a),
            to: name_of(c.endpoint_b),
            label: c.label.clone(),
            archived: state.is_archived(c.id),
        })
        .collect();

    let notes = members
        .iter()
        .filter_map(|id| state.annotations.get(id))
        .map(|a| NoteEntry {
            id: a.id,
            text: a.text.clone(),
            created_by: a.created_by.clone(),
            archived: state.is_archived(a.id),
        })
        .collect();

    let checklist = checklist.map(|c| {
        let entry = |i: &crate::checklist::ChecklistItem| ItemEntry {
            id: i.id,
            text: i.text.clone(),
            note: i.note.clone(),
        };
        ChecklistSection {
            id: c.id,
            session_owner: c.session_owner.clone(),
            status: c.status,
            completed_with_override: c.completed_with_override,
            done: c.items.iter().filter(|i| i.status == ItemStatus::Done).map(entry).collect(),
            pending: c
                .items
                .iter()
                .filter(|i| i.status == ItemStatus::Pending)
                .map(entry)
                .collect(),
            resume_bookmark: c.resume_bookmark.clone(),
        }
    });

    Ok(HandoverReport {
        board_id: state.board_id.clone(),
        client_env: state.client_env.clone(),
        seq: state.last_applied_seq,
        generated_at,
        storyline: StorylineSection {
            id: storyline.id,
            title: storyline.title.clone(),
            shared: storyline.shared,
            created_by: storyline.created_by.clone(),
            waypoints,
            leads,
            relations,
        },
        checklist,
        notes,
    })
}

impl HandoverReport {
    pub fn markdown_file_name(&self) -> String {
        format!("handover-{}-{}.md", self.board_id, self.seq)
    }

    pub fn json_file_name(&self) -> String {
        format!("handover-{}-{}.json", self.board_id, self.seq)
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let s = &self.storyline;
        let _ = writeln!(md, "# Handover: {}", s.title);
        let _ = writeln!(md);
        let _ = writeln!(
            md,
            "Board `{}` ({}), seq {}, generated {}. Storyline {} by {}{}.",
            self.board_id,
            self.client_env,
            self.seq,
            self.generated_at.to_rfc3339(),
            s.id,
            s.created_by,
            if s.shared { ", shared with the team" } else { "" }
        );
        let _ = writeln!(md);

        let _ = writeln!(md, "## Storyline");
        let _ = writeln!(md);
        let _ = writeln!(md, "### Waypoints");
        let _ = writeln!(md);
        if s.waypoints.is_empty() {
            let _ = writeln!(md, "_None._");
        }
        for (i, w) in s.waypoints.iter().enumerate() {
            let _ = write!(
                md,
                "{}. **{}** ({}, priority {}) {} to {}",
                i + 1,
                w.name,
                w.kind.as_str(),
                w.priority.as_str(),
                w.event_period.start().to_rfc3339(),
                w.event_period.end().to_rfc3339()
            );
            if w.archived {
                md.push_str(" [archived]");
            }
            md.push('\n');
            if !w.notes.is_empty() {
                let _ = writeln!(md, "   - Notes: {}", w.notes);
            }
            if let Some(q) = &w.saved_query {
                let _ = writeln!(md, "   - Saved view: `{q}`");
            }
        }
        let _ = writeln!(md);
        let _ = writeln!(md, "### Leads");
        let _ = writeln!(md);
        if s.leads.is_empty() {
            let _ = writeln!(md, "_None._");
        }
        for l in &s.leads {
            let status = match l.status {
                LeadStatus::Open => "OPEN".to_string(),
                LeadStatus::Closed => format!(
                    "closed {}",
                    l.closed_at.map(|t| t.to_rfc3339()).unwrap_or_default()
                ),
            };
            let _ = write!(md, "- [{status}] {}", l.title);
            if !l.notes.is_empty() {
                let _ = write!(md, ": {}", l.notes);
            }
            md.push('\n');
        }
        let _ = writeln!(md);
        let _ = writeln!(md, "### Relations");
        let _ = writeln!(md);
        if s.relations.is_empty() {
            let _ = writeln!(md, "_None._");
        }
        for r in &s.relations {
            let _ = write!(md, "- {} -- {}", r.from, r.to);
            if let Some(label) = &r.label {
                let _ = write!(md, " ({label})");
            }
            md.push('\n');
        }
        let _ = writeln!(md);

        if let Some(c) = &self.checklist {
            let _ = writeln!(md, "## Checklist");
            let _ = writeln!(md);
            let status = match c.status {
                ChecklistStatus::Active => "active",
                ChecklistStatus::Completed if c.completed_with_override => {
                    "completed (override: pending items remained)"
                }
                ChecklistStatus::Completed => "completed",
            };
            let _ = writeln!(
                md,
                "Checklist {} for {}: {}, {} done, {} pending.",
                c.id,
                c.session_owner,
                status,
                c.done.len(),
                c.pending.len()
            );
            let _ = writeln!(md);
            for (mark, items) in [("x", &c.done), (" ", &c.pending)] {
                for item in items {
                    let _ = write!(md, "- [{mark}] {}", item.text);
                    if !item.note.is_empty() {
                        let _ = write!(md, ": {}", item.note.replace('\n', "; "));
                    }
                    md.push('\n');
                }
            }
            if let Some(b) = &c.resume_bookmark {
                let _ = writeln!(md);
                let _ = writeln!(
                    md,
                    "Resume from `{}` ({}, captured {}).",
                    b.query_representation,
                    b.source_tool_id,
                    b.captured_at.to_rfc3339()
                );
            }
            let _ = writeln!(md);
        }

        let _ = writeln!(md, "## Notes");
        let _ = writeln!(md);
        if self.notes.is_empty() {
            let _ = writeln!(md, "_None._");
        }
        for n in &self.notes {
            let _ = writeln!(md, "- {} ({})", n.text, n.created_by);
        }
        md
    }
}

pub const RUBRIC_FILE_NAME: &str = "dh-rubric.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingScale {
    pub min: u8,
    pub max: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heuristic {
    pub id: String,
    pub name: String,
    pub description: String,
    /// Filled in by an evaluator.
    pub rating: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicRubric {
    pub scale: RatingScale,
    pub heuristics: Vec<Heuristic>,
}

const HEURISTICS: [(&str, &str, &str); 6] = [
    ("DH1", "Navigation & Exploration", "How easy was it to move around the board and find your way back?"),
    ("DH2", "Clarity & Sense-Making", "Did the board help you see what the evidence adds up to?"),
    ("DH3", "Decision Support", "Did the board help you pick what to look at next, and when to stop?"),
    ("DH4", "Communication & Handover", "Could a colleague pick up the hunt from what you left behind?"),
    ("DH5", "Memory & Mental Load", "How much did you have to keep in your head between sessions?"),
    ("DH6", "Overall Perception", "Would you use this board in your day-to-day hunting?"),
];

pub fn heuristic_rubric() -> HeuristicRubric {
    HeuristicRubric {
        scale: RatingScale { min: 1, max: 5 },
        heuristics: HEURISTICS
            .iter()
            .map(|(id, name, description)| Heuristic {
                id: (*id).to_string(),
                name: (*name).to_string(),
                description: (*description).to_string(),
                rating: None,
            })
            .collect(),
    }
}

/// The rubric document, byte-identical on every call.
pub fn emit_heuristic_rubric() -> String {
    to_canonical_json(&heuristic_rubric())
}
