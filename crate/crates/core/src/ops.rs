//! Mutating operations as they appear in the event log, and their results.

use serde::{Deserialize, Serialize};

use crate::checklist::{Checklist, ChecklistItem, ChecklistTemplate, ItemStatus};
use crate::ids::{CanvasRef, EntityId};
use crate::model::{
    Annotation, Connector, Lead, Placement, Storyline, Waypoint, WaypointDraft, WaypointPatch,
};
use crate::view::ViewState;

/// Payload of a board event. Every variant is self-contained so a log replays
/// without outside configuration (checklist templates are embedded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Op {
    CreateWaypoint {
        draft: WaypointDraft,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        view_state: Option<ViewState>,
    },
    UpdateWaypoint {
        id: EntityId,
        patch: WaypointPatch,
    },
    CreateLead {
        title: String,
        #[serde(default)]
        notes: String,
    },
    CloseLead {
        id: EntityId,
    },
    CreateAnnotation {
        text: String,
    },
    CreateConnector {
        a: EntityId,
        b: EntityId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    ArchiveObject {
        id: EntityId,
    },
    PlaceObject {
        canvas: CanvasRef,
        object_id: EntityId,
        x: f64,
        y: f64,
    },
    MoveObject {
        canvas: CanvasRef,
        object_id: EntityId,
        x: f64,
        y: f64,
    },
    SaveStoryline {
        title: String,
        selected_ids: Vec<EntityId>,
        /// Defaults to the submitting hunter's own canvas.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        canvas: Option<CanvasRef>,
    },
    ExtendStoryline {
        id: EntityId,
        added_ids: Vec<EntityId>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        canvas: Option<CanvasRef>,
    },
    LoadStoryline {
        id: EntityId,
        canvas: CanvasRef,
    },
    RenameStoryline {
        id: EntityId,
        title: String,
    },
    ShareStoryline {
        id: EntityId,
    },
    InstantiateChecklist {
        template: ChecklistTemplate,
    },
    AddChecklistItem {
        checklist_id: EntityId,
        text: String,
    },
    SetItemStatus {
        checklist_id: EntityId,
        item_id: EntityId,
        status: ItemStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        note: Option<String>,
    },
    AttachResumeBookmark {
        checklist_id: EntityId,
        view_state: ViewState,
    },
    CompleteChecklist {
        checklist_id: EntityId,
        #[serde(rename = "override")]
        override_pending: bool,
    },
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::CreateWaypoint { .. } => "create_waypoint",
            Op::UpdateWaypoint { .. } => "update_waypoint",
            Op::CreateLead { .. } => "create_lead",
            Op::CloseLead { .. } => "close_lead",
            Op::CreateAnnotation { .. } => "create_annotation",
            Op::CreateConnector { .. } => "create_connector",
            Op::ArchiveObject { .. } => "archive_object",
            Op::PlaceObject { .. } => "place_object",
            Op::MoveObject { .. } => "move_object",
            Op::SaveStoryline { .. } => "save_storyline",
            Op::ExtendStoryline { .. } => "extend_storyline",
            Op::LoadStoryline { .. } => "load_storyline",
            Op::RenameStoryline { .. } => "rename_storyline",
            Op::ShareStoryline { .. } => "share_storyline",
            Op::InstantiateChecklist { .. } => "instantiate_checklist",
            Op::AddChecklistItem { .. } => "add_checklist_item",
            Op::SetItemStatus { .. } => "set_item_status",
            Op::AttachResumeBookmark { .. } => "attach_resume_bookmark",
            Op::CompleteChecklist { .. } => "complete_checklist",
        }
    }
}

/// Result of a successfully applied operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Outcome {
    Waypoint(Waypoint),
    Lead(Lead),
    Annotation(Annotation),
    Connector(Connector),
    /// Ids archived by the operation, the target first, then cascaded connectors.
    Archived(Vec<EntityId>),
    Placement(Placement),
    Placements(Vec<Placement>),
    Storyline(Storyline),
    Checklist(Checklist),
    ChecklistItem(ChecklistItem),
}
