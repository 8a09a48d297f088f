//! Board aggregate and its pure transition function.
//!
//! Every handler checks all preconditions before touching the state, so a
//! rejected operation leaves the board byte-identical.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checklist::Checklist;
use crate::error::OpError;
use crate::event::{to_canonical_json, BoardEvent};
use crate::ids::{Actor, ActorId, BoardId, CanvasRef, EntityId};
use crate::model::{
    Annotation, CanvasLayout, Connector, Lead, LeadStatus, ObjectKind, Placement, Point,
    Storyline, Waypoint, WaypointDraft, WaypointPatch,
};
use crate::ops::{Op, Outcome};
use crate::time::{Period, Timestamp};
use crate::view::ViewState;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ApplyError {
    #[error("expected seq {expected}, found {found}")]
    OutOfSequence { expected: u64, found: u64 },
    #[error("event {seq} is for board {found}, not {expected}")]
    WrongBoard {
        seq: u64,
        expected: BoardId,
        found: BoardId,
    },
    #[error("event {seq} goes back in time")]
    TimeRegression { seq: u64 },
    #[error("event {seq} rejected: {source}")]
    Rejected {
        seq: u64,
        #[source]
        source: OpError,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoardState {
    pub board_id: BoardId,
    pub client_env: String,
    pub last_applied_seq: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_event_at: Option<Timestamp>,
    next_id: u64,
    pub actors: BTreeMap<ActorId, Actor>,
    pub waypoints: BTreeMap<EntityId, Waypoint>,
    pub leads: BTreeMap<EntityId, Lead>,
    pub annotations: BTreeMap<EntityId, Annotation>,
    pub connectors: BTreeMap<EntityId, Connector>,
    /// Soft-deleted ids. Archived objects stay in their kind map so
    /// storylines can still render them.
    pub archived: BTreeSet<EntityId>,
    pub canvases: BTreeMap<CanvasRef, CanvasLayout>,
    pub storylines: BTreeMap<EntityId, Storyline>,
    pub checklists: BTreeMap<EntityId, Checklist>,
}

impl BoardState {
    pub fn new(board_id: BoardId, client_env: impl Into<String>) -> Self {
        let mut canvases = BTreeMap::new();
        canvases.insert(CanvasRef::Team, CanvasLayout::default());
        Self {
            board_id,
            client_env: client_env.into(),
            last_applied_seq: 0,
            last_event_at: None,
            next_id: 1,
            actors: BTreeMap::new(),
            waypoints: BTreeMap::new(),
            leads: BTreeMap::new(),
            annotations: BTreeMap::new(),
            connectors: BTreeMap::new(),
            archived: BTreeSet::new(),
            canvases,
            storylines: BTreeMap::new(),
            checklists: BTreeMap::new(),
        }
    }

    /// Stable key-ordered encoding used for snapshots and equality checks.
    pub fn canonical(&self) -> String {
        to_canonical_json(self)
    }

    pub fn kind_of(&self, id: EntityId) -> Option<ObjectKind> {
        if self.waypoints.contains_key(&id) {
            Some(ObjectKind::Waypoint)
        } else if self.leads.contains_key(&id) {
            Some(ObjectKind::Lead)
        } else if self.annotations.contains_key(&id) {
            Some(ObjectKind::Annotation)
        } else if self.connectors.contains_key(&id) {
            Some(ObjectKind::Connector)
        } else {
            None
        }
    }

    pub fn is_archived(&self, id: EntityId) -> bool {
        self.archived.contains(&id)
    }

    pub fn is_live(&self, id: EntityId) -> bool {
        self.kind_of(id).is_some() && !self.is_archived(id)
    }

    pub fn placement(&self, canvas: &CanvasRef, id: EntityId) -> Option<&Placement> {
        self.canvases.get(canvas).and_then(|c| c.items.get(&id))
    }

    /// Whether `id` is visible on `canvas`: placed objects, and connectors
    /// whose endpoints are both placed.
    pub fn on_canvas(&self, canvas: &CanvasRef, id: EntityId) -> bool {
        if !self.is_live(id) {
            return false;
        }
        match self.connectors.get(&id) {
            Some(c) => {
                self.placement(canvas, c.endpoint_a).is_some()
                    && self.placement(canvas, c.endpoint_b).is_some()
            }
            None => self.placement(canvas, id).is_some(),
        }
    }

    /// Whether `actor` may see the storyline: its creator, or anyone once shared.
    pub fn storyline_visible(&self, storyline: &Storyline, actor: &ActorId) -> bool {
        storyline.shared || &storyline.created_by == actor
    }

    /// The actor's latest storyline, the one auto-displayed on their canvas.
    pub fn most_recent_storyline(&self, actor: &ActorId) -> Option<&Storyline> {
        self.storylines
            .values()
            .filter(|s| &s.created_by == actor)
            .max_by(|a, b| a.created_at.cmp(&b.created_at).then(a.id.cmp(&b.id)))
    }

    pub fn open_waypoint_view(&self, id: EntityId) -> Result<&ViewState, OpError> {
        let waypoint = self.waypoints.get(&id).ok_or(OpError::NotFound(id))?;
        waypoint.view_state.as_ref().ok_or(OpError::NoSavedView(id))
    }

    /// Applies one logged event. On error the state is unchanged.
    pub fn apply(&mut self, event: &BoardEvent) -> Result<Outcome, ApplyError> {
        let expected = self.last_applied_seq + 1;
        if event.seq != expected {
            return Err(ApplyError::OutOfSequence {
                expected,
                found: event.seq,
            });
        }
        if event.board != self.board_id {
            return Err(ApplyError::WrongBoard {
                seq: event.seq,
                expected: self.board_id.clone(),
                found: event.board.clone(),
            });
        }
        if self.last_event_at.is_some_and(|last| event.server_time < last) {
            return Err(ApplyError::TimeRegression { seq: event.seq });
        }
        let outcome = self
            .execute(&event.actor, event.server_time, &event.op)
            .map_err(|source| ApplyError::Rejected {
                seq: event.seq,
                source,
            })?;
        self.actors.insert(event.actor.id.clone(), event.actor.clone());
        self.last_applied_seq = event.seq;
        self.last_event_at = Some(event.server_time);
        Ok(outcome)
    }

    /// Checks `op` against the current state without applying it.
    pub fn validate(&self, actor: &Actor, at: Timestamp, op: &Op) -> Result<(), OpError> {
        self.clone().execute(actor, at, op).map(|_| ())
    }

    fn alloc_id(&mut self) -> EntityId {
        let id = EntityId::new(self.next_id);
        self.next_id += 1;
        id
    }

    fn execute(&mut self, actor: &Actor, at: Timestamp, op: &Op) -> Result<Outcome, OpError> {
        let who = &actor.id;
        match op {
            Op::CreateWaypoint { draft, view_state } => {
                self.create_waypoint(who, at, draft, view_state.as_ref())
            }
            Op::UpdateWaypoint { id, patch } => self.update_waypoint(*id, at, patch),
            Op::CreateLead { title, notes } => {
                if title.trim().is_empty() {
                    return Err(OpError::EmptyTitle);
                }
                let lead = Lead {
                    id: self.alloc_id(),
                    title: title.clone(),
                    notes: notes.clone(),
                    status: LeadStatus::Open,
                    created_by: who.clone(),
                    created_at: at,
                    closed_at: None,
                };
                self.leads.insert(lead.id, lead.clone());
                Ok(Outcome::Lead(lead))
            }
            Op::CloseLead { id } => {
                let archived = self.is_archived(*id);
                let lead = self.leads.get_mut(id).ok_or(OpError::NotFound(*id))?;
                if archived {
                    return Err(OpError::Archived(*id));
                }
                if lead.status == LeadStatus::Closed {
                    return Err(OpError::AlreadyClosed(*id));
                }
                lead.status = LeadStatus::Closed;
                lead.closed_at = Some(at);
                Ok(Outcome::Lead(lead.clone()))
            }
            Op::CreateAnnotation { text } => {
                if text.trim().is_empty() {
                    return Err(OpError::EmptyText);
                }
                let note = Annotation {
                    id: self.alloc_id(),
                    text: text.clone(),
                    created_by: who.clone(),
                    created_at: at,
                };
                self.annotations.insert(note.id, note.clone());
                Ok(Outcome::Annotation(note))
            }
            Op::CreateConnector { a, b, label } => self.create_connector(who, at, *a, *b, label),
            Op::ArchiveObject { id } => self.archive(*id),
            Op::PlaceObject {
                canvas,
                object_id,
                x,
                y,
            } => self.place(who, canvas, *object_id, *x, *y, false),
            Op::MoveObject {
                canvas,
                object_id,
                x,
                y,
            } => self.place(who, canvas, *object_id, *x, *y, true),
            Op::SaveStoryline {
                title,
                selected_ids,
                canvas,
            } => self.save_storyline(who, at, title, selected_ids, canvas.as_ref()),
            Op::ExtendStoryline {
                id,
                added_ids,
                canvas,
            } => self.extend_storyline(who, at, *id, added_ids, canvas.as_ref()),
            Op::LoadStoryline { id, canvas } => self.load_storyline(who, *id, canvas),
            Op::RenameStoryline { id, title } => {
                if title.trim().is_empty() {
                    return Err(OpError::EmptyTitle);
                }
                let storyline = self.visible_storyline(who, *id)?;
                let mut storyline = storyline.clone();
                storyline.title = title.clone();
                storyline.last_modified = at;
                self.storylines.insert(storyline.id, storyline.clone());
                Ok(Outcome::Storyline(storyline))
            }
            Op::ShareStoryline { id } => self.share_storyline(who, at, *id),
            Op::InstantiateChecklist { template } => {
                if template.items.iter().any(|item| item.trim().is_empty()) {
                    return Err(OpError::EmptyTemplateItem);
                }
                if let Some(active) = self
                    .checklists
                    .values()
                    .find(|c| c.is_active() && &c.session_owner == who)
                {
                    return Err(OpError::ActiveChecklistExists(active.id));
                }
                let id = self.alloc_id();
                let item_ids: Vec<EntityId> =
                    template.items.iter().map(|_| self.alloc_id()).collect();
                let checklist = Checklist::instantiate(
                    id,
                    item_ids.into_iter(),
                    &self.client_env,
                    who,
                    template,
                    at,
                );
                self.checklists.insert(id, checklist.clone());
                Ok(Outcome::Checklist(checklist))
            }
            Op::AddChecklistItem { checklist_id, text } => {
                self.checklist(*checklist_id)?.check_add_item(text)?;
                let item_id = self.alloc_id();
                let checklist = self.checklist_mut(*checklist_id)?;
                Ok(Outcome::ChecklistItem(checklist.push_custom(item_id, text)))
            }
            Op::SetItemStatus {
                checklist_id,
                item_id,
                status,
                note,
            } => {
                let checklist = self.checklist_mut(*checklist_id)?;
                let item = checklist.set_item_status(*item_id, *status, note.as_deref())?;
                Ok(Outcome::ChecklistItem(item))
            }
            Op::AttachResumeBookmark {
                checklist_id,
                view_state,
            } => {
                let checklist = self.checklist_mut(*checklist_id)?;
                checklist.attach_bookmark(view_state)?;
                Ok(Outcome::Checklist(checklist.clone()))
            }
            Op::CompleteChecklist {
                checklist_id,
                override_pending,
            } => {
                let checklist = self.checklist_mut(*checklist_id)?;
                checklist.complete(*override_pending, at)?;
                Ok(Outcome::Checklist(checklist.clone()))
            }
        }
    }

    fn checklist(&self, id: EntityId) -> Result<&Checklist, OpError> {
        self.checklists.get(&id).ok_or(OpError::NotFound(id))
    }

    fn checklist_mut(&mut self, id: EntityId) -> Result<&mut Checklist, OpError> {
        self.checklists.get_mut(&id).ok_or(OpError::NotFound(id))
    }

    fn create_waypoint(
        &mut self,
        who: &ActorId,
        at: Timestamp,
        draft: &WaypointDraft,
        view_state: Option<&ViewState>,
    ) -> Result<Outcome, OpError> {
        if draft.name.trim().is_empty() {
            return Err(OpError::EmptyName);
        }
        let event_period = draft
            .event_period
            .or_else(|| view_state.and_then(|v| v.time_window))
            .unwrap_or_else(|| Period::instant(at));
        let waypoint = Waypoint {
            id: self.alloc_id(),
            name: draft.name.clone(),
            kind: draft.kind,
            notes: draft.notes.clone(),
            details: draft.details.clone(),
            event_period,
            priority: draft.priority,
            view_state: view_state.cloned(),
            created_by: who.clone(),
            created_at: at,
            updated_at: at,
        };
        self.waypoints.insert(waypoint.id, waypoint.clone());
        Ok(Outcome::Waypoint(waypoint))
    }

    fn update_waypoint(
        &mut self,
        id: EntityId,
        at: Timestamp,
        patch: &WaypointPatch,
    ) -> Result<Outcome, OpError> {
        let archived = self.is_archived(id);
        let waypoint = self.waypoints.get_mut(&id).ok_or(OpError::NotFound(id))?;
        if archived {
            return Err(OpError::Archived(id));
        }
        if patch.name.as_ref().is_some_and(|n| n.trim().is_empty()) {
            return Err(OpError::EmptyName);
        }
        if let Some(name) = &patch.name {
            waypoint.name = name.clone();
        }
        if let Some(kind) = patch.kind {
            waypoint.kind = kind;
        }
        if let Some(notes) = &patch.notes {
            waypoint.notes = notes.clone();
        }
        if let Some(details) = &patch.details {
            waypoint.details = details.clone();
        }
        if let Some(period) = patch.event_period {
            waypoint.event_period = period;
        }
        if let Some(priority) = patch.priority {
            waypoint.priority = priority;
        }
        waypoint.updated_at = at;
        Ok(Outcome::Waypoint(waypoint.clone()))
    }

    fn create_connector(
        &mut self,
        who: &ActorId,
        at: Timestamp,
        a: EntityId,
        b: EntityId,
        label: &Option<String>,
    ) -> Result<Outcome, OpError> {
        if a == b {
            return Err(OpError::SelfLoop(a));
        }
        for end in [a, b] {
            match self.kind_of(end) {
                Some(kind) if kind.is_placeable() => {}
                _ => return Err(OpError::NotFound(end)),
            }
            if self.is_archived(end) {
                return Err(OpError::EndpointArchived(end));
            }
        }
        let connector = Connector {
            id: self.alloc_id(),
            endpoint_a: a,
            endpoint_b: b,
            label: label.clone().filter(|l| !l.is_empty()),
            created_by: who.clone(),
            created_at: at,
        };
        self.connectors.insert(connector.id, connector.clone());
        Ok(Outcome::Connector(connector))
    }

    fn archive(&mut self, id: EntityId) -> Result<Outcome, OpError> {
        if !self.is_live(id) {
            return Err(OpError::NotFound(id));
        }
        let mut gone = vec![id];
        gone.extend(
            self.connectors
                .values()
                .filter(|c| c.touches(id) && !self.archived.contains(&c.id))
                .map(|c| c.id),
        );
        for canvas in self.canvases.values_mut() {
            for archived in &gone {
                canvas.items.remove(archived);
            }
        }
        self.archived.extend(gone.iter().copied());
        Ok(Outcome::Archived(gone))
    }

    fn check_canvas(&self, who: &ActorId, canvas: &CanvasRef) -> Result<(), OpError> {
        if canvas.accessible_by(who) {
            Ok(())
        } else {
            Err(OpError::CanvasForbidden(canvas.clone()))
        }
    }

    fn place(
        &mut self,
        who: &ActorId,
        canvas: &CanvasRef,
        object: EntityId,
        x: f64,
        y: f64,
        moving: bool,
    ) -> Result<Outcome, OpError> {
        self.check_canvas(who, canvas)?;
        if !x.is_finite() || !y.is_finite() {
            return Err(OpError::NonFiniteCoordinate);
        }
        let kind = self.kind_of(object).ok_or(OpError::NotFound(object))?;
        if self.is_archived(object) {
            return Err(OpError::Archived(object));
        }
        if !kind.is_placeable() {
            return Err(OpError::NotPlaceable(object));
        }
        let placed = self.placement(canvas, object).is_some();
        match (moving, placed) {
            (false, true) => {
                return Err(OpError::AlreadyPlaced {
                    canvas: canvas.clone(),
                    object,
                })
            }
            (true, false) => {
                return Err(OpError::NotPlaced {
                    canvas: canvas.clone(),
                    object,
                })
            }
            _ => {}
        }
        Ok(Outcome::Placement(self.put(canvas, object, Point { x, y })))
    }

    /// Inserts or repositions a placement; repositioning keeps its z order.
    fn put(&mut self, canvas: &CanvasRef, object: EntityId, at: Point) -> Placement {
        let layout = self.canvases.entry(canvas.clone()).or_default();
        let z_order = match layout.items.get(&object) {
            Some(existing) => existing.z_order,
            None => {
                let z = layout.next_z;
                layout.next_z += 1;
                z
            }
        };
        let placement = Placement {
            canvas: canvas.clone(),
            object_id: object,
            x: at.x,
            y: at.y,
            z_order,
        };
        layout.items.insert(object, placement.clone());
        placement
    }

    /// Selected ids plus the endpoints of every selected connector.
    fn endpoint_closure(&self, selected: &[EntityId]) -> BTreeSet<EntityId> {
        let mut members: BTreeSet<EntityId> = selected.iter().copied().collect();
        for id in selected {
            if let Some(c) = self.connectors.get(id) {
                members.insert(c.endpoint_a);
                members.insert(c.endpoint_b);
            }
        }
        members
    }

    fn check_selection(&self, canvas: &CanvasRef, selected: &[EntityId]) -> Result<(), OpError> {
        if selected.is_empty() {
            return Err(OpError::EmptySelection);
        }
        match selected.iter().find(|id| !self.on_canvas(canvas, **id)) {
            Some(missing) => Err(OpError::NotFound(*missing)),
            None => Ok(()),
        }
    }

    fn snapshot_points(
        &self,
        canvas: &CanvasRef,
        members: &BTreeSet<EntityId>,
    ) -> BTreeMap<EntityId, Point> {
        members
            .iter()
            .filter_map(|id| self.placement(canvas, *id).map(|p| (*id, p.point())))
            .collect()
    }

    fn save_storyline(
        &mut self,
        who: &ActorId,
        at: Timestamp,
        title: &str,
        selected: &[EntityId],
        canvas: Option<&CanvasRef>,
    ) -> Result<Outcome, OpError> {
        if title.trim().is_empty() {
            return Err(OpError::EmptyTitle);
        }
        let canvas = canvas
            .cloned()
            .unwrap_or_else(|| CanvasRef::Personal(who.clone()));
        self.check_canvas(who, &canvas)?;
        self.check_selection(&canvas, selected)?;
        let member_ids = self.endpoint_closure(selected);
        let member_placements = self.snapshot_points(&canvas, &member_ids);
        let storyline = Storyline {
            id: self.alloc_id(),
            title: title.to_string(),
            member_ids,
            member_placements,
            shared: false,
            created_by: who.clone(),
            created_at: at,
            last_modified: at,
        };
        self.storylines.insert(storyline.id, storyline.clone());
        Ok(Outcome::Storyline(storyline))
    }

    fn extend_storyline(
        &mut self,
        who: &ActorId,
        at: Timestamp,
        id: EntityId,
        added: &[EntityId],
        canvas: Option<&CanvasRef>,
    ) -> Result<Outcome, OpError> {
        let storyline = self.visible_storyline(who, id)?;
        if &storyline.created_by != who {
            return Err(OpError::NotOwner(id));
        }
        let canvas = canvas
            .cloned()
            .unwrap_or_else(|| CanvasRef::Personal(who.clone()));
        self.check_canvas(who, &canvas)?;
        self.check_selection(&canvas, added)?;
        let mut storyline = storyline.clone();
        storyline.member_ids.extend(self.endpoint_closure(added));
        let fresh = self.snapshot_points(&canvas, &storyline.member_ids);
        storyline.member_placements.extend(fresh);
        storyline.last_modified = at;
        self.storylines.insert(id, storyline.clone());
        Ok(Outcome::Storyline(storyline))
    }

    fn visible_storyline(&self, who: &ActorId, id: EntityId) -> Result<&Storyline, OpError> {
        self.storylines
            .get(&id)
            .filter(|s| self.storyline_visible(s, who))
            .ok_or(OpError::NotFound(id))
    }

    /// Live, placeable members with their saved coordinates.
    fn restorable_members(&self, storyline: &Storyline) -> Vec<(EntityId, Point)> {
        storyline
            .member_placements
            .iter()
            .filter(|(id, _)| self.is_live(**id))
            .map(|(id, p)| (*id, *p))
            .collect()
    }

    fn load_storyline(
        &mut self,
        who: &ActorId,
        id: EntityId,
        canvas: &CanvasRef,
    ) -> Result<Outcome, OpError> {
        let storyline = self.visible_storyline(who, id)?;
        self.check_canvas(who, canvas)?;
        let members = self.restorable_members(storyline);
        let placements = members
            .into_iter()
            .map(|(object, point)| self.put(canvas, object, point))
            .collect();
        Ok(Outcome::Placements(placements))
    }

    fn share_storyline(&mut self, who: &ActorId, at: Timestamp, id: EntityId) -> Result<Outcome, OpError> {
        let storyline = self.storylines.get(&id).ok_or(OpError::NotFound(id))?;
        if &storyline.created_by != who {
            return Err(OpError::NotOwner(id));
        }
        if storyline.shared {
            return Ok(Outcome::Storyline(storyline.clone()));
        }
        let members = self.restorable_members(storyline);
        for (object, point) in members {
            if self.placement(&CanvasRef::Team, object).is_none() {
                self.put(&CanvasRef::Team, object, point);
            }
        }
        let storyline = self.storylines.get_mut(&id).expect("checked above");
        storyline.shared = true;
        storyline.last_modified = at;
        Ok(Outcome::Storyline(storyline.clone()))
    }
}
