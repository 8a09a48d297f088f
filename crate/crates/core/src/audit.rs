//! Brute-force structural checks over a board state.
//!
//! Used after every transition in property tests and by the acceptance suite.

use crate::checklist::ChecklistStatus;
use crate::model::LeadStatus;
use crate::state::BoardState;

/// Returns a description of every violated invariant, empty when sound.
pub fn violations(state: &BoardState) -> Vec<String> {
    let mut out = Vec::new();

    for c in state.connectors.values() {
        if c.endpoint_a == c.endpoint_b {
            out.push(format!("connector {} is a self loop", c.id));
        }
        for end in [c.endpoint_a, c.endpoint_b] {
            if state.kind_of(end).is_none() {
                out.push(format!("connector {} references unknown {}", c.id, end));
            }
            if !state.is_archived(c.id) && state.is_archived(end) {
                out.push(format!("live connector {} has archived endpoint {}", c.id, end));
            }
        }
    }

    for (canvas, layout) in &state.canvases {
        for (id, placement) in &layout.items {
            if placement.object_id != *id || placement.canvas != *canvas {
                out.push(format!("placement key mismatch for {id} on {canvas}"));
            }
            if !state.is_live(*id) {
                out.push(format!("placement of non-live {id} on {canvas}"));
            }
            if !placement.x.is_finite() || !placement.y.is_finite() {
                out.push(format!("non-finite placement of {id} on {canvas}"));
            }
            if placement.z_order >= layout.next_z {
                out.push(format!("z order of {id} on {canvas} not below next_z"));
            }
        }
        if let Some(owner) = canvas.owner() {
            if !state.actors.contains_key(owner) {
                out.push(format!("canvas {canvas} owned by unknown actor"));
            }
        }
    }

    for s in state.storylines.values() {
        for id in &s.member_ids {
            if state.kind_of(*id).is_none() {
                out.push(format!("storyline {} references unknown {}", s.id, id));
            }
            if let Some(c) = state.connectors.get(id) {
                if !s.member_ids.contains(&c.endpoint_a) || !s.member_ids.contains(&c.endpoint_b) {
                    out.push(format!("storyline {} not closed over connector {}", s.id, c.id));
                }
            }
        }
        for id in s.member_placements.keys() {
            if !s.member_ids.contains(id) || state.connectors.contains_key(id) {
                out.push(format!("storyline {} has stray coordinates for {}", s.id, id));
            }
        }
        for id in &s.member_ids {
            let positioned = !state.connectors.contains_key(id);
            if positioned && !s.member_placements.contains_key(id) {
                out.push(format!("storyline {} lacks coordinates for {}", s.id, id));
            }
        }
        if s.last_modified < s.created_at {
            out.push(format!("storyline {} modified before creation", s.id));
        }
    }

    for l in state.leads.values() {
        match (l.status, l.closed_at) {
            (LeadStatus::Open, None) => {}
            (LeadStatus::Closed, Some(at)) if at >= l.created_at => {}
            _ => out.push(format!("lead {} has inconsistent closure", l.id)),
        }
    }

    for w in state.waypoints.values() {
        if w.name.trim().is_empty() {
            out.push(format!("waypoint {} has empty name", w.id));
        }
        if w.updated_at < w.created_at {
            out.push(format!("waypoint {} updated before creation", w.id));
        }
    }

    for a in state.annotations.values() {
        if a.text.trim().is_empty() {
            out.push(format!("annotation {} is empty", a.id));
        }
    }

    let mut active_owners = std::collections::BTreeSet::new();
    for c in state.checklists.values() {
        if c.done_count() + c.pending_count() != c.items.len() {
            out.push(format!("checklist {} counts do not add up", c.id));
        }
        match c.status {
            ChecklistStatus::Active => {
                if !active_owners.insert(c.session_owner.clone()) {
                    out.push(format!("second active checklist for {}", c.session_owner));
                }
                if c.completed_at.is_some() {
                    out.push(format!("active checklist {} has completion time", c.id));
                }
            }
            ChecklistStatus::Completed => {
                if c.pending_count() > 0 && !c.completed_with_override {
                    out.push(format!("checklist {} completed with pending items", c.id));
                }
                if c.completed_at.is_none() {
                    out.push(format!("completed checklist {} lacks time", c.id));
                }
            }
        }
    }

    for id in &state.archived {
        if state.kind_of(*id).is_none() {
            out.push(format!("archived id {id} is unknown"));
        }
    }

    out
}
