use std::sync::Arc;

use chrono::{DateTime, Utc};
use huntboard_core::checklist::{
    ChecklistStatus, ChecklistTemplate, ItemOrigin, ItemStatus, TemplateRegistry,
    DEFAULT_TEMPLATE_ID,
};
use huntboard_core::hub::SubmitError;
use huntboard_core::model::{LeadStatus, Priority, WaypointDraft, WaypointKind, WaypointPatch};
use huntboard_core::replay::replay;
use huntboard_core::time::{Period, SyntheticClock, Timestamp};
use huntboard_core::view::{capture_view, list_waypoints, SortField, SortKey, WaypointFilter};
use huntboard_core::{audit, Actor, ActorId, BoardId, CanvasRef, EntityId, Hub, Op, OpError, Outcome};

fn ts(s: &str) -> Timestamp {
    DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
}

struct Board {
    hub: Hub,
    id: BoardId,
    jay: Actor,
    kim: Actor,
}

impl Board {
    fn new() -> Self {
        let hub = Hub::in_memory(Arc::new(SyntheticClock::standard()));
        let id = BoardId::new("acme").unwrap();
        hub.create_board(id.clone(), "acme-corp").unwrap();
        Self {
            hub,
            id,
            jay: Actor::named(ActorId::new("jay").unwrap()),
            kim: Actor::named(ActorId::new("kim").unwrap()),
        }
    }

    fn try_as(&self, actor: &Actor, op: Op) -> Result<Outcome, OpError> {
        match self.hub.submit(&self.id, actor, op) {
            Ok(accepted) => {
                let state = self.hub.state(&self.id).unwrap();
                let problems = audit::violations(&state);
                assert!(problems.is_empty(), "{problems:?}");
                Ok(accepted.outcome)
            }
            Err(SubmitError::Rejected(e)) => Err(e),
            Err(e) => panic!("{e}"),
        }
    }

    fn try_op(&self, op: Op) -> Result<Outcome, OpError> {
        self.try_as(&self.jay, op)
    }

    fn op(&self, op: Op) -> Outcome {
        self.try_op(op).unwrap()
    }

    fn seq(&self) -> u64 {
        self.hub.seq(&self.id).unwrap()
    }

    fn waypoint(&self, name: &str, kind: WaypointKind) -> EntityId {
        match self.op(Op::CreateWaypoint {
            draft: WaypointDraft::new(name, kind),
            view_state: None,
        }) {
            Outcome::Waypoint(w) => w.id,
            other => panic!("{other:?}"),
        }
    }

    fn lead(&self, title: &str) -> EntityId {
        match self.op(Op::CreateLead {
            title: title.into(),
            notes: String::new(),
        }) {
            Outcome::Lead(l) => l.id,
            other => panic!("{other:?}"),
        }
    }

    fn note(&self, text: &str) -> EntityId {
        match self.op(Op::CreateAnnotation { text: text.into() }) {
            Outcome::Annotation(a) => a.id,
            other => panic!("{other:?}"),
        }
    }

    fn connect(&self, a: EntityId, b: EntityId) -> EntityId {
        match self.op(Op::CreateConnector { a, b, label: None }) {
            Outcome::Connector(c) => c.id,
            other => panic!("{other:?}"),
        }
    }

    fn mine(&self) -> CanvasRef {
        CanvasRef::Personal(self.jay.id.clone())
    }

    fn place(&self, id: EntityId, x: f64, y: f64) {
        self.op(Op::PlaceObject {
            canvas: self.mine(),
            object_id: id,
            x,
            y,
        });
    }

    fn save(&self, title: &str, ids: Vec<EntityId>) -> Result<Outcome, OpError> {
        self.try_op(Op::SaveStoryline {
            title: title.into(),
            selected_ids: ids,
            canvas: None,
        })
    }
}

fn storyline(o: Outcome) -> huntboard_core::model::Storyline {
    match o {
        Outcome::Storyline(s) => s,
        other => panic!("{other:?}"),
    }
}

// --- waypoints ---

#[test]
fn create_waypoint_with_captured_view() {
    let b = Board::new();
    let view = capture_view(
        "ueba",
        "ueba://search?user=bruce.wright&anomaly=file_access",
        Some(Period::new(ts("2025-01-06T01:00:00Z"), ts("2025-01-06T09:00:00Z")).unwrap()),
        ts("2025-01-06T09:05:00Z"),
    )
    .unwrap();
    let w = match b.op(Op::CreateWaypoint {
        draft: WaypointDraft::new("Unusual File Access", WaypointKind::Event),
        view_state: Some(view.clone()),
    }) {
        Outcome::Waypoint(w) => w,
        o => panic!("{o:?}"),
    };
    assert_eq!(w.name, "Unusual File Access");
    assert_eq!(w.view_state.as_ref(), Some(&view));
    // Omitted period is prefilled from the view's window.
    assert_eq!(Some(w.event_period), view.time_window);
    let state = b.hub.state(&b.id).unwrap();
    assert!(state.canvases.values().all(|c| !c.items.contains_key(&w.id)));
    assert_eq!(
        list_waypoints(&state, &WaypointFilter::default(), SortKey::default()).len(),
        1
    );
}

#[test]
fn create_user_waypoint_and_empty_name() {
    let b = Board::new();
    let id = b.waypoint("Bruce", WaypointKind::User);
    assert_eq!(b.hub.state(&b.id).unwrap().waypoints[&id].kind, WaypointKind::User);
    assert_eq!(
        b.try_op(Op::CreateWaypoint {
            draft: WaypointDraft::new("", WaypointKind::Event),
            view_state: None
        }),
        Err(OpError::EmptyName)
    );
    assert_eq!(
        b.try_op(Op::CreateWaypoint {
            draft: WaypointDraft::new("   ", WaypointKind::Event),
            view_state: None
        }),
        Err(OpError::EmptyName)
    );
}

#[test]
fn update_waypoint_priority_and_identity_patch() {
    let b = Board::new();
    let id = b.waypoint("Data Exfiltration", WaypointKind::Event);
    let before = b.hub.state(&b.id).unwrap().waypoints[&id].clone();
    let after = match b.op(Op::UpdateWaypoint {
        id,
        patch: WaypointPatch {
            priority: Some(Priority::High),
            ..Default::default()
        },
    }) {
        Outcome::Waypoint(w) => w,
        o => panic!("{o:?}"),
    };
    assert_eq!(after.priority, Priority::High);
    assert!(after.updated_at > before.updated_at);

    let same = match b.op(Op::UpdateWaypoint {
        id,
        patch: WaypointPatch::default(),
    }) {
        Outcome::Waypoint(w) => w,
        o => panic!("{o:?}"),
    };
    assert_eq!(
        (same.name.clone(), same.priority, same.notes.clone(), same.event_period),
        (after.name.clone(), after.priority, after.notes.clone(), after.event_period)
    );
    assert!(same.updated_at >= after.updated_at);
}

#[test]
fn update_guards() {
    let b = Board::new();
    let id = b.waypoint("X", WaypointKind::Event);
    assert_eq!(
        b.try_op(Op::UpdateWaypoint {
            id: EntityId::new(999),
            patch: WaypointPatch::default()
        }),
        Err(OpError::NotFound(EntityId::new(999)))
    );
    assert_eq!(
        b.try_op(Op::UpdateWaypoint {
            id,
            patch: WaypointPatch {
                name: Some(String::new()),
                ..Default::default()
            }
        }),
        Err(OpError::EmptyName)
    );
    b.op(Op::ArchiveObject { id });
    assert_eq!(
        b.try_op(Op::UpdateWaypoint {
            id,
            patch: WaypointPatch::default()
        }),
        Err(OpError::Archived(id))
    );
}

// --- leads ---

#[test]
fn lead_lifecycle() {
    let b = Board::new();
    let ta = b.lead("Technical Anomaly");
    let bc = b.lead("Behavioral Change");
    let sb = b.lead("Security Breach");
    assert_eq!(
        b.try_op(Op::CreateLead {
            title: String::new(),
            notes: String::new()
        }),
        Err(OpError::EmptyTitle)
    );
    let closed = match b.op(Op::CloseLead { id: ta }) {
        Outcome::Lead(l) => l,
        o => panic!("{o:?}"),
    };
    assert_eq!(closed.status, LeadStatus::Closed);
    let event_time = b.hub.events(&b.id, 0).unwrap().last().unwrap().server_time;
    assert_eq!(closed.closed_at, Some(event_time));
    let seq = b.seq();
    assert_eq!(b.try_op(Op::CloseLead { id: ta }), Err(OpError::AlreadyClosed(ta)));
    assert_eq!(b.seq(), seq);
    b.op(Op::CloseLead { id: bc });
    let state = b.hub.state(&b.id).unwrap();
    let open: Vec<&str> = state
        .leads
        .values()
        .filter(|l| l.status == LeadStatus::Open)
        .map(|l| l.title.as_str())
        .collect();
    assert_eq!(open, vec!["Security Breach"]);
    assert_eq!(state.leads[&sb].closed_at, None);
    assert_eq!(
        b.try_op(Op::CloseLead { id: EntityId::new(999) }),
        Err(OpError::NotFound(EntityId::new(999)))
    );
}

// --- annotations, connectors, archive ---

#[test]
fn connectors_and_annotations() {
    let b = Board::new();
    let ufa = b.waypoint("Unusual File Access", WaypointKind::Event);
    let bruce = b.waypoint("Bruce", WaypointKind::User);
    let c = b.connect(ufa, bruce);
    let state = b.hub.state(&b.id).unwrap();
    assert_eq!(state.connectors[&c].endpoint_a, ufa);
    assert_eq!(b.try_op(Op::CreateConnector { a: ufa, b: ufa, label: None }), Err(OpError::SelfLoop(ufa)));
    assert_eq!(
        b.try_op(Op::CreateConnector { a: ufa, b: EntityId::new(77), label: None }),
        Err(OpError::NotFound(EntityId::new(77)))
    );
    // A connector cannot itself be an endpoint.
    assert_eq!(
        b.try_op(Op::CreateConnector { a: ufa, b: c, label: None }),
        Err(OpError::NotFound(c))
    );
    let n = b.note("may relate to data migration");
    assert_eq!(
        b.hub.state(&b.id).unwrap().annotations[&n].text,
        "may relate to data migration"
    );
    assert_eq!(b.try_op(Op::CreateAnnotation { text: " ".into() }), Err(OpError::EmptyText));
    b.op(Op::ArchiveObject { id: bruce });
    assert_eq!(
        b.try_op(Op::CreateConnector { a: ufa, b: bruce, label: None }),
        Err(OpError::EndpointArchived(bruce))
    );
}

#[test]
fn archive_cascades_connectors_and_placements() {
    let b = Board::new();
    let w = b.waypoint("W", WaypointKind::Event);
    let n = b.note("note");
    let c = b.connect(w, n);
    b.place(w, 1.0, 2.0);
    b.place(n, 3.0, 4.0);
    match b.op(Op::ArchiveObject { id: n }) {
        Outcome::Archived(ids) => assert_eq!(ids, vec![n, c]),
        o => panic!("{o:?}"),
    }
    let state = b.hub.state(&b.id).unwrap();
    assert!(state.is_archived(c));
    assert!(state.placement(&b.mine(), n).is_none());
    assert!(state.placement(&b.mine(), w).is_some());
    assert_eq!(b.try_op(Op::ArchiveObject { id: n }), Err(OpError::NotFound(n)));
}

#[test]
fn archived_storyline_member_survives_replay() {
    let b = Board::new();
    let w = b.waypoint("W", WaypointKind::Event);
    let n = b.note("note");
    b.place(w, 10.0, 10.0);
    b.place(n, 20.0, 20.0);
    let s = storyline(b.save("S", vec![w, n]).unwrap());
    b.op(Op::ArchiveObject { id: w });
    let log: Vec<_> = b.hub.events(&b.id, 0).unwrap().iter().map(|e| (**e).clone()).collect();
    let replayed = replay(b.id.clone(), "acme-corp", &log).unwrap();
    assert!(replayed.storylines[&s.id].member_ids.contains(&w));
    assert!(replayed.is_archived(w));
    // Loading skips the archived member.
    let placements = match b.op(Op::LoadStoryline { id: s.id, canvas: CanvasRef::Team }) {
        Outcome::Placements(p) => p,
        o => panic!("{o:?}"),
    };
    assert_eq!(placements.iter().map(|p| p.object_id).collect::<Vec<_>>(), vec![n]);
}

// --- placement ---

#[test]
fn place_and_move() {
    let b = Board::new();
    let w = b.waypoint("Unusual File Access", WaypointKind::Event);
    let p = match b.op(Op::PlaceObject { canvas: b.mine(), object_id: w, x: 120.0, y: 80.0 }) {
        Outcome::Placement(p) => p,
        o => panic!("{o:?}"),
    };
    assert_eq!((p.x, p.y), (120.0, 80.0));
    assert_eq!(
        b.try_op(Op::PlaceObject { canvas: b.mine(), object_id: w, x: 1.0, y: 1.0 }),
        Err(OpError::AlreadyPlaced { canvas: b.mine(), object: w })
    );
    let moved = match b.op(Op::MoveObject { canvas: b.mine(), object_id: w, x: 0.0, y: 0.0 }) {
        Outcome::Placement(p) => p,
        o => panic!("{o:?}"),
    };
    assert_eq!((moved.x, moved.y, moved.z_order), (0.0, 0.0, p.z_order));
    assert_eq!(
        b.try_op(Op::MoveObject { canvas: CanvasRef::Team, object_id: w, x: 0.0, y: 0.0 }),
        Err(OpError::NotPlaced { canvas: CanvasRef::Team, object: w })
    );
    assert_eq!(
        b.try_op(Op::PlaceObject { canvas: CanvasRef::Team, object_id: w, x: f64::NAN, y: 0.0 }),
        Err(OpError::NonFiniteCoordinate)
    );
    let other = CanvasRef::Personal(b.kim.id.clone());
    assert_eq!(
        b.try_op(Op::PlaceObject { canvas: other.clone(), object_id: w, x: 0.0, y: 0.0 }),
        Err(OpError::CanvasForbidden(other))
    );
}

#[test]
fn z_order_follows_insertion() {
    let b = Board::new();
    let ids: Vec<_> = (0..3).map(|i| b.waypoint(&format!("w{i}"), WaypointKind::Event)).collect();
    for id in &ids {
        b.place(*id, 5.0, 5.0);
    }
    let state = b.hub.state(&b.id).unwrap();
    let z: Vec<u64> = ids.iter().map(|id| state.placement(&b.mine(), *id).unwrap().z_order).collect();
    assert_eq!(z, vec![0, 1, 2]);
}

#[test]
fn connectors_are_not_placeable() {
    let b = Board::new();
    let a = b.waypoint("a", WaypointKind::Event);
    let c = b.note("c");
    let conn = b.connect(a, c);
    assert_eq!(
        b.try_op(Op::PlaceObject { canvas: b.mine(), object_id: conn, x: 0.0, y: 0.0 }),
        Err(OpError::NotPlaceable(conn))
    );
}

// --- storylines ---

fn scene_one(b: &Board) -> (EntityId, EntityId, EntityId, EntityId) {
    let ufa = b.waypoint("Unusual File Access", WaypointKind::Event);
    b.place(ufa, 120.0, 80.0);
    let note = b.note("may relate to data migration");
    b.place(note, 140.0, 200.0);
    let bruce = b.waypoint("Bruce", WaypointKind::User);
    b.place(bruce, 320.0, 80.0);
    let link = b.connect(ufa, bruce);
    (ufa, bruce, link, note)
}

#[test]
fn save_storyline_four_members() {
    let b = Board::new();
    let (ufa, bruce, link, note) = scene_one(&b);
    let s = storyline(b.save("Weird Bruce Activity", vec![ufa, bruce, link, note]).unwrap());
    assert_eq!(s.member_ids.len(), 4);
    assert_eq!(s.member_placements.len(), 3);
    let state = b.hub.state(&b.id).unwrap();
    assert_eq!(state.most_recent_storyline(&b.jay.id).unwrap().title, "Weird Bruce Activity");
}

#[test]
fn connector_selection_pulls_in_endpoints() {
    let b = Board::new();
    let (ufa, bruce, link, _) = scene_one(&b);
    let s = storyline(b.save("just the link", vec![link]).unwrap());
    // A selected connector contributes both endpoints.
    let state = b.hub.state(&b.id).unwrap();
    let c = &state.connectors[&link];
    let expected = std::collections::BTreeSet::from([link, c.endpoint_a, c.endpoint_b]);
    assert_eq!(s.member_ids, expected);
    assert_eq!(s.member_ids.len(), 3);
    assert!(s.member_ids.contains(&ufa) && s.member_ids.contains(&bruce));
}

#[test]
fn save_storyline_errors() {
    let b = Board::new();
    let (ufa, ..) = scene_one(&b);
    assert_eq!(b.save("x", vec![]), Err(OpError::EmptySelection));
    assert_eq!(b.save("", vec![ufa]), Err(OpError::EmptyTitle));
    let unplaced = b.waypoint("elsewhere", WaypointKind::Event);
    assert_eq!(b.save("x", vec![unplaced]), Err(OpError::NotFound(unplaced)));
}

#[test]
fn save_then_load_is_identity() {
    let b = Board::new();
    let (ufa, bruce, link, note) = scene_one(&b);
    let s = storyline(b.save("S", vec![ufa, bruce, link, note]).unwrap());
    let placements = match b.op(Op::LoadStoryline { id: s.id, canvas: CanvasRef::Team }) {
        Outcome::Placements(p) => p,
        o => panic!("{o:?}"),
    };
    assert_eq!(placements.len(), 3);
    for p in placements {
        let saved = s.member_placements[&p.object_id];
        assert_eq!(p.x.to_bits(), saved.x.to_bits());
        assert_eq!(p.y.to_bits(), saved.y.to_bits());
    }
}

#[test]
fn load_reflects_live_state() {
    let b = Board::new();
    let lead = b.lead("Technical Anomaly");
    b.place(lead, 0.0, 0.0);
    let s = storyline(b.save("S", vec![lead]).unwrap());
    b.op(Op::CloseLead { id: lead });
    b.op(Op::LoadStoryline { id: s.id, canvas: CanvasRef::Team });
    let state = b.hub.state(&b.id).unwrap();
    assert_eq!(state.leads[&lead].status, LeadStatus::Closed);
    assert!(state.placement(&CanvasRef::Team, lead).is_some());
}

#[test]
fn load_replaces_existing_placement() {
    let b = Board::new();
    let w = b.waypoint("w", WaypointKind::Event);
    b.place(w, 1.0, 1.0);
    let s = storyline(b.save("S", vec![w]).unwrap());
    b.op(Op::MoveObject { canvas: b.mine(), object_id: w, x: 99.0, y: 99.0 });
    b.op(Op::LoadStoryline { id: s.id, canvas: b.mine() });
    let p = b.hub.state(&b.id).unwrap().placement(&b.mine(), w).unwrap().clone();
    assert_eq!((p.x, p.y), (1.0, 1.0));
    assert_eq!(
        b.try_op(Op::LoadStoryline { id: EntityId::new(500), canvas: b.mine() }),
        Err(OpError::NotFound(EntityId::new(500)))
    );
}

#[test]
fn rename_storyline() {
    let b = Board::new();
    let (ufa, ..) = scene_one(&b);
    let s = storyline(b.save("Weird Bruce Activity", vec![ufa]).unwrap());
    let r = storyline(b.op(Op::RenameStoryline { id: s.id, title: "Bruce Exfiltrating Data".into() }));
    assert_eq!(r.title, "Bruce Exfiltrating Data");
    let again = storyline(b.op(Op::RenameStoryline { id: s.id, title: "Bruce Exfiltrating Data".into() }));
    assert_eq!(again.title, r.title);
    assert_eq!(again.member_ids, r.member_ids);
    assert!(again.last_modified > r.last_modified);
    assert_eq!(
        b.try_op(Op::RenameStoryline { id: EntityId::new(404), title: "x".into() }),
        Err(OpError::NotFound(EntityId::new(404)))
    );
    assert_eq!(
        b.try_op(Op::RenameStoryline { id: s.id, title: "".into() }),
        Err(OpError::EmptyTitle)
    );
}

#[test]
fn share_storyline_places_on_team_canvas() {
    let b = Board::new();
    let (ufa, bruce, link, note) = scene_one(&b);
    let s = storyline(b.save("S", vec![ufa, bruce, link, note]).unwrap());
    // Private until shared.
    assert_eq!(
        b.try_as(&b.kim, Op::LoadStoryline { id: s.id, canvas: CanvasRef::Team }),
        Err(OpError::NotFound(s.id))
    );
    assert_eq!(b.try_as(&b.kim, Op::ShareStoryline { id: s.id }), Err(OpError::NotOwner(s.id)));
    let shared = storyline(b.op(Op::ShareStoryline { id: s.id }));
    assert!(shared.shared);
    let state = b.hub.state(&b.id).unwrap();
    for (id, p) in &s.member_placements {
        let team = state.placement(&CanvasRef::Team, *id).unwrap();
        assert_eq!((team.x, team.y), (p.x, p.y));
    }
    assert!(state.on_canvas(&CanvasRef::Team, link));
    let twice = storyline(b.op(Op::ShareStoryline { id: s.id }));
    assert_eq!(twice, shared);
    assert!(b.try_as(&b.kim, Op::LoadStoryline { id: s.id, canvas: CanvasRef::Team }).is_ok());
}

#[test]
fn most_recent_storyline_ordering() {
    let b = Board::new();
    let (ufa, ..) = scene_one(&b);
    let state = b.hub.state(&b.id).unwrap();
    assert!(state.most_recent_storyline(&b.jay.id).is_none());
    storyline(b.save("A", vec![ufa]).unwrap());
    storyline(b.save("B", vec![ufa]).unwrap());
    let state = b.hub.state(&b.id).unwrap();
    assert_eq!(state.most_recent_storyline(&b.jay.id).unwrap().title, "B");
    assert!(state.most_recent_storyline(&b.kim.id).is_none());
}

#[test]
fn extend_storyline_adds_members() {
    let b = Board::new();
    let (ufa, bruce, link, note) = scene_one(&b);
    let s = storyline(b.save("S", vec![ufa, bruce, link, note]).unwrap());
    let usu = b.waypoint("Unusual Software Usage", WaypointKind::Event);
    b.place(usu, 500.0, 80.0);
    let l2 = b.connect(usu, bruce);
    let ext = storyline(b.op(Op::ExtendStoryline { id: s.id, added_ids: vec![l2], canvas: None }));
    assert_eq!(ext.member_ids.len(), 6);
    assert!(ext.member_placements.contains_key(&usu));
    assert_eq!(
        b.try_as(&b.kim, Op::ExtendStoryline { id: s.id, added_ids: vec![usu], canvas: None }),
        Err(OpError::NotFound(s.id))
    );
    assert_eq!(
        b.try_op(Op::ExtendStoryline { id: s.id, added_ids: vec![], canvas: None }),
        Err(OpError::EmptySelection)
    );
}

// --- checklists ---

fn default_template() -> ChecklistTemplate {
    TemplateRegistry::builtin().get(DEFAULT_TEMPLATE_ID).unwrap().clone()
}

fn checklist(o: Outcome) -> huntboard_core::checklist::Checklist {
    match o {
        Outcome::Checklist(c) => c,
        other => panic!("{other:?}"),
    }
}

#[test]
fn instantiate_default_template() {
    let b = Board::new();
    let template = default_template();
    let c = checklist(b.op(Op::InstantiateChecklist { template: template.clone() }));
    assert_eq!(c.items.len(), 6);
    assert_eq!(c.client_env, "acme-corp");
    assert!(c.items.iter().all(|i| i.status == ItemStatus::Pending && i.origin == ItemOrigin::Template));
    let texts: Vec<_> = c.items.iter().map(|i| i.text.clone()).collect();
    assert_eq!(texts, template.items);
    assert_eq!(
        b.try_op(Op::InstantiateChecklist { template }),
        Err(OpError::ActiveChecklistExists(c.id))
    );
    // Another hunter may hold their own.
    assert!(b.try_as(&b.kim, Op::InstantiateChecklist { template: default_template() }).is_ok());
}

#[test]
fn empty_template_is_vacuously_completable() {
    let b = Board::new();
    let c = checklist(b.op(Op::InstantiateChecklist {
        template: ChecklistTemplate { id: "e".into(), name: "E".into(), items: vec![] },
    }));
    let done = checklist(b.op(Op::CompleteChecklist { checklist_id: c.id, override_pending: false }));
    assert_eq!(done.status, ChecklistStatus::Completed);
    assert!(!done.completed_with_override);
}

#[test]
fn custom_items_and_status() {
    let b = Board::new();
    let c = checklist(b.op(Op::InstantiateChecklist { template: default_template() }));
    let item = match b.op(Op::AddChecklistItem { checklist_id: c.id, text: "Review Bruce's file activity".into() }) {
        Outcome::ChecklistItem(i) => i,
        o => panic!("{o:?}"),
    };
    assert_eq!((item.origin, item.status), (ItemOrigin::Custom, ItemStatus::Pending));
    assert_eq!(
        b.try_op(Op::AddChecklistItem { checklist_id: c.id, text: "".into() }),
        Err(OpError::EmptyText)
    );
    let set = |status, note: Option<&str>| {
        b.op(Op::SetItemStatus { checklist_id: c.id, item_id: item.id, status, note: note.map(String::from) })
    };
    set(ItemStatus::Done, Some("looked at it"));
    match set(ItemStatus::Pending, Some("reopened")) {
        Outcome::ChecklistItem(i) => {
            assert_eq!(i.status, ItemStatus::Pending);
            assert_eq!(i.note, "looked at it\nreopened");
        }
        o => panic!("{o:?}"),
    }
    assert_eq!(
        b.try_op(Op::SetItemStatus { checklist_id: c.id, item_id: EntityId::new(999), status: ItemStatus::Done, note: None }),
        Err(OpError::ItemNotFound(EntityId::new(999)))
    );
    let state = b.hub.state(&b.id).unwrap();
    for i in &state.checklists[&c.id].items {
        b.op(Op::SetItemStatus { checklist_id: c.id, item_id: i.id, status: ItemStatus::Done, note: None });
    }
    assert_eq!(b.hub.state(&b.id).unwrap().checklists[&c.id].pending_count(), 0);
}

#[test]
fn completion_gate_and_override() {
    let b = Board::new();
    let c = checklist(b.op(Op::InstantiateChecklist { template: default_template() }));
    assert_eq!(
        b.try_op(Op::CompleteChecklist { checklist_id: c.id, override_pending: false }),
        Err(OpError::PendingItems { checklist: c.id, pending: 6 })
    );
    let done = checklist(b.op(Op::CompleteChecklist { checklist_id: c.id, override_pending: true }));
    assert!(done.completed_with_override);
    let last = b.hub.events(&b.id, 0).unwrap().last().unwrap().clone();
    assert!(last.to_line().contains(r#""override":true"#));
    assert_eq!(
        b.try_op(Op::AddChecklistItem { checklist_id: c.id, text: "late".into() }),
        Err(OpError::NotActive(c.id))
    );
    let view = capture_view("ueba", "q", None, ts("2025-01-06T09:00:00Z")).unwrap();
    assert_eq!(
        b.try_op(Op::AttachResumeBookmark { checklist_id: c.id, view_state: view }),
        Err(OpError::NotActive(c.id))
    );
    // A new session may start once the previous one is completed.
    assert!(b.try_op(Op::InstantiateChecklist { template: default_template() }).is_ok());
}

#[test]
fn resume_bookmark_last_write_wins_byte_exact() {
    let b = Board::new();
    let c = checklist(b.op(Op::InstantiateChecklist { template: default_template() }));
    let first = capture_view("ueba", "q1", None, ts("2025-01-06T09:00:00Z")).unwrap();
    let raw = "ueba://search?user=bruce.wright&sort=-time&x=%20\u{00e9}";
    let second = capture_view("ueba", raw, None, ts("2025-01-06T10:00:00Z")).unwrap();
    b.op(Op::AttachResumeBookmark { checklist_id: c.id, view_state: first });
    b.op(Op::AttachResumeBookmark { checklist_id: c.id, view_state: second.clone() });
    let state = b.hub.state(&b.id).unwrap();
    let stored = state.checklists[&c.id].resume_bookmark.as_ref().unwrap();
    assert_eq!(stored, &second);
    assert_eq!(stored.query_representation.as_bytes(), raw.as_bytes());
}

// --- waypoint list and saved views ---

#[test]
fn open_waypoint_view_round_trip() {
    let b = Board::new();
    let raw = "ueba://entity/user/bruce.wright?tab=permissions&range=7d";
    let view = capture_view("ueba", raw, None, ts("2025-01-06T09:00:00Z")).unwrap();
    let with = match b.op(Op::CreateWaypoint {
        draft: WaypointDraft::new("Bruce", WaypointKind::User),
        view_state: Some(view),
    }) {
        Outcome::Waypoint(w) => w.id,
        o => panic!("{o:?}"),
    };
    let without = b.waypoint("plain", WaypointKind::Event);
    let state = b.hub.state(&b.id).unwrap();
    assert_eq!(state.open_waypoint_view(with).unwrap().query_representation.as_bytes(), raw.as_bytes());
    assert_eq!(state.open_waypoint_view(with).unwrap(), state.open_waypoint_view(with).unwrap());
    assert_eq!(state.open_waypoint_view(without), Err(OpError::NoSavedView(without)));
    assert_eq!(
        state.open_waypoint_view(EntityId::new(999)),
        Err(OpError::NotFound(EntityId::new(999)))
    );
}

#[test]
fn list_filter_and_sort() {
    let b = Board::new();
    for (name, kind) in [
        ("Unusual File Access", WaypointKind::Event),
        ("Bruce", WaypointKind::User),
        ("Unusual Software Usage", WaypointKind::Event),
        ("Data Compression", WaypointKind::Event),
        ("Data Exfiltration", WaypointKind::Event),
    ] {
        b.waypoint(name, kind);
    }
    let exfil = b.hub.state(&b.id).unwrap().waypoints.values().last().unwrap().id;
    b.op(Op::UpdateWaypoint { id: exfil, patch: WaypointPatch { priority: Some(Priority::High), ..Default::default() } });
    let state = b.hub.state(&b.id).unwrap();
    let names = |f: &WaypointFilter, s: SortKey| -> Vec<String> {
        list_waypoints(&state, f, s).into_iter().map(|w| w.name.clone()).collect()
    };
    assert_eq!(
        names(&WaypointFilter::default(), SortKey::default()),
        ["Unusual File Access", "Bruce", "Unusual Software Usage", "Data Compression", "Data Exfiltration"]
    );
    let users = WaypointFilter { kinds: Some([WaypointKind::User].into()), ..Default::default() };
    assert_eq!(names(&users, SortKey::default()), ["Bruce"]);
    let high = WaypointFilter { priority_at_least: Some(Priority::High), ..Default::default() };
    assert_eq!(names(&high, SortKey::default()), ["Data Exfiltration"]);
    let text = WaypointFilter { text_query: Some("UNUSUAL".into()), ..Default::default() };
    assert_eq!(
        names(&text, SortKey::new(SortField::Name, huntboard_core::view::SortDirection::Asc)),
        ["Unusual File Access", "Unusual Software Usage"]
    );
}
