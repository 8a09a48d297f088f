//! Randomized board workloads for property tests, acceptance runs and benches.
//!
//! The generator inspects the current state and proposes operations that are
//! mostly valid; a small fraction deliberately targets stale or unknown ids so
//! rejection paths are exercised too.

use std::sync::Arc;

use chrono::Duration;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checklist::{ChecklistTemplate, ItemStatus, TemplateRegistry, DEFAULT_TEMPLATE_ID};
use crate::event::BoardEvent;
use crate::hub::{Hub, SubmitError};
use crate::ids::{Actor, ActorId, BoardId, CanvasRef, EntityId};
use crate::model::{LeadStatus, Priority, WaypointDraft, WaypointKind, WaypointPatch};
use crate::ops::Op;
use crate::replay::BoardLog;
use crate::state::BoardState;
use crate::time::{standard_start, Period, SyntheticClock, Timestamp};
use crate::view::ViewState;

const NAMES: [&str; 8] = [
    "Unusual File Access",
    "Bruce",
    "Unusual Software Usage",
    "Data Compression",
    "Data Exfiltration",
    "Off-hours login",
    "Privilege change",
    "DNS tunnel",
];

pub fn sim_actors(count: usize) -> Vec<Actor> {
    (0..count)
        .map(|i| {
            Actor::named(ActorId::new(format!("hunter{i}")).expect("valid id"))
                .with_display_name(format!("Hunter {i}"))
        })
        .collect()
}

fn templates() -> Vec<ChecklistTemplate> {
    vec![
        TemplateRegistry::builtin()
            .get(DEFAULT_TEMPLATE_ID)
            .expect("builtin default")
            .clone(),
        ChecklistTemplate {
            id: "empty".into(),
            name: "Empty".into(),
            items: vec![],
        },
        ChecklistTemplate {
            id: "quick".into(),
            name: "Quick triage".into(),
            items: vec!["Check alerts".into(), "Note findings".into()],
        },
    ]
}

/// Proposes operations for a set of actors against a changing board.
pub struct OpGenerator {
    rng: ChaCha8Rng,
    templates: Vec<ChecklistTemplate>,
    /// Probability of a deliberately invalid proposal.
    pub invalid_rate: f64,
}

impl OpGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            templates: templates(),
            invalid_rate: 0.05,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn coord(&mut self) -> f64 {
        match self.rng.random_range(0..10) {
            0 => 0.0,
            1 => -0.0,
            2 => self.rng.random_range(-1e-300..1e-300),
            3 => self.rng.random_range(-1e12..1e12),
            _ => (self.rng.random_range(-2000.0..2000.0f64) * 4.0).round() / 4.0 + self.rng.random::<f64>(),
        }
    }

    fn period(&mut self, base: Timestamp) -> Period {
        let start = base + Duration::minutes(self.rng.random_range(-10_000..10_000));
        let end = start + Duration::minutes(self.rng.random_range(0..600));
        Period::new(start, end).expect("ordered")
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> Option<T> {
        items.choose(&mut self.rng).copied()
    }

    /// Next proposal for `actor` given the board as that actor last saw it.
    pub fn propose(&mut self, state: &BoardState, actor: &Actor) -> Op {
        let base = state.last_event_at.unwrap_or_else(standard_start);
        let who = &actor.id;
        let mine = CanvasRef::Personal(who.clone());

        if self.rng.random_bool(self.invalid_rate) {
            return self.invalid(state);
        }

        let live: Vec<EntityId> = state
            .waypoints
            .keys()
            .chain(state.leads.keys())
            .chain(state.annotations.keys())
            .copied()
            .filter(|id| !state.is_archived(*id))
            .collect();
        let live_waypoints: Vec<EntityId> = state
            .waypoints
            .keys()
            .copied()
            .filter(|id| !state.is_archived(*id))
            .collect();
        let open_leads: Vec<EntityId> = state
            .leads
            .values()
            .filter(|l| l.status == LeadStatus::Open && !state.is_archived(l.id))
            .map(|l| l.id)
            .collect();
        let canvas = if self.rng.random_bool(0.3) {
            CanvasRef::Team
        } else {
            mine.clone()
        };
        let unplaced: Vec<EntityId> = live
            .iter()
            .copied()
            .filter(|id| state.placement(&canvas, *id).is_none())
            .collect();
        let placed: Vec<EntityId> = live
            .iter()
            .copied()
            .filter(|id| state.placement(&canvas, *id).is_some())
            .collect();
        let on_mine: Vec<EntityId> = state
            .waypoints
            .keys()
            .chain(state.leads.keys())
            .chain(state.annotations.keys())
            .chain(state.connectors.keys())
            .copied()
            .filter(|id| state.on_canvas(&mine, *id))
            .collect();
        let my_storylines: Vec<EntityId> = state
            .storylines
            .values()
            .filter(|s| &s.created_by == who)
            .map(|s| s.id)
            .collect();
        let visible_storylines: Vec<EntityId> = state
            .storylines
            .values()
            .filter(|s| state.storyline_visible(s, who))
            .map(|s| s.id)
            .collect();
        let my_active = state
            .checklists
            .values()
            .find(|c| c.is_active() && &c.session_owner == who);

        for _ in 0..16 {
            let choice = self.rng.random_range(0..100);
            let op = match choice {
                0..=13 => Some(Op::CreateWaypoint {
                    draft: WaypointDraft {
                        name: NAMES.choose(&mut self.rng).expect("non-empty").to_string(),
                        kind: *WaypointKind::ALL.choose(&mut self.rng).expect("non-empty"),
                        notes: if self.rng.random_bool(0.5) { "seen in logs".into() } else { String::new() },
                        details: String::new(),
                        event_period: if self.rng.random_bool(0.7) { Some(self.period(base)) } else { None },
                        priority: *Priority::ALL.choose(&mut self.rng).expect("non-empty"),
                    },
                    view_state: self.rng.random_bool(0.5).then(|| ViewState {
                        source_tool_id: "ueba".into(),
                        query_representation: format!("q?n={}&t=\u{00e9}", self.rng.random::<u32>()),
                        time_window: self.rng.random_bool(0.5).then(|| self.period(base)),
                        captured_at: base,
                    }),
                }),
                14..=19 => self.pick(&live_waypoints).map(|id| Op::UpdateWaypoint {
                    id,
                    patch: WaypointPatch {
                        priority: self.rng.random_bool(0.5).then(|| *Priority::ALL.choose(&mut self.rng).expect("non-empty")),
                        notes: self.rng.random_bool(0.3).then(|| "revised".to_string()),
                        event_period: self.rng.random_bool(0.2).then(|| self.period(base)),
                        ..Default::default()
                    },
                }),
                20..=25 => Some(Op::CreateLead {
                    title: ["Technical Anomaly", "Behavioral Change", "Security Breach"]
                        .choose(&mut self.rng)
                        .expect("non-empty")
                        .to_string(),
                    notes: "open question".into(),
                }),
                26..=29 => self.pick(&open_leads).map(|id| Op::CloseLead { id }),
                30..=33 => Some(Op::CreateAnnotation {
                    text: "may relate to data migration".into(),
                }),
                34..=41 => {
                    let a = self.pick(&live);
                    let b = self.pick(&live);
                    match (a, b) {
                        (Some(a), Some(b)) if a != b => Some(Op::CreateConnector {
                            a,
                            b,
                            label: self.rng.random_bool(0.3).then(|| "related".to_string()),
                        }),
                        _ => None,
                    }
                }
                42..=43 => {
                    let mut candidates = live.clone();
                    candidates.extend(state.connectors.keys().copied().filter(|id| !state.is_archived(*id)));
                    self.pick(&candidates).map(|id| Op::ArchiveObject { id })
                }
                44..=57 => self.pick(&unplaced).map(|object_id| Op::PlaceObject {
                    canvas: canvas.clone(),
                    object_id,
                    x: self.coord(),
                    y: self.coord(),
                }),
                58..=65 => self.pick(&placed).map(|object_id| Op::MoveObject {
                    canvas: canvas.clone(),
                    object_id,
                    x: self.coord(),
                    y: self.coord(),
                }),
                66..=71 => {
                    if on_mine.is_empty() {
                        None
                    } else {
                        let n = self.rng.random_range(1..=on_mine.len().min(5));
                        let selected: Vec<EntityId> =
                            on_mine.choose_multiple(&mut self.rng, n).copied().collect();
                        Some(Op::SaveStoryline {
                            title: "Weird Bruce Activity".into(),
                            selected_ids: selected,
                            canvas: None,
                        })
                    }
                }
                72..=73 => match (self.pick(&my_storylines), self.pick(&on_mine)) {
                    (Some(id), Some(extra)) => Some(Op::ExtendStoryline {
                        id,
                        added_ids: vec![extra],
                        canvas: None,
                    }),
                    _ => None,
                },
                74..=77 => self.pick(&visible_storylines).map(|id| Op::LoadStoryline {
                    id,
                    canvas: canvas.clone(),
                }),
                78..=79 => self.pick(&visible_storylines).map(|id| Op::RenameStoryline {
                    id,
                    title: "Bruce Exfiltrating Data".into(),
                }),
                80..=82 => self.pick(&my_storylines).map(|id| Op::ShareStoryline { id }),
                83..=85 => match my_active {
                    None => Some(Op::InstantiateChecklist {
                        template: self.templates.choose(&mut self.rng).expect("non-empty").clone(),
                    }),
                    Some(_) => None,
                },
                86..=88 => my_active.map(|c| Op::AddChecklistItem {
                    checklist_id: c.id,
                    text: "Review Bruce's file activity".into(),
                }),
                89..=94 => my_active.and_then(|c| {
                    let item = c.items.choose(&mut self.rng)?;
                    Some(Op::SetItemStatus {
                        checklist_id: c.id,
                        item_id: item.id,
                        status: if self.rng.random_bool(0.75) { ItemStatus::Done } else { ItemStatus::Pending },
                        note: self.rng.random_bool(0.3).then(|| "checked".to_string()),
                    })
                }),
                95..=96 => my_active.map(|c| Op::AttachResumeBookmark {
                    checklist_id: c.id,
                    view_state: ViewState {
                        source_tool_id: "ueba".into(),
                        query_representation: format!("resume?at={}", self.rng.random::<u16>()),
                        time_window: None,
                        captured_at: base,
                    },
                }),
                _ => my_active.map(|c| Op::CompleteChecklist {
                    checklist_id: c.id,
                    override_pending: c.pending_count() > 0 && self.rng.random_bool(0.5),
                }),
            };
            if let Some(op) = op {
                return op;
            }
        }
        Op::CreateAnnotation {
            text: "fallback note".into(),
        }
    }

    fn invalid(&mut self, state: &BoardState) -> Op {
        let ghost = EntityId::new(state.last_applied_seq + 10_000 + self.rng.random_range(0..100));
        match self.rng.random_range(0..5) {
            0 => Op::CloseLead { id: ghost },
            1 => Op::CreateWaypoint {
                draft: WaypointDraft::new("", WaypointKind::Event),
                view_state: None,
            },
            2 => Op::CreateConnector {
                a: ghost,
                b: ghost,
                label: None,
            },
            3 => Op::SaveStoryline {
                title: "x".into(),
                selected_ids: vec![],
                canvas: None,
            },
            _ => Op::ArchiveObject { id: ghost },
        }
    }
}

pub const SIM_BOARD: &str = "sim";

/// Drives `len` proposals from `actors` through a fresh in-memory hub.
/// Returns the hub, its board id, and how many proposals were rejected.
pub fn run_workload(seed: u64, len: usize, actors: usize) -> (Hub, BoardId, usize) {
    let hub = Hub::in_memory(Arc::new(SyntheticClock::standard()));
    let board = BoardId::new(SIM_BOARD).expect("valid id");
    hub.create_board(board.clone(), "sim-env").expect("fresh hub");
    let actors = sim_actors(actors.max(1));
    let mut gen = OpGenerator::new(seed);
    let mut rejected = 0;
    for _ in 0..len {
        let actor = actors.choose(gen.rng()).expect("non-empty").clone();
        // Release the snapshot before submitting so the hub can update in place.
        let op = gen.propose(&hub.state(&board).expect("board exists"), &actor);
        match hub.submit(&board, &actor, op) {
            Ok(_) => {}
            Err(SubmitError::Rejected(_)) => rejected += 1,
            Err(other) => panic!("in-memory submit failed: {other}"),
        }
    }
    (hub, board, rejected)
}

/// Accepted events of a seeded workload, as an owned log.
pub fn generate_log(seed: u64, len: usize) -> BoardLog {
    let (hub, board, _) = run_workload(seed, len, 3);
    BoardLog {
        client_env: hub.client_env(&board).expect("board exists"),
        events: hub
            .events(&board, 0)
            .expect("board exists")
            .iter()
            .map(|e| BoardEvent::clone(e))
            .collect(),
        board_id: board,
    }
}
