#![allow(dead_code)]

use std::path::PathBuf;

use huntboard::client::Client;
use huntboard::service::{ClockKind, ServiceConfig};
use huntboard::RunningService;
use huntboard_core::replay::replay_lines;
use huntboard_core::checklist::ChecklistStatus;
use huntboard_core::model::{LeadStatus, Priority};
use huntboard_core::{BoardId, BoardState};
use serde_json::{json, Value};

pub async fn spawn(data_dir: Option<PathBuf>) -> RunningService {
    huntboard::start(ServiceConfig::local(data_dir)).await.expect("service starts")
}

pub async fn spawn_synthetic(data_dir: Option<PathBuf>) -> RunningService {
    let config = ServiceConfig {
        clock: ClockKind::Synthetic,
        ..ServiceConfig::local(data_dir)
    };
    huntboard::start(config).await.expect("service starts")
}

pub fn client(svc: &RunningService, actor: &str) -> Client {
    Client::new(&svc.base_url(), actor)
}

pub async fn board(c: &Client, id: &str) {
    c.post("/boards", &json!({ "board_id": id, "client_env": format!("{id}-env") }))
        .await
        .expect("board created");
}

pub fn id(v: &Value) -> String {
    v["id"].as_str().expect("object id").to_string()
}

/// Folds the board's served event stream independently of the live state.
pub async fn replay_served(c: &Client, board: &str, client_env: &str) -> String {
    let text = c.get_text(&format!("/boards/{board}/events")).await.unwrap().body;
    replay_lines(BoardId::new(board).unwrap(), client_env, &text).unwrap().canonical()
}

pub const SCENARIO_WAYPOINTS: [&str; 5] = [
    "Unusual File Access",
    "Bruce",
    "Unusual Software Usage",
    "Data Compression",
    "Data Exfiltration",
];

/// Checks the end state of the scripted walkthrough.
pub fn census(state: &BoardState) -> Result<(), String> {
    let mut names: Vec<&str> = state.waypoints.values().map(|w| w.name.as_str()).collect();
    names.sort_unstable();
    let mut expected = SCENARIO_WAYPOINTS.to_vec();
    expected.sort_unstable();
    if names != expected {
        return Err(format!("waypoints {names:?}"));
    }
    let lead = |title: &str| state.leads.values().find(|l| l.title == title).map(|l| l.status);
    for (title, status) in [
        ("Technical Anomaly", LeadStatus::Closed),
        ("Behavioral Change", LeadStatus::Closed),
        ("Security Breach", LeadStatus::Open),
    ] {
        if lead(title) != Some(status) {
            return Err(format!("lead {title} is {:?}", lead(title)));
        }
    }
    if state.leads.len() != 3 {
        return Err(format!("{} leads", state.leads.len()));
    }
    let shared: Vec<&str> = state.storylines.values().filter(|s| s.shared).map(|s| s.title.as_str()).collect();
    if state.storylines.len() != 1 || shared != ["Bruce Exfiltrating Data"] {
        return Err(format!("storylines {:?}", state.storylines.values().map(|s| &s.title).collect::<Vec<_>>()));
    }
    let de = state.waypoints.values().find(|w| w.name == "Data Exfiltration").unwrap();
    if de.priority != Priority::High {
        return Err(format!("exfiltration priority {:?}", de.priority));
    }
    let done = state.checklists.values().filter(|c| c.status == ChecklistStatus::Completed).count();
    if state.checklists.len() != 1 || done != 1 {
        return Err(format!("{} checklists, {done} completed", state.checklists.len()));
    }
    Ok(())
}

pub fn parse_snapshot(body: &str) -> BoardState {
    serde_json::from_str(body).expect("snapshot is a board state")
}
