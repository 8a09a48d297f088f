//! Scripted five-session walkthrough of the Bruce Wright hunt, driven
//! through the public API exactly as a hunter's client would.

use huntboard_core::scenario::{generate_scenario, AnomalySignal, SUBJECT_USER};
use reqwest::Method;
use serde_json::{json, Value};
use thiserror::Error;

use crate::client::{Client, ClientError};

#[derive(Debug, Clone)]
pub struct ScenarioOptions {
    pub seed: u64,
    pub board: String,
    pub client_env: String,
    pub actor: String,
}

impl ScenarioOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            board: "acme".into(),
            client_env: "acme-corp".into(),
            actor: "jay".into(),
        }
    }
}

#[derive(Debug, Error)]
#[error("scenario step {step} ({label}) failed: {source}")]
pub struct ScenarioError {
    pub step: usize,
    pub label: String,
    #[source]
    pub source: ClientError,
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub board: String,
    pub storyline_id: String,
    pub checklist_id: String,
    /// Requests issued, the health probe included.
    pub steps: usize,
    pub final_seq: u64,
    pub snapshot: String,
    pub handover_json: String,
    pub handover_markdown: String,
}

struct Script {
    client: Client,
    board: String,
    step: usize,
}

impl Script {
    async fn call(&mut self, label: &str, method: Method, path: &str, body: Option<Value>) -> Result<Value, ScenarioError> {
        let step = self.step;
        self.step += 1;
        self.client
            .call(method, path, body.as_ref())
            .await
            .map_err(|source| ScenarioError { step, label: label.into(), source })
    }

    async fn post(&mut self, label: &str, path: &str, body: Value) -> Result<Value, ScenarioError> {
        let path = format!("/boards/{}{path}", self.board);
        self.call(label, Method::POST, &path, Some(body)).await
    }

    async fn put(&mut self, label: &str, path: &str, body: Value) -> Result<Value, ScenarioError> {
        let path = format!("/boards/{}{path}", self.board);
        self.call(label, Method::PUT, &path, Some(body)).await
    }

    async fn get(&mut self, label: &str, path: &str) -> Result<Value, ScenarioError> {
        let path = format!("/boards/{}{path}", self.board);
        self.call(label, Method::GET, &path, None).await
    }

    async fn text(&mut self, label: &str, path: &str) -> Result<String, ScenarioError> {
        let step = self.step;
        self.step += 1;
        let path = format!("/boards/{}{path}", self.board);
        self.client
            .get_text(&path)
            .await
            .map(|t| t.body)
            .map_err(|source| ScenarioError { step, label: label.into(), source })
    }

    /// Creates a waypoint from a signal's view, with the draft prefilled server-side.
    async fn waypoint_from(&mut self, name: &str, signal: &AnomalySignal) -> Result<String, ScenarioError> {
        let view = json!(signal.suggested_view);
        let prefilled = self.call("prefill", Method::POST, "/views/prefill", Some(json!({ "view": view }))).await?;
        let mut body = prefilled["draft"].clone();
        body["name"] = json!(name);
        body["view_state"] = view;
        let created = self.post(&format!("create waypoint {name}"), "/waypoints", body).await?;
        Ok(id(&created["waypoint"]))
    }

    async fn place(&mut self, object: &str, x: f64, y: f64) -> Result<(), ScenarioError> {
        self.post("place", "/canvases/mine/placements", json!({ "object_id": object, "x": x, "y": y }))
            .await
            .map(drop)
    }

    async fn connect(&mut self, a: &str, b: &str) -> Result<String, ScenarioError> {
        let c = self.post("connect", "/connectors", json!({ "a": a, "b": b })).await?;
        Ok(id(&c["connector"]))
    }

    async fn lead(&mut self, title: &str, notes: &str) -> Result<String, ScenarioError> {
        let l = self.post(&format!("lead {title}"), "/leads", json!({ "title": title, "notes": notes })).await?;
        Ok(id(&l["lead"]))
    }

    async fn tick(&mut self, checklist: &str, item: &str, note: &str) -> Result<(), ScenarioError> {
        self.put(
            "tick checklist item",
            &format!("/checklists/{checklist}/items/{item}/status"),
            json!({ "status": "done", "note": note }),
        )
        .await
        .map(drop)
    }

    async fn extend(&mut self, storyline: &str, ids: &[&str]) -> Result<(), ScenarioError> {
        self.post("extend storyline", &format!("/storylines/{storyline}/extend"), json!({ "added_ids": ids }))
            .await
            .map(drop)
    }
}

fn id(v: &Value) -> String {
    v["id"].as_str().unwrap_or_default().to_string()
}

pub async fn run_scripted_scenario(endpoint: &str, options: &ScenarioOptions) -> Result<ScenarioOutcome, ScenarioError> {
    let signals = generate_scenario(options.seed);
    let mut s = Script {
        client: Client::new(endpoint, &options.actor).with_display_name("Jay"),
        board: options.board.clone(),
        step: 0,
    };

    s.call("health", Method::GET, "/health", None).await?;
    s.call(
        "create board",
        Method::POST,
        "/boards",
        Some(json!({ "board_id": options.board, "client_env": options.client_env })),
    )
    .await?;

    // Session 1: a file-access spike for one user.
    let checklist = s.post("start checklist", "/checklists", json!({})).await?;
    let checklist_id = id(&checklist["checklist"]);
    let items: Vec<String> = checklist["checklist"]["items"]
        .as_array()
        .map(|a| a.iter().map(id).collect())
        .unwrap_or_default();
    let item = |i: usize| items.get(i).cloned().unwrap_or_default();
    s.tick(&checklist_id, &item(0), "no prior notes for this client").await?;

    let ufa = s.waypoint_from("Unusual File Access", &signals[0]).await?;
    s.place(&ufa, 120.0, 80.0).await?;
    let note = s.post("annotate", "/annotations", json!({ "text": "Could this be a data migration?" })).await?;
    let note = id(&note["annotation"]);
    s.place(&note, 140.0, 200.0).await?;
    s.get("open saved query", &format!("/waypoints/{ufa}/view")).await?;

    let login = SUBJECT_USER.to_lowercase().replace(' ', ".");
    let bruce_view = json!({
        "source_tool_id": "ueba",
        "query_representation": format!("ueba://entity/user/{login}?tab=permissions"),
        "captured_at": signals[0].timestamp + chrono::Duration::minutes(20),
    });
    let captured = s.call("capture view", Method::POST, "/views/capture", Some(bruce_view)).await?;
    let mut body = captured["draft"].clone();
    body["name"] = json!("Bruce");
    body["kind"] = json!("user");
    body["notes"] = json!("Permissions do not cover a migration.");
    body["view_state"] = captured["view"].clone();
    let bruce = id(&s.post("create waypoint Bruce", "/waypoints", body).await?["waypoint"]);
    s.place(&bruce, 320.0, 80.0).await?;
    let c1 = s.connect(&ufa, &bruce).await?;
    let storyline = s
        .post(
            "save storyline",
            "/storylines",
            json!({ "title": "Weird Bruce Activity", "selected_ids": [ufa, bruce, c1, note] }),
        )
        .await?;
    let storyline_id = id(&storyline["storyline"]);
    s.tick(&checklist_id, &item(1), "file access spike").await?;
    s.put(
        "bookmark",
        &format!("/checklists/{checklist_id}/bookmark"),
        json!({ "view_state": signals[0].suggested_view }),
    )
    .await?;

    // Session 2: partitions created by an unfamiliar executable.
    let recent = s.get("recent storyline", "/storylines/recent").await?;
    let recent_id = id(&recent["storyline"]);
    let usu = s.waypoint_from("Unusual Software Usage", &signals[1]).await?;
    s.post("load storyline", &format!("/storylines/{recent_id}/load"), json!({ "canvas": "mine" }))
        .await?;
    s.place(&usu, 520.0, 80.0).await?;
    let c2 = s.connect(&usu, &bruce).await?;
    let technical = s.lead("Technical Anomaly", "Legitimate admin tooling gone wrong?").await?;
    let behavioral = s.lead("Behavioral Change", "Has anything changed in Bruce's role or access?").await?;
    let breach = s.lead("Security Breach", "Are Bruce's credentials in someone else's hands?").await?;
    let mut lead_links = Vec::new();
    for (i, lead) in [&technical, &behavioral, &breach].into_iter().enumerate() {
        s.place(lead, 420.0 + 160.0 * i as f64, 260.0).await?;
        lead_links.push(s.connect(&usu, lead).await?);
    }
    let mut added = vec![usu.as_str(), c2.as_str()];
    added.extend(lead_links.iter().map(String::as_str));
    s.extend(&storyline_id, &added).await?;
    s.tick(&checklist_id, &item(2), "Bruce is the only entity of interest").await?;

    // Session 3: compression of the partitioned files.
    s.get("open Bruce view", &format!("/waypoints/{bruce}/view")).await?;
    s.call(
        "edit Bruce",
        Method::PATCH,
        &format!("/boards/{}/waypoints/{bruce}", options.board),
        Some(json!({ "notes": "Permissions do not cover a migration. Recently granted local admin." })),
    )
    .await?;
    let dc = s.waypoint_from("Data Compression", &signals[2]).await?;
    s.place(&dc, 720.0, 80.0).await?;
    let c3 = s.connect(&dc, &behavioral).await?;
    let c4 = s.connect(&dc, &breach).await?;
    s.post("close lead", &format!("/leads/{technical}/close"), json!({})).await?;
    s.extend(&storyline_id, &[&dc, &c3, &c4]).await?;
    s.tick(&checklist_id, &item(3), "storyline extended").await?;

    // Session 4: the upload.
    let de = s.waypoint_from("Data Exfiltration", &signals[3]).await?;
    s.call(
        "raise priority",
        Method::PATCH,
        &format!("/boards/{}/waypoints/{de}", options.board),
        Some(json!({ "priority": "high" })),
    )
    .await?;
    s.place(&de, 920.0, 80.0).await?;
    let c5 = s.connect(&de, &dc).await?;
    let c6 = s.connect(&de, &ufa).await?;
    s.post("close lead", &format!("/leads/{behavioral}/close"), json!({})).await?;
    s.extend(&storyline_id, &[&de, &c5, &c6]).await?;
    s.post(
        "rename storyline",
        &format!("/storylines/{storyline_id}/rename"),
        json!({ "title": "Bruce Exfiltrating Data" }),
    )
    .await?;

    // Session 5: share and hand over.
    s.post("share storyline", &format!("/storylines/{storyline_id}/share"), json!({})).await?;
    s.get("team canvas", "/canvases/team").await?;
    s.tick(&checklist_id, &item(4), "notes updated").await?;
    let custom = s
        .post(
            "custom item",
            &format!("/checklists/{checklist_id}/items"),
            json!({ "text": "Brief next shift on the open Security Breach lead" }),
        )
        .await?;
    s.tick(&checklist_id, &id(&custom["item"]), "on the handover agenda").await?;
    for i in 5..items.len() {
        s.tick(&checklist_id, &item(i), "done").await?;
    }
    s.put(
        "bookmark",
        &format!("/checklists/{checklist_id}/bookmark"),
        json!({ "view_state": signals[3].suggested_view }),
    )
    .await?;
    s.post("complete checklist", &format!("/checklists/{checklist_id}/complete"), json!({}))
        .await?;

    let query = format!("/handover?storyline={storyline_id}&checklist={checklist_id}");
    let handover_json = s.text("handover json", &query).await?;
    let handover_markdown = s.text("handover markdown", &format!("{query}&format=md")).await?;

    let step = s.step;
    let snap = s
        .client
        .get_text(&format!("/boards/{}/snapshot", options.board))
        .await
        .map_err(|source| ScenarioError { step, label: "snapshot".into(), source })?;
    s.step += 1;

    Ok(ScenarioOutcome {
        board: options.board.clone(),
        storyline_id,
        checklist_id,
        steps: s.step,
        final_seq: snap.seq.unwrap_or_default(),
        snapshot: snap.body,
        handover_json,
        handover_markdown,
    })
}
