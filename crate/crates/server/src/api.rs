//! HTTP routes under `/api/v1`. Every mutation funnels through [`Hub::submit`].

use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use huntboard_core::checklist::{ItemStatus, TemplateRegistry, DEFAULT_TEMPLATE_ID};
use huntboard_core::hub::Accepted;
use huntboard_core::model::{Priority, WaypointDraft, WaypointKind, WaypointPatch};
use huntboard_core::report::{emit_heuristic_rubric, generate_handover, ReportError, RUBRIC_FILE_NAME};
use huntboard_core::time::{Clock, Period, Timestamp};
use huntboard_core::view::{
    capture_view, list_waypoints, prefill_draft, SortDirection, SortField, SortKey, ViewState,
    WaypointFilter,
};
use huntboard_core::{Actor, BoardId, BoardState, CanvasRef, EntityId, Hub, Op, OpError, Outcome};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{ApiError, SEQ_HEADER};
use crate::extract::{board_id, canvas, entity_id, Body, Caller};
use crate::ws;

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    pub templates: Arc<TemplateRegistry>,
    pub clock: Arc<dyn Clock>,
}

pub fn router(state: AppState) -> Router {
    let boards = Router::new()
        .route("/", get(list_boards).post(create_board))
        .route("/{board}", get(get_board))
        .route("/{board}/snapshot", get(snapshot))
        .route("/{board}/events", get(events))
        .route("/{board}/stream", get(ws::stream))
        .route("/{board}/ops", post(submit_op))
        .route("/{board}/waypoints", get(list_waypoints_route).post(create_waypoint))
        .route("/{board}/waypoints/{id}", get(get_waypoint).patch(update_waypoint))
        .route("/{board}/waypoints/{id}/view", get(open_view))
        .route("/{board}/leads", get(list_leads).post(create_lead))
        .route("/{board}/leads/{id}/close", post(close_lead))
        .route("/{board}/annotations", get(list_annotations).post(create_annotation))
        .route("/{board}/connectors", get(list_connectors).post(create_connector))
        .route("/{board}/objects/{id}/archive", post(archive))
        .route("/{board}/canvases/{canvas}", get(get_canvas))
        .route("/{board}/canvases/{canvas}/placements", post(place))
        .route("/{board}/canvases/{canvas}/placements/{id}", put(move_object))
        .route("/{board}/storylines", get(list_storylines).post(save_storyline))
        .route("/{board}/storylines/recent", get(recent_storyline))
        .route("/{board}/storylines/{id}", get(get_storyline))
        .route("/{board}/storylines/{id}/extend", post(extend_storyline))
        .route("/{board}/storylines/{id}/load", post(load_storyline))
        .route("/{board}/storylines/{id}/rename", post(rename_storyline))
        .route("/{board}/storylines/{id}/share", post(share_storyline))
        .route("/{board}/checklists", get(list_checklists).post(instantiate_checklist))
        .route("/{board}/checklists/{id}", get(get_checklist))
        .route("/{board}/checklists/{id}/items", post(add_item))
        .route("/{board}/checklists/{id}/items/{item}/status", put(set_item_status))
        .route("/{board}/checklists/{id}/bookmark", put(attach_bookmark))
        .route("/{board}/checklists/{id}/complete", post(complete_checklist))
        .route("/{board}/handover", get(handover));

    let api = Router::new()
        .route("/health", get(health))
        .route("/rubric", get(rubric))
        .route("/templates", get(templates))
        .route("/views/capture", post(capture))
        .route("/views/prefill", post(prefill))
        .nest("/boards", boards)
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NoSuchRoute", "no such route") });

    Router::new().nest("/api/v1", api).with_state(state)
}

/// A success body: `{"seq": n, <key>: value}` with the seq echoed as a header.
pub struct Reply {
    status: StatusCode,
    seq: u64,
    body: serde_json::Map<String, Value>,
}

impl Reply {
    fn new(status: StatusCode, seq: u64, key: &str, value: impl Serialize) -> Self {
        let mut body = serde_json::Map::new();
        body.insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
        Self { status, seq, body }
    }

    fn ok(seq: u64, key: &str, value: impl Serialize) -> Self {
        Self::new(StatusCode::OK, seq, key, value)
    }

    fn accepted(accepted: Accepted) -> Self {
        let status = if creates(&accepted.event.op) {
            StatusCode::CREATED
        } else {
            StatusCode::OK
        };
        let (key, value) = outcome_body(accepted.outcome);
        Self {
            status,
            seq: accepted.event.seq,
            body: serde_json::Map::from_iter([(key.to_string(), value)]),
        }
    }
}

impl IntoResponse for Reply {
    fn into_response(mut self) -> Response {
        self.body.insert("seq".into(), json!(self.seq));
        let mut response = (self.status, Json(Value::Object(self.body))).into_response();
        response.headers_mut().insert(SEQ_HEADER, HeaderValue::from(self.seq));
        response
    }
}

fn creates(op: &Op) -> bool {
    matches!(
        op,
        Op::CreateWaypoint { .. }
            | Op::CreateLead { .. }
            | Op::CreateAnnotation { .. }
            | Op::CreateConnector { .. }
            | Op::PlaceObject { .. }
            | Op::SaveStoryline { .. }
            | Op::InstantiateChecklist { .. }
            | Op::AddChecklistItem { .. }
    )
}

fn outcome_body(outcome: Outcome) -> (&'static str, Value) {
    fn v(x: impl Serialize) -> Value {
        serde_json::to_value(x).expect("serializable")
    }
    match outcome {
        Outcome::Waypoint(x) => ("waypoint", v(x)),
        Outcome::Lead(x) => ("lead", v(x)),
        Outcome::Annotation(x) => ("annotation", v(x)),
        Outcome::Connector(x) => ("connector", v(x)),
        Outcome::Archived(x) => ("archived", v(x)),
        Outcome::Placement(x) => ("placement", v(x)),
        Outcome::Placements(x) => ("placements", v(x)),
        Outcome::Storyline(x) => ("storyline", v(x)),
        Outcome::Checklist(x) => ("checklist", v(x)),
        Outcome::ChecklistItem(x) => ("item", v(x)),
    }
}

/// Query string whose rejections use the API error shape.
pub struct Params<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Params<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Params(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

async fn submit(app: &AppState, board: &BoardId, actor: Actor, op: Op) -> Result<Reply, ApiError> {
    let hub = Arc::clone(&app.hub);
    let target = board.clone();
    let result = tokio::task::spawn_blocking(move || hub.submit(&target, &actor, op))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))?;
    result
        .map(Reply::accepted)
        .map_err(|e| ApiError::from(e).with_seq(app.hub.seq(board)))
}

fn board_state(app: &AppState, raw: &str) -> Result<(BoardId, Arc<BoardState>), ApiError> {
    let board = board_id(raw)?;
    let state = app.hub.state(&board).ok_or_else(|| ApiError::board_not_found(&board))?;
    Ok((board, state))
}

fn rejected(state: &BoardState, err: impl Into<ApiError>) -> ApiError {
    err.into().with_seq(Some(state.last_applied_seq))
}

/// Resolves a mutation's target board, failing fast when it does not exist.
fn known_board(app: &AppState, raw: &str) -> Result<BoardId, ApiError> {
    let board = board_id(raw)?;
    if app.hub.has_board(&board) {
        Ok(board)
    } else {
        Err(ApiError::board_not_found(&board))
    }
}

// --- service ---

async fn health(State(app): State<AppState>) -> Json<Value> {
    Json(json!({ "status": "ok", "boards": app.hub.board_ids().len() }))
}

async fn rubric() -> Response {
    (
        [
            (header::CONTENT_TYPE, "application/json".to_string()),
            (header::CONTENT_DISPOSITION, format!("inline; filename=\"{RUBRIC_FILE_NAME}\"")),
        ],
        emit_heuristic_rubric(),
    )
        .into_response()
}

async fn templates(State(app): State<AppState>) -> Json<Value> {
    let list: Vec<_> = app.templates.iter().collect();
    Json(json!({ "templates": list }))
}

#[derive(Deserialize)]
struct CaptureBody {
    source_tool_id: String,
    query_representation: String,
    #[serde(default)]
    time_window: Option<Period>,
    #[serde(default)]
    captured_at: Option<Timestamp>,
}

async fn capture(State(app): State<AppState>, Body(body): Body<CaptureBody>) -> Result<Json<Value>, ApiError> {
    let at = body.captured_at.unwrap_or_else(|| app.clock.now());
    let view = capture_view(body.source_tool_id, body.query_representation, body.time_window, at)?;
    let draft = prefill_draft(&view);
    Ok(Json(json!({ "view": view, "draft": draft })))
}

#[derive(Deserialize)]
struct PrefillBody {
    view: ViewState,
}

async fn prefill(Body(body): Body<PrefillBody>) -> Json<Value> {
    Json(json!({ "draft": prefill_draft(&body.view) }))
}

// --- boards ---

#[derive(Serialize)]
struct BoardInfo {
    board_id: BoardId,
    client_env: String,
    seq: u64,
}

fn board_info(app: &AppState, board: &BoardId) -> Option<BoardInfo> {
    let state = app.hub.state(board)?;
    Some(BoardInfo {
        board_id: board.clone(),
        client_env: state.client_env.clone(),
        seq: state.last_applied_seq,
    })
}

async fn list_boards(State(app): State<AppState>, _caller: Caller) -> Json<Value> {
    let boards: Vec<_> = app
        .hub
        .board_ids()
        .iter()
        .filter_map(|b| board_info(&app, b))
        .collect();
    Json(json!({ "boards": boards }))
}

#[derive(Deserialize)]
struct CreateBoardBody {
    board_id: String,
    #[serde(default)]
    client_env: Option<String>,
}

async fn create_board(
    State(app): State<AppState>,
    _caller: Caller,
    Body(body): Body<CreateBoardBody>,
) -> Result<Reply, ApiError> {
    let board = board_id(&body.board_id)?;
    let client_env = body.client_env.unwrap_or_else(|| board.to_string());
    if client_env.trim().is_empty() {
        return Err(ApiError::bad_request("client_env must not be empty"));
    }
    let hub = Arc::clone(&app.hub);
    let target = board.clone();
    tokio::task::spawn_blocking(move || hub.create_board(target, &client_env))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string()))??;
    let info = board_info(&app, &board).ok_or_else(|| ApiError::board_not_found(&board))?;
    Ok(Reply::new(StatusCode::CREATED, info.seq, "board", info))
}

async fn get_board(State(app): State<AppState>, _caller: Caller, Path(b): Path<String>) -> Result<Reply, ApiError> {
    let board = board_id(&b)?;
    let info = board_info(&app, &board).ok_or_else(|| ApiError::board_not_found(&board))?;
    Ok(Reply::ok(info.seq, "board", info))
}

async fn snapshot(State(app): State<AppState>, _caller: Caller, Path(b): Path<String>) -> Result<Response, ApiError> {
    let board = board_id(&b)?;
    let snap = app.hub.snapshot(&board).ok_or_else(|| ApiError::board_not_found(&board))?;
    let mut response = ([(header::CONTENT_TYPE, "application/json")], snap.canonical).into_response();
    response.headers_mut().insert(SEQ_HEADER, HeaderValue::from(snap.seq));
    Ok(response)
}

#[derive(Deserialize)]
struct FromSeq {
    #[serde(default)]
    from_seq: u64,
}

async fn events(
    State(app): State<AppState>,
    _caller: Caller,
    Path(b): Path<String>,
    Params(q): Params<FromSeq>,
) -> Result<Response, ApiError> {
    let board = board_id(&b)?;
    let current = app.hub.seq(&board).ok_or_else(|| ApiError::board_not_found(&board))?;
    if q.from_seq > current {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "SeqOutOfRange",
            format!("from_seq {} is beyond current seq {current}", q.from_seq),
        )
        .with_seq(Some(current)));
    }
    let events = app.hub.events(&board, q.from_seq).unwrap_or_default();
    let seq = events.last().map_or(q.from_seq.max(current), |e| e.seq);
    let body: String = events.iter().map(|e| e.to_line() + "\n").collect();
    let mut response = ([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response();
    response.headers_mut().insert(SEQ_HEADER, HeaderValue::from(seq));
    Ok(response)
}

/// Any operation in its log form; the typed routes below are shorthands.
async fn submit_op(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(op): Body<Op>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, op).await
}

// --- waypoints ---

#[derive(Deserialize)]
struct CreateWaypointBody {
    #[serde(flatten)]
    draft: WaypointDraft,
    #[serde(default)]
    view_state: Option<ViewState>,
}

async fn create_waypoint(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<CreateWaypointBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::CreateWaypoint { draft: body.draft, view_state: body.view_state }).await
}

#[derive(Deserialize, Default)]
struct ListParams {
    /// Comma-separated kinds.
    kind: Option<String>,
    priority_at_least: Option<String>,
    q: Option<String>,
    period_start: Option<Timestamp>,
    period_end: Option<Timestamp>,
    sort: Option<String>,
    dir: Option<String>,
}

fn parse_list_params(p: ListParams) -> Result<(WaypointFilter, SortKey), ApiError> {
    let kinds = p
        .kind
        .map(|raw| {
            raw.split(',')
                .map(|k| WaypointKind::parse(k.trim()).ok_or_else(|| ApiError::bad_request(format!("unknown kind `{k}`"))))
                .collect::<Result<_, _>>()
        })
        .transpose()?;
    let priority_at_least = p
        .priority_at_least
        .map(|raw| Priority::parse(&raw).ok_or_else(|| ApiError::bad_request(format!("unknown priority `{raw}`"))))
        .transpose()?;
    let period_overlaps = match (p.period_start, p.period_end) {
        (None, None) => None,
        (Some(s), Some(e)) => Some(Period::new(s, e).map_err(|e| ApiError::from(OpError::InvalidPeriod(e)))?),
        (Some(s), None) => Some(Period::instant(s)),
        (None, Some(e)) => Some(Period::instant(e)),
    };
    let field = match p.sort.as_deref() {
        None | Some("created_at") => SortField::CreatedAt,
        Some("name") => SortField::Name,
        Some("priority") => SortField::Priority,
        Some("event_period_start") => SortField::EventPeriodStart,
        Some(other) => return Err(ApiError::bad_request(format!("unknown sort field `{other}`"))),
    };
    let direction = match p.dir.as_deref() {
        None | Some("asc") => SortDirection::Asc,
        Some("desc") => SortDirection::Desc,
        Some(other) => return Err(ApiError::bad_request(format!("unknown direction `{other}`"))),
    };
    let filter = WaypointFilter {
        kinds,
        priority_at_least,
        text_query: p.q.filter(|q| !q.is_empty()),
        period_overlaps,
    };
    Ok((filter, SortKey::new(field, direction)))
}

async fn list_waypoints_route(
    State(app): State<AppState>,
    _caller: Caller,
    Path(b): Path<String>,
    Params(params): Params<ListParams>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let (filter, sort) = parse_list_params(params).map_err(|e| e.with_seq(Some(state.last_applied_seq)))?;
    Ok(Reply::ok(state.last_applied_seq, "waypoints", list_waypoints(&state, &filter, sort)))
}

async fn get_waypoint(
    State(app): State<AppState>,
    _caller: Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let id = entity_id(&id)?;
    let w = state.waypoints.get(&id).ok_or_else(|| rejected(&state, OpError::NotFound(id)))?;
    Ok(Reply::ok(state.last_applied_seq, "waypoint", w).with_archived(state.is_archived(id)))
}

impl Reply {
    fn with_archived(mut self, archived: bool) -> Self {
        self.body.insert("archived".into(), json!(archived));
        self
    }
}

async fn update_waypoint(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(patch): Body<WaypointPatch>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::UpdateWaypoint { id: entity_id(&id)?, patch }).await
}

async fn open_view(
    State(app): State<AppState>,
    _caller: Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let view = state.open_waypoint_view(entity_id(&id)?).map_err(|e| rejected(&state, e))?;
    Ok(Reply::ok(state.last_applied_seq, "view", view))
}

// --- leads, annotations, connectors ---

#[derive(Deserialize)]
struct CreateLeadBody {
    title: String,
    #[serde(default)]
    notes: String,
}

async fn create_lead(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<CreateLeadBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::CreateLead { title: body.title, notes: body.notes }).await
}

async fn close_lead(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::CloseLead { id: entity_id(&id)? }).await
}

fn live_values<'a, T: Serialize + 'a>(
    state: &BoardState,
    items: impl Iterator<Item = (&'a EntityId, &'a T)>,
) -> Vec<Value> {
    items
        .map(|(id, item)| {
            let mut v = serde_json::to_value(item).expect("serializable");
            v["archived"] = json!(state.is_archived(*id));
            v
        })
        .collect()
}

async fn list_leads(State(app): State<AppState>, _caller: Caller, Path(b): Path<String>) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    Ok(Reply::ok(state.last_applied_seq, "leads", live_values(&state, state.leads.iter())))
}

#[derive(Deserialize)]
struct CreateAnnotationBody {
    text: String,
}

async fn create_annotation(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<CreateAnnotationBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::CreateAnnotation { text: body.text }).await
}

async fn list_annotations(
    State(app): State<AppState>,
    _caller: Caller,
    Path(b): Path<String>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    Ok(Reply::ok(state.last_applied_seq, "annotations", live_values(&state, state.annotations.iter())))
}

#[derive(Deserialize)]
struct CreateConnectorBody {
    a: EntityId,
    b: EntityId,
    #[serde(default)]
    label: Option<String>,
}

async fn create_connector(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<CreateConnectorBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::CreateConnector { a: body.a, b: body.b, label: body.label }).await
}

async fn list_connectors(
    State(app): State<AppState>,
    _caller: Caller,
    Path(b): Path<String>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    Ok(Reply::ok(state.last_applied_seq, "connectors", live_values(&state, state.connectors.iter())))
}

async fn archive(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::ArchiveObject { id: entity_id(&id)? }).await
}

// --- canvases ---

async fn get_canvas(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, c)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let canvas = canvas(&c, &actor)?;
    if !canvas.accessible_by(&actor.id) {
        return Err(rejected(&state, OpError::CanvasForbidden(canvas)));
    }
    let placements: Vec<_> = state
        .canvases
        .get(&canvas)
        .map(|layout| {
            let mut items: Vec<_> = layout.items.values().collect();
            items.sort_by_key(|p| p.z_order);
            items
        })
        .unwrap_or_default();
    let connectors: Vec<EntityId> = state
        .connectors
        .keys()
        .copied()
        .filter(|id| state.on_canvas(&canvas, *id))
        .collect();
    let mut reply = Reply::ok(state.last_applied_seq, "placements", placements);
    reply.body.insert("canvas".into(), json!(canvas));
    reply.body.insert("connectors".into(), json!(connectors));
    Ok(reply)
}

#[derive(Deserialize)]
struct PlaceBody {
    object_id: EntityId,
    x: f64,
    y: f64,
}

async fn place(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, c)): Path<(String, String)>,
    Body(body): Body<PlaceBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let canvas = canvas(&c, &actor)?;
    submit(&app, &board, actor, Op::PlaceObject { canvas, object_id: body.object_id, x: body.x, y: body.y }).await
}

#[derive(Deserialize)]
struct MoveBody {
    x: f64,
    y: f64,
}

async fn move_object(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, c, id)): Path<(String, String, String)>,
    Body(body): Body<MoveBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let canvas = canvas(&c, &actor)?;
    let object_id = entity_id(&id)?;
    submit(&app, &board, actor, Op::MoveObject { canvas, object_id, x: body.x, y: body.y }).await
}

// --- storylines ---

fn optional_canvas(raw: Option<String>, actor: &Actor) -> Result<Option<CanvasRef>, ApiError> {
    raw.map(|c| canvas(&c, actor)).transpose()
}

#[derive(Deserialize)]
struct SaveStorylineBody {
    title: String,
    selected_ids: Vec<EntityId>,
    #[serde(default)]
    canvas: Option<String>,
}

async fn save_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<SaveStorylineBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let canvas = optional_canvas(body.canvas, &actor)?;
    submit(&app, &board, actor, Op::SaveStoryline { title: body.title, selected_ids: body.selected_ids, canvas }).await
}

async fn list_storylines(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let visible: Vec<_> = state
        .storylines
        .values()
        .filter(|s| state.storyline_visible(s, &actor.id))
        .collect();
    Ok(Reply::ok(state.last_applied_seq, "storylines", visible))
}

/// The storyline a hunter sees on opening the board.
async fn recent_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    Ok(Reply::ok(state.last_applied_seq, "storyline", state.most_recent_storyline(&actor.id)))
}

async fn get_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let id = entity_id(&id)?;
    let s = state
        .storylines
        .get(&id)
        .filter(|s| state.storyline_visible(s, &actor.id))
        .ok_or_else(|| rejected(&state, OpError::NotFound(id)))?;
    Ok(Reply::ok(state.last_applied_seq, "storyline", s))
}

#[derive(Deserialize)]
struct ExtendBody {
    added_ids: Vec<EntityId>,
    #[serde(default)]
    canvas: Option<String>,
}

async fn extend_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<ExtendBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let id = entity_id(&id)?;
    let canvas = optional_canvas(body.canvas, &actor)?;
    submit(&app, &board, actor, Op::ExtendStoryline { id, added_ids: body.added_ids, canvas }).await
}

#[derive(Deserialize)]
struct LoadBody {
    canvas: String,
}

async fn load_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<LoadBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let id = entity_id(&id)?;
    let canvas = canvas(&body.canvas, &actor)?;
    submit(&app, &board, actor, Op::LoadStoryline { id, canvas }).await
}

#[derive(Deserialize)]
struct RenameBody {
    title: String,
}

async fn rename_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<RenameBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::RenameStoryline { id: entity_id(&id)?, title: body.title }).await
}

async fn share_storyline(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::ShareStoryline { id: entity_id(&id)? }).await
}

// --- checklists ---

#[derive(Deserialize, Default)]
struct InstantiateBody {
    #[serde(default)]
    template_id: Option<String>,
}

async fn instantiate_checklist(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Body(body): Body<InstantiateBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let id = body.template_id.as_deref().unwrap_or(DEFAULT_TEMPLATE_ID);
    let template = app
        .templates
        .get(id)
        .map_err(|e| ApiError::from(e).with_seq(app.hub.seq(&board)))?
        .clone();
    submit(&app, &board, actor, Op::InstantiateChecklist { template }).await
}

async fn list_checklists(
    State(app): State<AppState>,
    _caller: Caller,
    Path(b): Path<String>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let all: Vec<_> = state.checklists.values().collect();
    Ok(Reply::ok(state.last_applied_seq, "checklists", all))
}

async fn get_checklist(
    State(app): State<AppState>,
    _caller: Caller,
    Path((b, id)): Path<(String, String)>,
) -> Result<Reply, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let id = entity_id(&id)?;
    let c = state.checklists.get(&id).ok_or_else(|| rejected(&state, OpError::NotFound(id)))?;
    Ok(Reply::ok(state.last_applied_seq, "checklist", c))
}

#[derive(Deserialize)]
struct AddItemBody {
    text: String,
}

async fn add_item(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<AddItemBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    submit(&app, &board, actor, Op::AddChecklistItem { checklist_id: entity_id(&id)?, text: body.text }).await
}

#[derive(Deserialize)]
struct ItemStatusBody {
    status: ItemStatus,
    #[serde(default)]
    note: Option<String>,
}

async fn set_item_status(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id, item)): Path<(String, String, String)>,
    Body(body): Body<ItemStatusBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let op = Op::SetItemStatus {
        checklist_id: entity_id(&id)?,
        item_id: entity_id(&item)?,
        status: body.status,
        note: body.note,
    };
    submit(&app, &board, actor, op).await
}

#[derive(Deserialize)]
struct BookmarkBody {
    view_state: ViewState,
}

async fn attach_bookmark(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<BookmarkBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let op = Op::AttachResumeBookmark { checklist_id: entity_id(&id)?, view_state: body.view_state };
    submit(&app, &board, actor, op).await
}

#[derive(Deserialize, Default)]
struct CompleteBody {
    #[serde(default, rename = "override")]
    override_pending: bool,
}

async fn complete_checklist(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path((b, id)): Path<(String, String)>,
    Body(body): Body<CompleteBody>,
) -> Result<Reply, ApiError> {
    let board = known_board(&app, &b)?;
    let op = Op::CompleteChecklist { checklist_id: entity_id(&id)?, override_pending: body.override_pending };
    submit(&app, &board, actor, op).await
}

// --- reporting ---

#[derive(Deserialize)]
struct HandoverParams {
    storyline: String,
    #[serde(default)]
    checklist: Option<String>,
    #[serde(default)]
    format: Option<String>,
}

async fn handover(
    State(app): State<AppState>,
    Caller(actor): Caller,
    Path(b): Path<String>,
    Params(p): Params<HandoverParams>,
) -> Result<Response, ApiError> {
    let (_, state) = board_state(&app, &b)?;
    let storyline = entity_id(&p.storyline)?;
    let checklist = p.checklist.as_deref().map(entity_id).transpose()?;
    let visible = state
        .storylines
        .get(&storyline)
        .is_some_and(|s| state.storyline_visible(s, &actor.id));
    if !visible {
        return Err(rejected(&state, ReportError::StorylineNotFound(storyline)));
    }
    let generated_at = state.last_event_at.unwrap_or_else(huntboard_core::time::standard_start);
    let report = generate_handover(&state, storyline, checklist, generated_at).map_err(|e| rejected(&state, e))?;
    let (content_type, name, body) = match p.format.as_deref() {
        None | Some("json") => ("application/json", report.json_file_name(), report.to_json()),
        Some("md") | Some("markdown") => ("text/markdown; charset=utf-8", report.markdown_file_name(), report.to_markdown()),
        Some(other) => return Err(rejected(&state, ApiError::bad_request(format!("unknown format `{other}`")))),
    };
    let mut response = (
        [
            (header::CONTENT_TYPE, content_type.to_string()),
            (header::CONTENT_DISPOSITION, format!("inline; filename=\"{name}\"")),
        ],
        body,
    )
        .into_response();
    response.headers_mut().insert(SEQ_HEADER, HeaderValue::from(report.seq));
    Ok(response)
}
