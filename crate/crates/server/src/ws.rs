//! Subscription socket: one text frame per event, in the log line format.

use std::collections::HashMap;

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::response::Response;
use huntboard_core::hub::{SubscribeError, Subscription};
use huntboard_core::BoardId;
use tracing::debug;

use crate::api::AppState;

pub const CLOSE_BAD_REQUEST: u16 = 4400;
pub const CLOSE_BOARD_NOT_FOUND: u16 = 4404;
pub const CLOSE_SEQ_OUT_OF_RANGE: u16 = 4416;

pub async fn stream(
    State(app): State<AppState>,
    Path(board): Path<String>,
    Query(params): Query<HashMap<String, String>>,
    upgrade: WebSocketUpgrade,
) -> Response {
    let subscription = open(&app, &board, params.get("from_seq").map(String::as_str));
    upgrade.on_upgrade(move |socket| async move {
        match subscription {
            Ok(sub) => pump(socket, sub).await,
            Err((code, reason)) => close(socket, code, reason).await,
        }
    })
}

fn open(app: &AppState, board: &str, from_seq: Option<&str>) -> Result<Subscription, (u16, String)> {
    let board = BoardId::new(board).map_err(|e| (CLOSE_BAD_REQUEST, e.to_string()))?;
    let from_seq = from_seq
        .ok_or_else(|| (CLOSE_BAD_REQUEST, "from_seq is required".to_string()))?
        .parse::<u64>()
        .map_err(|_| (CLOSE_BAD_REQUEST, "from_seq must be a non-negative integer".to_string()))?;
    app.hub.subscribe(&board, from_seq).map_err(|e| match e {
        SubscribeError::BoardNotFound(_) => (CLOSE_BOARD_NOT_FOUND, e.to_string()),
        SubscribeError::SeqOutOfRange { .. } => (CLOSE_SEQ_OUT_OF_RANGE, e.to_string()),
    })
}

async fn close(mut socket: WebSocket, code: u16, reason: String) {
    let frame = CloseFrame { code, reason: reason.into() };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn pump(mut socket: WebSocket, mut sub: Subscription) {
    loop {
        tokio::select! {
            event = sub.recv() => {
                let Some(event) = event else { break };
                if socket.send(Message::Text(event.to_line().into())).await.is_err() {
                    break;
                }
            }
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    debug!(from_seq = sub.from_seq(), "subscriber left");
}
