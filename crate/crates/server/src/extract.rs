use axum::extract::{FromRequest, FromRequestParts, Request};
use axum::http::request::Parts;
use huntboard_core::{Actor, ActorId, BoardId, CanvasRef, EntityId};
use serde::de::DeserializeOwned;

use crate::error::ApiError;

pub const ACTOR_ID_HEADER: &str = "x-actor-id";
pub const ACTOR_NAME_HEADER: &str = "x-actor-name";
pub const ACTOR_ROLE_HEADER: &str = "x-actor-role";

/// The caller, taken on trust from the actor headers.
#[derive(Debug, Clone)]
pub struct Caller(pub Actor);

fn header<'a>(parts: &'a Parts, name: &str) -> Result<Option<&'a str>, ApiError> {
    match parts.headers.get(name) {
        None => Ok(None),
        Some(v) => v
            .to_str()
            .map(|s| Some(s.trim()).filter(|s| !s.is_empty()))
            .map_err(|_| ApiError::bad_request(format!("{name} is not valid text"))),
    }
}

impl<S: Send + Sync> FromRequestParts<S> for Caller {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        let id = header(parts, ACTOR_ID_HEADER)?.ok_or_else(ApiError::unauthorized)?;
        let id = ActorId::new(id).map_err(|e| ApiError::bad_request(e.to_string()))?;
        let mut actor = Actor::named(id);
        if let Some(name) = header(parts, ACTOR_NAME_HEADER)? {
            actor = actor.with_display_name(name);
        }
        if let Some(role) = header(parts, ACTOR_ROLE_HEADER)? {
            actor = actor.with_role(role);
        }
        Ok(Caller(actor))
    }
}

/// JSON body whose rejections use the API error shape.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        axum::Json::<T>::from_request(req, state)
            .await
            .map(|axum::Json(v)| Body(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

pub fn board_id(raw: &str) -> Result<BoardId, ApiError> {
    BoardId::new(raw).map_err(|e| ApiError::bad_request(e.to_string()))
}

pub fn entity_id(raw: &str) -> Result<EntityId, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request(format!("`{raw}` is not an object id")))
}

/// `team`, `mine`, or `personal:<actor>`.
pub fn canvas(raw: &str, caller: &Actor) -> Result<CanvasRef, ApiError> {
    if raw == "mine" {
        return Ok(CanvasRef::Personal(caller.id.clone()));
    }
    raw.parse()
        .map_err(|_| ApiError::bad_request(format!("`{raw}` is not a canvas")))
}
