use thiserror::Error;

use crate::ids::{CanvasRef, EntityId};
use crate::time::InvalidPeriod;

/// Precondition failure of a board operation. A failed operation leaves the
/// board untouched and is never appended to the log.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum OpError {
    #[error("name must not be empty")]
    EmptyName,
    #[error("title must not be empty")]
    EmptyTitle,
    #[error("text must not be empty")]
    EmptyText,
    #[error(transparent)]
    InvalidPeriod(#[from] InvalidPeriod),
    #[error("object {0} not found")]
    NotFound(EntityId),
    #[error("object {0} is archived")]
    Archived(EntityId),
    #[error("lead {0} is already closed")]
    AlreadyClosed(EntityId),
    #[error("a connector cannot join {0} to itself")]
    SelfLoop(EntityId),
    #[error("connector endpoint {0} is archived")]
    EndpointArchived(EntityId),
    #[error("object {object} is already placed on canvas {canvas}")]
    AlreadyPlaced { canvas: CanvasRef, object: EntityId },
    #[error("object {object} is not placed on canvas {canvas}")]
    NotPlaced { canvas: CanvasRef, object: EntityId },
    #[error("object {0} cannot be placed directly")]
    NotPlaceable(EntityId),
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("canvas {0} belongs to another hunter")]
    CanvasForbidden(CanvasRef),
    #[error("selection is empty")]
    EmptySelection,
    #[error("only the creator may do this to {0}")]
    NotOwner(EntityId),
    #[error("waypoint {0} has no saved view")]
    NoSavedView(EntityId),
    #[error("an active checklist already exists for this hunter (checklist {0})")]
    ActiveChecklistExists(EntityId),
    #[error("checklist {0} is not active")]
    NotActive(EntityId),
    #[error("checklist item {0} not found")]
    ItemNotFound(EntityId),
    #[error("checklist {checklist} has {pending} pending item(s)")]
    PendingItems { checklist: EntityId, pending: usize },
    #[error("template item text must not be empty")]
    EmptyTemplateItem,
}

impl OpError {
    /// Stable machine-readable code for clients.
    pub fn code(&self) -> &'static str {
        match self {
            OpError::EmptyName => "EmptyName",
            OpError::EmptyTitle => "EmptyTitle",
            OpError::EmptyText => "EmptyText",
            OpError::InvalidPeriod(_) => "InvalidPeriod",
            OpError::NotFound(_) => "NotFound",
            OpError::Archived(_) => "Archived",
            OpError::AlreadyClosed(_) => "AlreadyClosed",
            OpError::SelfLoop(_) => "SelfLoop",
            OpError::EndpointArchived(_) => "EndpointArchived",
            OpError::AlreadyPlaced { .. } => "AlreadyPlaced",
            OpError::NotPlaced { .. } => "NotPlaced",
            OpError::NotPlaceable(_) => "NotPlaceable",
            OpError::NonFiniteCoordinate => "NonFiniteCoordinate",
            OpError::CanvasForbidden(_) => "CanvasForbidden",
            OpError::EmptySelection => "EmptySelection",
            OpError::NotOwner(_) => "NotOwner",
            OpError::NoSavedView(_) => "NoSavedView",
            OpError::ActiveChecklistExists(_) => "ActiveChecklistExists",
            OpError::NotActive(_) => "NotActive",
            OpError::ItemNotFound(_) => "ItemNotFound",
            OpError::PendingItems { .. } => "PendingItems",
            OpError::EmptyTemplateItem => "EmptyTemplateItem",
        }
    }
}
