//! Event-sourced investigation board for threat hunting.
//!
//! Board state is a pure fold over a per-board, server-ordered event log.
//! [`hub::Hub`] sequences submissions, persists them and fans them out to
//! subscribers; everything else is deterministic state and queries over it.

pub mod audit;
pub mod checklist;
pub mod error;
pub mod event;
pub mod hub;
pub mod ids;
pub mod model;
pub mod ops;
pub mod parallel;
pub mod replay;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod state;
pub mod store;
pub mod time;
pub mod view;

pub use error::OpError;
pub use event::BoardEvent;
pub use hub::Hub;
pub use ids::{Actor, ActorId, BoardId, CanvasRef, EntityId};
pub use ops::{Op, Outcome};
pub use state::BoardState;
