//! HTTP/WebSocket gateway, CLI and scenario driver for the hunt board.

pub mod api;
pub mod cli;
pub mod client;
pub mod error;
pub mod extract;
pub mod scenario;
pub mod service;
pub mod ws;

pub use service::{start, RunningService, ServeError, ServiceConfig};
