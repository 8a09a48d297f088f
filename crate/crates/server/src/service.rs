use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use huntboard_core::checklist::{TemplateError, TemplateRegistry};
use huntboard_core::hub::HubError;
use huntboard_core::store::{DataDir, FsyncPolicy, StoreError};
use huntboard_core::time::{Clock, SyntheticClock, SystemClock};
use huntboard_core::Hub;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;
use tracing::{info, warn};

use crate::api::{router, AppState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockKind {
    #[default]
    System,
    /// Fixed one-second steps; makes runs byte-reproducible.
    Synthetic,
}

impl ClockKind {
    pub fn build(self) -> Arc<dyn Clock> {
        match self {
            ClockKind::System => Arc::new(SystemClock),
            ClockKind::Synthetic => Arc::new(SyntheticClock::standard()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    /// `None` keeps every board in memory only.
    pub data_dir: Option<PathBuf>,
    /// Checklist template file; the bundled templates when absent.
    pub template: Option<PathBuf>,
    pub fsync: FsyncPolicy,
    pub clock: ClockKind,
}

impl ServiceConfig {
    pub fn local(data_dir: Option<PathBuf>) -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 0)),
            data_dir,
            template: None,
            fsync: FsyncPolicy::EveryEvent,
            clock: ClockKind::System,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("port already in use: {0}")]
    PortInUse(SocketAddr),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("data directory {0} is not writable")]
    DataDirUnwritable(PathBuf),
    #[error("corrupt log for board {board}: last valid seq {last_valid_seq}")]
    CorruptLog { board: String, last_valid_seq: u64 },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Store(StoreError),
}

impl From<HubError> for ServeError {
    fn from(err: HubError) -> Self {
        match err {
            HubError::Store(StoreError::DataDirUnwritable { path, .. }) => ServeError::DataDirUnwritable(path),
            HubError::Store(StoreError::CorruptLog { board, last_valid_seq, .. }) => {
                ServeError::CorruptLog { board, last_valid_seq }
            }
            HubError::Store(other) => ServeError::Store(other),
            other => ServeError::Store(StoreError::Io(io::Error::other(other.to_string()))),
        }
    }
}

/// A bound, running service.
pub struct RunningService {
    pub addr: SocketAddr,
    pub hub: Arc<Hub>,
    shutdown: Option<oneshot::Sender<()>>,
    task: JoinHandle<io::Result<()>>,
}

impl RunningService {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Stops accepting connections and flushes logs.
    pub async fn shutdown(mut self) -> io::Result<()> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let result = self.task.await.map_err(io::Error::other)?;
        self.hub.sync_all()?;
        result
    }

    /// Runs until the server stops on its own or `signal` resolves.
    pub async fn run_until(self, signal: impl std::future::Future<Output = ()>) -> io::Result<()> {
        signal.await;
        self.shutdown().await
    }
}

pub fn open_hub(config: &ServiceConfig, clock: Arc<dyn Clock>) -> Result<Hub, ServeError> {
    match &config.data_dir {
        None => Ok(Hub::in_memory(clock)),
        Some(path) => {
            let dir = DataDir::open(path, config.fsync).map_err(|e| ServeError::from(HubError::Store(e)))?;
            Ok(Hub::open(dir, clock)?)
        }
    }
}

pub async fn start(config: ServiceConfig) -> Result<RunningService, ServeError> {
    let templates = match &config.template {
        Some(path) => TemplateRegistry::load(path)?,
        None => TemplateRegistry::builtin(),
    };
    let clock = config.clock.build();
    let hub = Arc::new(open_hub(&config, Arc::clone(&clock))?);
    info!(boards = hub.board_ids().len(), "boards recovered");

    let listener = TcpListener::bind(config.addr).await.map_err(|source| {
        if source.kind() == io::ErrorKind::AddrInUse {
            ServeError::PortInUse(config.addr)
        } else {
            ServeError::Bind { addr: config.addr, source }
        }
    })?;
    let addr = listener.local_addr().map_err(|source| ServeError::Bind { addr: config.addr, source })?;

    if let FsyncPolicy::Interval(period) = config.fsync {
        spawn_syncer(Arc::downgrade(&hub), period);
    }

    let app = router(AppState {
        hub: Arc::clone(&hub),
        templates: Arc::new(templates),
        clock,
    });
    let (tx, rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = rx.await;
            })
            .await
    });
    info!(%addr, "listening");
    Ok(RunningService {
        addr,
        hub,
        shutdown: Some(tx),
        task,
    })
}

fn spawn_syncer(hub: std::sync::Weak<Hub>, period: Duration) {
    tokio::spawn(async move {
        let mut ticks = tokio::time::interval(period.max(Duration::from_millis(1)));
        loop {
            ticks.tick().await;
            let Some(hub) = hub.upgrade() else { break };
            if let Err(err) = tokio::task::spawn_blocking(move || hub.sync_all()).await.unwrap_or(Ok(())) {
                warn!(error = %err, "periodic log sync failed");
            }
        }
    });
}
