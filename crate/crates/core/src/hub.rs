//! Server-ordered collaboration: one serial log per board, persisted and
//! broadcast to subscribers after each committed transition.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use thiserror::Error;
use tokio::sync::mpsc::{unbounded_channel, UnboundedReceiver, UnboundedSender};
use tracing::{debug, warn};

use crate::error::OpError;
use crate::event::BoardEvent;
use crate::ids::{Actor, BoardId};
use crate::ops::{Op, Outcome};
use crate::replay::replay;
use crate::state::{ApplyError, BoardState};
use crate::store::{DataDir, LogWriter, StoreError};
use crate::time::Clock;

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error("board {0} not found")]
    BoardNotFound(BoardId),
    #[error(transparent)]
    Rejected(OpError),
    #[error("event could not be persisted: {0}")]
    Persist(#[from] std::io::Error),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubscribeError {
    #[error("board {0} not found")]
    BoardNotFound(BoardId),
    #[error("from_seq {requested} is beyond current seq {current}")]
    SeqOutOfRange { requested: u64, current: u64 },
}

#[derive(Debug, Error)]
pub enum HubError {
    #[error("board {0} not found")]
    BoardNotFound(BoardId),
    #[error("board {0} already exists")]
    BoardExists(BoardId),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// An accepted submission: the committed event and the operation's result.
#[derive(Debug, Clone)]
pub struct Accepted {
    pub event: Arc<BoardEvent>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub seq: u64,
    pub canonical: String,
}

/// Gapless, in-order event feed: backlog first, then live events.
#[derive(Debug)]
pub struct Subscription {
    from_seq: u64,
    rx: UnboundedReceiver<Arc<BoardEvent>>,
}

impl Subscription {
    pub fn from_seq(&self) -> u64 {
        self.from_seq
    }

    pub async fn recv(&mut self) -> Option<Arc<BoardEvent>> {
        self.rx.recv().await
    }

    pub fn blocking_recv(&mut self) -> Option<Arc<BoardEvent>> {
        self.rx.blocking_recv()
    }

    pub fn try_recv(&mut self) -> Option<Arc<BoardEvent>> {
        self.rx.try_recv().ok()
    }

    /// Everything delivered so far, without waiting.
    pub fn drain(&mut self) -> Vec<Arc<BoardEvent>> {
        std::iter::from_fn(|| self.try_recv()).collect()
    }
}

struct BoardInner {
    client_env: String,
    state: Arc<BoardState>,
    events: Vec<Arc<BoardEvent>>,
    writer: Option<LogWriter>,
    subscribers: Vec<UnboundedSender<Arc<BoardEvent>>>,
}

impl BoardInner {
    fn seq(&self) -> u64 {
        self.events.len() as u64
    }
}

struct BoardSlot {
    inner: Mutex<BoardInner>,
}

impl BoardSlot {
    fn lock(&self) -> MutexGuard<'_, BoardInner> {
        self.inner.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }
}

pub struct Hub {
    boards: RwLock<BTreeMap<BoardId, Arc<BoardSlot>>>,
    clock: Arc<dyn Clock>,
    store: Option<DataDir>,
}

impl Hub {
    pub fn in_memory(clock: Arc<dyn Clock>) -> Self {
        Self {
            boards: RwLock::new(BTreeMap::new()),
            clock,
            store: None,
        }
    }

    /// Opens a persistent hub, replaying every board found in `store`.
    pub fn open(store: DataDir, clock: Arc<dyn Clock>) -> Result<Self, HubError> {
        let mut boards = BTreeMap::new();
        for recovered in store.recover()? {
            debug!(board = %recovered.meta.board_id, seq = recovered.state.last_applied_seq, "recovered board");
            let slot = BoardSlot {
                inner: Mutex::new(BoardInner {
                    client_env: recovered.meta.client_env,
                    state: Arc::new(recovered.state),
                    events: recovered.events.into_iter().map(Arc::new).collect(),
                    writer: Some(recovered.writer),
                    subscribers: Vec::new(),
                }),
            };
            boards.insert(recovered.meta.board_id, Arc::new(slot));
        }
        Ok(Self {
            boards: RwLock::new(boards),
            clock,
            store: Some(store),
        })
    }

    fn slot(&self, board: &BoardId) -> Option<Arc<BoardSlot>> {
        self.boards
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .get(board)
            .cloned()
    }

    pub fn board_ids(&self) -> Vec<BoardId> {
        self.boards
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .keys()
            .cloned()
            .collect()
    }

    pub fn has_board(&self, board: &BoardId) -> bool {
        self.slot(board).is_some()
    }

    pub fn create_board(&self, board: BoardId, client_env: &str) -> Result<(), HubError> {
        let mut boards = self.boards.write().unwrap_or_else(|p| p.into_inner());
        if boards.contains_key(&board) {
            return Err(HubError::BoardExists(board));
        }
        let writer = match &self.store {
            Some(store) => Some(store.create_board(&board, client_env)?),
            None => None,
        };
        let slot = BoardSlot {
            inner: Mutex::new(BoardInner {
                client_env: client_env.to_string(),
                state: Arc::new(BoardState::new(board.clone(), client_env)),
                events: Vec::new(),
                writer,
                subscribers: Vec::new(),
            }),
        };
        boards.insert(board, Arc::new(slot));
        Ok(())
    }

    /// Validates `op` against the state at the next seq and commits it.
    ///
    /// Rejections append nothing and are reported only to the caller.
    pub fn submit(&self, board: &BoardId, actor: &Actor, op: Op) -> Result<Accepted, SubmitError> {
        let slot = self
            .slot(board)
            .ok_or_else(|| SubmitError::BoardNotFound(board.clone()))?;
        let mut inner = slot.lock();
        let seq = inner.seq() + 1;
        let now = self.clock.now();
        let server_time = inner.state.last_event_at.map_or(now, |last| now.max(last));
        let event = BoardEvent::new(board.clone(), seq, actor.clone(), server_time, op);

        let outcome = match Arc::make_mut(&mut inner.state).apply(&event) {
            Ok(outcome) => outcome,
            Err(ApplyError::Rejected { source, .. }) => return Err(SubmitError::Rejected(source)),
            Err(other) => unreachable!("hub-built event failed sequencing: {other}"),
        };

        if let Some(writer) = inner.writer.as_mut() {
            if let Err(err) = writer.append(&event) {
                warn!(%board, seq, error = %err, "log append failed, rolling back");
                let rebuilt = replay(board.clone(), &inner.client_env, inner.events.iter().map(|e| e.as_ref()))
                    .expect("committed log replays");
                inner.state = Arc::new(rebuilt);
                return Err(SubmitError::Persist(err));
            }
        }

        let event = Arc::new(event);
        inner.events.push(Arc::clone(&event));
        inner
            .subscribers
            .retain(|tx| tx.send(Arc::clone(&event)).is_ok());
        Ok(Accepted { event, outcome })
    }

    pub fn subscribe(&self, board: &BoardId, from_seq: u64) -> Result<Subscription, SubscribeError> {
        let slot = self
            .slot(board)
            .ok_or_else(|| SubscribeError::BoardNotFound(board.clone()))?;
        let mut inner = slot.lock();
        let current = inner.seq();
        if from_seq > current {
            return Err(SubscribeError::SeqOutOfRange {
                requested: from_seq,
                current,
            });
        }
        let (tx, rx) = unbounded_channel();
        for event in &inner.events[from_seq as usize..] {
            let _ = tx.send(Arc::clone(event));
        }
        inner.subscribers.push(tx);
        Ok(Subscription { from_seq, rx })
    }

    /// Immutable view of the current state.
    pub fn state(&self, board: &BoardId) -> Option<Arc<BoardState>> {
        self.slot(board).map(|slot| Arc::clone(&slot.lock().state))
    }

    pub fn seq(&self, board: &BoardId) -> Option<u64> {
        self.slot(board).map(|slot| slot.lock().seq())
    }

    pub fn client_env(&self, board: &BoardId) -> Option<String> {
        self.slot(board).map(|slot| slot.lock().client_env.clone())
    }

    /// Canonical serialization of the state after exactly `seq` events.
    pub fn snapshot(&self, board: &BoardId) -> Option<Snapshot> {
        let state = self.state(board)?;
        Some(Snapshot {
            seq: state.last_applied_seq,
            canonical: state.canonical(),
        })
    }

    /// Events with seq greater than `from_seq`.
    pub fn events(&self, board: &BoardId, from_seq: u64) -> Option<Vec<Arc<BoardEvent>>> {
        let slot = self.slot(board)?;
        let inner = slot.lock();
        let start = (from_seq as usize).min(inner.events.len());
        Some(inner.events[start..].to_vec())
    }

    /// Flushes interval-synced logs to stable storage.
    pub fn sync_all(&self) -> std::io::Result<()> {
        let slots: Vec<Arc<BoardSlot>> = self
            .boards
            .read()
            .unwrap_or_else(|p| p.into_inner())
            .values()
            .cloned()
            .collect();
        for slot in slots {
            if let Some(writer) = slot.lock().writer.as_mut() {
                writer.sync()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::ActorId;
    use crate::model::{WaypointDraft, WaypointKind};
    use crate::time::SyntheticClock;

    fn hub() -> (Hub, BoardId, Actor) {
        let hub = Hub::in_memory(Arc::new(SyntheticClock::standard()));
        let board = BoardId::new("acme").unwrap();
        hub.create_board(board.clone(), "acme-corp").unwrap();
        (hub, board, Actor::named(ActorId::new("jay").unwrap()))
    }

    fn lead(title: &str) -> Op {
        Op::CreateLead {
            title: title.into(),
            notes: String::new(),
        }
    }

    #[test]
    fn first_submit_is_seq_one() {
        let (hub, board, jay) = hub();
        let accepted = hub.submit(&board, &jay, lead("Technical Anomaly")).unwrap();
        assert_eq!(accepted.event.seq, 1);
        assert_eq!(hub.seq(&board), Some(1));
    }

    #[test]
    fn unknown_board() {
        let (hub, _, jay) = hub();
        let other = BoardId::new("nope").unwrap();
        assert!(matches!(
            hub.submit(&other, &jay, lead("x")),
            Err(SubmitError::BoardNotFound(_))
        ));
        assert!(matches!(
            hub.subscribe(&other, 0),
            Err(SubscribeError::BoardNotFound(_))
        ));
        assert!(hub.snapshot(&other).is_none());
    }

    #[test]
    fn rejection_leaves_no_trace() {
        let (hub, board, jay) = hub();
        let id = match hub.submit(&board, &jay, lead("Technical Anomaly")).unwrap().outcome {
            Outcome::Lead(l) => l.id,
            _ => unreachable!(),
        };
        hub.submit(&board, &jay, Op::CloseLead { id }).unwrap();
        let before = hub.snapshot(&board).unwrap();
        let err = hub.submit(&board, &jay, Op::CloseLead { id }).unwrap_err();
        assert!(matches!(err, SubmitError::Rejected(OpError::AlreadyClosed(_))));
        assert_eq!(hub.seq(&board), Some(2));
        assert_eq!(hub.snapshot(&board).unwrap(), before);
    }

    #[test]
    fn subscription_backlog_then_live() {
        let (hub, board, jay) = hub();
        for i in 0..5 {
            hub.submit(&board, &jay, lead(&format!("lead {i}"))).unwrap();
        }
        let mut from_zero = hub.subscribe(&board, 0).unwrap();
        let mut live_only = hub.subscribe(&board, 5).unwrap();
        assert_eq!(
            from_zero.drain().iter().map(|e| e.seq).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5]
        );
        assert!(live_only.drain().is_empty());
        hub.submit(
            &board,
            &jay,
            Op::CreateWaypoint {
                draft: WaypointDraft::new("Bruce", WaypointKind::User),
                view_state: None,
            },
        )
        .unwrap();
        assert_eq!(from_zero.drain()[0].seq, 6);
        assert_eq!(live_only.drain()[0].seq, 6);
    }

    #[test]
    fn subscribe_past_head_is_out_of_range() {
        let (hub, board, _) = hub();
        assert_eq!(
            hub.subscribe(&board, 1).unwrap_err(),
            SubscribeError::SeqOutOfRange {
                requested: 1,
                current: 0
            }
        );
    }

    #[test]
    fn fresh_board_snapshot_is_seq_zero() {
        let (hub, board, _) = hub();
        let snap = hub.snapshot(&board).unwrap();
        assert_eq!(snap.seq, 0);
        assert_eq!(snap.canonical, BoardState::new(board, "acme-corp").canonical());
    }

    #[test]
    fn server_time_never_decreases() {
        use chrono::{Duration, Utc};
        // A clock that runs backwards.
        struct Backwards(std::sync::atomic::AtomicI64);
        impl Clock for Backwards {
            fn now(&self) -> crate::time::Timestamp {
                let n = self.0.fetch_sub(1, std::sync::atomic::Ordering::SeqCst);
                chrono::DateTime::<Utc>::UNIX_EPOCH + Duration::seconds(n)
            }
        }
        let hub = Hub::in_memory(Arc::new(Backwards(1_000_000.into())));
        let board = BoardId::new("b").unwrap();
        hub.create_board(board.clone(), "b").unwrap();
        let jay = Actor::named(ActorId::new("jay").unwrap());
        for i in 0..4 {
            hub.submit(&board, &jay, lead(&format!("{i}"))).unwrap();
        }
        let events = hub.events(&board, 0).unwrap();
        assert!(events.windows(2).all(|w| w[0].server_time <= w[1].server_time));
    }
}
