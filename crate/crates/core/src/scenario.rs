//! Synthetic anomaly feed for the Bruce Wright exercise.
//!
//! Values beyond the fixed thresholds (more than 3000 files, more than
//! 800 GiB uploaded) are drawn from the seed. Sessions are days apart.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::event::to_canonical_json;
use crate::time::{Period, Timestamp};
use crate::view::ViewState;

pub const SUBJECT_USER: &str = "Bruce Wright";
pub const SOURCE_TOOL: &str = "ueba";
pub const GIB: u64 = 1 << 30;
pub const FILE_ACCESS_THRESHOLD: u64 = 3000;
pub const UPLOAD_THRESHOLD_BYTES: u64 = 800 * GIB;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    FileAccess,
    UnusualExecutable,
    Compression,
    Exfiltration,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalySignal {
    pub signal_id: String,
    pub kind: SignalKind,
    /// Hunting session (1-based) in which the signal surfaces.
    pub session: u32,
    pub timestamp: Timestamp,
    pub user: String,
    pub headline: String,
    pub metrics: BTreeMap<String, u64>,
    pub suggested_view: ViewState,
}

fn base_time() -> Timestamp {
    DateTime::parse_from_rfc3339("2025-01-06T09:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc)
}

fn view_for(kind: &str, at: Timestamp, lookback: Duration, extra: &str) -> ViewState {
    let start = at - lookback;
    ViewState {
        source_tool_id: SOURCE_TOOL.to_string(),
        query_representation: format!(
            "ueba://search?user=bruce.wright&anomaly={kind}&from={}&to={}{extra}",
            start.format("%Y-%m-%dT%H:%M:%SZ"),
            at.format("%Y-%m-%dT%H:%M:%SZ"),
        ),
        time_window: Some(Period::new(start, at).expect("lookback is positive")),
        captured_at: at,
    }
}

/// The four scenario signals, deterministic in `seed`.
pub fn generate_scenario(seed: u64) -> Vec<AnomalySignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Session day offsets: day 0, "a few days later", then later sessions.
    let days = [0i64, 3, 4, 6];
    let at = |rng: &mut ChaCha8Rng, session: usize| {
        base_time() + Duration::days(days[session]) + Duration::minutes(rng.random_range(10..=300))
    };

    let t1 = at(&mut rng, 0);
    let file_count = rng.random_range(FILE_ACCESS_THRESHOLD + 1..=FILE_ACCESS_THRESHOLD + 999);
    let t2 = at(&mut rng, 1);
    let partitions = rng.random_range(2..=6u64);
    let t3 = at(&mut rng, 2);
    let files_compressed = rng.random_range(file_count / 2..=file_count);
    let t4 = at(&mut rng, 3);
    let bytes_uploaded = UPLOAD_THRESHOLD_BYTES + rng.random_range(GIB..=120 * GIB);

    vec![
        AnomalySignal {
            signal_id: format!("sig-{seed}-1"),
            kind: SignalKind::FileAccess,
            session: 1,
            timestamp: t1,
            user: SUBJECT_USER.into(),
            headline: format!("{SUBJECT_USER} accessed {file_count} files in a single session"),
            metrics: BTreeMap::from([("file_count".into(), file_count)]),
            suggested_view: view_for("file_access", t1, Duration::hours(8), ""),
        },
        AnomalySignal {
            signal_id: format!("sig-{seed}-2"),
            kind: SignalKind::UnusualExecutable,
            session: 2,
            timestamp: t2,
            user: SUBJECT_USER.into(),
            headline: format!(
                "{SUBJECT_USER} ran an unusual executable (partmgr.exe) that created {partitions} disk partitions"
            ),
            metrics: BTreeMap::from([("partitions_created".into(), partitions)]),
            suggested_view: view_for("unusual_process", t2, Duration::hours(2), "&process=partmgr.exe"),
        },
        AnomalySignal {
            signal_id: format!("sig-{seed}-3"),
            kind: SignalKind::Compression,
            session: 3,
            timestamp: t3,
            user: SUBJECT_USER.into(),
            headline: format!(
                "{SUBJECT_USER} used winzip.exe to compress {files_compressed} files from the new partitions"
            ),
            metrics: BTreeMap::from([("files_compressed".into(), files_compressed)]),
            suggested_view: view_for("compression", t3, Duration::hours(2), "&process=winzip.exe"),
        },
        AnomalySignal {
            signal_id: format!("sig-{seed}-4"),
            kind: SignalKind::Exfiltration,
            session: 4,
            timestamp: t4,
            user: SUBJECT_USER.into(),
            headline: format!(
                "{SUBJECT_USER} uploaded {} GiB to an external volume",
                bytes_uploaded / GIB
            ),
            metrics: BTreeMap::from([("bytes_uploaded".into(), bytes_uploaded)]),
            suggested_view: view_for("data_upload", t4, Duration::hours(4), "&destination=external"),
        },
    ]
}

/// Signal list as a fixture document.
pub fn signals_json(signals: &[AnomalySignal]) -> String {
    to_canonical_json(signals)
}
