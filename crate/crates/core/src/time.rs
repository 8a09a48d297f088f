use std::sync::atomic::{AtomicU64, Ordering};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Timestamp = DateTime<Utc>;

#[derive(Debug, Clone, Copy, Error, PartialEq, Eq)]
#[error("period start {start} is after end {end}")]
pub struct InvalidPeriod {
    pub start: Timestamp,
    pub end: Timestamp,
}

/// Closed UTC interval with `start <= end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Period {
    start: Timestamp,
    end: Timestamp,
}

impl Period {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self, InvalidPeriod> {
        if start <= end {
            Ok(Self { start, end })
        } else {
            Err(InvalidPeriod { start, end })
        }
    }

    pub fn instant(at: Timestamp) -> Self {
        Self { start: at, end: at }
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    pub fn overlaps(&self, other: &Period) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl<'de> Deserialize<'de> for Period {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            start: Timestamp,
            end: Timestamp,
        }
        let raw = Raw::deserialize(deserializer)?;
        Period::new(raw.start, raw.end).map_err(serde::de::Error::custom)
    }
}

/// 2025-01-06T09:00:00Z, the start of the synthetic timeline.
pub fn standard_start() -> Timestamp {
    DateTime::parse_from_rfc3339("2025-01-06T09:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc)
}

/// Source of server timestamps for board events.
pub trait Clock: Send + Sync {
    fn now(&self) -> Timestamp;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> Timestamp {
        Utc::now()
    }
}

/// Deterministic clock: each reading advances a fixed step from `start`.
///
/// Two servers driven by the same request sequence produce identical logs.
#[derive(Debug)]
pub struct SyntheticClock {
    start: Timestamp,
    step: Duration,
    ticks: AtomicU64,
}

impl SyntheticClock {
    pub fn new(start: Timestamp, step: Duration) -> Self {
        Self {
            start,
            step,
            ticks: AtomicU64::new(0),
        }
    }

    /// One-second steps from [`standard_start`].
    pub fn standard() -> Self {
        Self::new(standard_start(), Duration::seconds(1))
    }
}

impl Clock for SyntheticClock {
    fn now(&self) -> Timestamp {
        let tick = self.ticks.fetch_add(1, Ordering::SeqCst);
        self.start + self.step * tick as i32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(s: &str) -> Timestamp {
        DateTime::parse_from_rfc3339(s).unwrap().with_timezone(&Utc)
    }

    #[test]
    fn period_rejects_reversed_bounds() {
        let a = ts("2025-01-01T00:00:00Z");
        let b = ts("2025-01-02T00:00:00Z");
        assert!(Period::new(a, b).is_ok());
        assert!(Period::new(a, a).is_ok());
        assert_eq!(Period::new(b, a), Err(InvalidPeriod { start: b, end: a }));
    }

    #[test]
    fn period_deserialization_validates() {
        let bad = r#"{"start":"2025-01-02T00:00:00Z","end":"2025-01-01T00:00:00Z"}"#;
        assert!(serde_json::from_str::<Period>(bad).is_err());
        let good = r#"{"start":"2025-01-01T00:00:00Z","end":"2025-01-02T00:00:00Z"}"#;
        assert!(serde_json::from_str::<Period>(good).is_ok());
    }

    #[test]
    fn overlap_is_closed() {
        let p = Period::new(ts("2025-01-01T00:00:00Z"), ts("2025-01-02T00:00:00Z")).unwrap();
        let touching = Period::instant(ts("2025-01-02T00:00:00Z"));
        let after = Period::instant(ts("2025-01-03T00:00:00Z"));
        assert!(p.overlaps(&touching));
        assert!(!p.overlaps(&after));
    }

    #[test]
    fn synthetic_clock_steps() {
        let clock = SyntheticClock::standard();
        let a = clock.now();
        let b = clock.now();
        assert_eq!(b - a, Duration::seconds(1));
    }
}
