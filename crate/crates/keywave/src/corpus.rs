//! Canonical post and time-window types shared by every stage.
//!
//! Everything here is immutable after construction and safe to share across
//! threads; window assignment is a pure function of the input posts.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, Duration, NaiveDateTime, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::postag::{Tag, TaggedToken};

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("post {id}: malformed timestamp {value:?}")]
    MalformedTimestamp { id: String, value: String },
    #[error("post has an empty id")]
    EmptyId,
    #[error("post {id}: invalid hashtag {value:?}")]
    InvalidHashtag { id: String, value: String },
    #[error("no posts to assign to windows")]
    EmptyInput,
}

/// Source platform of a post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    Gab,
    Telegram,
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Platform::Gab => write!(f, "gab"),
            Platform::Telegram => write!(f, "telegram"),
        }
    }
}

impl std::str::FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gab" => Ok(Platform::Gab),
            "telegram" => Ok(Platform::Telegram),
            other => Err(format!("unknown platform: {other}")),
        }
    }
}

/// One normalized social media message.
///
/// `channel` is the hashtag a GAB post was retrieved under and the channel
/// handle for Telegram. `hashtags` are lowercase and carry no `#`.
#[derive(Debug, Clone, PartialEq)]
pub struct Post {
    pub id: String,
    pub platform: Platform,
    pub channel: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub hashtags: BTreeSet<String>,
    pub urls: Vec<String>,
    pub language: Option<String>,
    /// Tokens with pre-supplied coarse tags, when the dump carried them.
    /// Posts with this set bypass the bundled cleaner and tagger.
    pub pre_tagged: Option<Vec<TaggedToken>>,
}

/// Unvalidated post as it comes out of a dump parser.
#[derive(Debug, Clone)]
pub struct RawPost {
    pub id: String,
    pub platform: Platform,
    pub channel: String,
    pub timestamp: String,
    pub text: String,
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub language: Option<String>,
    pub pre_tagged: Option<Vec<(String, Tag)>>,
}

/// Parse a dump timestamp as a UTC instant.
///
/// Accepts RFC 3339 (`2023-06-24T15:00:00Z`, with offset) and the naive
/// `YYYY-MM-DDTHH:MM:SS` form that Telegram desktop exports use, which is
/// taken as UTC.
pub fn parse_utc(value: &str) -> Option<DateTime<Utc>> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(value) {
        return Some(dt.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(value, fmt) {
            return Some(Utc.from_utc_datetime(&naive));
        }
    }
    None
}

/// Check the `Post` invariants and normalize hashtags (lowercase, no `#`).
pub fn validate_post(raw: RawPost) -> Result<Post, CorpusError> {
    if raw.id.is_empty() {
        return Err(CorpusError::EmptyId);
    }
    let timestamp = parse_utc(&raw.timestamp).ok_or_else(|| CorpusError::MalformedTimestamp {
        id: raw.id.clone(),
        value: raw.timestamp.clone(),
    })?;
    let mut hashtags = BTreeSet::new();
    for tag in &raw.hashtags {
        let normalized = tag.trim().trim_start_matches('#').to_lowercase();
        if normalized.is_empty()
            || normalized.contains('#')
            || normalized.chars().any(char::is_whitespace)
        {
            return Err(CorpusError::InvalidHashtag {
                id: raw.id,
                value: tag.clone(),
            });
        }
        hashtags.insert(normalized);
    }
    Ok(Post {
        id: raw.id,
        platform: raw.platform,
        channel: raw.channel,
        timestamp,
        text: raw.text,
        hashtags,
        urls: raw.urls,
        language: raw.language,
        pre_tagged: raw.pre_tagged.map(|pairs| {
            pairs
                .into_iter()
                .map(|(token, tag)| TaggedToken { token, tag })
                .collect()
        }),
    })
}

/// Window width for [`assign_windows`]. Boundaries are UTC calendar boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Hour,
}

impl std::str::FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Granularity::Day),
            "hour" => Ok(Granularity::Hour),
            other => Err(format!("unknown granularity: {other}")),
        }
    }
}

impl Granularity {
    fn step(self) -> Duration {
        match self {
            Granularity::Day => Duration::days(1),
            Granularity::Hour => Duration::hours(1),
        }
    }

    /// Largest window boundary at or before `t`.
    fn floor(self, t: DateTime<Utc>) -> DateTime<Utc> {
        let day = Utc.from_utc_datetime(&t.date_naive().and_hms_opt(0, 0, 0).unwrap());
        match self {
            Granularity::Day => day,
            Granularity::Hour => day + Duration::hours(i64::from(t.hour())),
        }
    }

    fn label(self, start: DateTime<Utc>) -> String {
        match self {
            Granularity::Day => start.format("%Y-%m-%d").to_string(),
            Granularity::Hour => start.format("%Y-%m-%dT%H:00Z").to_string(),
        }
    }
}

/// A half-open time interval `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeWindow {
    pub index: usize,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub label: String,
}

impl TimeWindow {
    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

/// Posts partitioned into contiguous, non-overlapping, sorted time windows.
///
/// Empty interior windows are materialized so window indices stay
/// calendar-contiguous and timeline reports have no gaps.
#[derive(Debug, Clone)]
pub struct WindowedCorpus {
    pub windows: Vec<TimeWindow>,
    pub posts_by_window: Vec<Vec<Post>>,
}

impl WindowedCorpus {
    pub fn total_posts(&self) -> usize {
        self.posts_by_window.iter().map(Vec::len).sum()
    }

    /// Index of the window containing `t`, if any.
    pub fn window_index(&self, t: DateTime<Utc>) -> Option<usize> {
        let index = self.windows.partition_point(|w| w.start <= t).checked_sub(1)?;
        self.windows[index].contains(t).then_some(index)
    }
}

/// Partition posts into windows at UTC calendar boundaries.
///
/// Windows cover `[min timestamp, max timestamp]`; a post stamped exactly on
/// a boundary belongs to the window that starts there (end-exclusive rule).
/// Post order within a window follows input order.
pub fn assign_windows(
    posts: &[Post],
    granularity: Granularity,
) -> Result<WindowedCorpus, CorpusError> {
    if posts.is_empty() {
        return Err(CorpusError::EmptyInput);
    }
    let min = posts.iter().map(|p| p.timestamp).min().unwrap();
    let max = posts.iter().map(|p| p.timestamp).max().unwrap();
    let step = granularity.step();
    let first = granularity.floor(min);
    let last = granularity.floor(max);

    let mut windows = Vec::new();
    let mut start = first;
    while start <= last {
        windows.push(TimeWindow {
            index: windows.len(),
            start,
            end: start + step,
            label: granularity.label(start),
        });
        start += step;
    }

    let mut posts_by_window = vec![Vec::new(); windows.len()];
    for post in posts {
        let offset = granularity.floor(post.timestamp) - first;
        let index = (offset.num_seconds() / step.num_seconds()) as usize;
        debug_assert!(windows[index].contains(post.timestamp));
        posts_by_window[index].push(post.clone());
    }
    Ok(WindowedCorpus {
        windows,
        posts_by_window,
    })
}
