//! Dump parsing, hashtag/date filtering and shared-domain tallies.
//!
//! Dumps are line-delimited JSON, one record per line, in the `gab` or
//! `telegram` schema. Scraped dumps are dirty by nature, so records that
//! fail validation are reported with their line number and skipped; strict
//! mode aborts on the first bad record instead.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;
use std::path::Path;
use std::sync::LazyLock;

use chrono::{DateTime, Utc};
use regex::Regex;
use serde_json::Value;
use thiserror::Error;
use url::Url;

use crate::corpus::{validate_post, CorpusError, Platform, Post, RawPost};
use crate::postag::Tag;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: schema violation in field `{field}`: {reason}")]
    SchemaViolation { line: usize, field: String, reason: String },
    #[error("line {line}: duplicate post id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("annotation file {path} must have a `domain,label` header")]
    BadAnnotationHeader { path: String },
    #[error("failed to parse annotation file {path}: {source}")]
    AnnotationCsv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

/// A record skipped during lenient parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRecord {
    pub line: usize,
    pub field: String,
    pub reason: String,
}

/// Result of parsing one dump: validated posts in input order plus the
/// rejected lines.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub posts: Vec<Post>,
    pub rejected: Vec<RejectedRecord>,
}

static HASHTAG: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\w+)").unwrap());

fn required_field<'v>(record: &'v Value, field: &str) -> Result<&'v Value, (String, String)> {
    record
        .get(field)
        .ok_or_else(|| (field.to_string(), "missing field".to_string()))
}

fn as_str(value: &Value, field: &str) -> Result<String, (String, String)> {
    value
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| (field.to_string(), "expected a string".to_string()))
}

/// Ids may arrive as JSON strings or numbers.
fn as_id(value: &Value, field: &str) -> Result<String, (String, String)> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err((field.to_string(), "expected a string or number".to_string())),
    }
}

fn optional_string_list(record: &Value, field: &str) -> Result<Vec<String>, (String, String)> {
    match record.get(field) {
        None | Some(Value::Null) => Ok(Vec::new()),
        Some(Value::Array(items)) => items
            .iter()
            .map(|item| {
                item.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| (field.to_string(), "expected an array of strings".to_string()))
            })
            .collect(),
        Some(_) => Err((field.to_string(), "expected an array of strings".to_string())),
    }
}

fn optional_str(record: &Value, field: &str) -> Result<Option<String>, (String, String)> {
    match record.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(_) => Err((field.to_string(), "expected a string".to_string())),
    }
}

/// Optional pre-tagged extension: parallel `tokens` and `tags` arrays.
fn pre_tagged(record: &Value) -> Result<Option<Vec<(String, Tag)>>, (String, String)> {
    let tokens = optional_string_list(record, "tokens")?;
    let tags = optional_string_list(record, "tags")?;
    if tags.is_empty() && tokens.is_empty() {
        return Ok(None);
    }
    if tokens.len() != tags.len() {
        return Err((
            "tags".to_string(),
            format!("{} tags for {} tokens", tags.len(), tokens.len()),
        ));
    }
    tokens
        .into_iter()
        .zip(tags)
        .map(|(token, tag)| {
            let tag: Tag = tag
                .parse()
                .map_err(|e: String| ("tags".to_string(), e))?;
            Ok((token, tag))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

fn gab_raw_post(record: &Value) -> Result<RawPost, (String, String)> {
    let id = as_id(required_field(record, "post_id")?, "post_id")?;
    let timestamp = as_str(required_field(record, "created_at")?, "created_at")?;
    let text = as_str(required_field(record, "body")?, "body")?;
    let hashtags = optional_string_list(record, "hashtags")?;
    let urls = optional_string_list(record, "links")?;
    // GAB posts are retrieved per hashtag; without an explicit channel the
    // first hashtag stands in for it.
    let channel = match optional_str(record, "channel")? {
        Some(c) => c,
        None => hashtags
            .first()
            .map(|h| h.trim_start_matches('#').to_lowercase())
            .unwrap_or_default(),
    };
    Ok(RawPost {
        id,
        platform: Platform::Gab,
        channel,
        timestamp,
        text,
        hashtags,
        urls,
        language: optional_str(record, "language")?,
        pre_tagged: pre_tagged(record)?,
    })
}

fn telegram_raw_post(record: &Value) -> Result<RawPost, (String, String)> {
    let id = as_id(required_field(record, "message_id")?, "message_id")?;
    let channel = as_str(required_field(record, "channel")?, "channel")?;
    if channel.is_empty() {
        return Err(("channel".to_string(), "must be nonempty".to_string()));
    }
    let timestamp = as_str(required_field(record, "date")?, "date")?;
    let text = as_str(required_field(record, "text")?, "text")?;
    let urls = optional_string_list(record, "entities")?;
    // Telegram records carry no hashtag field; harvest them from the text.
    let hashtags = HASHTAG
        .captures_iter(&text)
        .map(|c| c[1].to_string())
        .collect();
    Ok(RawPost {
        id,
        platform: Platform::Telegram,
        channel,
        timestamp,
        text,
        hashtags,
        urls,
        language: optional_str(record, "language")?,
        pre_tagged: pre_tagged(record)?,
    })
}

fn corpus_error_field(err: &CorpusError, schema: Platform) -> (String, String) {
    match err {
        CorpusError::MalformedTimestamp { value, .. } => (
            match schema {
                Platform::Gab => "created_at".to_string(),
                Platform::Telegram => "date".to_string(),
            },
            format!("not a UTC instant: {value:?}"),
        ),
        CorpusError::EmptyId => (
            match schema {
                Platform::Gab => "post_id".to_string(),
                Platform::Telegram => "message_id".to_string(),
            },
            "must be nonempty".to_string(),
        ),
        CorpusError::InvalidHashtag { value, .. } => {
            ("hashtags".to_string(), format!("invalid hashtag {value:?}"))
        }
        CorpusError::EmptyInput => ("record".to_string(), "empty input".to_string()),
    }
}

/// Parse one dump from any buffered reader. Input order is preserved and
/// the result does not depend on how the reader chunks the bytes.
pub fn parse_reader<R: BufRead>(
    reader: R,
    schema: Platform,
    strict: bool,
) -> Result<ParseOutcome, IngestError> {
    let mut outcome = ParseOutcome::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|source| IngestError::Io { path: format!("line {line_no}"), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let violation = |field: String, reason: String| IngestError::SchemaViolation {
            line: line_no,
            field,
            reason,
        };
        let record: Value = match serde_json::from_str(&line) {
            Ok(record) => record,
            Err(e) => {
                let err = violation("record".to_string(), format!("not valid JSON: {e}"));
                if strict {
                    return Err(err);
                }
                outcome.rejected.push(RejectedRecord {
                    line: line_no,
                    field: "record".to_string(),
                    reason: format!("not valid JSON: {e}"),
                });
                continue;
            }
        };
        let raw = match schema {
            Platform::Gab => gab_raw_post(&record),
            Platform::Telegram => telegram_raw_post(&record),
        };
        let post = raw
            .map_err(|(field, reason)| (field, reason))
            .and_then(|raw| {
                validate_post(raw).map_err(|e| corpus_error_field(&e, schema))
            });
        match post {
            Ok(post) => {
                if !seen_ids.insert(post.id.clone()) {
                    if strict {
                        return Err(IngestError::DuplicateId { line: line_no, id: post.id });
                    }
                    outcome.rejected.push(RejectedRecord {
                        line: line_no,
                        field: "post_id".to_string(),
                        reason: format!("duplicate id {:?}", post.id),
                    });
                    continue;
                }
                outcome.posts.push(post);
            }
            Err((field, reason)) => {
                if strict {
                    return Err(violation(field, reason));
                }
                outcome.rejected.push(RejectedRecord { line: line_no, field, reason });
            }
        }
    }
    Ok(outcome)
}

/// Parse a dump file in the declared schema.
pub fn parse_dump(path: &Path, schema: Platform, strict: bool) -> Result<ParseOutcome, IngestError> {
    let file = std::fs::File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            IngestError::FileNotFound { path: path.display().to_string() }
        } else {
            IngestError::Io { path: path.display().to_string(), source }
        }
    })?;
    parse_reader(std::io::BufReader::new(file), schema, strict)
}

/// Keep posts whose hashtag set intersects `hashtags` (case-insensitive;
/// an empty filter matches everything) and whose timestamp lies in
/// `[from, to)`. A post matching several filter hashtags appears once.
pub fn filter_posts(
    posts: &[Post],
    hashtags: &BTreeSet<String>,
    from: Option<DateTime<Utc>>,
    to: Option<DateTime<Utc>>,
) -> Vec<Post> {
    let needles: BTreeSet<String> = hashtags.iter().map(|h| h.to_lowercase()).collect();
    posts
        .iter()
        .filter(|post| {
            if let Some(from) = from {
                if post.timestamp < from {
                    return false;
                }
            }
            if let Some(to) = to {
                if post.timestamp >= to {
                    return false;
                }
            }
            needles.is_empty() || post.hashtags.iter().any(|h| needles.contains(h))
        })
        .cloned()
        .collect()
}

/// The registrable domain of one shared URL: host, lowercased, with a
/// leading `www.` stripped.
pub fn registrable_domain(raw_url: &str) -> Option<String> {
    let parsed = Url::parse(raw_url).ok()?;
    let host = parsed.host_str()?.to_lowercase();
    Some(host.strip_prefix("www.").unwrap_or(&host).to_string())
}

/// Domain occurrence counts over every URL in `posts`.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct DomainCounts {
    pub counts: BTreeMap<String, u64>,
    /// URL occurrences that produced a domain.
    pub parsed_urls: u64,
    /// URL occurrences skipped as unparseable.
    pub skipped_urls: u64,
}

pub fn count_domains(posts: &[Post]) -> DomainCounts {
    let mut out = DomainCounts::default();
    for post in posts {
        for url in &post.urls {
            match registrable_domain(url) {
                Some(domain) => {
                    *out.counts.entry(domain).or_insert(0) += 1;
                    out.parsed_urls += 1;
                }
                None => out.skipped_urls += 1,
            }
        }
    }
    out
}

/// One shared domain with its count and an optional user-supplied label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainTally {
    pub domain: String,
    pub count: u64,
    pub annotation: Option<String>,
}

/// Top shared domains, most frequent first (ties lexicographic), joined
/// against optional domain annotations.
pub fn tally_domains(
    posts: &[Post],
    top_n: usize,
    annotations: Option<&BTreeMap<String, String>>,
) -> Vec<DomainTally> {
    let counted = count_domains(posts);
    let mut tallies: Vec<(String, u64)> = counted.counts.into_iter().collect();
    tallies.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    tallies.truncate(top_n);
    tallies
        .into_iter()
        .map(|(domain, count)| {
            let annotation = annotations.and_then(|a| a.get(&domain).cloned());
            DomainTally { domain, count, annotation }
        })
        .collect()
}

/// Load a `domain,label` CSV of domain annotations (for example bias
/// classifications). Domain keys are normalized like tallied domains.
pub fn load_annotations(path: &Path) -> Result<BTreeMap<String, String>, IngestError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
            IngestError::FileNotFound { path: path.display().to_string() }
        }
        _ => IngestError::AnnotationCsv { path: path.display().to_string(), source: e },
    })?;
    let headers = reader
        .headers()
        .map_err(|source| IngestError::AnnotationCsv { path: path.display().to_string(), source })?;
    if headers.len() < 2 || &headers[0] != "domain" || &headers[1] != "label" {
        return Err(IngestError::BadAnnotationHeader { path: path.display().to_string() });
    }
    let mut annotations = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|source| IngestError::AnnotationCsv {
            path: path.display().to_string(),
            source,
        })?;
        let domain = record.get(0).unwrap_or_default().trim().to_lowercase();
        let domain = domain.strip_prefix("www.").unwrap_or(&domain).to_string();
        let label = record.get(1).unwrap_or_default().trim().to_string();
        if !domain.is_empty() {
            annotations.insert(domain, label);
        }
    }
    Ok(annotations)
}
