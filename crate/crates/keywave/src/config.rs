//! Run configuration: a TOML file mirroring [`RunConfig`], with CLI flags
//! overriding individual fields.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::Deserialize;
use thiserror::Error;

use crate::corpus::{parse_utc, Granularity, Platform};
use crate::keyness::{
    ReferenceMode, DEFAULT_MIN_TARGET_FREQ, DEFAULT_TOP_N, DEFAULT_ZERO_ADJUST,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("config field `{field}`: {reason}")]
    BadValue { field: String, reason: String },
    #[error("no inputs configured")]
    NoInputs,
    #[error("referenced path does not exist: {path}")]
    PathMissing { path: String },
}

fn bad(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { field: field.to_string(), reason: reason.into() }
}

/// Timeline grouping dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Hashtag,
    Channel,
    Country,
}

impl std::str::FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hashtag" => Ok(GroupBy::Hashtag),
            "channel" => Ok(GroupBy::Channel),
            "country" => Ok(GroupBy::Country),
            other => Err(format!("unknown group-by: {other}")),
        }
    }
}

/// One dump to ingest.
#[derive(Debug, Clone)]
pub struct InputSpec {
    pub path: PathBuf,
    pub schema: Platform,
    /// Corpus name; inputs sharing a name pool into one keyness corpus.
    pub corpus: String,
    /// Per-corpus language whitelist; falls back to the global one.
    pub languages: Option<BTreeSet<String>>,
    /// Per-corpus hashtag filter; falls back to the global one. An empty
    /// list disables hashtag filtering for this corpus (channel-collected
    /// dumps are already scoped).
    pub hashtags: Option<BTreeSet<String>>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<InputSpec>,
    pub hashtags: BTreeSet<String>,
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
    pub granularity: Granularity,
    /// Global language whitelist; empty keeps every language.
    pub languages: BTreeSet<String>,
    pub reference_mode: ReferenceMode,
    pub zero_adjust: f64,
    pub min_target_freq: u64,
    pub top_n: usize,
    /// Count document frequency instead of token frequency.
    pub doc_freq: bool,
    /// Minimum non-space characters before language detection is attempted.
    pub min_detect_chars: usize,
    pub strict: bool,
    pub group_by: GroupBy,
    /// Channel handle to country, for `group_by = "country"`.
    pub countries: BTreeMap<String, String>,
    /// Per-language stopword list overrides.
    pub stopwords: BTreeMap<String, PathBuf>,
    /// Extra English lexicon entries (`token<TAB>tag` lines).
    pub lexicon: Option<PathBuf>,
    /// Directory of `<lang>.profile` files replacing the bundled profiles.
    pub profile_dir: Option<PathBuf>,
    /// Domain annotation CSV (`domain,label`).
    pub annotations: Option<PathBuf>,
    pub domains_top_n: usize,
    pub out_dir: PathBuf,
    /// Worker threads for per-post stages; 0 picks the default.
    pub threads: usize,
}

pub const DEFAULT_MIN_DETECT_CHARS: usize = 10;
pub const DEFAULT_DOMAINS_TOP_N: usize = 50;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    path: String,
    schema: String,
    corpus: Option<String>,
    languages: Option<Vec<String>>,
    hashtags: Option<Vec<String>>,
}

/// The config file as written; every field optional so CLI flags can fill
/// the gaps. Unknown keys are rejected to catch typos early.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    inputs: Option<Vec<RawInput>>,
    hashtags: Option<Vec<String>>,
    from: Option<String>,
    to: Option<String>,
    granularity: Option<String>,
    languages: Option<Vec<String>>,
    reference_mode: Option<String>,
    zero_adjust: Option<f64>,
    min_target_freq: Option<u64>,
    top_n: Option<usize>,
    doc_freq: Option<bool>,
    min_detect_chars: Option<usize>,
    strict: Option<bool>,
    group_by: Option<String>,
    countries: Option<BTreeMap<String, String>>,
    stopwords: Option<BTreeMap<String, String>>,
    lexicon: Option<String>,
    profile_dir: Option<String>,
    annotations: Option<String>,
    domains_top_n: Option<usize>,
    out_dir: Option<String>,
    threads: Option<usize>,
}

/// CLI flag values that override config file fields (flags win).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub inputs: Vec<(String, Platform)>,
    pub corpus: Option<String>,
    pub hashtags: Option<Vec<String>>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub granularity: Option<String>,
    pub languages: Option<Vec<String>>,
    pub reference_mode: Option<String>,
    pub zero_adjust: Option<f64>,
    pub min_target_freq: Option<u64>,
    pub top_n: Option<usize>,
    pub doc_freq: bool,
    pub strict: bool,
    pub group_by: Option<String>,
    pub annotations: Option<String>,
    pub domains_top_n: Option<usize>,
    pub out_dir: Option<String>,
    pub threads: Option<usize>,
}

impl RawConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let content = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&content).map_err(|source| ConfigError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if !overrides.inputs.is_empty() {
            self.inputs = Some(
                overrides
                    .inputs
                    .iter()
                    .map(|(path, schema)| RawInput {
                        path: path.clone(),
                        schema: schema.to_string(),
                        corpus: overrides.corpus.clone(),
                        languages: None,
                        hashtags: None,
                    })
                    .collect(),
            );
        }
        if let Some(v) = &overrides.hashtags {
            self.hashtags = Some(v.clone());
        }
        if let Some(v) = &overrides.from {
            self.from = Some(v.clone());
        }
        if let Some(v) = &overrides.to {
            self.to = Some(v.clone());
        }
        if let Some(v) = &overrides.granularity {
            self.granularity = Some(v.clone());
        }
        if let Some(v) = &overrides.languages {
            self.languages = Some(v.clone());
        }
        if let Some(v) = &overrides.reference_mode {
            self.reference_mode = Some(v.clone());
        }
        if let Some(v) = overrides.zero_adjust {
            self.zero_adjust = Some(v);
        }
        if let Some(v) = overrides.min_target_freq {
            self.min_target_freq = Some(v);
        }
        if let Some(v) = overrides.top_n {
            self.top_n = Some(v);
        }
        if overrides.doc_freq {
            self.doc_freq = Some(true);
        }
        if overrides.strict {
            self.strict = Some(true);
        }
        if let Some(v) = &overrides.group_by {
            self.group_by = Some(v.clone());
        }
        if let Some(v) = &overrides.annotations {
            self.annotations = Some(v.clone());
        }
        if let Some(v) = overrides.domains_top_n {
            self.domains_top_n = Some(v);
        }
        if let Some(v) = &overrides.out_dir {
            self.out_dir = Some(v.clone());
        }
        if let Some(v) = overrides.threads {
            self.threads = Some(v);
        }
    }

    /// Fill defaults, parse and validate into a [`RunConfig`].
    pub fn finalize(self) -> Result<RunConfig, ConfigError> {
        let raw_inputs = self.inputs.unwrap_or_default();
        if raw_inputs.is_empty() {
            return Err(ConfigError::NoInputs);
        }
        let mut inputs = Vec::with_capacity(raw_inputs.len());
        for raw in raw_inputs {
            let schema: Platform = raw
                .schema
                .parse()
                .map_err(|e: String| bad("inputs.schema", e))?;
            let corpus = raw.corpus.unwrap_or_else(|| schema.to_string());
            if corpus.is_empty()
                || !corpus
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return Err(bad(
                    "inputs.corpus",
                    format!("{corpus:?} must be nonempty and [A-Za-z0-9_-]"),
                ));
            }
            let path = PathBuf::from(&raw.path);
            if !path.exists() {
                return Err(ConfigError::PathMissing { path: raw.path });
            }
            inputs.push(InputSpec {
                path,
                schema,
                corpus,
                languages: raw.languages.map(|l| l.into_iter().collect()),
                hashtags: raw.hashtags.map(normalize_hashtags),
            });
        }

        let parse_instant = |field: &str, value: Option<String>| -> Result<Option<DateTime<Utc>>, ConfigError> {
            match value {
                None => Ok(None),
                Some(v) => parse_instant_or_date(&v)
                    .map(Some)
                    .ok_or_else(|| bad(field, format!("not a UTC instant or date: {v:?}"))),
            }
        };
        let from = parse_instant("from", self.from)?;
        let to = parse_instant("to", self.to)?;
        if let (Some(from), Some(to)) = (from, to) {
            if from > to {
                return Err(bad("from", "date range is not well-ordered (from > to)"));
            }
        }

        let granularity: Granularity = self
            .granularity
            .as_deref()
            .unwrap_or("day")
            .parse()
            .map_err(|e: String| bad("granularity", e))?;
        let reference_mode: ReferenceMode = self
            .reference_mode
            .as_deref()
            .unwrap_or("cumulative")
            .parse()
            .map_err(|e: String| bad("reference_mode", e))?;
        let group_by: GroupBy = self
            .group_by
            .as_deref()
            .unwrap_or("hashtag")
            .parse()
            .map_err(|e: String| bad("group_by", e))?;

        let zero_adjust = self.zero_adjust.unwrap_or(DEFAULT_ZERO_ADJUST);
        if !(zero_adjust > 0.0) {
            return Err(bad("zero_adjust", "must be positive"));
        }
        let top_n = self.top_n.unwrap_or(DEFAULT_TOP_N);
        if top_n < 1 {
            return Err(bad("top_n", "must be at least 1"));
        }
        let domains_top_n = self.domains_top_n.unwrap_or(DEFAULT_DOMAINS_TOP_N);
        if domains_top_n < 1 {
            return Err(bad("domains_top_n", "must be at least 1"));
        }

        let existing = |field: &str, value: Option<String>| -> Result<Option<PathBuf>, ConfigError> {
            match value {
                None => Ok(None),
                Some(v) => {
                    let path = PathBuf::from(&v);
                    if !path.exists() {
                        return Err(ConfigError::PathMissing { path: v });
                    }
                    let _ = field;
                    Ok(Some(path))
                }
            }
        };
        let mut stopwords = BTreeMap::new();
        for (language, path) in self.stopwords.unwrap_or_default() {
            let path = PathBuf::from(&path);
            if !path.exists() {
                return Err(ConfigError::PathMissing { path: path.display().to_string() });
            }
            stopwords.insert(language, path);
        }

        Ok(RunConfig {
            inputs,
            hashtags: normalize_hashtags(self.hashtags.unwrap_or_default()),
            from,
            to,
            granularity,
            languages: self.languages.unwrap_or_default().into_iter().collect(),
            reference_mode,
            zero_adjust,
            min_target_freq: self.min_target_freq.unwrap_or(DEFAULT_MIN_TARGET_FREQ),
            top_n,
            doc_freq: self.doc_freq.unwrap_or(false),
            min_detect_chars: self.min_detect_chars.unwrap_or(DEFAULT_MIN_DETECT_CHARS),
            strict: self.strict.unwrap_or(false),
            group_by,
            countries: self.countries.unwrap_or_default(),
            stopwords,
            lexicon: existing("lexicon", self.lexicon)?,
            profile_dir: existing("profile_dir", self.profile_dir)?,
            annotations: existing("annotations", self.annotations)?,
            domains_top_n,
            out_dir: PathBuf::from(self.out_dir.unwrap_or_else(|| "out".to_string())),
            threads: self.threads.unwrap_or(0),
        })
    }
}

fn normalize_hashtags(hashtags: Vec<String>) -> BTreeSet<String> {
    hashtags
        .into_iter()
        .map(|h| h.trim_start_matches('#').to_lowercase())
        .filter(|h| !h.is_empty())
        .collect()
}

/// Parse an RFC 3339 instant or a plain `YYYY-MM-DD` date (taken as UTC
/// midnight).
pub fn parse_instant_or_date(value: &str) -> Option<DateTime<Utc>> {
    if let Some(instant) = parse_utc(value) {
        return Some(instant);
    }
    let date = chrono::NaiveDate::parse_from_str(value, "%Y-%m-%d").ok()?;
    Some(chrono::TimeZone::from_utc_datetime(
        &Utc,
        &date.and_hms_opt(0, 0, 0).unwrap(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn dump_file(dir: &tempfile::TempDir) -> PathBuf {
        let path = dir.path().join("gab.jsonl");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, r#"{{"post_id":"1","created_at":"2023-06-24T00:00:00Z","body":"x"}}"#).unwrap();
        path
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let dump = dump_file(&dir);
        let toml = format!("[[inputs]]\npath = {:?}\nschema = \"gab\"\n", dump.display().to_string());
        let raw: RawConfig = toml::from_str(&toml).unwrap();
        let config = raw.finalize().unwrap();
        assert_eq!(config.inputs[0].corpus, "gab");
        assert_eq!(config.zero_adjust, 0.5);
        assert_eq!(config.min_target_freq, 3);
        assert_eq!(config.top_n, 10);
        assert_eq!(config.granularity, Granularity::Day);
        assert_eq!(config.reference_mode, ReferenceMode::Cumulative);
    }

    #[test]
    fn missing_input_path_is_rejected() {
        let raw: RawConfig =
            toml::from_str("[[inputs]]\npath = \"/nope.jsonl\"\nschema = \"gab\"\n").unwrap();
        assert!(matches!(raw.finalize().unwrap_err(), ConfigError::PathMissing { .. }));
    }

    #[test]
    fn unordered_date_range_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dump = dump_file(&dir);
        let toml = format!(
            "from = \"2023-06-26\"\nto = \"2023-06-22\"\n[[inputs]]\npath = {:?}\nschema = \"gab\"\n",
            dump.display().to_string()
        );
        let raw: RawConfig = toml::from_str(&toml).unwrap();
        assert!(matches!(raw.finalize().unwrap_err(), ConfigError::BadValue { .. }));
    }

    #[test]
    fn hashtags_are_normalized() {
        let dir = tempfile::tempdir().unwrap();
        let dump = dump_file(&dir);
        let toml = format!(
            "hashtags = [\"#Wagner\", \"RUSSIA\"]\n[[inputs]]\npath = {:?}\nschema = \"gab\"\n",
            dump.display().to_string()
        );
        let config: RunConfig = toml::from_str::<RawConfig>(&toml).unwrap().finalize().unwrap();
        assert!(config.hashtags.contains("wagner"));
        assert!(config.hashtags.contains("russia"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RawConfig>("no_such_key = 1\n").is_err());
    }

    #[test]
    fn flags_win_over_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let dump = dump_file(&dir);
        let toml = format!(
            "top_n = 5\n[[inputs]]\npath = {:?}\nschema = \"gab\"\n",
            dump.display().to_string()
        );
        let mut raw: RawConfig = toml::from_str(&toml).unwrap();
        let overrides = Overrides { top_n: Some(25), ..Overrides::default() };
        raw.apply(&overrides);
        assert_eq!(raw.finalize().unwrap().top_n, 25);
    }

    #[test]
    fn date_only_values_parse_to_utc_midnight() {
        let parsed = parse_instant_or_date("2023-06-22").unwrap();
        assert_eq!(parsed.to_rfc3339(), "2023-06-22T00:00:00+00:00");
    }
}
