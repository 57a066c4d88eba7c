//! Frequency tables, the Log Ratio metric and cumulative-reference
//! temporal keyness.
//!
//! Log Ratio is the binary log of the ratio of relative frequencies of a
//! token in a target corpus versus a reference corpus. Here the target is
//! one time window and the reference is everything before it (or just the
//! previous window), so rankings surface what newly matters in each window.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KeynessError {
    #[error("log ratio undefined when both frequencies are zero")]
    BothZero,
    #[error("log ratio undefined for corpus of size {0}")]
    NonpositiveCorpusSize(u64),
    #[error("temporal keyness needs at least two nonempty windows, got {0}")]
    InsufficientWindows(usize),
}

/// Token counts for one corpus slice. Zero-count entries are never stored,
/// so `total` always equals the sum of the counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    pub label: String,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl FrequencyTable {
    pub fn empty(label: &str) -> Self {
        Self { label: label.to_string(), counts: BTreeMap::new(), total: 0 }
    }

    /// Count token occurrences across documents (token frequency).
    pub fn from_token_lists<'a, I, T>(docs: I, label: &str) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = &'a String>,
    {
        let mut table = Self::empty(label);
        for doc in docs {
            for token in doc {
                *table.counts.entry(token.clone()).or_insert(0) += 1;
                table.total += 1;
            }
        }
        table
    }

    /// Count at most one occurrence per document (document frequency),
    /// for sensitivity analysis.
    pub fn from_token_lists_unique<'a, I, T>(docs: I, label: &str) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = &'a String>,
    {
        let mut table = Self::empty(label);
        for doc in docs {
            let mut seen = std::collections::BTreeSet::new();
            for token in doc {
                if seen.insert(token) {
                    *table.counts.entry(token.clone()).or_insert(0) += 1;
                    table.total += 1;
                }
            }
        }
        table
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }
}

/// Pointwise sum of two tables.
pub fn merge_tables(a: &FrequencyTable, b: &FrequencyTable, label: &str) -> FrequencyTable {
    let mut counts = a.counts.clone();
    for (token, count) in &b.counts {
        *counts.entry(token.clone()).or_insert(0) += count;
    }
    FrequencyTable { label: label.to_string(), counts, total: a.total + b.total }
}

/// Default substitute for a zero raw frequency so the ratio stays defined
/// for terms absent from one side.
pub const DEFAULT_ZERO_ADJUST: f64 = 0.5;

/// Default minimum target frequency; suppresses hapax legomena that would
/// otherwise dominate ratio-based rankings in small windows.
pub const DEFAULT_MIN_TARGET_FREQ: u64 = 3;

pub const DEFAULT_TOP_N: usize = 10;

/// Log Ratio: `log2((f1/n1) / (f2/n2))` with `zero_adjust` substituted for
/// a zero `f1` or `f2`. The per-million scaling used for reporting cancels
/// in the ratio.
pub fn log_ratio(f1: u64, n1: u64, f2: u64, n2: u64, zero_adjust: f64) -> Result<f64, KeynessError> {
    if n1 == 0 {
        return Err(KeynessError::NonpositiveCorpusSize(n1));
    }
    if n2 == 0 {
        return Err(KeynessError::NonpositiveCorpusSize(n2));
    }
    if f1 == 0 && f2 == 0 {
        return Err(KeynessError::BothZero);
    }
    let f1 = if f1 == 0 { zero_adjust } else { f1 as f64 };
    let f2 = if f2 == 0 { zero_adjust } else { f2 as f64 };
    // (f1/n1)/(f2/n2) rearranged so integer-valued products divide exactly.
    Ok(((f1 * n2 as f64) / (f2 * n1 as f64)).log2())
}

/// Relative frequency per million tokens.
pub fn per_million(f: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    f as f64 / n as f64 * 1_000_000.0
}

/// One token's keyness in a target window versus its reference corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct KeynessScore {
    pub token: String,
    pub f_target: u64,
    pub f_ref: u64,
    pub rpm_target: f64,
    pub rpm_ref: f64,
    pub log_ratio: f64,
}

impl KeynessScore {
    pub fn compute(
        token: &str,
        f_target: u64,
        n_target: u64,
        f_ref: u64,
        n_ref: u64,
        zero_adjust: f64,
    ) -> Result<Self, KeynessError> {
        Ok(Self {
            token: token.to_string(),
            f_target,
            f_ref,
            rpm_target: per_million(f_target, n_target),
            rpm_ref: per_million(f_ref, n_ref),
            log_ratio: log_ratio(f_target, n_target, f_ref, n_ref, zero_adjust)?,
        })
    }
}

/// How the reference corpus for window `w` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Merge of all windows before `w` (the default).
    Cumulative,
    /// Window `w - 1` alone.
    PreviousWindow,
}

impl std::str::FromStr for ReferenceMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cumulative" => Ok(ReferenceMode::Cumulative),
            "previous_window" | "previous-window" => Ok(ReferenceMode::PreviousWindow),
            other => Err(format!("unknown reference mode: {other}")),
        }
    }
}

/// Ranked keyness scores per window, first window excluded (it has no
/// reference to compare against).
#[derive(Debug, Clone, PartialEq)]
pub struct KeynessTimeline {
    pub entries: Vec<(String, Vec<KeynessScore>)>,
}

/// Sort scores by log ratio descending, ties by target frequency
/// descending then token ascending, and keep the first `top_n`.
pub fn rank_keyness(mut scores: Vec<KeynessScore>, top_n: usize) -> Vec<KeynessScore> {
    scores.sort_by(|a, b| {
        b.log_ratio
            .total_cmp(&a.log_ratio)
            .then_with(|| b.f_target.cmp(&a.f_target))
            .then_with(|| a.token.cmp(&b.token))
    });
    scores.truncate(top_n);
    scores
}

/// Score every window of `tables` against its reference.
///
/// For window `w >= 1` the target is `tables[w]` and the reference is the
/// merge of `tables[0..w]` (cumulative) or `tables[w-1]` alone. Tokens with
/// target frequency below `min_target_freq` are skipped. Windows whose
/// target or reference is empty contribute an entry with no scores.
pub fn temporal_keyness(
    tables: &[FrequencyTable],
    mode: ReferenceMode,
    zero_adjust: f64,
    min_target_freq: u64,
    top_n: usize,
) -> Result<KeynessTimeline, KeynessError> {
    let nonempty = tables.iter().filter(|t| t.total > 0).count();
    if tables.len() < 2 || nonempty < 2 {
        return Err(KeynessError::InsufficientWindows(nonempty));
    }
    let min_target_freq = min_target_freq.max(1);

    // Prefix scan of cumulative references; cumulative[w] covers 0..=w.
    let mut cumulative: Vec<FrequencyTable> = Vec::with_capacity(tables.len());
    for table in tables {
        let merged = match cumulative.last() {
            Some(prev) => merge_tables(prev, table, "cumulative"),
            None => table.clone(),
        };
        cumulative.push(merged);
    }

    let mut entries = Vec::with_capacity(tables.len() - 1);
    for w in 1..tables.len() {
        let target = &tables[w];
        let reference = match mode {
            ReferenceMode::Cumulative => &cumulative[w - 1],
            ReferenceMode::PreviousWindow => &tables[w - 1],
        };
        let mut scores = Vec::new();
        if target.total > 0 && reference.total > 0 {
            for (token, &f_target) in &target.counts {
                if f_target < min_target_freq {
                    continue;
                }
                scores.push(KeynessScore::compute(
                    token,
                    f_target,
                    target.total,
                    reference.count(token),
                    reference.total,
                    zero_adjust,
                )?);
            }
        }
        entries.push((target.label.clone(), rank_keyness(scores, top_n)));
    }
    Ok(KeynessTimeline { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(label: &str, entries: &[(&str, u64)]) -> FrequencyTable {
        let counts: BTreeMap<String, u64> =
            entries.iter().map(|(t, c)| (t.to_string(), *c)).collect();
        let total = counts.values().sum();
        FrequencyTable { label: label.to_string(), counts, total }
    }

    #[test]
    fn frequency_table_counts_occurrences() {
        let doc = vec!["wagner".to_string(), "wagner".to_string(), "enters".to_string()];
        let t = FrequencyTable::from_token_lists([&doc], "w0");
        assert_eq!(t.count("wagner"), 2);
        assert_eq!(t.count("enters"), 1);
        assert_eq!(t.total, 3);
    }

    #[test]
    fn empty_docs_give_empty_table() {
        let t = FrequencyTable::from_token_lists(Vec::<&Vec<String>>::new(), "w0");
        assert!(t.counts.is_empty());
        assert_eq!(t.total, 0);
    }

    #[test]
    fn document_frequency_counts_each_doc_once() {
        let doc = vec!["wagner".to_string(), "wagner".to_string(), "enters".to_string()];
        let t = FrequencyTable::from_token_lists_unique([&doc, &doc], "w0");
        assert_eq!(t.count("wagner"), 2);
        assert_eq!(t.total, 4);
    }

    #[test]
    fn merge_is_pointwise_sum() {
        let a = table("a", &[("x", 1)]);
        let b = table("b", &[("x", 2), ("y", 1)]);
        let merged = merge_tables(&a, &b, "ab");
        assert_eq!(merged.count("x"), 3);
        assert_eq!(merged.count("y"), 1);
        assert_eq!(merged.total, 4);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let a = table("a", &[("x", 2), ("y", 5)]);
        let merged = merge_tables(&a, &FrequencyTable::empty("e"), "a");
        assert_eq!(merged.counts, a.counts);
        assert_eq!(merged.total, a.total);
    }

    #[test]
    fn equal_relative_frequencies_score_zero() {
        assert_eq!(log_ratio(5, 500, 10, 1000, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn doubled_relative_frequency_scores_one() {
        assert_eq!(log_ratio(4, 1000, 2, 1000, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn zero_reference_frequency_is_adjusted() {
        // log2((3/1000) / (0.5/2000)) = log2(12), checked against an
        // arbitrary-precision computation.
        let lr = log_ratio(3, 1000, 0, 2000, 0.5).unwrap();
        assert!((lr - 3.584962500721156).abs() < 1e-12);
    }

    #[test]
    fn both_zero_is_an_error() {
        assert_eq!(log_ratio(0, 100, 0, 100, 0.5).unwrap_err(), KeynessError::BothZero);
    }

    #[test]
    fn zero_corpus_size_is_an_error() {
        assert_eq!(
            log_ratio(1, 0, 1, 100, 0.5).unwrap_err(),
            KeynessError::NonpositiveCorpusSize(0)
        );
        assert_eq!(
            log_ratio(1, 100, 1, 0, 0.5).unwrap_err(),
            KeynessError::NonpositiveCorpusSize(0)
        );
    }

    #[test]
    fn per_million_scaling() {
        assert_eq!(per_million(5, 1000), 5000.0);
        assert_eq!(per_million(0, 1000), 0.0);
    }

    #[test]
    fn score_exposes_per_million_consistent_with_log_ratio() {
        let s = KeynessScore::compute("x", 8, 2000, 3, 1500, 0.5).unwrap();
        assert_eq!(s.rpm_target, 4000.0);
        assert_eq!(s.rpm_ref, 2000.0);
        let via_rpm = (s.rpm_target / s.rpm_ref).log2();
        assert!((s.log_ratio - via_rpm).abs() <= 1e-12 * via_rpm.abs());
    }

    #[test]
    fn ranking_sorts_and_truncates() {
        let scores = vec![
            KeynessScore { token: "a".into(), f_target: 1, f_ref: 1, rpm_target: 0.0, rpm_ref: 0.0, log_ratio: 2.0 },
            KeynessScore { token: "b".into(), f_target: 1, f_ref: 1, rpm_target: 0.0, rpm_ref: 0.0, log_ratio: 3.1 },
            KeynessScore { token: "c".into(), f_target: 1, f_ref: 1, rpm_target: 0.0, rpm_ref: 0.0, log_ratio: 0.5 },
        ];
        let ranked = rank_keyness(scores, 2);
        let tokens: Vec<&str> = ranked.iter().map(|s| s.token.as_str()).collect();
        assert_eq!(tokens, ["b", "a"]);
    }

    #[test]
    fn ranking_breaks_ties_by_target_frequency_then_token() {
        let mk = |token: &str, f_target: u64| KeynessScore {
            token: token.into(),
            f_target,
            f_ref: 0,
            rpm_target: 0.0,
            rpm_ref: 0.0,
            log_ratio: 1.5,
        };
        let ranked = rank_keyness(vec![mk("zeta", 3), mk("alpha", 7), mk("beta", 3)], 10);
        let tokens: Vec<&str> = ranked.iter().map(|s| s.token.as_str()).collect();
        assert_eq!(tokens, ["alpha", "beta", "zeta"]);
    }

    #[test]
    fn ranking_with_large_top_n_keeps_everything() {
        let scores = vec![KeynessScore {
            token: "a".into(), f_target: 1, f_ref: 1, rpm_target: 0.0, rpm_ref: 0.0, log_ratio: 1.0,
        }];
        assert_eq!(rank_keyness(scores, 100).len(), 1);
    }

    #[test]
    fn timeline_skips_window_zero() {
        let tables = vec![
            table("2023-06-22", &[("wagner", 3), ("kyiv", 2)]),
            table("2023-06-23", &[("wagner", 3), ("rostov", 4)]),
            table("2023-06-24", &[("moscow", 5)]),
        ];
        let timeline =
            temporal_keyness(&tables, ReferenceMode::Cumulative, 0.5, 1, 10).unwrap();
        let labels: Vec<&str> = timeline.entries.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["2023-06-23", "2023-06-24"]);
    }

    #[test]
    fn identical_windows_score_zero_everywhere() {
        let tables = vec![
            table("w0", &[("wagner", 2), ("rostov", 3)]),
            table("w1", &[("wagner", 2), ("rostov", 3)]),
        ];
        for mode in [ReferenceMode::Cumulative, ReferenceMode::PreviousWindow] {
            let timeline = temporal_keyness(&tables, mode, 0.5, 1, 10).unwrap();
            for score in &timeline.entries[0].1 {
                assert_eq!(score.log_ratio, 0.0, "{}", score.token);
            }
        }
    }

    #[test]
    fn cumulative_reference_merges_all_prior_windows() {
        let tables = vec![
            table("w0", &[("x", 1)]),
            table("w1", &[("x", 1), ("y", 2)]),
            table("w2", &[("y", 3)]),
        ];
        let timeline =
            temporal_keyness(&tables, ReferenceMode::Cumulative, 0.5, 1, 10).unwrap();
        let w2 = &timeline.entries[1].1;
        // Reference for w2 is {x:2, y:2}, N=4.
        assert_eq!(w2.len(), 1);
        assert_eq!(w2[0].token, "y");
        assert_eq!(w2[0].f_ref, 2);
        let expected = ((3.0_f64 / 3.0) / (2.0 / 4.0)).log2();
        assert_eq!(w2[0].log_ratio, expected);
    }

    #[test]
    fn previous_window_reference_uses_only_the_last_window() {
        let tables = vec![
            table("w0", &[("x", 4)]),
            table("w1", &[("y", 1)]),
            table("w2", &[("x", 2), ("y", 2)]),
        ];
        let timeline =
            temporal_keyness(&tables, ReferenceMode::PreviousWindow, 0.5, 1, 10).unwrap();
        let w2 = &timeline.entries[1].1;
        let x = w2.iter().find(|s| s.token == "x").unwrap();
        assert_eq!(x.f_ref, 0); // w1 has no x
    }

    #[test]
    fn min_target_freq_filters_rare_tokens() {
        let tables = vec![
            table("w0", &[("x", 5)]),
            table("w1", &[("x", 1), ("y", 3)]),
        ];
        let timeline =
            temporal_keyness(&tables, ReferenceMode::Cumulative, 0.5, 3, 10).unwrap();
        let tokens: Vec<&str> = timeline.entries[0].1.iter().map(|s| s.token.as_str()).collect();
        assert_eq!(tokens, ["y"]);
    }

    #[test]
    fn fewer_than_two_nonempty_windows_is_an_error() {
        let tables = vec![table("w0", &[("x", 1)]), FrequencyTable::empty("w1")];
        assert_eq!(
            temporal_keyness(&tables, ReferenceMode::Cumulative, 0.5, 1, 10).unwrap_err(),
            KeynessError::InsufficientWindows(1)
        );
        assert!(matches!(
            temporal_keyness(&[table("w0", &[("x", 1)])], ReferenceMode::Cumulative, 0.5, 1, 10),
            Err(KeynessError::InsufficientWindows(_))
        ));
    }

    #[test]
    fn empty_interior_window_yields_entry_with_no_scores() {
        let tables = vec![
            table("w0", &[("x", 2)]),
            FrequencyTable::empty("w1"),
            table("w2", &[("x", 1), ("y", 4)]),
        ];
        let timeline =
            temporal_keyness(&tables, ReferenceMode::Cumulative, 0.5, 1, 10).unwrap();
        assert_eq!(timeline.entries[0].0, "w1");
        assert!(timeline.entries[0].1.is_empty());
        assert_eq!(timeline.entries[1].1.len(), 2);
    }
}
