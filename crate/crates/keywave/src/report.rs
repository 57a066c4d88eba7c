//! Report rendering: post-volume timelines, keyness tables and domain
//! tallies, as CSV plus plain-text tables.
//!
//! Everything here renders to strings; the pipeline owns file IO. Output
//! is deterministic: identical inputs give byte-identical reports.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::GroupBy;
use crate::corpus::WindowedCorpus;
use crate::ingest::DomainTally;
use crate::keyness::{KeynessScore, KeynessTimeline};

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    write(&mut writer).expect("csv rendering cannot fail on in-memory writer");
    String::from_utf8(writer.into_inner().expect("csv writer flushes")).expect("csv is utf-8")
}

/// Post counts per (window, group), zero rows included, sorted by window
/// then group.
///
/// Group semantics: `hashtag` counts a post once per matching hashtag (the
/// filter set when nonempty, otherwise every observed hashtag); `channel`
/// and `country` count each post once. Channels missing from the country
/// map land in `"unknown"`.
pub fn timeline_csv(
    corpus: &WindowedCorpus,
    group_by: GroupBy,
    hashtag_filter: &BTreeSet<String>,
    countries: &BTreeMap<String, String>,
) -> String {
    let mut groups: BTreeSet<String> = BTreeSet::new();
    let mut counts: BTreeMap<(usize, String), u64> = BTreeMap::new();
    if group_by == GroupBy::Hashtag && !hashtag_filter.is_empty() {
        groups.extend(hashtag_filter.iter().cloned());
    }
    for (index, posts) in corpus.posts_by_window.iter().enumerate() {
        for post in posts {
            match group_by {
                GroupBy::Hashtag => {
                    for hashtag in &post.hashtags {
                        if !hashtag_filter.is_empty() && !hashtag_filter.contains(hashtag) {
                            continue;
                        }
                        groups.insert(hashtag.clone());
                        *counts.entry((index, hashtag.clone())).or_insert(0) += 1;
                    }
                }
                GroupBy::Channel => {
                    groups.insert(post.channel.clone());
                    *counts.entry((index, post.channel.clone())).or_insert(0) += 1;
                }
                GroupBy::Country => {
                    let country = countries
                        .get(&post.channel)
                        .cloned()
                        .unwrap_or_else(|| "unknown".to_string());
                    groups.insert(country.clone());
                    *counts.entry((index, country)).or_insert(0) += 1;
                }
            }
        }
    }
    csv_string(|w| {
        w.write_record(["window_label", "group", "post_count"])?;
        for window in &corpus.windows {
            for group in &groups {
                let count = counts.get(&(window.index, group.clone())).copied().unwrap_or(0);
                w.write_record([&window.label, group, &count.to_string()])?;
            }
        }
        Ok(())
    })
}

/// Full-precision keyness scores, one row per (window, rank).
pub fn keyness_csv(timeline: &KeynessTimeline) -> String {
    csv_string(|w| {
        w.write_record([
            "window_label",
            "rank",
            "token",
            "log_ratio",
            "f_target",
            "f_ref",
            "rpm_target",
            "rpm_ref",
        ])?;
        for (label, scores) in &timeline.entries {
            for (i, score) in scores.iter().enumerate() {
                w.write_record([
                    label,
                    &(i + 1).to_string(),
                    &score.token,
                    &score.log_ratio.to_string(),
                    &score.f_target.to_string(),
                    &score.f_ref.to_string(),
                    &score.rpm_target.to_string(),
                    &score.rpm_ref.to_string(),
                ])?;
            }
        }
        Ok(())
    })
}

fn pad(s: &str, width: usize) -> String {
    let len = s.chars().count();
    let mut out = String::from(s);
    for _ in len..width {
        out.push(' ');
    }
    out
}

fn window_section(label: &str, scores: &[KeynessScore]) -> String {
    let mut out = format!("== {label} ==\n");
    if scores.is_empty() {
        out.push_str("(no qualifying tokens)\n");
        return out;
    }
    let token_width = scores
        .iter()
        .map(|s| s.token.chars().count())
        .chain(["token".len()])
        .max()
        .unwrap();
    out.push_str(&format!(
        "{:>4}  {}  {:>10}  {:>8}  {:>8}  {:>12}  {:>12}\n",
        "rank",
        pad("token", token_width),
        "log_ratio",
        "f_target",
        "f_ref",
        "rpm_target",
        "rpm_ref"
    ));
    for (i, score) in scores.iter().enumerate() {
        out.push_str(&format!(
            "{:>4}  {}  {:>10.4}  {:>8}  {:>8}  {:>12.2}  {:>12.2}\n",
            i + 1,
            pad(&score.token, token_width),
            score.log_ratio,
            score.f_target,
            score.f_ref,
            score.rpm_target,
            score.rpm_ref
        ));
    }
    out
}

/// Plain-text keyness report: one detailed section per window, then a
/// compact rank-by-window matrix of the top tokens.
pub fn keyness_txt(timeline: &KeynessTimeline) -> String {
    let mut out = String::new();
    for (label, scores) in &timeline.entries {
        out.push_str(&window_section(label, scores));
        out.push('\n');
    }

    let depth = timeline.entries.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    if depth == 0 {
        return out;
    }
    let widths: Vec<usize> = timeline
        .entries
        .iter()
        .map(|(label, scores)| {
            scores
                .iter()
                .map(|s| s.token.chars().count())
                .chain([label.chars().count()])
                .max()
                .unwrap()
        })
        .collect();
    out.push_str("== top terms by window ==\n");
    let header: Vec<String> = timeline
        .entries
        .iter()
        .zip(&widths)
        .map(|((label, _), width)| pad(label, *width))
        .collect();
    out.push_str(&header.join("  "));
    out.push('\n');
    for rank in 0..depth {
        let row: Vec<String> = timeline
            .entries
            .iter()
            .zip(&widths)
            .map(|((_, scores), width)| {
                pad(scores.get(rank).map(|s| s.token.as_str()).unwrap_or(""), *width)
            })
            .collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Shared-domain tallies, most frequent first.
pub fn domains_csv(tallies: &[DomainTally]) -> String {
    csv_string(|w| {
        w.write_record(["domain", "count", "label"])?;
        for tally in tallies {
            w.write_record([
                &tally.domain,
                &tally.count.to_string(),
                tally.annotation.as_deref().unwrap_or(""),
            ])?;
        }
        Ok(())
    })
}
