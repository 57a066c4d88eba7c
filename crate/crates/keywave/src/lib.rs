//! Temporal keyness analysis for time-stamped social media corpora.
//!
//! The pipeline ingests platform dumps (JSONL), normalizes them into [`corpus::Post`]s,
//! cleans and tokenizes the text, detects languages, keeps nouns and verbs, and scores
//! each time window against the accumulated prior windows with the Log Ratio keyness
//! metric (the binary log of the ratio of relative frequencies). Reports come out as
//! CSV plus plain-text tables.

pub mod config;
pub mod corpus;
pub mod ingest;
pub mod keyness;
pub mod pipeline;
pub mod postag;
pub mod report;
pub mod textprep;

pub use config::RunConfig;
pub use corpus::{Granularity, Platform, Post, TimeWindow, WindowedCorpus};
pub use keyness::{FrequencyTable, KeynessScore, KeynessTimeline, ReferenceMode};
pub use pipeline::{run_pipeline, RunSummary};
