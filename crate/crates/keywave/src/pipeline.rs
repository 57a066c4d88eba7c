//! Full-pipeline orchestration: ingest, filter, clean, detect languages,
//! tag, count, score, rank and write reports.
//!
//! Per-post work runs data-parallel but the contract is byte-identical
//! output regardless of thread count; everything order-dependent collects
//! back into input order. Reports are computed fully before any file is
//! written, and partially written output is removed on failure.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::RunConfig;
use crate::corpus::{assign_windows, Platform, Post};
use crate::ingest::{
    count_domains, filter_posts, load_annotations, parse_dump, tally_domains, IngestError,
    RejectedRecord,
};
use crate::keyness::{temporal_keyness, FrequencyTable, KeynessError, KeynessTimeline};
use crate::postag::{filter_nouns_verbs, parse_lexicon, tag_tokens, EnglishTagger, PostagError, TaggedDoc, TaggerRegistry};
use crate::report;
use crate::textprep::{
    bundled_profiles, clean_text, detect_language, load_profile_dir, remove_stopwords, tokenize,
    CleanDoc, LangProfile, StopwordRegistry, TextprepError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage}: {source}")]
    Ingest {
        stage: String,
        #[source]
        source: IngestError,
    },
    #[error("{stage}: {source}")]
    Textprep {
        stage: String,
        #[source]
        source: TextprepError,
    },
    #[error("{stage}: {source}")]
    Postag {
        stage: String,
        #[source]
        source: PostagError,
    },
    #[error("{stage}: {source}")]
    Keyness {
        stage: String,
        #[source]
        source: KeynessError,
    },
    #[error("report({path}): {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no posts left after filtering; nothing to report")]
    NoData,
    #[error("failed to build thread pool: {0}")]
    ThreadPool(String),
}

/// Which report families a run produces.
#[derive(Debug, Clone, Copy)]
pub struct Selection {
    pub timeline: bool,
    pub keyness: bool,
    pub domains: bool,
}

impl Selection {
    pub fn all() -> Self {
        Self { timeline: true, keyness: true, domains: true }
    }

    pub fn timeline_only() -> Self {
        Self { timeline: true, keyness: false, domains: false }
    }

    pub fn keyness_only() -> Self {
        Self { timeline: false, keyness: true, domains: false }
    }

    pub fn domains_only() -> Self {
        Self { timeline: false, keyness: false, domains: true }
    }
}

/// Per-input-file parse accounting.
#[derive(Debug, Clone)]
pub struct FileSummary {
    pub path: String,
    pub records: usize,
    pub accepted: usize,
    pub rejected: Vec<RejectedRecord>,
}

/// Per-corpus stage accounting.
#[derive(Debug, Clone)]
pub struct CorpusSummary {
    pub name: String,
    pub posts_after_filter: usize,
    pub language_counts: BTreeMap<String, usize>,
    pub language_excluded: usize,
    /// Posts whose language has no tagger and that carried no tags.
    pub untaggable: usize,
    pub processed: usize,
    pub retained_tokens: usize,
    pub window_post_counts: Vec<(String, usize)>,
    pub keyness_windows: usize,
}

/// Counts at every stage boundary of one run.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<FileSummary>,
    pub records_read: usize,
    pub rejected_records: usize,
    pub cross_file_duplicates: usize,
    pub ingested_posts: usize,
    pub filtered_out: usize,
    pub posts_after_filter: usize,
    pub corpora: Vec<CorpusSummary>,
    pub timeline_window_counts: Vec<(String, usize)>,
    pub parsed_urls: u64,
    pub skipped_urls: u64,
    pub outputs: Vec<String>,
}

impl RunSummary {
    /// Verify `posts_in = posts_rejected + posts_filtered_out +
    /// posts_processed` at every stage boundary.
    pub fn conservation_holds(&self) -> bool {
        let ingest_ok = self.records_read
            == self.rejected_records + self.cross_file_duplicates + self.ingested_posts;
        let filter_ok = self.ingested_posts == self.filtered_out + self.posts_after_filter;
        let split_ok = self.posts_after_filter
            == self.corpora.iter().map(|c| c.posts_after_filter).sum::<usize>();
        let corpora_ok = self.corpora.iter().all(|c| {
            c.posts_after_filter == c.language_excluded + c.untaggable + c.processed
                && (c.window_post_counts.is_empty()
                    || c.window_post_counts.iter().map(|(_, n)| n).sum::<usize>() == c.processed)
        });
        let timeline_ok = self.timeline_window_counts.is_empty()
            || self.timeline_window_counts.iter().map(|(_, n)| n).sum::<usize>()
                == self.posts_after_filter;
        ingest_ok && filter_ok && split_ok && corpora_ok && timeline_ok
    }

    /// Plain-text rendering written to `run_summary.txt`.
    pub fn render(&self) -> String {
        let mut out = String::from("run summary\n===========\n");
        out.push_str(&format!("records_read: {}\n", self.records_read));
        out.push_str(&format!("rejected_records: {}\n", self.rejected_records));
        out.push_str(&format!("cross_file_duplicates: {}\n", self.cross_file_duplicates));
        out.push_str(&format!("ingested_posts: {}\n", self.ingested_posts));
        out.push_str(&format!("filtered_out: {}\n", self.filtered_out));
        out.push_str(&format!("posts_after_filter: {}\n", self.posts_after_filter));
        for file in &self.files {
            out.push_str(&format!(
                "\n[file {}]\nrecords: {}\naccepted: {}\nrejected: {}\n",
                file.path,
                file.records,
                file.accepted,
                file.rejected.len()
            ));
            for reject in &file.rejected {
                out.push_str(&format!(
                    "  line {}: field {}: {}\n",
                    reject.line, reject.field, reject.reason
                ));
            }
        }
        for corpus in &self.corpora {
            out.push_str(&format!("\n[corpus {}]\n", corpus.name));
            out.push_str(&format!("posts_after_filter: {}\n", corpus.posts_after_filter));
            let languages: Vec<String> = corpus
                .language_counts
                .iter()
                .map(|(lang, n)| format!("{lang}={n}"))
                .collect();
            out.push_str(&format!("languages: {}\n", languages.join(" ")));
            out.push_str(&format!("language_excluded: {}\n", corpus.language_excluded));
            out.push_str(&format!("untaggable: {}\n", corpus.untaggable));
            out.push_str(&format!("processed: {}\n", corpus.processed));
            out.push_str(&format!("retained_tokens: {}\n", corpus.retained_tokens));
            out.push_str(&format!("windows: {}\n", corpus.window_post_counts.len()));
            for (label, count) in &corpus.window_post_counts {
                out.push_str(&format!("window {label}: {count} posts\n"));
            }
            out.push_str(&format!("keyness_windows: {}\n", corpus.keyness_windows));
        }
        if !self.timeline_window_counts.is_empty() {
            out.push_str("\n[timeline]\n");
            for (label, count) in &self.timeline_window_counts {
                out.push_str(&format!("window {label}: {count} posts\n"));
            }
        }
        out.push_str(&format!(
            "\ndomains: parsed_urls={} skipped_urls={}\n",
            self.parsed_urls, self.skipped_urls
        ));
        out.push_str(&format!(
            "conservation: {}\n",
            if self.conservation_holds() { "ok" } else { "VIOLATED" }
        ));
        out.push_str(&format!("outputs: {}\n", self.outputs.join(" ")));
        out
    }
}

struct Resources {
    stopwords: StopwordRegistry,
    taggers: TaggerRegistry,
    profiles: Vec<LangProfile>,
    annotations: Option<BTreeMap<String, String>>,
}

impl Resources {
    fn load(config: &RunConfig) -> Result<Self, PipelineError> {
        let mut stopwords = StopwordRegistry::bundled();
        for (language, path) in &config.stopwords {
            stopwords.load_override(language, path).map_err(|source| PipelineError::Textprep {
                stage: format!("stopwords({language})"),
                source,
            })?;
        }

        let mut taggers = TaggerRegistry::bundled();
        if let Some(path) = &config.lexicon {
            let content = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let entries = parse_lexicon(&content).map_err(|source| PipelineError::Postag {
                stage: format!("lexicon({})", path.display()),
                source,
            })?;
            let mut english = EnglishTagger::bundled();
            english.add_entries(entries);
            taggers.register("en", Box::new(english));
        }

        let profiles = match &config.profile_dir {
            Some(dir) => load_profile_dir(dir).map_err(|source| PipelineError::Textprep {
                stage: format!("profiles({})", dir.display()),
                source,
            })?,
            None => bundled_profiles(),
        };

        let annotations = match &config.annotations {
            Some(path) => Some(load_annotations(path).map_err(|source| PipelineError::Ingest {
                stage: format!("annotations({})", path.display()),
                source,
            })?),
            None => None,
        };

        Ok(Self { stopwords, taggers, profiles, annotations })
    }
}

enum DocOutcome {
    Tagged(Box<TaggedDoc>),
    LanguageExcluded,
    Untaggable,
}

struct PreparedPost {
    language: String,
    outcome: DocOutcome,
}

fn prepare_post(
    post: &Post,
    whitelist: &BTreeSet<String>,
    resources: &Resources,
    min_detect_chars: usize,
) -> PreparedPost {
    let (tokens, pre_tags, cleaned) = match &post.pre_tagged {
        Some(tagged) => {
            let tokens: Vec<String> = tagged.iter().map(|t| t.token.clone()).collect();
            let tags = tagged.iter().map(|t| t.tag).collect();
            let joined = tokens.join(" ");
            (tokens, Some(tags), joined)
        }
        None => {
            let cleaned = clean_text(&post.text);
            (tokenize(&cleaned), None, cleaned)
        }
    };
    let language = post
        .language
        .clone()
        .unwrap_or_else(|| detect_language(&cleaned, &resources.profiles, min_detect_chars));
    if !whitelist.is_empty() && !whitelist.contains(&language) {
        return PreparedPost { language, outcome: DocOutcome::LanguageExcluded };
    }
    // Pre-tagged docs keep their token sequence verbatim; the supplier
    // already controls it.
    let tokens = if pre_tags.is_some() {
        tokens
    } else {
        remove_stopwords(tokens, &language, &resources.stopwords)
    };
    let doc = CleanDoc { post_id: post.id.clone(), tokens, language: language.clone(), pre_tags };
    match tag_tokens(&doc, &resources.taggers) {
        Ok(tagged) => PreparedPost { language, outcome: DocOutcome::Tagged(Box::new(tagged)) },
        Err(PostagError::NoTaggerForLanguage(_)) => {
            PreparedPost { language, outcome: DocOutcome::Untaggable }
        }
        Err(_) => PreparedPost { language, outcome: DocOutcome::Untaggable },
    }
}

struct CorpusArtifacts {
    summary: CorpusSummary,
    timeline: Option<KeynessTimeline>,
}

fn process_corpus(
    name: &str,
    posts: &[Post],
    config: &RunConfig,
    whitelist: &BTreeSet<String>,
    resources: &Resources,
    want_keyness: bool,
) -> Result<(CorpusArtifacts, Vec<Post>), PipelineError> {
    let prepared: Vec<PreparedPost> = posts
        .par_iter()
        .map(|post| prepare_post(post, whitelist, resources, config.min_detect_chars))
        .collect();

    let mut summary = CorpusSummary {
        name: name.to_string(),
        posts_after_filter: posts.len(),
        language_counts: BTreeMap::new(),
        language_excluded: 0,
        untaggable: 0,
        processed: 0,
        retained_tokens: 0,
        window_post_counts: Vec::new(),
        keyness_windows: 0,
    };
    let mut processed: Vec<(Post, TaggedDoc)> = Vec::new();
    for (post, prep) in posts.iter().zip(prepared) {
        *summary.language_counts.entry(prep.language).or_insert(0) += 1;
        match prep.outcome {
            DocOutcome::Tagged(doc) => processed.push((post.clone(), *doc)),
            DocOutcome::LanguageExcluded => summary.language_excluded += 1,
            DocOutcome::Untaggable => summary.untaggable += 1,
        }
    }
    summary.processed = processed.len();

    if !want_keyness {
        return Ok((CorpusArtifacts { summary, timeline: None }, processed.into_iter().map(|(p, _)| p).collect()));
    }

    if processed.is_empty() {
        return Err(PipelineError::Keyness {
            stage: format!("keyness({name})"),
            source: KeynessError::InsufficientWindows(0),
        });
    }
    let corpus_posts: Vec<Post> = processed.iter().map(|(p, _)| p.clone()).collect();
    let windowed = assign_windows(&corpus_posts, config.granularity).expect("nonempty posts");

    let mut tokens_by_window: Vec<Vec<Vec<String>>> = vec![Vec::new(); windowed.windows.len()];
    for (post, doc) in &processed {
        let index = windowed.window_index(post.timestamp).expect("post inside its window span");
        let retained = filter_nouns_verbs(doc);
        summary.retained_tokens += retained.len();
        tokens_by_window[index].push(retained);
    }
    let tables: Vec<FrequencyTable> = windowed
        .windows
        .iter()
        .zip(&tokens_by_window)
        .map(|(window, docs)| {
            let lists = docs.iter().map(|d| d.as_slice().iter());
            if config.doc_freq {
                FrequencyTable::from_token_lists_unique(lists, &window.label)
            } else {
                FrequencyTable::from_token_lists(lists, &window.label)
            }
        })
        .collect();
    summary.window_post_counts = windowed
        .windows
        .iter()
        .zip(&windowed.posts_by_window)
        .map(|(w, posts)| (w.label.clone(), posts.len()))
        .collect();

    let timeline = temporal_keyness(
        &tables,
        config.reference_mode,
        config.zero_adjust,
        config.min_target_freq,
        config.top_n,
    )
    .map_err(|source| PipelineError::Keyness { stage: format!("keyness({name})"), source })?;
    summary.keyness_windows = timeline.entries.len();

    Ok((CorpusArtifacts { summary, timeline: Some(timeline) }, corpus_posts))
}

struct OutputWriter {
    dir: PathBuf,
    created: Vec<PathBuf>,
}

impl OutputWriter {
    fn new(dir: &PathBuf) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self { dir: dir.clone(), created: Vec::new() })
    }

    fn write(&mut self, name: &str, content: &str) -> Result<(), PipelineError> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.created.push(path);
        Ok(())
    }

    fn remove_created(&self) {
        for path in &self.created {
            let _ = std::fs::remove_file(path);
        }
    }
}

/// Run the configured pipeline and write the selected reports into the
/// output directory. Returns the stage-by-stage run summary.
pub fn run_pipeline(config: &RunConfig, selection: Selection) -> Result<RunSummary, PipelineError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| PipelineError::ThreadPool(e.to_string()))?;
    pool.install(|| run_inner(config, selection))
}

fn run_inner(config: &RunConfig, selection: Selection) -> Result<RunSummary, PipelineError> {
    let resources = Resources::load(config)?;
    let mut summary = RunSummary::default();

    // Ingest every dump; posts pool per corpus name, with duplicate ids
    // rejected per platform across files.
    let mut posts_by_corpus: BTreeMap<String, Vec<Post>> = BTreeMap::new();
    let mut seen_ids: BTreeMap<Platform, HashSet<String>> = BTreeMap::new();
    for input in &config.inputs {
        let outcome =
            parse_dump(&input.path, input.schema, config.strict).map_err(|source| {
                PipelineError::Ingest {
                    stage: format!("ingest({})", input.path.display()),
                    source,
                }
            })?;
        let mut accepted = 0usize;
        let mut duplicates = 0usize;
        for post in outcome.posts {
            if !seen_ids.entry(input.schema).or_default().insert(post.id.clone()) {
                duplicates += 1;
                continue;
            }
            accepted += 1;
            posts_by_corpus.entry(input.corpus.clone()).or_default().push(post);
        }
        summary.cross_file_duplicates += duplicates;
        summary.rejected_records += outcome.rejected.len();
        summary.files.push(FileSummary {
            path: input.path.display().to_string(),
            records: accepted + duplicates + outcome.rejected.len(),
            accepted,
            rejected: outcome.rejected,
        });
    }
    summary.records_read = summary.files.iter().map(|f| f.records).sum();
    summary.ingested_posts = posts_by_corpus.values().map(Vec::len).sum();

    // Hashtag and date-range filter, per corpus. Corpus-level settings come
    // from that corpus's first input.
    let corpus_input = |corpus: &str| config.inputs.iter().find(|i| i.corpus == corpus);
    let mut filtered_by_corpus: BTreeMap<String, Vec<Post>> = BTreeMap::new();
    for (corpus, posts) in &posts_by_corpus {
        let hashtags = corpus_input(corpus)
            .and_then(|i| i.hashtags.clone())
            .unwrap_or_else(|| config.hashtags.clone());
        let kept = filter_posts(posts, &hashtags, config.from, config.to);
        summary.filtered_out += posts.len() - kept.len();
        summary.posts_after_filter += kept.len();
        filtered_by_corpus.insert(corpus.clone(), kept);
    }
    if summary.posts_after_filter == 0 {
        return Err(PipelineError::NoData);
    }

    // Per-corpus preparation and keyness.
    let mut keyness_timelines: Vec<(String, KeynessTimeline)> = Vec::new();
    let mut processed_posts: Vec<Post> = Vec::new();
    for (corpus, posts) in &filtered_by_corpus {
        let whitelist = corpus_input(corpus)
            .and_then(|i| i.languages.clone())
            .unwrap_or_else(|| config.languages.clone());
        let (artifacts, corpus_processed) = process_corpus(
            corpus,
            posts,
            config,
            &whitelist,
            &resources,
            selection.keyness,
        )?;
        summary.corpora.push(artifacts.summary);
        if let Some(timeline) = artifacts.timeline {
            keyness_timelines.push((corpus.clone(), timeline));
        }
        processed_posts.extend(corpus_processed);
    }

    // Timeline over all filtered posts (before the language filter, so
    // volumes match what the platforms carried).
    let mut timeline_csv: Option<String> = None;
    if selection.timeline {
        let pooled: Vec<Post> = filtered_by_corpus.values().flatten().cloned().collect();
        let windowed = assign_windows(&pooled, config.granularity).expect("nonempty after NoData check");
        summary.timeline_window_counts = windowed
            .windows
            .iter()
            .zip(&windowed.posts_by_window)
            .map(|(w, posts)| (w.label.clone(), posts.len()))
            .collect();
        timeline_csv = Some(report::timeline_csv(
            &windowed,
            config.group_by,
            &config.hashtags,
            &config.countries,
        ));
    }

    // Shared domains over the posts that survived every filter.
    let mut domains_csv: Option<String> = None;
    let domain_counts = count_domains(&processed_posts);
    summary.parsed_urls = domain_counts.parsed_urls;
    summary.skipped_urls = domain_counts.skipped_urls;
    if selection.domains {
        let tallies = tally_domains(
            &processed_posts,
            config.domains_top_n,
            resources.annotations.as_ref(),
        );
        domains_csv = Some(report::domains_csv(&tallies));
    }

    // All reports computed; now write them, removing partial output on
    // failure.
    let mut writer = OutputWriter::new(&config.out_dir)?;
    let result = (|| {
        if let Some(csv) = &timeline_csv {
            writer.write("timeline.csv", csv)?;
        }
        for (corpus, timeline) in &keyness_timelines {
            writer.write(&format!("keyness_{corpus}.csv"), &report::keyness_csv(timeline))?;
            writer.write(&format!("keyness_{corpus}.txt"), &report::keyness_txt(timeline))?;
        }
        if let Some(csv) = &domains_csv {
            writer.write("domains.csv", csv)?;
        }
        Ok(())
    })();
    if let Err(e) = result {
        writer.remove_created();
        return Err(e);
    }
    summary.outputs = writer
        .created
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().to_string()))
        .collect();
    summary.outputs.push("run_summary.txt".to_string());
    if let Err(e) = writer.write("run_summary.txt", &summary.render()) {
        writer.remove_created();
        return Err(e);
    }
    Ok(summary)
}
