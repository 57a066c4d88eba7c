//! Text cleaning, tokenization, language detection and stopword removal.
//!
//! All operations are pure functions over immutable inputs and safe for
//! data-parallel application across posts.

mod clean;
mod lang;
mod stopwords;

pub use clean::{clean_text, tokenize};
pub use lang::{
    bundled_profiles, detect_language, detect_language_with_threshold, load_profile_dir,
    LangProfile, DEFAULT_MAX_DISTANCE, DEFAULT_PROFILE_DEPTH,
};
pub use stopwords::{parse_stopword_list, remove_stopwords, StopwordRegistry};

use thiserror::Error;

use crate::postag::Tag;

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("language profile {path} is empty")]
    EmptyProfile { path: String },
    #[error("language profile {path} line {line}: expected `trigram<TAB>rank`")]
    MalformedProfileLine { path: String, line: usize },
}

/// A post's cleaned tokens: lowercase, no punctuation-only or pure-digit
/// strings, no URL fragments. `language` is an ISO 639-1 code or `"und"`.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanDoc {
    pub post_id: String,
    pub tokens: Vec<String>,
    pub language: String,
    /// Tags carried in from the dump, parallel to `tokens`.
    pub pre_tags: Option<Vec<Tag>>,
}
