//! Coarse part-of-speech tagging and the noun/verb filter.
//!
//! Two bundled taggers cover English (closed-class list, lexicon lookup,
//! suffix heuristics) and Russian (closed-class list, suffix heuristics).
//! Both collapse everything into the NOUN / VERB / OTHER partition that the
//! keyness stage needs; unknown content words default to NOUN so novel
//! coinages survive the filter. Dumps may carry pre-supplied tags, which
//! bypass the bundled taggers entirely.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::CleanDoc;

#[derive(Debug, Error, PartialEq)]
pub enum PostagError {
    #[error("no tagger registered for language {0:?} and no pre-supplied tags")]
    NoTaggerForLanguage(String),
    #[error("lexicon line {line}: expected `token<TAB>tag`, got {content:?}")]
    MalformedLexiconLine { line: usize, content: String },
}

/// Coarse tag set; everything that is not a noun or verb is OTHER.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Tag {
    Noun,
    Verb,
    Other,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Noun => write!(f, "NOUN"),
            Tag::Verb => write!(f, "VERB"),
            Tag::Other => write!(f, "OTHER"),
        }
    }
}

impl std::str::FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NOUN" => Ok(Tag::Noun),
            "VERB" => Ok(Tag::Verb),
            "OTHER" => Ok(Tag::Other),
            other => Err(format!("unknown tag: {other}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub token: String,
    pub tag: Tag,
}

/// A cleaned document with one tag per token. Tagging adds labels and never
/// rewrites tokens, so the token sequence equals the source [`CleanDoc`]'s.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedDoc {
    pub post_id: String,
    pub tagged_tokens: Vec<TaggedToken>,
    pub language: String,
}

/// A per-language tagging strategy. Implementations must be deterministic:
/// the same token always gets the same tag.
pub trait Tagger: Send + Sync {
    fn tag_token(&self, token: &str) -> Tag;
}

/// Language-keyed set of taggers consulted by [`tag_tokens`].
pub struct TaggerRegistry {
    taggers: BTreeMap<String, Box<dyn Tagger>>,
}

impl TaggerRegistry {
    pub fn empty() -> Self {
        Self { taggers: BTreeMap::new() }
    }

    /// Registry with the bundled English and Russian taggers.
    pub fn bundled() -> Self {
        let mut registry = Self::empty();
        registry.register("en", Box::new(EnglishTagger::bundled()));
        registry.register("ru", Box::new(RussianTagger::new()));
        registry
    }

    pub fn register(&mut self, language: &str, tagger: Box<dyn Tagger>) {
        self.taggers.insert(language.to_string(), tagger);
    }

    pub fn get(&self, language: &str) -> Option<&dyn Tagger> {
        self.taggers.get(language).map(Box::as_ref)
    }
}

/// Assign exactly one tag to every token of `doc`.
///
/// Pre-supplied tags win; otherwise the registry must hold a tagger for the
/// doc's language.
pub fn tag_tokens(doc: &CleanDoc, registry: &TaggerRegistry) -> Result<TaggedDoc, PostagError> {
    if let Some(tags) = &doc.pre_tags {
        debug_assert_eq!(tags.len(), doc.tokens.len());
        return Ok(TaggedDoc {
            post_id: doc.post_id.clone(),
            tagged_tokens: doc
                .tokens
                .iter()
                .zip(tags)
                .map(|(token, tag)| TaggedToken { token: token.clone(), tag: *tag })
                .collect(),
            language: doc.language.clone(),
        });
    }
    let tagger = registry
        .get(&doc.language)
        .ok_or_else(|| PostagError::NoTaggerForLanguage(doc.language.clone()))?;
    Ok(TaggedDoc {
        post_id: doc.post_id.clone(),
        tagged_tokens: doc
            .tokens
            .iter()
            .map(|token| TaggedToken { token: token.clone(), tag: tagger.tag_token(token) })
            .collect(),
        language: doc.language.clone(),
    })
}

/// Order-preserving projection of the tokens tagged NOUN or VERB.
pub fn filter_nouns_verbs(doc: &TaggedDoc) -> Vec<String> {
    doc.tagged_tokens
        .iter()
        .filter(|t| matches!(t.tag, Tag::Noun | Tag::Verb))
        .map(|t| t.token.clone())
        .collect()
}

/// Parse `token<TAB>tag` lines. Blank lines and `#` comments are skipped.
pub fn parse_lexicon(content: &str) -> Result<HashMap<String, Tag>, PostagError> {
    let mut lexicon = HashMap::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (token, tag) = line
            .split_once('\t')
            .ok_or_else(|| PostagError::MalformedLexiconLine { line: i + 1, content: line.to_string() })?;
        let tag: Tag = tag
            .trim()
            .parse()
            .map_err(|_| PostagError::MalformedLexiconLine { line: i + 1, content: line.to_string() })?;
        lexicon.insert(token.trim().to_lowercase(), tag);
    }
    Ok(lexicon)
}

const ENGLISH_LEXICON: &str = include_str!("data/en.lex");

/// Function words and other closed-class items that are neither nouns nor
/// verbs for keyness purposes. Modals and copulas land here too: they carry
/// no narrative content.
const ENGLISH_CLOSED_CLASS: &[&str] = &[
    "a", "about", "above", "across", "after", "again", "against", "all", "almost", "along",
    "already", "also", "although", "always", "am", "among", "an", "and", "another", "any",
    "anyone", "anything", "are", "around", "as", "at", "back", "be", "because", "been", "before",
    "behind", "being", "below", "between", "beyond", "both", "but", "by", "can", "cannot",
    "could", "despite", "did", "do", "does", "down", "during", "each", "either", "else",
    "enough", "even", "ever", "every", "everyone", "everything", "few", "for", "from", "further",
    "had", "has", "have", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how",
    "however", "i", "if", "in", "indeed", "instead", "into", "is", "it", "its", "itself", "just",
    "least", "less", "like", "many", "may", "me", "might", "mine", "more", "most", "much",
    "must", "my", "myself", "near", "neither", "never", "no", "nobody", "none", "nor", "not",
    "nothing", "now", "of", "off", "often", "on", "once", "only", "onto", "or", "other", "our",
    "ours", "ourselves", "out", "over", "own", "per", "perhaps", "quite", "rather", "same",
    "shall", "she", "should", "since", "so", "some", "someone", "something", "soon", "still",
    "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
    "these", "they", "this", "those", "though", "through", "throughout", "thus", "to", "too",
    "toward", "towards", "under", "until", "up", "upon", "us", "very", "was", "we", "were",
    "what", "when", "where", "whether", "which", "while", "who", "whom", "whose", "why", "will",
    "with", "within", "without", "would", "yet", "you", "your", "yours", "yourself",
];

const ENGLISH_NOUN_SUFFIXES: &[&str] = &[
    "ation", "ition", "ness", "ment", "ance", "ence", "ship", "hood", "tion", "sion", "ism",
    "ist", "ity", "age",
];

const ENGLISH_VERB_SUFFIXES: &[&str] = &["ize", "ise", "ify"];

/// Lexicon plus suffix-rule tagger for lowercase English tokens.
pub struct EnglishTagger {
    closed_class: HashSet<&'static str>,
    lexicon: HashMap<String, Tag>,
}

impl EnglishTagger {
    pub fn bundled() -> Self {
        Self::with_lexicon(parse_lexicon(ENGLISH_LEXICON).expect("bundled lexicon parses"))
    }

    pub fn with_lexicon(lexicon: HashMap<String, Tag>) -> Self {
        Self { closed_class: ENGLISH_CLOSED_CLASS.iter().copied().collect(), lexicon }
    }

    /// Extend or override bundled lexicon entries.
    pub fn add_entries(&mut self, entries: HashMap<String, Tag>) {
        self.lexicon.extend(entries);
    }

    /// Lexicon lookup on the token and on inflectional stems: `enters`,
    /// `entered` and `entering` all resolve through `enter`.
    fn lexicon_lookup(&self, token: &str) -> Option<Tag> {
        if let Some(tag) = self.lexicon.get(token) {
            return Some(*tag);
        }
        for (suffix, restore_e) in [
            ("ies", false),
            ("es", false),
            ("s", false),
            ("ied", false),
            ("ed", false),
            ("ed", true),
            ("ing", false),
            ("ing", true),
        ] {
            if let Some(stem) = token.strip_suffix(suffix) {
                if stem.len() < 2 {
                    continue;
                }
                let mut stem = stem.to_string();
                if suffix == "ies" || suffix == "ied" {
                    stem.push('y');
                } else if restore_e {
                    stem.push('e');
                }
                if let Some(tag) = self.lexicon.get(stem.as_str()) {
                    return Some(*tag);
                }
            }
        }
        None
    }
}

impl Tagger for EnglishTagger {
    fn tag_token(&self, token: &str) -> Tag {
        if self.closed_class.contains(token) {
            return Tag::Other;
        }
        if let Some(tag) = self.lexicon_lookup(token) {
            return tag;
        }
        for suffix in ENGLISH_NOUN_SUFFIXES {
            if token.len() > suffix.len() && token.ends_with(suffix) {
                return Tag::Noun;
            }
        }
        for suffix in ENGLISH_VERB_SUFFIXES {
            if token.len() > suffix.len() && token.ends_with(suffix) {
                return Tag::Verb;
            }
        }
        if token.ends_with("ly") && token.len() > 4 {
            return Tag::Other;
        }
        // Unknown content words default to NOUN.
        Tag::Noun
    }
}

const RUSSIAN_CLOSED_CLASS: &[&str] = &[
    "а", "бы", "был", "была", "были", "было", "быть", "в", "вам", "вас", "весь", "во", "вот",
    "все", "всех", "вся", "вы", "где", "да", "даже", "для", "до", "его", "ее", "её", "ей", "ему",
    "если", "есть", "еще", "ещё", "же", "за", "здесь", "и", "из", "или", "им", "их", "к", "как",
    "ко", "когда", "кто", "ли", "либо", "мы", "на", "над", "нам", "нас", "не", "него", "нее",
    "ней", "нет", "ни", "них", "но", "ну", "о", "об", "он", "она", "они", "оно", "от", "по",
    "под", "после", "при", "про", "с", "со", "так", "также", "там", "тем", "то", "того", "тоже",
    "той", "только", "том", "тот", "ту", "ты", "у", "уже", "через", "что", "чтобы", "эта", "эти",
    "это", "этого", "этой", "этом", "этот", "эту", "я",
];

const RUSSIAN_VERB_SUFFIXES: &[&str] = &[
    "ться", "тись", "ать", "ять", "еть", "ить", "уть", "ыть", "оть", "ти", "чь", "ешь", "ёшь",
    "ишь", "ете", "ите", "ем", "им", "ет", "ёт", "ит", "ут", "ют", "ат", "ят", "ал", "ял",
    "ил", "ел", "ыл", "ол", "ёл", "шла", "шли", "ала", "яла", "ила", "ела", "али", "яли", "или", "ели",
    "лся", "лась", "лись", "лось", "ется", "ится", "утся", "ются", "атся", "ятся",
];

const RUSSIAN_NOUN_SUFFIXES: &[&str] = &[
    "ость", "есть", "ство", "ение", "ание", "яние", "ция", "сия", "зия", "тель", "ник", "щик",
    "чик", "изм", "ист", "ура", "ада", "ика", "ема",
];

/// Suffix-heuristic tagger for lowercase Russian tokens.
pub struct RussianTagger {
    closed_class: HashSet<&'static str>,
}

impl RussianTagger {
    pub fn new() -> Self {
        Self { closed_class: RUSSIAN_CLOSED_CLASS.iter().copied().collect() }
    }
}

impl Default for RussianTagger {
    fn default() -> Self {
        Self::new()
    }
}

impl Tagger for RussianTagger {
    fn tag_token(&self, token: &str) -> Tag {
        if self.closed_class.contains(token) {
            return Tag::Other;
        }
        let chars = token.chars().count();
        for suffix in RUSSIAN_NOUN_SUFFIXES {
            if token.ends_with(suffix) && chars > suffix.chars().count() {
                return Tag::Noun;
            }
        }
        for suffix in RUSSIAN_VERB_SUFFIXES {
            if token.ends_with(suffix) && chars > suffix.chars().count() + 1 {
                return Tag::Verb;
            }
        }
        Tag::Noun
    }
}
