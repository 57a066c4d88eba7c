//! Stopword lists and order-preserving removal.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use super::TextprepError;

const ENGLISH: &str = include_str!("../data/stopwords/en.txt");
const RUSSIAN: &str = include_str!("../data/stopwords/ru.txt");

/// Parse a stopword file: one token per line, `#` starts a comment line.
pub fn parse_stopword_list(content: &str) -> HashSet<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(|line| line.to_lowercase())
        .collect()
}

/// Per-language stopword lists.
pub struct StopwordRegistry {
    lists: BTreeMap<String, HashSet<String>>,
}

impl StopwordRegistry {
    pub fn empty() -> Self {
        Self { lists: BTreeMap::new() }
    }

    /// Registry with the bundled English and Russian lists.
    pub fn bundled() -> Self {
        let mut registry = Self::empty();
        registry.lists.insert("en".to_string(), parse_stopword_list(ENGLISH));
        registry.lists.insert("ru".to_string(), parse_stopword_list(RUSSIAN));
        registry
    }

    /// Replace (or add) the list for `language` from a stopword file.
    pub fn load_override(&mut self, language: &str, path: &Path) -> Result<(), TextprepError> {
        let content = std::fs::read_to_string(path).map_err(|source| TextprepError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.lists.insert(language.to_string(), parse_stopword_list(&content));
        Ok(())
    }

    pub fn get(&self, language: &str) -> Option<&HashSet<String>> {
        self.lists.get(language)
    }
}

impl Default for StopwordRegistry {
    fn default() -> Self {
        Self::bundled()
    }
}

/// Remove exact stopword matches, preserving order. Languages without a
/// list (including `"und"`) pass through unchanged.
pub fn remove_stopwords(
    tokens: Vec<String>,
    language: &str,
    registry: &StopwordRegistry,
) -> Vec<String> {
    match registry.get(language) {
        Some(list) => tokens.into_iter().filter(|t| !list.contains(t)).collect(),
        None => tokens,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tokens(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn english_stopwords_removed_in_order() {
        let registry = StopwordRegistry::bundled();
        let out = remove_stopwords(tokens(&["the", "wagner", "group", "is", "advancing"]), "en", &registry);
        assert_eq!(out, ["wagner", "group", "advancing"]);
    }

    #[test]
    fn empty_input_stays_empty() {
        let registry = StopwordRegistry::bundled();
        assert!(remove_stopwords(Vec::new(), "en", &registry).is_empty());
    }

    #[test]
    fn unknown_language_is_identity() {
        let registry = StopwordRegistry::bundled();
        let input = tokens(&["the", "und", "tokens"]);
        assert_eq!(remove_stopwords(input.clone(), "und", &registry), input);
    }

    #[test]
    fn russian_stopwords_removed() {
        let registry = StopwordRegistry::bundled();
        let out = remove_stopwords(tokens(&["и", "вагнер", "в", "ростове"]), "ru", &registry);
        assert_eq!(out, ["вагнер", "ростове"]);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let list = parse_stopword_list("# comment\n\nthe\nand\n");
        assert_eq!(list.len(), 2);
        assert!(list.contains("the"));
    }
}
