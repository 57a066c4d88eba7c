//! Post text cleaning.
//!
//! The cleaning order is fixed: URLs first (punctuation stripping would
//! shred them and leak domain fragments into tokens), then emoji, then
//! case folding, then punctuation and standalone numbers, then whitespace
//! collapse. Hashtags lose their `#` and survive as plain tokens.

use std::sync::LazyLock;

use regex::Regex;

static URL: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bhttps?://\S+|\bwww\.\S+").unwrap());

// The full Emoji property would also match ASCII digits, `#` and `*`
// (keycap bases), destroying tokens like `su34` and `#wagner`. This class
// covers pictographs, skin-tone modifiers, variation selectors, the ZWJ,
// the keycap combiner and regional-indicator (flag) pairs.
static EMOJI: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[\p{Extended_Pictographic}\p{Emoji_Modifier}\u{FE0E}\u{FE0F}\u{200D}\u{20E3}\x{1F1E6}-\x{1F1FF}]")
        .unwrap()
});

fn is_pure_number(token: &str) -> bool {
    !token.is_empty() && token.chars().all(char::is_numeric)
}

/// Clean raw post text into a lowercase, space-separated token stream.
///
/// Idempotent: cleaning cleaned text is a no-op.
pub fn clean_text(text: &str) -> String {
    let text = URL.replace_all(text, " ");
    let text = EMOJI.replace_all(&text, " ");
    let lowered = text.to_lowercase();
    let separated: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect();
    let mut out = String::with_capacity(separated.len());
    for token in separated.split_whitespace() {
        if is_pure_number(token) {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

/// Split cleaned text into tokens.
pub fn tokenize(cleaned: &str) -> Vec<String> {
    cleaned.split_whitespace().map(str::to_string).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urls_emoji_punctuation_and_case_are_removed() {
        assert_eq!(clean_text("Wagner enters Rostov! https://t.co/x 🔥"), "wagner enters rostov");
    }

    #[test]
    fn empty_input_stays_empty() {
        assert_eq!(clean_text(""), "");
    }

    #[test]
    fn hashtags_become_plain_tokens_and_numbers_drop() {
        assert_eq!(clean_text("#RussiaHoax 2023"), "russiahoax");
    }

    #[test]
    fn alphanumerics_are_kept() {
        assert_eq!(clean_text("su34 jets, 4 of them"), "su34 jets of them");
    }

    #[test]
    fn www_urls_are_removed_whole() {
        assert_eq!(clean_text("see www.rt.com/article-1 today"), "see today");
    }

    #[test]
    fn zwj_and_flag_sequences_are_removed() {
        assert_eq!(clean_text("family 👨‍👩‍👧 flag 🇷🇺 done"), "family flag done");
    }

    #[test]
    fn cyrillic_text_survives_cleaning() {
        assert_eq!(clean_text("Вагнер вошёл в Ростов-на-Дону!"), "вагнер вошёл в ростов на дону");
    }

    #[test]
    fn cleaning_is_idempotent_on_samples() {
        for text in [
            "Wagner enters Rostov! https://t.co/x 🔥",
            "#RussiaHoax 2023",
            "su34, MiG-29 & 5 more: www.example.com/x",
            "ёжик и 1️⃣ приз",
        ] {
            let once = clean_text(text);
            assert_eq!(clean_text(&once), once, "not idempotent for {text:?}");
        }
    }

    #[test]
    fn tokenize_splits_on_whitespace() {
        assert_eq!(tokenize("wagner enters rostov"), ["wagner", "enters", "rostov"]);
        assert!(tokenize("").is_empty());
    }
}
