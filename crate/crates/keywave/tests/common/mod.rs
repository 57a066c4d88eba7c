//! Shared test helpers: an independent brute-force keyness oracle and
//! synthetic corpus generators.

use std::collections::HashMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A synthetic windowed corpus: raw token lists per document per window.
#[derive(Debug, Clone)]
pub struct RawCorpus {
    pub labels: Vec<String>,
    pub windows: Vec<Vec<Vec<String>>>,
}

/// One oracle-scored token.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleScore {
    pub token: String,
    pub f_target: u64,
    pub f_ref: u64,
    pub log_ratio: f64,
}

/// Brute-force recomputation of temporal keyness from raw token lists.
///
/// Deliberately avoids the library's tables and prefix merging: every
/// window and every reference is recounted from scratch by scanning the
/// raw lists, and ranking uses its own comparator.
pub fn oracle_temporal_keyness(
    corpus: &RawCorpus,
    cumulative: bool,
    zero_adjust: f64,
    min_target_freq: u64,
    top_n: usize,
) -> Vec<(String, Vec<OracleScore>)> {
    let count_range = |from: usize, to: usize| -> (HashMap<&str, u64>, u64) {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        let mut total = 0u64;
        for window in &corpus.windows[from..to] {
            for doc in window {
                for token in doc {
                    *counts.entry(token.as_str()).or_insert(0) += 1;
                    total += 1;
                }
            }
        }
        (counts, total)
    };

    let min_target_freq = min_target_freq.max(1);
    let mut out = Vec::new();
    for w in 1..corpus.windows.len() {
        let (target_counts, n_target) = count_range(w, w + 1);
        let (ref_counts, n_ref) = if cumulative {
            count_range(0, w)
        } else {
            count_range(w - 1, w)
        };
        let mut scores: Vec<OracleScore> = Vec::new();
        if n_target > 0 && n_ref > 0 {
            for (&token, &f_target) in &target_counts {
                if f_target < min_target_freq {
                    continue;
                }
                let f_ref = ref_counts.get(token).copied().unwrap_or(0);
                let f1 = if f_target == 0 { zero_adjust } else { f_target as f64 };
                let f2 = if f_ref == 0 { zero_adjust } else { f_ref as f64 };
                let log_ratio = ((f1 * n_ref as f64) / (f2 * n_target as f64)).log2();
                scores.push(OracleScore { token: token.to_string(), f_target, f_ref, log_ratio });
            }
        }
        scores.sort_by(|a, b| {
            b.log_ratio
                .total_cmp(&a.log_ratio)
                .then_with(|| b.f_target.cmp(&a.f_target))
                .then_with(|| a.token.cmp(&b.token))
        });
        scores.truncate(top_n);
        out.push((corpus.labels[w].clone(), scores));
    }
    out
}

/// Random corpus of up to `max_windows` windows with up to 50 tokens per
/// window, over a small vocabulary so collisions are common.
pub fn random_corpus(rng: &mut StdRng, max_windows: usize) -> RawCorpus {
    let vocab: Vec<String> = (0..rng.random_range(5..30)).map(|i| format!("t{i:02}")).collect();
    let n_windows = rng.random_range(2..=max_windows.max(2));
    let mut windows = Vec::with_capacity(n_windows);
    let mut labels = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        labels.push(format!("w{w}"));
        // Mostly nonempty windows, occasionally an empty one.
        let budget = if rng.random_range(0..10) == 0 { 0 } else { rng.random_range(1..=50) };
        let mut docs = Vec::new();
        let mut used = 0;
        while used < budget {
            let len = rng.random_range(1..=(budget - used).min(12));
            let doc: Vec<String> =
                (0..len).map(|_| vocab[rng.random_range(0..vocab.len())].clone()).collect();
            used += len;
            docs.push(doc);
        }
        windows.push(docs);
    }
    RawCorpus { labels, windows }
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
