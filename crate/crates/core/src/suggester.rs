//! Candidate generation over the delete index.
//!
//! Deletes of the input token's prefix are looked up in the index, every hit
//! is verified with the full-string Damerau-Levenshtein distance, and the
//! result follows the escalation policy: distance-1 candidates alone when
//! there are at least `min_candidates` of them, otherwise distance 1 and 2.

use std::collections::HashSet;

use serde::Serialize;

use crate::dictionary::{prefix, DeleteIndex, DictionaryEntry, FrequencyDictionary, TermId};
use crate::distance::damerau_levenshtein_chars;
use crate::text::normalize;

pub const DEFAULT_MIN_CANDIDATES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub term: String,
    pub edit_distance: usize,
    /// Dictionary statistics at suggestion time.
    pub entry: DictionaryEntry,
    /// Ranker probability; `None` until ranked.
    pub score: Option<f64>,
}

impl Candidate {
    pub fn new(entry: &DictionaryEntry, edit_distance: usize) -> Self {
        Candidate {
            term: entry.term.clone(),
            edit_distance,
            entry: entry.clone(),
            score: None,
        }
    }
}

/// Verified corrections for `token`, or an empty list when the token is in
/// the dictionary or nothing lies within distance 2. Order is unspecified.
pub fn suggest(
    index: &DeleteIndex,
    dict: &FrequencyDictionary,
    token: &str,
    min_candidates: usize,
) -> Vec<Candidate> {
    debug_assert!(index.is_compatible_with(dict), "index built for another dictionary");
    let token = normalize(token);
    if token.is_empty() || dict.get(&token).is_some() {
        return Vec::new();
    }
    let max_distance = index.max_edit_distance().min(2);
    let token_chars: Vec<char> = token.chars().collect();
    let head: Vec<char> = prefix(&token, index.prefix_length()).chars().collect();

    let mut search = Search {
        index,
        dict,
        token: &token_chars,
        max_distance,
        seen: HashSet::new(),
        found: Vec::new(),
    };

    // Any term within distance 1 shares a key with the token at one deletion
    // or fewer on the token side.
    let mut level: Vec<Vec<char>> = vec![head];
    let mut keys_seen: HashSet<Vec<char>> = HashSet::new();
    search.visit(&level[0]);
    for depth in 1..=max_distance {
        if depth == 2 {
            let distance_one = search.found.iter().filter(|(_, d)| *d == 1).count();
            if distance_one >= min_candidates {
                break;
            }
        }
        let mut next = Vec::new();
        for key in &level {
            for i in 0..key.len() {
                let mut shorter = key.clone();
                shorter.remove(i);
                if keys_seen.insert(shorter.clone()) {
                    search.visit(&shorter);
                    next.push(shorter);
                }
            }
        }
        level = next;
    }

    let distance_one = search.found.iter().filter(|(_, d)| *d == 1).count();
    let keep_distance_two = distance_one < min_candidates;
    search
        .found
        .into_iter()
        .filter(|&(_, d)| d == 1 || keep_distance_two)
        .map(|(id, d)| Candidate::new(dict.entry(id), d))
        .collect()
}

struct Search<'a> {
    index: &'a DeleteIndex,
    dict: &'a FrequencyDictionary,
    token: &'a [char],
    max_distance: usize,
    seen: HashSet<TermId>,
    found: Vec<(TermId, usize)>,
}

impl Search<'_> {
    fn visit(&mut self, key: &[char]) {
        let key: String = key.iter().collect();
        for &id in self.index.lookup(&key) {
            if !self.seen.insert(id) {
                continue;
            }
            let term: Vec<char> = self.dict.entry(id).term.chars().collect();
            if term.len().abs_diff(self.token.len()) > self.max_distance {
                continue;
            }
            let d = damerau_levenshtein_chars(self.token, &term);
            if (1..=self.max_distance).contains(&d) {
                self.found.push((id, d));
            }
        }
    }
}
