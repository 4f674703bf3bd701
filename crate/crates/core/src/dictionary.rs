//! The frequency dictionary of correct words and its symmetric-delete index.
//!
//! The dictionary is assembled from any number of term-count sources
//! (language lexicons, product vocabulary, behavioral counts) plus an optional
//! per-term stats file. Every term is stored in its normalized form, and the
//! field-wise maxima used for feature scaling are computed when the
//! dictionary is frozen.
//!
//! The delete index maps every string obtainable from a term prefix by up to
//! `max_edit_distance` character deletions back to the terms that produce it.
//! Lookups then only need deletes of the input token.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::normalize;
use crate::tsv;

pub const DEFAULT_MAX_EDIT_DISTANCE: usize = 2;
pub const DEFAULT_PREFIX_LENGTH: usize = 7;

/// Identifier of a term: its position in the dictionary's sorted term list.
pub type TermId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DictionaryEntry {
    pub term: String,
    pub word_count: u64,
    pub asset_frequency: u64,
    pub download_count: u64,
}

/// Per-term counters, also used for the field-wise maxima.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub word_count: u64,
    pub asset_frequency: u64,
    pub download_count: u64,
}

impl Counts {
    fn add(&mut self, other: Counts) {
        self.word_count = self.word_count.saturating_add(other.word_count);
        self.asset_frequency = self.asset_frequency.saturating_add(other.asset_frequency);
        self.download_count = self.download_count.saturating_add(other.download_count);
    }

    fn max(self, other: Counts) -> Counts {
        Counts {
            word_count: self.word_count.max(other.word_count),
            asset_frequency: self.asset_frequency.max(other.asset_frequency),
            download_count: self.download_count.max(other.download_count),
        }
    }
}

impl DictionaryEntry {
    pub fn counts(&self) -> Counts {
        Counts {
            word_count: self.word_count,
            asset_frequency: self.asset_frequency,
            download_count: self.download_count,
        }
    }
}

/// Checks and normalizes a raw term. Returns `None` for terms that are empty
/// or contain whitespace once normalized.
pub fn normalize_term(raw: &str) -> Option<String> {
    let term = normalize(raw.trim());
    if term.is_empty() || term.chars().any(char::is_whitespace) {
        None
    } else {
        Some(term)
    }
}

/// Mutable accumulator; colliding terms have their counters summed.
#[derive(Debug, Clone, Default)]
pub struct DictionaryBuilder {
    locale: String,
    entries: BTreeMap<String, Counts>,
}

impl DictionaryBuilder {
    pub fn new(locale: impl Into<String>) -> Self {
        DictionaryBuilder {
            locale: locale.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Adds counters for `term`. Fails if the term is empty or contains whitespace.
    pub fn add(&mut self, term: &str, counts: Counts) -> Result<&mut Self> {
        let term = normalize_term(term)
            .ok_or_else(|| Error::Argument(format!("invalid dictionary term {term:?}")))?;
        self.entries.entry(term).or_default().add(counts);
        Ok(self)
    }

    pub fn add_word_count(&mut self, term: &str, word_count: u64) -> Result<&mut Self> {
        self.add(
            term,
            Counts {
                word_count,
                ..Counts::default()
            },
        )
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds every term/count source line of a `term<TAB>word_count` file.
    pub fn add_term_counts_file(&mut self, path: &Path) -> Result<&mut Self> {
        let text = tsv::read_to_string(path)?;
        for record in tsv::records(&text) {
            tsv::expect_fields(path, &record, 2)?;
            let term = normalize_term(record.fields[0])
                .ok_or_else(|| Error::load(path, record.line, "empty term or term containing whitespace"))?;
            let count = tsv::parse_count(path, record.line, record.fields[1], "word_count")?;
            self.entries.entry(term).or_default().add(Counts {
                word_count: count,
                ..Counts::default()
            });
        }
        Ok(self)
    }

    /// Adds a `term<TAB>asset_frequency<TAB>download_count` stats file.
    pub fn add_stats_file(&mut self, path: &Path) -> Result<&mut Self> {
        let text = tsv::read_to_string(path)?;
        for record in tsv::records(&text) {
            tsv::expect_fields(path, &record, 3)?;
            let term = normalize_term(record.fields[0])
                .ok_or_else(|| Error::load(path, record.line, "empty term or term containing whitespace"))?;
            let asset_frequency =
                tsv::parse_count(path, record.line, record.fields[1], "asset_frequency")?;
            let download_count =
                tsv::parse_count(path, record.line, record.fields[2], "download_count")?;
            self.entries.entry(term).or_default().add(Counts {
                word_count: 0,
                asset_frequency,
                download_count,
            });
        }
        Ok(self)
    }

    pub fn build(self) -> Result<FrequencyDictionary> {
        if self.entries.is_empty() {
            return Err(Error::Config("dictionary sources contain no terms".into()));
        }
        let entries = self
            .entries
            .into_iter()
            .map(|(term, c)| DictionaryEntry {
                term,
                word_count: c.word_count,
                asset_frequency: c.asset_frequency,
                download_count: c.download_count,
            })
            .collect();
        Ok(FrequencyDictionary::from_sorted(self.locale, entries))
    }
}

/// Frozen dictionary. Terms are sorted, which fixes their [`TermId`]s.
#[derive(Debug, Clone)]
pub struct FrequencyDictionary {
    locale: String,
    entries: Vec<DictionaryEntry>,
    ids: HashMap<String, TermId>,
    max_counts: Counts,
    fingerprint: u64,
}

impl PartialEq for FrequencyDictionary {
    fn eq(&self, other: &Self) -> bool {
        self.locale == other.locale && self.entries == other.entries
    }
}

impl FrequencyDictionary {
    fn from_sorted(locale: String, entries: Vec<DictionaryEntry>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].term < w[1].term));
        assert!(entries.len() <= TermId::MAX as usize, "too many dictionary terms");
        let ids = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.term.clone(), i as TermId))
            .collect();
        let max_counts = entries
            .iter()
            .fold(Counts::default(), |acc, e| acc.max(e.counts()));
        let mut hasher = FnvHasher::default();
        for e in &entries {
            hasher.write(e.term.as_bytes());
            hasher.write_u8(0);
        }
        FrequencyDictionary {
            locale,
            entries,
            ids,
            max_counts,
            fingerprint: hasher.finish(),
        }
    }

    pub fn locale(&self) -> &str {
        &self.locale
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Field-wise maxima over all entries, used to scale count features.
    pub fn max_counts(&self) -> Counts {
        self.max_counts
    }

    /// FNV-1a hash of the sorted term list, stable across builds. A delete
    /// index is only valid for a dictionary with the same fingerprint.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// True iff the normalized token is a stored term.
    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(normalize(token).as_str())
    }

    /// Lookup by an already-normalized term.
    pub fn get(&self, term: &str) -> Option<&DictionaryEntry> {
        self.ids.get(term).map(|&id| &self.entries[id as usize])
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn entry(&self, id: TermId) -> &DictionaryEntry {
        &self.entries[id as usize]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &DictionaryEntry> {
        self.entries.iter()
    }

    pub fn to_builder(&self) -> DictionaryBuilder {
        DictionaryBuilder {
            locale: self.locale.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| (e.term.clone(), e.counts()))
                .collect(),
        }
    }

    /// Serializes to the four-column artifact format
    /// `term<TAB>word_count<TAB>asset_frequency<TAB>download_count`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 24);
        let _ = writeln!(out, "# locale\t{}", self.locale);
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                e.term, e.word_count, e.asset_frequency, e.download_count
            );
        }
        out
    }

    /// Reads a file written by [`FrequencyDictionary::to_tsv`].
    pub fn load_artifact(path: &Path, locale: &str) -> Result<Self> {
        let text = tsv::read_to_string(path)?;
        let mut builder = DictionaryBuilder::new(locale);
        for record in tsv::records(&text) {
            tsv::expect_fields(path, &record, 4)?;
            let term = normalize_term(record.fields[0])
                .ok_or_else(|| Error::load(path, record.line, "empty term or term containing whitespace"))?;
            let counts = Counts {
                word_count: tsv::parse_count(path, record.line, record.fields[1], "word_count")?,
                asset_frequency: tsv::parse_count(path, record.line, record.fields[2], "asset_frequency")?,
                download_count: tsv::parse_count(path, record.line, record.fields[3], "download_count")?,
            };
            builder.entries.entry(term).or_default().add(counts);
        }
        builder.build()
    }
}

/// Builds a dictionary from a lexicon, custom vocabularies and an optional
/// stats file. Colliding terms have their counters summed.
pub fn load_dictionary(
    lexicon_file: &Path,
    custom_vocab_files: &[impl AsRef<Path>],
    stats_file: Option<&Path>,
    locale: &str,
) -> Result<FrequencyDictionary> {
    let mut builder = DictionaryBuilder::new(locale);
    builder.add_term_counts_file(lexicon_file)?;
    for file in custom_vocab_files {
        builder.add_term_counts_file(file.as_ref())?;
    }
    if let Some(stats) = stats_file {
        builder.add_stats_file(stats)?;
    }
    builder.build()
}

/// Every string reachable from `term` by 1..=`max_edit_distance` single
/// character deletions. The term itself is not included.
pub fn generate_deletes(term: &str, max_edit_distance: usize) -> HashSet<String> {
    let chars: Vec<char> = term.chars().collect();
    let mut out = HashSet::new();
    collect_deletes(&chars, max_edit_distance, &mut out);
    out
}

fn collect_deletes(chars: &[char], max_edit_distance: usize, out: &mut HashSet<String>) {
    let mut frontier: Vec<Vec<char>> = vec![chars.to_vec()];
    for _ in 0..max_edit_distance {
        let mut next = Vec::new();
        for word in &frontier {
            for i in 0..word.len() {
                let mut shorter = Vec::with_capacity(word.len() - 1);
                shorter.extend_from_slice(&word[..i]);
                shorter.extend_from_slice(&word[i + 1..]);
                let s: String = shorter.iter().collect();
                if out.insert(s) {
                    next.push(shorter);
                }
            }
        }
        frontier = next;
    }
}

/// Symmetric-delete index over a [`FrequencyDictionary`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeleteIndex {
    max_edit_distance: usize,
    prefix_length: usize,
    variants: HashMap<Box<str>, Vec<TermId>>,
    dictionary_fingerprint: u64,
    term_count: usize,
}

/// Leading `prefix_length` characters of `s`.
pub fn prefix(s: &str, prefix_length: usize) -> &str {
    match s.char_indices().nth(prefix_length) {
        Some((byte, _)) => &s[..byte],
        None => s,
    }
}

pub fn build_delete_index(
    dict: &FrequencyDictionary,
    max_edit_distance: usize,
    prefix_length: usize,
) -> DeleteIndex {
    assert!(prefix_length > 0, "prefix_length must be positive");
    let mut variants: HashMap<Box<str>, Vec<TermId>> = HashMap::new();
    let mut deletes = HashSet::new();
    for (id, entry) in dict.iter().enumerate() {
        let id = id as TermId;
        let head = prefix(&entry.term, prefix_length);
        deletes.clear();
        let chars: Vec<char> = head.chars().collect();
        collect_deletes(&chars, max_edit_distance, &mut deletes);
        deletes.insert(head.to_owned());
        deletes.insert(entry.term.clone());
        for d in deletes.drain() {
            variants.entry(d.into_boxed_str()).or_default().push(id);
        }
    }
    // Ids were pushed in increasing order, so each list is already sorted and unique.
    for ids in variants.values_mut() {
        ids.shrink_to_fit();
    }
    DeleteIndex {
        max_edit_distance,
        prefix_length,
        variants,
        dictionary_fingerprint: dict.fingerprint(),
        term_count: dict.len(),
    }
}

impl DeleteIndex {
    pub fn max_edit_distance(&self) -> usize {
        self.max_edit_distance
    }

    pub fn prefix_length(&self) -> usize {
        self.prefix_length
    }

    pub fn dictionary_fingerprint(&self) -> u64 {
        self.dictionary_fingerprint
    }

    pub fn is_compatible_with(&self, dict: &FrequencyDictionary) -> bool {
        self.dictionary_fingerprint == dict.fingerprint() && self.term_count == dict.len()
    }

    /// Term ids whose prefix deletes include `variant`.
    pub fn lookup(&self, variant: &str) -> &[TermId] {
        self.variants.get(variant).map_or(&[], Vec::as_slice)
    }

    /// The originating terms of `variant`, resolved against `dict`.
    pub fn terms<'d>(&self, dict: &'d FrequencyDictionary, variant: &str) -> Vec<&'d str> {
        self.lookup(variant)
            .iter()
            .map(|&id| dict.entry(id).term.as_str())
            .collect()
    }

    pub fn variant_count(&self) -> usize {
        self.variants.len()
    }

    /// Sorted `variant<TAB>comma-joined terms` dump, for inspection and
    /// reproducibility checks.
    pub fn to_tsv(&self, dict: &FrequencyDictionary) -> String {
        let mut keys: Vec<&str> = self.variants.keys().map(|k| &**k).collect();
        keys.sort_unstable();
        let mut out = String::new();
        for key in keys {
            let _ = writeln!(out, "{}\t{}", key, self.terms(dict, key).join(","));
        }
        out
    }
}
