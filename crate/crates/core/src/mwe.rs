//! Multi-word expression rewriting for compounding and decompounding errors.
//!
//! Keys are token sequences. Rewriting scans the query left to right and at
//! each position replaces the longest key that matches there. Replacements
//! are emitted as-is and never re-scanned.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text::{canonical_query, lookup_tokens, tokenize};
use crate::tsv;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MweMap {
    application: String,
    entries: HashMap<String, String>,
    max_key_tokens: usize,
}

impl MweMap {
    pub fn new(application: impl Into<String>) -> Self {
        MweMap {
            application: application.into(),
            ..MweMap::default()
        }
    }

    pub fn application(&self) -> &str {
        &self.application
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, phrase: &str) -> Option<&str> {
        self.entries.get(&canonical_query(phrase)).map(String::as_str)
    }

    /// Adds a rewrite. Both sides are normalized; identity rewrites and
    /// conflicting duplicates are rejected.
    pub fn insert(&mut self, phrase: &str, replacement: &str) -> Result<()> {
        let key = canonical_query(phrase);
        let value = canonical_query(replacement);
        if key.is_empty() || value.is_empty() {
            return Err(Error::Argument("empty MWE phrase or replacement".into()));
        }
        if key == value {
            return Err(Error::Argument(format!("MWE entry {key:?} maps to itself")));
        }
        if let Some(existing) = self.entries.get(&key) {
            if existing != &value {
                return Err(Error::Argument(format!(
                    "conflicting MWE entries for {key:?}: {existing:?} and {value:?}"
                )));
            }
            return Ok(());
        }
        self.max_key_tokens = self.max_key_tokens.max(key.split(' ').count());
        self.entries.insert(key, value);
        Ok(())
    }

    /// Reads a `wrong phrase<TAB>replacement phrase` file.
    pub fn load(path: &Path, application: &str) -> Result<Self> {
        let text = tsv::read_to_string(path)?;
        let mut map = MweMap::new(application);
        for record in tsv::records(&text) {
            tsv::expect_fields(path, &record, 2)?;
            map.insert(record.fields[0], record.fields[1])
                .map_err(|e| Error::load(path, record.line, e.to_string()))?;
        }
        Ok(map)
    }

    /// Rewritten token list. Matching is on lowercase forms; tokens outside
    /// any match keep their original casing.
    pub fn rewrite_tokens(&self, query: &str) -> Vec<String> {
        let original = tokenize(query);
        if self.entries.is_empty() {
            return original;
        }
        let lower = lookup_tokens(query);
        let mut out = Vec::with_capacity(original.len());
        let mut i = 0;
        while i < lower.len() {
            let longest = self.max_key_tokens.min(lower.len() - i);
            let hit = (1..=longest).rev().find_map(|len| {
                self.entries
                    .get(&lower[i..i + len].join(" "))
                    .map(|replacement| (len, replacement))
            });
            match hit {
                Some((len, replacement)) => {
                    out.extend(replacement.split(' ').map(str::to_owned));
                    i += len;
                }
                None => {
                    out.push(original[i].clone());
                    i += 1;
                }
            }
        }
        out
    }
}

/// Single-pass greedy longest-match rewrite; output tokens joined by single spaces.
pub fn apply_mwe(query: &str, map: &MweMap) -> String {
    map.rewrite_tokens(query).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(pairs: &[(&str, &str)]) -> MweMap {
        let mut m = MweMap::new("cchome");
        for (k, v) in pairs {
            m.insert(k, v).unwrap();
        }
        m
    }

    #[test]
    fn compound_is_split() {
        let m = map(&[("creativecloud", "creative cloud")]);
        assert_eq!(apply_mwe("creativecloud", &m), "creative cloud");
        assert_eq!(apply_mwe("CreativeCloud download", &m), "creative cloud download");
    }

    #[test]
    fn decompounded_phrase_is_joined() {
        let m = map(&[("photo shop express", "photoshop express")]);
        assert_eq!(apply_mwe("photo shop express", &m), "photoshop express");
        assert_eq!(apply_mwe("photo  shop   express templates", &m), "photoshop express templates");
    }

    #[test]
    fn no_match_is_identity() {
        let m = map(&[("creativecloud", "creative cloud")]);
        assert_eq!(apply_mwe("Atlantic Mackerel", &m), "Atlantic Mackerel");
        assert_eq!(apply_mwe("", &m), "");
    }

    #[test]
    fn longest_match_wins() {
        let m = map(&[("photo shop", "photoshop"), ("photo shop express", "photoshop express")]);
        assert_eq!(apply_mwe("photo shop express", &m), "photoshop express");
        assert_eq!(apply_mwe("photo shop elements", &m), "photoshop elements");
    }

    #[test]
    fn replacements_are_not_rescanned() {
        let m = map(&[("ab", "c d"), ("c d", "e")]);
        assert_eq!(apply_mwe("ab", &m), "c d");
        assert_eq!(apply_mwe("c d", &m), "e");
    }

    #[test]
    fn invalid_entries() {
        let mut m = MweMap::new("stock");
        assert!(m.insert("photo shop", "Photo  Shop").is_err());
        assert!(m.insert("", "x").is_err());
        m.insert("photo shop", "photoshop").unwrap();
        m.insert("Photo Shop", "photoshop").unwrap();
        assert!(m.insert("photo shop", "photo-shop").is_err());
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cchome.tsv");
        std::fs::write(&path, "# app rewrites\ncreativecloud\tcreative cloud\nphoto shop express\tphotoshop express\n").unwrap();
        let m = MweMap::load(&path, "cchome").unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.get("CreativeCloud"), Some("creative cloud"));

        std::fs::write(&path, "a\tb\nc\tc\n").unwrap();
        assert!(matches!(MweMap::load(&path, "x"), Err(Error::Load { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn single_pass_output_is_bounded(
            pairs in proptest::collection::vec(("[ab]{1,2}( [ab]{1,2}){0,2}", "[abc]{1,3}( [abc]{1,3}){0,1}"), 0..6),
            query in "[ab]{1,2}( [ab]{1,2}){0,6}",
        ) {
            let mut m = MweMap::new("x");
            let mut growth = 0usize;
            for (k, v) in &pairs {
                if m.insert(k, v).is_ok() {
                    growth = growth.max(v.len());
                }
            }
            let out = apply_mwe(&query, &m);
            let n_tokens = query.split(' ').count();
            prop_assert!(out.len() <= query.len() + n_tokens * (growth + 1));
        }

        #[test]
        fn idempotent_without_new_keys(query in "[a-z]{1,5}( [a-z]{1,5}){0,4}") {
            let m = map(&[("creativecloud", "creative cloud"), ("photo shop", "photoshop")]);
            let once = apply_mwe(&query, &m);
            prop_assert_eq!(apply_mwe(&once, &m), once.clone());
        }
    }
}
