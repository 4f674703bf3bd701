//! Synthetic training data: probability-weighted spelling errors injected
//! into correctly spelled queries, plus loaders for misspelling-pair corpora.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keyboard::KeyboardLayout;
use crate::text::{canonical_query, lookup_tokens};
use crate::tsv;

pub const DEFAULT_ERROR_PROB: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ErrorType {
    LetterOrder,
    VowelAddRemove,
    LetterAddRemove,
    LetterChange,
    AccentFold,
    DoubleAddRemove,
}

impl ErrorType {
    pub const ALL: [ErrorType; 6] = [
        ErrorType::LetterOrder,
        ErrorType::VowelAddRemove,
        ErrorType::LetterAddRemove,
        ErrorType::LetterChange,
        ErrorType::AccentFold,
        ErrorType::DoubleAddRemove,
    ];

    /// Relative sampling weight, 7:5:4:2:7:2 in declaration order.
    pub const fn weight(self) -> u32 {
        match self {
            ErrorType::LetterOrder => 7,
            ErrorType::VowelAddRemove => 5,
            ErrorType::LetterAddRemove => 4,
            ErrorType::LetterChange => 2,
            ErrorType::AccentFold => 7,
            ErrorType::DoubleAddRemove => 2,
        }
    }

    pub fn total_weight() -> u32 {
        Self::ALL.iter().map(|t| t.weight()).sum()
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::LetterOrder => "LETTER_ORDER",
            ErrorType::VowelAddRemove => "VOWEL_ADD_REMOVE",
            ErrorType::LetterAddRemove => "LETTER_ADD_REMOVE",
            ErrorType::LetterChange => "LETTER_CHANGE",
            ErrorType::AccentFold => "ACCENT_FOLD",
            ErrorType::DoubleAddRemove => "DOUBLE_ADD_REMOVE",
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown error type {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErroredQuery {
    pub original: String,
    pub original_tokens: Vec<String>,
    pub corrupted_tokens: Vec<String>,
    /// Token index and the error type actually applied (after fallbacks).
    pub applied: Vec<(usize, ErrorType)>,
}

impl ErroredQuery {
    pub fn corrupted_query(&self) -> String {
        self.corrupted_tokens.join(" ")
    }
}

const VOWELS: &str = "aeiouyàâäéèêëîïôöùûüÿ";

fn is_vowel(c: char) -> bool {
    VOWELS.contains(c)
}

/// Unaccented counterpart of an accented character.
fn fold_accent(c: char) -> Option<&'static str> {
    Some(match c {
        'à' | 'â' | 'ä' => "a",
        'é' | 'è' | 'ê' | 'ë' => "e",
        'î' | 'ï' => "i",
        'ô' | 'ö' => "o",
        'ù' | 'û' | 'ü' => "u",
        'ç' => "c",
        'ß' => "ss",
        _ => return None,
    })
}

/// Weighted companions for vowel insertion: after a vowel, which vowel is
/// likely to be typed next.
#[derive(Debug, Clone)]
pub struct VowelTable {
    companions: HashMap<char, Vec<(char, u32)>>,
}

impl Default for VowelTable {
    fn default() -> Self {
        let mut companions = HashMap::new();
        companions.insert('a', vec![('i', 4), ('e', 3), ('u', 2), ('y', 1)]);
        companions.insert('e', vec![('i', 6), ('a', 3), ('e', 2), ('u', 1)]);
        companions.insert('i', vec![('e', 4), ('a', 3), ('o', 2), ('u', 1)]);
        companions.insert('o', vec![('u', 4), ('o', 3), ('i', 2), ('a', 1)]);
        companions.insert('u', vec![('e', 3), ('i', 3), ('a', 2), ('o', 1)]);
        companions.insert('y', vec![('e', 2), ('o', 1)]);
        VowelTable { companions }
    }
}

impl VowelTable {
    pub fn for_locale(locale: &str) -> Self {
        let mut table = VowelTable::default();
        match locale.split(['-', '_']).next().unwrap_or("") {
            "fr" => {
                table.set('a', vec![('i', 5), ('u', 3), ('e', 2)]);
                table.set('e', vec![('a', 4), ('i', 4), ('u', 3)]);
                table.set('o', vec![('u', 6), ('i', 3)]);
            }
            "de" => {
                table.set('a', vec![('u', 5), ('i', 3), ('a', 2)]);
                table.set('e', vec![('i', 6), ('u', 3), ('e', 2)]);
                table.set('i', vec![('e', 6), ('a', 1)]);
            }
            _ => {}
        }
        table
    }

    /// Replaces the companion list for `vowel`.
    pub fn set(&mut self, vowel: char, companions: Vec<(char, u32)>) {
        self.companions.insert(vowel, companions);
    }

    fn companions(&self, vowel: char) -> &[(char, u32)] {
        let base = fold_accent(vowel)
            .and_then(|s| s.chars().next())
            .unwrap_or(vowel);
        self.companions.get(&base).map_or(&[], Vec::as_slice)
    }
}

/// Locale-specific error injector.
#[derive(Debug, Clone)]
pub struct ErrorInjector {
    keyboard: KeyboardLayout,
    vowels: VowelTable,
    type_weights: WeightedIndex<u32>,
}

impl ErrorInjector {
    pub fn new(locale: &str) -> Self {
        Self::with_tables(KeyboardLayout::for_locale(locale), VowelTable::for_locale(locale))
    }

    pub fn with_tables(keyboard: KeyboardLayout, vowels: VowelTable) -> Self {
        let type_weights = WeightedIndex::new(ErrorType::ALL.iter().map(|t| t.weight()))
            .expect("error-type weights are positive");
        ErrorInjector {
            keyboard,
            vowels,
            type_weights,
        }
    }

    pub fn sample_type<R: Rng + ?Sized>(&self, rng: &mut R) -> ErrorType {
        ErrorType::ALL[self.type_weights.sample(rng)]
    }

    /// Corrupts each token of `query` independently with probability
    /// `per_token_error_prob`; if none was selected, one token chosen
    /// uniformly is corrupted.
    pub fn inject<R: Rng + ?Sized>(
        &self,
        query: &str,
        rng: &mut R,
        per_token_error_prob: f64,
    ) -> Result<ErroredQuery> {
        if !(per_token_error_prob > 0.0 && per_token_error_prob <= 1.0) {
            return Err(Error::Argument(format!(
                "per-token error probability must be in (0, 1], got {per_token_error_prob}"
            )));
        }
        let tokens = lookup_tokens(query);
        if tokens.is_empty() {
            return Err(Error::Argument("cannot inject errors into an empty query".into()));
        }
        let mut selected: Vec<usize> = (0..tokens.len())
            .filter(|_| rng.gen_bool(per_token_error_prob))
            .collect();
        if selected.is_empty() {
            selected.push(rng.gen_range(0..tokens.len()));
        }
        let mut corrupted = tokens.clone();
        let mut applied = Vec::with_capacity(selected.len());
        for i in selected {
            let wanted = self.sample_type(rng);
            let (token, used) = self.apply(&tokens[i], wanted, rng);
            corrupted[i] = token;
            applied.push((i, used));
        }
        Ok(ErroredQuery {
            original: query.to_owned(),
            original_tokens: tokens,
            corrupted_tokens: corrupted,
            applied,
        })
    }

    /// Applies one error of type `wanted` to a non-empty token. Inapplicable
    /// types fall back to a letter swap, and tokens without a swappable pair
    /// get a character insertion. Returns the new token and the type
    /// actually applied; the result always differs from the input.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        token: &str,
        wanted: ErrorType,
        rng: &mut R,
    ) -> (String, ErrorType) {
        let chars: Vec<char> = token.chars().collect();
        assert!(!chars.is_empty(), "cannot corrupt an empty token");
        let attempt = match wanted {
            ErrorType::LetterOrder => self.letter_order(&chars, rng),
            ErrorType::VowelAddRemove => self.vowel_add_remove(&chars, rng),
            ErrorType::LetterAddRemove => Some(self.letter_add_remove(&chars, rng)),
            ErrorType::LetterChange => Some(self.letter_change(&chars, rng)),
            ErrorType::AccentFold => self.accent_fold(&chars, rng),
            ErrorType::DoubleAddRemove => Some(self.double_add_remove(&chars, rng)),
        };
        let (out, used) = match attempt {
            Some(out) => (out, wanted),
            None => match self.letter_order(&chars, rng) {
                Some(out) => (out, ErrorType::LetterOrder),
                None => (self.insert_char(&chars, rng), ErrorType::LetterAddRemove),
            },
        };
        debug_assert_ne!(out, chars);
        (out.into_iter().collect(), used)
    }

    fn letter_order<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Option<Vec<char>> {
        let swappable: Vec<usize> = (0..chars.len().saturating_sub(1))
            .filter(|&i| chars[i] != chars[i + 1])
            .collect();
        let &i = pick(&swappable, rng)?;
        let mut out = chars.to_vec();
        out.swap(i, i + 1);
        Some(out)
    }

    fn vowel_add_remove<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Option<Vec<char>> {
        let vowel_positions: Vec<usize> = (0..chars.len()).filter(|&i| is_vowel(chars[i])).collect();
        let &i = pick(&vowel_positions, rng)?;
        let mut out = chars.to_vec();
        let companions = self.vowels.companions(chars[i]);
        if chars.len() > 1 && (companions.is_empty() || rng.gen_bool(0.5)) {
            out.remove(i);
        } else if !companions.is_empty() {
            let weights = WeightedIndex::new(companions.iter().map(|&(_, w)| w)).ok()?;
            out.insert(i + 1, companions[weights.sample(rng)].0);
        } else {
            return None;
        }
        Some(out)
    }

    fn letter_add_remove<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Vec<char> {
        if chars.len() > 1 && rng.gen_bool(0.5) {
            let mut out = chars.to_vec();
            out.remove(rng.gen_range(0..chars.len()));
            out
        } else {
            self.insert_char(chars, rng)
        }
    }

    /// Inserts either a copy of a neighboring character or a key adjacent to it.
    fn insert_char<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Vec<char> {
        let at = rng.gen_range(0..=chars.len());
        let anchor = if at == 0 {
            chars[0]
        } else if at == chars.len() || rng.gen_bool(0.5) {
            chars[at - 1]
        } else {
            chars[at]
        };
        let keys = self.keyboard.neighbors(anchor);
        let inserted = if keys.is_empty() || rng.gen_bool(0.3) {
            anchor
        } else {
            keys[rng.gen_range(0..keys.len())]
        };
        let mut out = chars.to_vec();
        out.insert(at, inserted);
        out
    }

    /// Substitutes one character with an adjacent key, which may be a digit
    /// or punctuation mark.
    fn letter_change<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Vec<char> {
        let on_layout: Vec<usize> = (0..chars.len())
            .filter(|&i| !self.keyboard.neighbors(chars[i]).is_empty())
            .collect();
        let mut out = chars.to_vec();
        match pick(&on_layout, rng) {
            Some(&i) => {
                let keys = self.keyboard.neighbors(chars[i]);
                out[i] = keys[rng.gen_range(0..keys.len())];
            }
            None => {
                let i = rng.gen_range(0..chars.len());
                let mut c = chars[i];
                while c == chars[i] {
                    c = rng.gen_range(b'a'..=b'z') as char;
                }
                out[i] = c;
            }
        }
        out
    }

    fn accent_fold<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Option<Vec<char>> {
        let accented: Vec<usize> = (0..chars.len()).filter(|&i| fold_accent(chars[i]).is_some()).collect();
        let &i = pick(&accented, rng)?;
        let mut out = chars[..i].to_vec();
        out.extend(fold_accent(chars[i])?.chars());
        out.extend_from_slice(&chars[i + 1..]);
        Some(out)
    }

    /// Collapses a doubled letter or doubles a single one.
    fn double_add_remove<R: Rng + ?Sized>(&self, chars: &[char], rng: &mut R) -> Vec<char> {
        let doubles: Vec<usize> = (0..chars.len().saturating_sub(1))
            .filter(|&i| chars[i] == chars[i + 1])
            .collect();
        let mut out = chars.to_vec();
        match pick(&doubles, rng) {
            Some(&i) if rng.gen_bool(0.5) => {
                out.remove(i);
            }
            _ => {
                let i = rng.gen_range(0..chars.len());
                out.insert(i, chars[i]);
            }
        }
        out
    }
}

fn pick<'a, T, R: Rng + ?Sized>(items: &'a [T], rng: &mut R) -> Option<&'a T> {
    if items.is_empty() {
        None
    } else {
        Some(&items[rng.gen_range(0..items.len())])
    }
}

/// [`ErrorInjector::inject`] with the English tables.
pub fn inject_errors<R: Rng + ?Sized>(
    query: &str,
    rng: &mut R,
    per_token_error_prob: f64,
) -> Result<ErroredQuery> {
    ErrorInjector::new("en").inject(query, rng, per_token_error_prob)
}

/// [`ErrorInjector::apply`] with the English tables, returning only the token.
pub fn apply_error<R: Rng + ?Sized>(token: &str, error_type: ErrorType, rng: &mut R) -> String {
    ErrorInjector::new("en").apply(token, error_type, rng).0
}

/// One corrupted query per input query, drawn from a single seeded stream.
pub fn generate_dataset<R: Rng + ?Sized>(
    queries: &[String],
    injector: &ErrorInjector,
    rng: &mut R,
    per_token_error_prob: f64,
) -> Result<Vec<ErroredQuery>> {
    queries
        .iter()
        .filter(|q| !q.trim().is_empty())
        .map(|q| injector.inject(q, rng, per_token_error_prob))
        .collect()
}

/// Reads correctly spelled source queries, one per line. A `query<TAB>count`
/// line contributes its first field.
pub fn read_queries(path: &Path) -> Result<Vec<String>> {
    let text = tsv::read_to_string(path)?;
    Ok(tsv::records(&text)
        .map(|r| r.fields[0].trim().to_owned())
        .filter(|q| !q.is_empty())
        .collect())
}

/// A row of the generated dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRow {
    pub corrupted: String,
    pub original: String,
    pub error_types: Vec<ErrorType>,
}

impl From<&ErroredQuery> for DatasetRow {
    fn from(q: &ErroredQuery) -> Self {
        DatasetRow {
            corrupted: q.corrupted_query(),
            original: q.original_tokens.join(" "),
            error_types: q.applied.iter().map(|&(_, t)| t).collect(),
        }
    }
}

/// `corrupted_query<TAB>original_query<TAB>comma-joined error types`.
pub fn dataset_to_tsv(rows: &[DatasetRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let types: Vec<&str> = row.error_types.iter().map(|t| t.name()).collect();
        let _ = writeln!(out, "{}\t{}\t{}", row.corrupted, row.original, types.join(","));
    }
    out
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let text = tsv::read_to_string(path)?;
    tsv::records(&text)
        .map(|record| {
            tsv::expect_fields(path, &record, 3)?;
            let error_types = record.fields[2]
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e: Error| Error::load(path, record.line, e.to_string())))
                .collect::<Result<_>>()?;
            Ok(DatasetRow {
                corrupted: canonical_query(record.fields[0]),
                original: canonical_query(record.fields[1]),
                error_types,
            })
        })
        .collect()
}

/// Reads a `misspelled<TAB>correct` pair list. Duplicates are kept.
pub fn load_misspelling_corpus(path: &Path) -> Result<Vec<(String, String)>> {
    let text = tsv::read_to_string(path)?;
    tsv::records(&text)
        .map(|record| {
            tsv::expect_fields(path, &record, 2)?;
            let misspelled = canonical_query(record.fields[0]);
            let correct = canonical_query(record.fields[1]);
            if misspelled.is_empty() || correct.is_empty() {
                return Err(Error::load(path, record.line, "empty field"));
            }
            Ok((misspelled, correct))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::damerau_levenshtein;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn outputs(token: &str, ty: ErrorType, seeds: u64) -> HashSet<String> {
        let inj = ErrorInjector::new("en");
        (0..seeds)
            .map(|s| inj.apply(token, ty, &mut ChaCha8Rng::seed_from_u64(s)).0)
            .collect()
    }

    #[test]
    fn weights_follow_ratio() {
        let w: Vec<u32> = ErrorType::ALL.iter().map(|t| t.weight()).collect();
        assert_eq!(w, [7, 5, 4, 2, 7, 2]);
        assert_eq!(ErrorType::total_weight(), 27);
    }

    #[test]
    fn names_round_trip() {
        for t in ErrorType::ALL {
            assert_eq!(t.name().parse::<ErrorType>().unwrap(), t);
        }
        assert!("TYPO".parse::<ErrorType>().is_err());
    }

    #[test]
    fn accent_fold_examples() {
        assert_eq!(outputs("wörter", ErrorType::AccentFold, 20), HashSet::from(["worter".to_string()]));
        assert_eq!(outputs("français", ErrorType::AccentFold, 20), HashSet::from(["francais".to_string()]));
        assert_eq!(outputs("straße", ErrorType::AccentFold, 5), HashSet::from(["strasse".to_string()]));
    }

    #[test]
    fn double_collapse_example() {
        let outs = outputs("happiness", ErrorType::DoubleAddRemove, 200);
        assert!(outs.contains("hapiness"));
        assert!(outs.contains("happines"));
        for o in &outs {
            assert_eq!(damerau_levenshtein(o, "happiness"), 1, "{o}");
        }
    }

    #[test]
    fn letter_order_example() {
        let outs = outputs("check", ErrorType::LetterOrder, 200);
        assert!(outs.contains("chekc"));
        assert!(outs.is_subset(&["hceck", "cehck", "chcek", "chekc"].map(String::from).into()));
    }

    #[test]
    fn letter_change_uses_adjacent_keys() {
        let outs = outputs("medal", ErrorType::LetterChange, 500);
        assert!(outs.contains(",edal"), "{outs:?}");
        let kb = KeyboardLayout::for_locale("en");
        for o in &outs {
            let diff: Vec<(char, char)> = "medal".chars().zip(o.chars()).filter(|(a, b)| a != b).collect();
            assert_eq!(diff.len(), 1, "{o}");
            assert!(kb.neighbors(diff[0].0).contains(&diff[0].1), "{o}");
        }
        assert!(outputs("park", ErrorType::LetterChange, 500).contains("0ark"));
    }

    #[test]
    fn vowel_insertions_follow_table() {
        let outs = outputs("malleable", ErrorType::VowelAddRemove, 500);
        assert!(outs.contains("mallable"));
        assert!(outs.contains("malleiable"));
        for o in &outs {
            assert_eq!(o.chars().count().abs_diff(9), 1);
        }
    }

    #[test]
    fn inapplicable_types_fall_back() {
        let inj = ErrorInjector::new("en");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (out, used) = inj.apply("check", ErrorType::AccentFold, &mut rng);
        assert_eq!(used, ErrorType::LetterOrder);
        assert_eq!(damerau_levenshtein(&out, "check"), 1);

        let (out, used) = inj.apply("xyz", ErrorType::VowelAddRemove, &mut rng);
        assert_eq!(used, ErrorType::VowelAddRemove, "y counts as a vowel");
        assert_ne!(out, "xyz");

        let (out, used) = inj.apply("q", ErrorType::LetterOrder, &mut rng);
        assert_eq!(used, ErrorType::LetterAddRemove);
        assert_eq!(out.chars().count(), 2);

        let (_, used) = inj.apply("zz", ErrorType::AccentFold, &mut rng);
        assert_eq!(used, ErrorType::LetterAddRemove);
    }

    #[test]
    fn every_type_changes_every_token() {
        let inj = ErrorInjector::new("de");
        let tokens = ["a", "é", "aa", "ß", "x", "0ark", "wörter", "photoshop", "zz"];
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for t in tokens {
                for ty in ErrorType::ALL {
                    let (out, _) = inj.apply(t, ty, &mut rng);
                    assert_ne!(out, t, "{t} {ty}");
                    assert!(!out.is_empty());
                }
            }
        }
    }

    #[test]
    fn single_token_query_always_corrupted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = inject_errors("museum", &mut rng, 1e-12).unwrap();
            assert_eq!(q.applied.len(), 1);
            assert_ne!(q.corrupted_tokens[0], "museum");
        }
    }

    #[test]
    fn table_two_style_queries() {
        let inj = ErrorInjector::new("en");
        let mut hit_medal = false;
        for seed in 0..2000 {
            let q = inj.inject("medal icon", &mut ChaCha8Rng::seed_from_u64(seed), 0.5).unwrap();
            if q.corrupted_tokens == [",edal", "icon"] {
                assert_eq!(q.applied, [(0, ErrorType::LetterChange)]);
                hit_medal = true;
                break;
            }
        }
        assert!(hit_medal);

        let mut hit_double = false;
        for seed in 0..2000 {
            let q = inj
                .inject("burgundy background", &mut ChaCha8Rng::seed_from_u64(seed), 0.5)
                .unwrap();
            if q.corrupted_tokens == ["burgundy", "backgrround"] {
                assert_eq!(q.applied.len(), 1);
                hit_double = true;
                break;
            }
        }
        assert!(hit_double);
    }

    #[test]
    fn injection_is_deterministic() {
        let inj = ErrorInjector::new("fr");
        for seed in 0..20 {
            let a = inj.inject("glacier national park and hike", &mut ChaCha8Rng::seed_from_u64(seed), 0.5);
            let b = inj.inject("glacier national park and hike", &mut ChaCha8Rng::seed_from_u64(seed), 0.5);
            assert_eq!(a.unwrap(), b.unwrap());
        }
    }

    #[test]
    fn invalid_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(inject_errors("", &mut rng, 0.5), Err(Error::Argument(_))));
        assert!(matches!(inject_errors("  ", &mut rng, 0.5), Err(Error::Argument(_))));
        assert!(matches!(inject_errors("a b", &mut rng, 0.0), Err(Error::Argument(_))));
        assert!(matches!(inject_errors("a b", &mut rng, 1.5), Err(Error::Argument(_))));
    }

    #[test]
    fn misspelling_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.tsv");
        std::fs::write(&path, "# birkbeck style\nmispell\tmisspell\nmispell\tmisspell\nAcommodate\taccommodate\n").unwrap();
        let pairs = load_misspelling_corpus(&path).unwrap();
        assert_eq!(pairs.len(), 3);
        assert_eq!(pairs[0], ("mispell".into(), "misspell".into()));
        assert_eq!(pairs[0], pairs[1]);
        assert_eq!(pairs[2].0, "acommodate");

        std::fs::write(&path, "# only comments\n# here\n").unwrap();
        assert!(load_misspelling_corpus(&path).unwrap().is_empty());

        std::fs::write(&path, "ok\tok\nno tab here\n").unwrap();
        assert!(matches!(load_misspelling_corpus(&path), Err(Error::Load { line: 2, .. })));
    }

    #[test]
    fn dataset_tsv_round_trip() {
        let inj = ErrorInjector::new("en");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let queries: Vec<String> = ["Atlantic Mackerel", "glacier national park"].map(String::from).to_vec();
        let rows: Vec<DatasetRow> = generate_dataset(&queries, &inj, &mut rng, 0.5)
            .unwrap()
            .iter()
            .map(DatasetRow::from)
            .collect();
        assert_eq!(rows[0].original, "atlantic mackerel");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.tsv");
        std::fs::write(&path, dataset_to_tsv(&rows)).unwrap();
        assert_eq!(read_dataset(&path).unwrap(), rows);
    }
}
