//! Unicode conventions shared by every module: NFC, then locale-independent
//! lowercasing, then NFC again (lowercasing can decompose a few code points).

use unicode_normalization::UnicodeNormalization;

/// Canonical lookup form of a term or token.
pub fn normalize(s: &str) -> String {
    let lowered = s.nfc().collect::<String>().to_lowercase();
    lowered.nfc().collect()
}

pub fn is_normalized(s: &str) -> bool {
    normalize(s) == s
}

/// NFC-normalizes the query and splits it on Unicode whitespace. Tokens keep
/// their original casing; use [`normalize`] for the lookup form.
pub fn tokenize(query: &str) -> Vec<String> {
    let nfc: String = query.nfc().collect();
    nfc.split_whitespace().map(str::to_owned).collect()
}

/// Lowercased tokens, the form used for dictionary lookups.
pub fn lookup_tokens(query: &str) -> Vec<String> {
    tokenize(query).iter().map(|t| normalize(t)).collect()
}

/// Lowercased tokens joined with single spaces.
pub fn canonical_query(query: &str) -> String {
    lookup_tokens(query).join(" ")
}
