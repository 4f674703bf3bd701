//! Candidate feature extraction for the ranker.
//!
//! Layout of a vector, in order: scaled word count, asset frequency and
//! download count, normalized edit distance, locale one-hot, application
//! one-hot, phonetic similarity. Every component lies in `[0, 1]`.

use rphonetic::DoubleMetaphone;
use serde::{Deserialize, Serialize};

use crate::dictionary::FrequencyDictionary;
use crate::distance::damerau_levenshtein;
use crate::error::{Error, Result};
use crate::suggester::Candidate;
use crate::text::normalize;

/// Largest edit distance the suggester emits; used to scale distances.
pub const MAX_EDIT_DISTANCE: f64 = 2.0;

/// Phonetic value used where the phonetic feature is not computed.
pub const NEUTRAL_PHONETIC: f64 = 0.5;

pub const DEFAULT_LOCALES: [&str; 3] = ["en", "fr", "de"];
pub const DEFAULT_APPLICATIONS: [&str; 3] = ["stock", "express", "cchome"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RequestContext {
    pub locale: String,
    pub application: String,
}

impl RequestContext {
    pub fn new(locale: impl Into<String>, application: impl Into<String>) -> Self {
        RequestContext {
            locale: locale.into(),
            application: application.into(),
        }
    }
}

/// The closed locale and application sets a model is built for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub locales: Vec<String>,
    pub applications: Vec<String>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        FeatureSchema::new(DEFAULT_LOCALES, DEFAULT_APPLICATIONS).expect("default schema is valid")
    }
}

impl FeatureSchema {
    pub fn new<L, A>(locales: L, applications: A) -> Result<Self>
    where
        L: IntoIterator,
        L::Item: Into<String>,
        A: IntoIterator,
        A::Item: Into<String>,
    {
        let schema = FeatureSchema {
            locales: locales.into_iter().map(Into::into).collect(),
            applications: applications.into_iter().map(Into::into).collect(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, tags) in [("locale", &self.locales), ("application", &self.applications)] {
            if tags.is_empty() {
                return Err(Error::Config(format!("at least one {what} is required")));
            }
            for (i, tag) in tags.iter().enumerate() {
                if tag.is_empty() || tags[..i].contains(tag) {
                    return Err(Error::Config(format!("empty or duplicate {what} tag {tag:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        4 + self.locales.len() + self.applications.len() + 1
    }

    /// Feature names in vector order.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["word_count", "asset_frequency", "download_count", "edit_distance"]
            .map(String::from)
            .to_vec();
        names.extend(self.locales.iter().map(|l| format!("locale={l}")));
        names.extend(self.applications.iter().map(|a| format!("application={a}")));
        names.push("phonetic_similarity".into());
        names
    }

    pub fn locale_index(&self, locale: &str) -> Result<usize> {
        self.locales
            .iter()
            .position(|l| l == locale)
            .ok_or_else(|| Error::Argument(format!("unknown locale {locale:?}")))
    }

    pub fn application_index(&self, application: &str) -> Result<usize> {
        self.applications
            .iter()
            .position(|a| a == application)
            .ok_or_else(|| Error::Argument(format!("unknown application {application:?}")))
    }

    pub fn check_context(&self, context: &RequestContext) -> Result<()> {
        self.locale_index(&context.locale)?;
        self.application_index(&context.application)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub word_count_n: f64,
    pub asset_frequency_n: f64,
    pub download_count_n: f64,
    pub edit_distance_n: f64,
    pub locale_onehot: Vec<f64>,
    pub application_onehot: Vec<f64>,
    pub phonetic_similarity: f64,
}

impl FeatureVector {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(5 + self.locale_onehot.len() + self.application_onehot.len());
        v.extend([
            self.word_count_n,
            self.asset_frequency_n,
            self.download_count_n,
            self.edit_distance_n,
        ]);
        v.extend(&self.locale_onehot);
        v.extend(&self.application_onehot);
        v.push(self.phonetic_similarity);
        v
    }

    pub fn len(&self) -> usize {
        5 + self.locale_onehot.len() + self.application_onehot.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `log1p(count) / log1p(max)`, or 0 when the maximum is 0.
pub fn scale_count(count: u64, max: u64) -> f64 {
    if max == 0 {
        return 0.0;
    }
    ((count as f64).ln_1p() / (max as f64).ln_1p()).clamp(0.0, 1.0)
}

pub fn is_english(locale: &str) -> bool {
    locale
        .split(['-', '_'])
        .next()
        .is_some_and(|lang| lang.eq_ignore_ascii_case("en"))
}

pub fn extract_features(
    schema: &FeatureSchema,
    candidate: &Candidate,
    context: &RequestContext,
    dict: &FrequencyDictionary,
    input_token: &str,
) -> Result<FeatureVector> {
    let locale = schema.locale_index(&context.locale)?;
    let application = schema.application_index(&context.application)?;
    let max = dict.max_counts();
    let entry = dict.get(&candidate.term).unwrap_or(&candidate.entry);

    let mut locale_onehot = vec![0.0; schema.locales.len()];
    locale_onehot[locale] = 1.0;
    let mut application_onehot = vec![0.0; schema.applications.len()];
    application_onehot[application] = 1.0;

    let phonetic = if is_english(&context.locale) {
        phonetic_similarity(&normalize(input_token), &candidate.term)
    } else {
        NEUTRAL_PHONETIC
    };

    Ok(FeatureVector {
        word_count_n: scale_count(entry.word_count, max.word_count),
        asset_frequency_n: scale_count(entry.asset_frequency, max.asset_frequency),
        download_count_n: scale_count(entry.download_count, max.download_count),
        edit_distance_n: (candidate.edit_distance as f64 / MAX_EDIT_DISTANCE).clamp(0.0, 1.0),
        locale_onehot,
        application_onehot,
        phonetic_similarity: phonetic,
    })
}

/// Primary Double Metaphone code.
pub fn phonetic_code(s: &str) -> String {
    DoubleMetaphone::default().double_metaphone(s).primary()
}

/// `1 - DL(code_a, code_b) / max(len)` over primary Double Metaphone codes.
pub fn phonetic_similarity(a: &str, b: &str) -> f64 {
    let (ca, cb) = (phonetic_code(a), phonetic_code(b));
    if ca == cb {
        return 1.0;
    }
    if ca.is_empty() || cb.is_empty() {
        return 0.0;
    }
    let longest = ca.chars().count().max(cb.chars().count()) as f64;
    1.0 - damerau_levenshtein(&ca, &cb) as f64 / longest
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{Counts, DictionaryBuilder};
    use proptest::prelude::*;

    fn dict(rows: &[(&str, u64, u64, u64)]) -> FrequencyDictionary {
        let mut b = DictionaryBuilder::new("en");
        for &(t, w, a, d) in rows {
            b.add(t, Counts { word_count: w, asset_frequency: a, download_count: d }).unwrap();
        }
        b.build().unwrap()
    }

    fn candidate(d: &FrequencyDictionary, term: &str, distance: usize) -> Candidate {
        Candidate::new(d.get(term).unwrap(), distance)
    }

    #[test]
    fn max_count_scales_to_one() {
        let d = dict(&[("museum", 1000, 5, 3), ("muse", 10, 0, 0)]);
        let ctx = RequestContext::new("en", "stock");
        let f = extract_features(&FeatureSchema::default(), &candidate(&d, "museum", 2), &ctx, &d, "muzeem").unwrap();
        assert_eq!(f.word_count_n, 1.0);
        assert_eq!(f.asset_frequency_n, 1.0);
        assert_eq!(f.download_count_n, 1.0);
        assert_eq!(f.edit_distance_n, 1.0);
    }

    #[test]
    fn zero_counts_in_french() {
        let d = dict(&[("chat", 0, 0, 0), ("chien", 50, 10, 1)]);
        let ctx = RequestContext::new("fr", "express");
        let f = extract_features(&FeatureSchema::default(), &candidate(&d, "chat", 2), &ctx, &d, "chta").unwrap();
        assert_eq!(
            f.to_vec(),
            [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.5]
        );
    }

    #[test]
    fn log_scaling_value() {
        // ln(100) / ln(10000) = 0.5
        assert!((scale_count(99, 9999) - 0.5).abs() < 1e-12);
        assert_eq!(scale_count(0, 0), 0.0);
        assert_eq!(scale_count(5, 5), 1.0);
    }

    #[test]
    fn unknown_tags_are_rejected() {
        let d = dict(&[("museum", 1, 0, 0)]);
        let c = candidate(&d, "museum", 1);
        let schema = FeatureSchema::default();
        assert!(matches!(
            extract_features(&schema, &c, &RequestContext::new("ja", "stock"), &d, "musem"),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            extract_features(&schema, &c, &RequestContext::new("en", "photos"), &d, "musem"),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn schema_names_match_dimension() {
        let s = FeatureSchema::default();
        assert_eq!(s.dimension(), 11);
        assert_eq!(s.names().len(), 11);
        assert_eq!(s.names()[4], "locale=en");
        assert!(FeatureSchema::new(["en", "en"], ["stock"]).is_err());
        assert!(FeatureSchema::new(Vec::<String>::new(), ["stock"]).is_err());
    }

    #[test]
    fn sound_alike_misspelling() {
        assert_eq!(phonetic_code("museum"), phonetic_code("muzeem"));
        assert_eq!(phonetic_similarity("muzeem", "museum"), 1.0);
        assert!(phonetic_similarity("muzeem", "museum") >= phonetic_similarity("market", "museum"));
        assert!(phonetic_similarity("market", "museum") < 1.0);
    }

    #[test]
    fn phonetic_edge_cases() {
        assert_eq!(phonetic_similarity("abc", "abc"), 1.0);
        assert_eq!(phonetic_similarity("a", ""), 0.0);
        assert_eq!(phonetic_similarity("", ""), 1.0);
    }

    proptest! {
        #[test]
        fn vectors_are_in_unit_range(
            counts in proptest::collection::vec((0u64..1_000_000, 0u64..1000, 0u64..100), 1..20),
            pick in 0usize..20,
            distance in 1usize..=2,
            locale in 0usize..3,
            app in 0usize..3,
            input in "[a-z]{1,8}",
        ) {
            let mut b = DictionaryBuilder::new("en");
            for (i, &(w, a, d)) in counts.iter().enumerate() {
                b.add(&format!("t{i}"), Counts { word_count: w, asset_frequency: a, download_count: d }).unwrap();
            }
            let d = b.build().unwrap();
            let term = format!("t{}", pick % counts.len());
            let schema = FeatureSchema::default();
            let ctx = RequestContext::new(DEFAULT_LOCALES[locale], DEFAULT_APPLICATIONS[app]);
            let f = extract_features(&schema, &candidate(&d, &term, distance), &ctx, &d, &input).unwrap();
            let v = f.to_vec();
            prop_assert_eq!(v.len(), schema.dimension());
            prop_assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert_eq!(f.locale_onehot.iter().sum::<f64>(), 1.0);
            prop_assert_eq!(f.application_onehot.iter().sum::<f64>(), 1.0);
        }

        #[test]
        fn word_count_scaling_is_monotone(a in 0u64..10_000_000, b in 0u64..10_000_000, max in 1u64..10_000_000) {
            let (lo, hi) = (a.min(b).min(max), a.max(b).min(max));
            prop_assert!(scale_count(lo, max) <= scale_count(hi, max));
        }

        #[test]
        fn phonetic_symmetric(a in "[a-z]{0,8}", b in "[a-z]{0,8}") {
            prop_assert_eq!(phonetic_similarity(&a, &b), phonetic_similarity(&b, &a));
            prop_assert_eq!(phonetic_similarity(&a, &a), 1.0);
            let s = phonetic_similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
        }
    }
}
