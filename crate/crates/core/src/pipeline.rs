//! End-to-end query correction and behavioral statistics refresh.
//!
//! A query goes through the application's MWE rewrites, is tokenized, and
//! each token that is not a dictionary term is suggested, ranked and boosted.
//! The best candidate replaces the token only when its boosted score reaches
//! the application's acceptance threshold.
//!
//! Artifacts are immutable once assembled. [`SnapshotStore`] hands out
//! shared snapshots to request handlers and swaps in refreshed ones whole.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, PoisonError, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use glob::Pattern;
use serde::Serialize;

use crate::dictionary::{
    build_delete_index, Counts, DeleteIndex, FrequencyDictionary, DEFAULT_MAX_EDIT_DISTANCE,
    DEFAULT_PREFIX_LENGTH,
};
use crate::error::{Error, Result};
use crate::features::RequestContext;
use crate::mlp::MlpModel;
use crate::mwe::MweMap;
use crate::ranker::{rank, sort_by_score};
use crate::suggester::{suggest, Candidate, DEFAULT_MIN_CANDIDATES};
use crate::text::{lookup_tokens, normalize, tokenize};
use crate::tsv;

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_MIN_NEW_TERM_COUNT: u64 = 100;

#[derive(Debug, Clone)]
struct BoostRule {
    pattern: Pattern,
    multiplier: f64,
}

/// Per-application score multipliers and acceptance thresholds.
///
/// A rule's pattern is a literal term or a glob such as `photoshop*`. When
/// several rules match a candidate, their multipliers are multiplied.
#[derive(Debug, Clone)]
pub struct BoostConfig {
    rules: BTreeMap<String, Vec<BoostRule>>,
    default_tau: f64,
    tau: BTreeMap<String, f64>,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            rules: BTreeMap::new(),
            default_tau: DEFAULT_TAU,
            tau: BTreeMap::new(),
        }
    }
}

fn check_tau(tau: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&tau) {
        Ok(tau)
    } else {
        Err(Error::Config(format!("acceptance threshold {tau} is outside [0, 1]")))
    }
}

impl BoostConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_rule(&mut self, application: &str, pattern: &str, multiplier: f64) -> Result<()> {
        if !(multiplier.is_finite() && multiplier > 0.0) {
            return Err(Error::Config(format!(
                "boost multiplier for {pattern:?} must be finite and positive, got {multiplier}"
            )));
        }
        let normalized = normalize(pattern.trim());
        if application.is_empty() || normalized.is_empty() {
            return Err(Error::Config("boost rule needs an application and a pattern".into()));
        }
        let pattern = Pattern::new(&normalized)
            .map_err(|e| Error::Config(format!("bad boost pattern {normalized:?}: {e}")))?;
        self.rules
            .entry(application.to_owned())
            .or_default()
            .push(BoostRule { pattern, multiplier });
        Ok(())
    }

    pub fn set_default_tau(&mut self, tau: f64) -> Result<()> {
        self.default_tau = check_tau(tau)?;
        Ok(())
    }

    pub fn set_tau(&mut self, application: &str, tau: f64) -> Result<()> {
        self.tau.insert(application.to_owned(), check_tau(tau)?);
        Ok(())
    }

    pub fn tau(&self, application: &str) -> f64 {
        self.tau.get(application).copied().unwrap_or(self.default_tau)
    }

    pub fn multiplier(&self, application: &str, term: &str) -> f64 {
        self.rules.get(application).map_or(1.0, |rules| {
            rules
                .iter()
                .filter(|r| r.pattern.matches(term))
                .map(|r| r.multiplier)
                .product()
        })
    }

    pub fn rule_count(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }

    /// Reads `application<TAB>term-or-pattern<TAB>multiplier` lines.
    pub fn load(path: &Path) -> Result<Self> {
        let text = tsv::read_to_string(path)?;
        let mut config = BoostConfig::new();
        for record in tsv::records(&text) {
            tsv::expect_fields(path, &record, 3)?;
            let multiplier: f64 = record.fields[2]
                .trim()
                .parse()
                .map_err(|_| Error::load(path, record.line, format!("bad multiplier {:?}", record.fields[2])))?;
            config
                .add_rule(record.fields[0].trim(), record.fields[1], multiplier)
                .map_err(|e| Error::load(path, record.line, e.to_string()))?;
        }
        Ok(config)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# application\tpattern\tmultiplier\n");
        for (app, rules) in &self.rules {
            for r in rules {
                out.push_str(&format!("{app}\t{}\t{}\n", r.pattern.as_str(), r.multiplier));
            }
        }
        out
    }
}

/// Everything a correction needs, checked for mutual consistency.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dictionary: FrequencyDictionary,
    pub index: DeleteIndex,
    pub model: MlpModel,
    pub mwe: HashMap<String, MweMap>,
    pub boost: BoostConfig,
    pub min_candidates: usize,
    pub top_k: usize,
}

impl Artifacts {
    pub fn new(dictionary: FrequencyDictionary, index: DeleteIndex, model: MlpModel) -> Result<Self> {
        let artifacts = Artifacts {
            dictionary,
            index,
            model,
            mwe: HashMap::new(),
            boost: BoostConfig::default(),
            min_candidates: DEFAULT_MIN_CANDIDATES,
            top_k: DEFAULT_TOP_K,
        };
        artifacts.validate()?;
        Ok(artifacts)
    }

    pub fn with_mwe(mut self, map: MweMap) -> Self {
        self.mwe.insert(map.application().to_owned(), map);
        self
    }

    pub fn with_boost(mut self, boost: BoostConfig) -> Self {
        self.boost = boost;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.index.is_compatible_with(&self.dictionary) {
            return Err(Error::Config(
                "delete index was built for a different dictionary".into(),
            ));
        }
        self.model.validate()?;
        if self.min_candidates == 0 {
            return Err(Error::Config("min_candidates must be at least 1".into()));
        }
        Ok(())
    }

    /// The same artifacts with a refreshed dictionary and index.
    pub fn with_dictionary(&self, dictionary: FrequencyDictionary, index: DeleteIndex) -> Result<Self> {
        let mut next = self.clone();
        next.dictionary = dictionary;
        next.index = index;
        next.validate()?;
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredCandidate {
    pub term: String,
    pub score: f64,
    pub edit_distance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenCorrection {
    pub input: String,
    pub output: String,
    pub changed: bool,
    /// 1.0 for dictionary terms, the reported top score for accepted
    /// corrections, and 0.0 for unknown tokens passed through.
    pub confidence: f64,
    pub candidates: Vec<ScoredCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectionResult {
    pub original: String,
    pub corrected: String,
    pub tokens: Vec<TokenCorrection>,
    pub elapsed: Duration,
}

impl CorrectionResult {
    pub fn changed(&self) -> bool {
        self.tokens.iter().any(|t| t.changed)
    }

    /// Lowest token confidence; 1.0 for an empty query.
    pub fn confidence(&self) -> f64 {
        self.tokens.iter().map(|t| t.confidence).fold(1.0, f64::min)
    }
}

/// Corrects one query. Fails only when the request context is not part of
/// the model's schema.
pub fn correct_query(query: &str, context: &RequestContext, artifacts: &Artifacts) -> Result<CorrectionResult> {
    let start = Instant::now();
    artifacts.model.schema().check_context(context)?;
    let tokens = match artifacts.mwe.get(&context.application) {
        Some(map) => map.rewrite_tokens(query),
        None => tokenize(query),
    };
    let tau = artifacts.boost.tau(&context.application);
    let mut corrections = Vec::with_capacity(tokens.len());
    for token in tokens {
        corrections.push(correct_token(token, context, artifacts, tau)?);
    }
    let corrected = corrections
        .iter()
        .map(|t| t.output.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    Ok(CorrectionResult {
        original: query.to_owned(),
        corrected,
        tokens: corrections,
        elapsed: start.elapsed(),
    })
}

fn correct_token(
    token: String,
    context: &RequestContext,
    artifacts: &Artifacts,
    tau: f64,
) -> Result<TokenCorrection> {
    let lookup = normalize(&token);
    let pass_through = |confidence, candidates| TokenCorrection {
        output: token.clone(),
        input: token.clone(),
        changed: false,
        confidence,
        candidates,
    };
    if artifacts.dictionary.get(&lookup).is_some() {
        return Ok(pass_through(1.0, Vec::new()));
    }
    let candidates = suggest(&artifacts.index, &artifacts.dictionary, &lookup, artifacts.min_candidates);
    if candidates.is_empty() {
        return Ok(pass_through(0.0, Vec::new()));
    }
    let mut ranked = rank(&artifacts.model, candidates, context, &artifacts.dictionary, &lookup)?;
    boost(&mut ranked, &artifacts.boost, &context.application);
    let top_score = ranked[0].score.unwrap_or(0.0);
    let reported: Vec<ScoredCandidate> = ranked
        .iter()
        .take(artifacts.top_k)
        .map(|c| ScoredCandidate {
            term: c.term.clone(),
            score: c.score.unwrap_or(0.0).min(1.0),
            edit_distance: c.edit_distance,
        })
        .collect();
    if top_score < tau {
        return Ok(pass_through(0.0, reported));
    }
    Ok(TokenCorrection {
        output: ranked[0].term.clone(),
        changed: true,
        confidence: top_score.min(1.0),
        input: token,
        candidates: reported,
    })
}

/// Multiplies scores by the application's boosts and re-sorts.
fn boost(candidates: &mut [Candidate], config: &BoostConfig, application: &str) {
    for c in candidates.iter_mut() {
        let m = config.multiplier(application, &c.term);
        c.score = c.score.map(|s| s * m);
    }
    sort_by_score(candidates);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefreshConfig {
    /// Occurrences a term absent from the dictionary needs in the log to be added.
    pub min_new_term_count: u64,
    pub max_edit_distance: usize,
    pub prefix_length: usize,
}

impl Default for RefreshConfig {
    fn default() -> Self {
        RefreshConfig {
            min_new_term_count: DEFAULT_MIN_NEW_TERM_COUNT,
            max_edit_distance: DEFAULT_MAX_EDIT_DISTANCE,
            prefix_length: DEFAULT_PREFIX_LENGTH,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefreshStats {
    pub log_queries: usize,
    pub updated_terms: usize,
    pub new_terms: usize,
    pub rejected_terms: usize,
}

#[derive(Debug, Clone)]
pub struct Refreshed {
    pub dictionary: FrequencyDictionary,
    pub index: DeleteIndex,
    pub stats: RefreshStats,
}

/// Sums `query<TAB>count` lines into per-token counts.
pub fn read_query_log(path: &Path) -> Result<(BTreeMap<String, u64>, usize)> {
    let text = tsv::read_to_string(path)?;
    let mut counts = BTreeMap::new();
    let mut queries = 0;
    for record in tsv::records(&text) {
        tsv::expect_fields(path, &record, 2)?;
        let n = tsv::parse_count(path, record.line, record.fields[1], "count")?;
        queries += 1;
        for token in lookup_tokens(record.fields[0]) {
            let c: &mut u64 = counts.entry(token).or_default();
            *c = c.saturating_add(n);
        }
    }
    Ok((counts, queries))
}

/// Adds query-log token counts to the word counts of `dict`. Tokens not yet
/// in the dictionary are admitted once their total reaches the configured
/// minimum. The input dictionary is not modified.
pub fn refresh_behavioral_stats(
    query_log: &Path,
    dict: &FrequencyDictionary,
    config: &RefreshConfig,
) -> Result<Refreshed> {
    let (counts, log_queries) = read_query_log(query_log)?;
    let mut stats = RefreshStats {
        log_queries,
        ..RefreshStats::default()
    };
    let mut builder = dict.to_builder();
    for (term, n) in counts {
        if dict.get(&term).is_some() {
            stats.updated_terms += 1;
        } else if n >= config.min_new_term_count {
            stats.new_terms += 1;
        } else {
            stats.rejected_terms += 1;
            continue;
        }
        builder.add(
            &term,
            Counts {
                word_count: n,
                ..Counts::default()
            },
        )?;
    }
    let dictionary = builder.build()?;
    let index = build_delete_index(&dictionary, config.max_edit_distance, config.prefix_length);
    Ok(Refreshed {
        dictionary,
        index,
        stats,
    })
}

/// A published artifact set.
#[derive(Debug)]
pub struct Snapshot {
    pub artifacts: Artifacts,
    pub version: u64,
    /// Milliseconds since the Unix epoch; strictly increasing across publications.
    pub published_at_ms: u64,
}

/// Holds the current snapshot. Readers clone an `Arc` and never wait on a
/// refresh; publications are serialized.
#[derive(Debug)]
pub struct SnapshotStore {
    current: RwLock<Arc<Snapshot>>,
    publish_lock: Mutex<()>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl SnapshotStore {
    pub fn new(artifacts: Artifacts) -> Result<Self> {
        artifacts.validate()?;
        Ok(SnapshotStore {
            current: RwLock::new(Arc::new(Snapshot {
                artifacts,
                version: 1,
                published_at_ms: now_ms(),
            })),
            publish_lock: Mutex::new(()),
        })
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.current
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .clone()
    }

    fn swap(&self, artifacts: Artifacts) -> Arc<Snapshot> {
        let previous = self.current();
        let next = Arc::new(Snapshot {
            artifacts,
            version: previous.version + 1,
            published_at_ms: now_ms().max(previous.published_at_ms + 1),
        });
        *self.current.write().unwrap_or_else(PoisonError::into_inner) = next.clone();
        next
    }

    /// Validates and publishes a new artifact set.
    pub fn publish(&self, artifacts: Artifacts) -> Result<Arc<Snapshot>> {
        artifacts.validate()?;
        let _guard = self.publish_lock.lock().unwrap_or_else(PoisonError::into_inner);
        Ok(self.swap(artifacts))
    }

    /// Builds refreshed artifacts from a query log off to the side, then
    /// publishes them. The current snapshot stays live on failure.
    pub fn refresh_from_log(&self, query_log: &Path, config: &RefreshConfig) -> Result<(Arc<Snapshot>, RefreshStats)> {
        let _guard = self.publish_lock.lock().unwrap_or_else(PoisonError::into_inner);
        let base = self.current();
        let refreshed = refresh_behavioral_stats(query_log, &base.artifacts.dictionary, config)?;
        let artifacts = base
            .artifacts
            .with_dictionary(refreshed.dictionary, refreshed.index)?;
        Ok((self.swap(artifacts), refreshed.stats))
    }
}
