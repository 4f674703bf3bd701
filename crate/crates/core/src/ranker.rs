//! Pointwise candidate ranking: training, scoring and the model file.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datagen::DatasetRow;
use crate::dictionary::{DeleteIndex, FrequencyDictionary};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureSchema, RequestContext};
use crate::mlp::{BatchNorm, Dense, Matrix, MlpModel, DEFAULT_HIDDEN, HIDDEN_LAYERS};
use crate::suggester::{suggest, Candidate};
use crate::text::lookup_tokens;
use crate::tsv;

pub const MODEL_FORMAT: &str = "speller-ranker";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub features: Vec<f64>,
    /// 1 for the gold correction, 0 for any other candidate.
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub dropout_rate: f64,
    pub hidden: [usize; HIDDEN_LAYERS],
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 64,
            learning_rate: 0.01,
            momentum: 0.9,
            dropout_rate: 0.2,
            hidden: DEFAULT_HIDDEN,
            seed: 0,
        }
    }
}

/// Mini-batch SGD with momentum on binary cross-entropy. Deterministic for a
/// given seed; a trailing batch of a single example is skipped because batch
/// normalization needs at least two rows.
pub fn train(dataset: &[TrainingExample], schema: &FeatureSchema, config: &TrainConfig) -> Result<MlpModel> {
    if config.batch_size < 2 {
        return Err(Error::Training("batch size must be at least 2".into()));
    }
    if config.epochs == 0 {
        return Err(Error::Training("at least one epoch is required".into()));
    }
    if !(config.learning_rate > 0.0) || !(0.0..1.0).contains(&config.momentum) {
        return Err(Error::Training("learning rate must be positive and momentum in [0, 1)".into()));
    }
    let dim = schema.dimension();
    if let Some(bad) = dataset.iter().find(|e| e.features.len() != dim) {
        return Err(Error::Training(format!(
            "example has {} features, schema expects {dim}",
            bad.features.len()
        )));
    }
    if let Some(bad) = dataset.iter().find(|e| e.label > 1) {
        return Err(Error::Training(format!("label must be 0 or 1, got {}", bad.label)));
    }
    let positives = dataset.iter().filter(|e| e.label == 1).count();
    if positives == 0 || positives == dataset.len() {
        return Err(Error::Training("dataset must contain both positive and negative examples".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = MlpModel::new(schema.clone(), config.hidden, config.dropout_rate, &mut rng)?;
    let mut velocity: Vec<Vec<f64>> = model.tensors_mut().iter().map(|t| vec![0.0; t.len()]).collect();
    let mut order: Vec<usize> = (0..dataset.len()).collect();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let x = Matrix::from_rows(&chunk.iter().map(|&i| dataset[i].features.as_slice()).collect::<Vec<_>>());
            let labels: Vec<f64> = chunk.iter().map(|&i| f64::from(dataset[i].label)).collect();
            let cache = model.forward_train(&x, Some(&mut rng))?;
            let (loss, grads) = model.backward(&cache, &labels);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            model.update_running_stats(&cache);
            for ((tensor, grad), vel) in model.tensors_mut().into_iter().zip(&grads).zip(&mut velocity) {
                for ((p, g), v) in tensor.iter_mut().zip(grad).zip(vel.iter_mut()) {
                    *v = config.momentum * *v - config.learning_rate * g;
                    *p += *v;
                }
            }
        }
        if !model.parameters().iter().all(|p| p.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
    }
    Ok(model)
}

/// Scores every candidate in inference mode and sorts by descending score;
/// ties go to the higher word count, then the lexicographically smaller term.
pub fn rank(
    model: &MlpModel,
    mut candidates: Vec<Candidate>,
    context: &RequestContext,
    dict: &FrequencyDictionary,
    input_token: &str,
) -> Result<Vec<Candidate>> {
    for c in &mut candidates {
        let features = extract_features(model.schema(), c, context, dict, input_token)?;
        c.score = Some(model.predict(&features.to_vec())?);
    }
    sort_by_score(&mut candidates);
    Ok(candidates)
}

pub(crate) fn sort_by_score(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| {
        let (sa, sb) = (a.score.unwrap_or(0.0), b.score.unwrap_or(0.0));
        sb.total_cmp(&sa)
            .then(b.entry.word_count.cmp(&a.entry.word_count))
            .then_with(|| a.term.cmp(&b.term))
    });
}

/// Counts from turning a generated dataset into training examples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrainingSetStats {
    pub rows: usize,
    pub corrupted_tokens: usize,
    /// Corrupted tokens whose gold term was among the suggestions.
    pub used_tokens: usize,
    /// Corrupted tokens that happened to be dictionary words.
    pub in_dictionary: usize,
    /// Corrupted tokens whose gold term was not suggested (their rows are dropped).
    pub gold_missing: usize,
    /// Rows whose corrupted and original token counts differ.
    pub misaligned_rows: usize,
    /// Rows that contributed no usable token.
    pub dropped_rows: usize,
}

/// Builds labeled examples from `(corrupted, original)` rows: for every
/// corrupted token, the gold term is the positive and every other suggested
/// candidate a negative. A row with any corrupted token whose gold term is
/// not suggested is dropped whole; corrupted tokens that are themselves
/// dictionary words are skipped.
pub fn build_training_set(
    rows: &[DatasetRow],
    dict: &FrequencyDictionary,
    index: &DeleteIndex,
    schema: &FeatureSchema,
    context: &RequestContext,
    min_candidates: usize,
) -> Result<(Vec<TrainingExample>, TrainingSetStats)> {
    schema.check_context(context)?;
    let mut stats = TrainingSetStats {
        rows: rows.len(),
        ..TrainingSetStats::default()
    };
    let mut examples = Vec::new();
    'rows: for row in rows {
        let corrupted = lookup_tokens(&row.corrupted);
        let original = lookup_tokens(&row.original);
        if corrupted.len() != original.len() {
            stats.misaligned_rows += 1;
            stats.dropped_rows += 1;
            continue;
        }
        let mut row_examples = Vec::new();
        let mut used = 0;
        for (bad, gold) in corrupted.iter().zip(&original) {
            if bad == gold {
                continue;
            }
            stats.corrupted_tokens += 1;
            if dict.get(bad).is_some() {
                stats.in_dictionary += 1;
                continue;
            }
            let candidates = suggest(index, dict, bad, min_candidates);
            if !candidates.iter().any(|c| &c.term == gold) {
                stats.gold_missing += 1;
                stats.dropped_rows += 1;
                continue 'rows;
            }
            for c in &candidates {
                let features = extract_features(schema, c, context, dict, bad)?;
                row_examples.push(TrainingExample {
                    features: features.to_vec(),
                    label: u8::from(&c.term == gold),
                });
            }
            used += 1;
        }
        if used == 0 {
            stats.dropped_rows += 1;
            continue;
        }
        stats.used_tokens += used;
        examples.append(&mut row_examples);
    }
    Ok((examples, stats))
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    layer_dims: Vec<usize>,
    feature_names: Vec<String>,
    locales: Vec<String>,
    applications: Vec<String>,
    dropout_rate: f64,
    bn_epsilon: f64,
    bn_momentum: f64,
    layers: Vec<LayerFile>,
    batch_norm: Vec<BatchNorm>,
}

/// Serializes the model as a pretty-printed JSON document.
pub fn model_to_json(model: &MlpModel) -> String {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        layer_dims: model.layer_dims.clone(),
        feature_names: model.schema.names(),
        locales: model.schema.locales.clone(),
        applications: model.schema.applications.clone(),
        dropout_rate: model.dropout_rate,
        bn_epsilon: model.bn_epsilon,
        bn_momentum: model.bn_momentum,
        layers: model
            .dense
            .iter()
            .map(|d| LayerFile {
                weights: d.weights.clone(),
                biases: d.biases.clone(),
            })
            .collect(),
        batch_norm: model.norms.clone(),
    };
    let mut json = serde_json::to_string_pretty(&file).expect("model serializes");
    json.push('\n');
    json
}

pub fn model_from_json(json: &str) -> Result<MlpModel> {
    let file: ModelFile =
        serde_json::from_str(json).map_err(|e| Error::Model(format!("malformed model file: {e}")))?;
    if file.format != MODEL_FORMAT {
        return Err(Error::Model(format!("not a ranker model file (format {:?})", file.format)));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::Model(format!(
            "unsupported model version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    let schema = FeatureSchema {
        locales: file.locales,
        applications: file.applications,
    };
    schema.validate()?;
    if file.feature_names != schema.names() {
        return Err(Error::Model("feature names do not match the locale/application sets".into()));
    }
    if file.layer_dims.len() != HIDDEN_LAYERS + 2 || file.layers.len() != HIDDEN_LAYERS + 1 {
        return Err(Error::Model("model must have exactly 5 dense layers".into()));
    }
    let dense = file
        .layers
        .into_iter()
        .enumerate()
        .map(|(l, layer)| Dense {
            inputs: file.layer_dims[l],
            outputs: file.layer_dims[l + 1],
            weights: layer.weights,
            biases: layer.biases,
        })
        .collect();
    let model = MlpModel {
        layer_dims: file.layer_dims,
        dense,
        norms: file.batch_norm,
        dropout_rate: file.dropout_rate,
        bn_epsilon: file.bn_epsilon,
        bn_momentum: file.bn_momentum,
        schema,
    };
    model.validate()?;
    Ok(model)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    tsv::write_atomic(path, model_to_json(model).as_bytes())
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    model_from_json(&tsv::read_to_string(path)?)
}
