//! Shared setup for the examples: everything is built from `data/`.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use speller::artifacts::{load_mwe_dir, BOOST_FILE};
use speller::datagen::{generate_dataset, load_misspelling_corpus, read_queries, DatasetRow, ErrorInjector};
use speller::dictionary::{build_delete_index, load_dictionary, DeleteIndex, FrequencyDictionary};
use speller::features::{FeatureSchema, RequestContext};
use speller::mlp::MlpModel;
use speller::pipeline::{Artifacts, BoostConfig};
use speller::ranker::{build_training_set, train, TrainConfig};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn dictionary() -> speller::error::Result<(FrequencyDictionary, DeleteIndex)> {
    let dict = load_dictionary(
        &data("lexicon_en.tsv"),
        &[data("stock_vocab.tsv"), data("products.tsv")],
        Some(&data("stats.tsv")),
        "en",
    )?;
    let index = build_delete_index(&dict, 2, 7);
    Ok((dict, index))
}

/// Generated rows from `queries.txt` plus ten copies of the real misspellings.
pub fn training_rows(seed: u64) -> speller::error::Result<Vec<DatasetRow>> {
    let queries = read_queries(&data("queries.txt"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<DatasetRow> = generate_dataset(&queries, &ErrorInjector::new("en"), &mut rng, 0.5)?
        .iter()
        .map(DatasetRow::from)
        .collect();
    let pairs = load_misspelling_corpus(&data("misspellings.tsv"))?;
    for _ in 0..10 {
        rows.extend(pairs.iter().map(|(bad, good)| DatasetRow {
            corrupted: bad.clone(),
            original: good.clone(),
            error_types: Vec::new(),
        }));
    }
    Ok(rows)
}

pub fn train_model(dict: &FrequencyDictionary, index: &DeleteIndex, seed: u64) -> speller::error::Result<MlpModel> {
    let schema = FeatureSchema::default();
    let context = RequestContext::new("en", "stock");
    let (examples, _) = build_training_set(&training_rows(seed)?, dict, index, &schema, &context, 3)?;
    let config = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    train(&examples, &schema, &config)
}

/// Dictionary, trained ranker, MWE maps and boosts.
pub fn artifacts() -> speller::error::Result<Artifacts> {
    let (dict, index) = dictionary()?;
    let model = train_model(&dict, &index, 7)?;
    let mut artifacts = Artifacts::new(dict, index, model)?;
    artifacts.mwe = load_mwe_dir(&data(""))?;
    artifacts.boost = BoostConfig::load(&data(BOOST_FILE))?;
    Ok(artifacts)
}
