//! Trains the candidate ranker on generated data and reports how often the
//! top-scored candidate is the gold correction on held-out queries,
//! compared with picking the most frequent candidate.
//!
//! ```text
//! cargo run --release --example train_ranker [-- MODEL_OUT]
//! ```

mod common;

use speller::features::{FeatureSchema, RequestContext};
use speller::ranker::{build_training_set, rank, save_model, train, TrainConfig};
use speller::suggester::suggest;
use speller::text::lookup_tokens;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dict, index) = common::dictionary()?;
    let schema = FeatureSchema::default();
    let context = RequestContext::new("en", "stock");

    let rows = common::training_rows(7)?;
    let (train_rows, held_out) = rows.split_at(rows.len() * 4 / 5);
    let (examples, stats) = build_training_set(train_rows, &dict, &index, &schema, &context, 3)?;
    println!("{stats:?}");
    let positives = examples.iter().filter(|e| e.label == 1).count();
    println!("{} examples, {positives} positive", examples.len());

    let config = TrainConfig {
        seed: 7,
        ..TrainConfig::default()
    };
    let model = train(&examples, &schema, &config)?;

    let (mut tokens, mut ranked_hits, mut frequency_hits) = (0, 0, 0);
    for row in held_out {
        for (bad, gold) in lookup_tokens(&row.corrupted).iter().zip(lookup_tokens(&row.original)) {
            if *bad == gold || dict.contains(bad) {
                continue;
            }
            let candidates = suggest(&index, &dict, bad, 3);
            if candidates.is_empty() {
                continue;
            }
            tokens += 1;
            let most_frequent = candidates.iter().max_by_key(|c| c.entry.word_count).unwrap();
            frequency_hits += usize::from(most_frequent.term == gold);
            let ranked = rank(&model, candidates, &context, &dict, bad)?;
            ranked_hits += usize::from(ranked[0].term == gold);
        }
    }
    println!("held-out corrupted tokens: {tokens}");
    println!("ranker top-1:         {:.3}", ranked_hits as f64 / tokens as f64);
    println!("most frequent top-1:  {:.3}", frequency_hits as f64 / tokens as f64);

    if let Some(out) = std::env::args().nth(1) {
        save_model(&model, out.as_ref())?;
        println!("wrote {out}");
    }
    Ok(())
}
