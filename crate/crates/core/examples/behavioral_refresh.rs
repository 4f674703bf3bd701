//! Behavioral refresh: query-log counts are merged into the dictionary,
//! frequent unknown terms are admitted, and the rebuilt artifacts replace
//! the live snapshot in one swap.
//!
//! ```text
//! cargo run --release --example behavioral_refresh
//! ```

mod common;

use speller::features::RequestContext;
use speller::pipeline::{correct_query, RefreshConfig, SnapshotStore};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let store = SnapshotStore::new(common::artifacts()?)?;
    let context = RequestContext::new("en", "stock");
    let query = "blokchain art";

    let before = store.current();
    println!(
        "snapshot {} ({} terms): {query:?} -> {:?}",
        before.version,
        before.artifacts.dictionary.len(),
        correct_query(query, &context, &before.artifacts)?.corrected
    );

    let (after, stats) = store.refresh_from_log(&common::data("query_log.tsv"), &RefreshConfig::default())?;
    println!("{stats:?}");
    let dict = &after.artifacts.dictionary;
    for term in ["blockchain", "covid", "nftart", "museum"] {
        println!("  {term:<10} {:?}", dict.get(term).map(|e| e.word_count));
    }
    println!(
        "snapshot {} ({} terms): {query:?} -> {:?}",
        after.version,
        dict.len(),
        correct_query(query, &context, &after.artifacts)?.corrected
    );
    // Holders of the old snapshot are unaffected.
    assert!(!before.artifacts.dictionary.contains("blockchain"));
    Ok(())
}
