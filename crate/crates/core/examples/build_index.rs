//! Builds the frequency dictionary and its symmetric-delete index from the
//! bundled lexicon, stock vocabulary, product names and asset statistics,
//! then writes an artifact directory.
//!
//! ```text
//! cargo run --example build_index [-- OUT_DIR]
//! ```

mod common;

use speller::artifacts::save_index;
use speller::dictionary::generate_deletes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dict, index) = common::dictionary()?;
    let max = dict.max_counts();
    println!("{} terms, {} index keys", dict.len(), index.variant_count());
    println!(
        "max word_count {}, asset_frequency {}, download_count {}",
        max.word_count, max.asset_frequency, max.download_count
    );

    for term in ["museum", "photoshop"] {
        let e = dict.get(term).expect("bundled term");
        println!("{term}: {e:?}");
    }

    // Every key reachable from a term prefix by deletions points back to it.
    let mut keys: Vec<_> = generate_deletes("museum", 1).into_iter().collect();
    keys.sort();
    for key in keys {
        println!("  {key:<8} -> {:?}", index.terms(&dict, &key));
    }

    if let Some(out) = std::env::args().nth(1) {
        save_index(out.as_ref(), &dict, &index, true)?;
        println!("wrote {out}");
    }
    Ok(())
}
