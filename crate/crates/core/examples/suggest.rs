//! Candidate generation: distance-1 suggestions first, widening to distance
//! 2 only when fewer than three distance-1 candidates exist.
//!
//! ```text
//! cargo run --example suggest [-- TOKEN...]
//! ```

mod common;

use speller::suggester::{suggest, DEFAULT_MIN_CANDIDATES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (dict, index) = common::dictionary()?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    let tokens: Vec<&str> = if args.is_empty() {
        vec!["agtlantic", "mackrel", "backgrround", "glaicer", "natoinal", "0ark", "hik", ",edal", "muzeem", "museum"]
    } else {
        args.iter().map(String::as_str).collect()
    };
    for token in tokens {
        let mut candidates = suggest(&index, &dict, token, DEFAULT_MIN_CANDIDATES);
        candidates.sort_by(|a, b| {
            a.edit_distance
                .cmp(&b.edit_distance)
                .then(b.entry.word_count.cmp(&a.entry.word_count))
        });
        let shown: Vec<String> = candidates
            .iter()
            .take(8)
            .map(|c| format!("{}({})", c.term, c.edit_distance))
            .collect();
        let note = if dict.contains(token) { " [in dictionary]" } else { "" };
        println!("{token:<12} {} candidates{note}: {}", candidates.len(), shown.join(" "));
    }
    Ok(())
}
