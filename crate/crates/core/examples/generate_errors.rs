//! Synthetic training data: each token is corrupted with probability p by
//! one of six error types drawn at the 7:5:4:2:7:2 ratio.
//!
//! ```text
//! cargo run --example generate_errors [-- SEED]
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use speller::datagen::{ErrorInjector, ErrorType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for locale in ["en", "fr", "de"] {
        let injector = ErrorInjector::new(locale);
        println!("[{locale}]");
        for query in ["atlantic mackerel", "burgundy background", "glacier national park and hike", "medal icon", "über café"] {
            let q = injector.inject(query, &mut rng, 0.5)?;
            let applied: Vec<String> = q
                .applied
                .iter()
                .map(|(i, t)| format!("{}:{}", q.original_tokens[*i], t.name()))
                .collect();
            println!("  {query:<32} -> {:<34} {}", q.corrupted_query(), applied.join(", "));
        }
    }

    // The sampled type shares converge on the configured weights.
    let injector = ErrorInjector::new("en");
    let mut counts = [0usize; 6];
    let n = 100_000;
    for _ in 0..n {
        let t = injector.sample_type(&mut rng);
        counts[ErrorType::ALL.iter().position(|&x| x == t).unwrap()] += 1;
    }
    println!("type shares over {n} draws:");
    for (t, c) in ErrorType::ALL.iter().zip(counts) {
        let target = t.weight() as f64 / ErrorType::total_weight() as f64;
        println!("  {:<18} {:.4} (target {:.4})", t.name(), c as f64 / n as f64, target);
    }
    Ok(())
}
