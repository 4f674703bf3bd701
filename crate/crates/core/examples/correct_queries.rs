//! End-to-end correction: MWE rewriting, per-token suggestion, ranking,
//! boosting and the acceptance threshold.
//!
//! ```text
//! cargo run --release --example correct_queries [-- APPLICATION QUERY...]
//! ```

mod common;

use speller::features::RequestContext;
use speller::pipeline::correct_query;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let artifacts = common::artifacts()?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (application, queries): (&str, Vec<&str>) = match args.split_first() {
        Some((app, rest)) if !rest.is_empty() => (app, rest.iter().map(String::as_str).collect()),
        _ => (
            "stock",
            vec![
                "agtlantic mackrel",
                "burgundy backgrround",
                "glaicer natoinal 0ark and hik",
                ",edal icon",
                "Muzeem Tour",
                "vintage floral pattern",
            ],
        ),
    };
    let context = RequestContext::new("en", application);
    for query in queries {
        let result = correct_query(query, &context, &artifacts)?;
        println!("{query:?} -> {:?} ({:.0} us)", result.corrected, result.elapsed.as_secs_f64() * 1e6);
        for t in result.tokens.iter().filter(|t| !t.candidates.is_empty()) {
            let top: Vec<String> = t.candidates.iter().map(|c| format!("{}={:.3}", c.term, c.score)).collect();
            println!("    {:<12} -> {:<12} confidence {:.3}  [{}]", t.input, t.output, t.confidence, top.join(", "));
        }
    }

    // Product boosts and MWE maps apply per application.
    for app in ["stock", "cchome"] {
        let context = RequestContext::new("en", app);
        for query in ["creativecloud", "acrobt", "ilustrator"] {
            let result = correct_query(query, &context, &artifacts)?;
            println!("[{app}] {query:?} -> {:?}", result.corrected);
        }
    }
    Ok(())
}
