//! Query-level accuracy, precision and recall, first for fixed predictions
//! and then for the full pipeline.
//!
//! ```text
//! cargo run --release --example evaluate
//! ```

mod common;

use speller::eval::{evaluate, read_eval_file, score_rows};
use speller::features::RequestContext;
use speller::pipeline::correct_query;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // Rows with a third column carry their own prediction.
    let fixture = read_eval_file(&common::data("eval_fixture.tsv"))?;
    let records = score_rows(&fixture, |_| unreachable!("every row has a prediction"))?;
    let report = evaluate(&records)?;
    println!("fixed predictions\n{report}\n");

    let artifacts = common::artifacts()?;
    let context = RequestContext::new("en", "stock");
    let rows = read_eval_file(&common::data("eval_en.tsv"))?;
    let records = score_rows(&rows, |q| Ok(correct_query(q, &context, &artifacts)?.corrected))?;
    for r in &records {
        let mark = if r.is_correct() { "ok " } else { "MISS" };
        println!("{mark} {:<28} -> {:<28} (gold {})", r.input, r.predicted, r.gold);
    }
    let report = evaluate(&records)?;
    println!("pipeline\n{report}");
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}
