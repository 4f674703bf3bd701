//! Multi-word expression rewriting: compounds are split and split phrases
//! joined, longest match first, in a single left-to-right pass.
//!
//! ```text
//! cargo run --example mwe_rewrite
//! ```

mod common;

use speller::mwe::{apply_mwe, MweMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cchome = MweMap::load(&common::data("mwe/cchome.tsv"), "cchome")?;
    println!("{} rewrites for {}", cchome.len(), cchome.application());
    for query in ["creativecloud", "CreativeCloud download", "photo shop express", "photo shop brushes", "Light Room presets", "indesign"] {
        println!("  {query:<24} -> {}", apply_mwe(query, &cchome));
    }

    // Maps can also be built in code; replacements are never re-scanned.
    let mut map = MweMap::new("demo");
    map.insert("after effects", "aftereffects")?;
    map.insert("aftereffects", "after effects")?;
    println!("  {:<24} -> {}", "after effects", apply_mwe("after effects", &map));
    Ok(())
}
