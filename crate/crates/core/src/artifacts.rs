//! On-disk layout of an artifact directory.
//!
//! ```text
//! dictionary.tsv     term, word_count, asset_frequency, download_count
//! manifest.conf      locale, index parameters, term count, fingerprint
//! index.tsv          optional sorted dump of the delete index
//! model.json         trained ranker
//! mwe/<app>.tsv      per-application MWE rewrites
//! boost.tsv          boost rules
//! speller.conf       optional service configuration
//! ```
//!
//! The delete index itself is rebuilt from the dictionary on load; the
//! manifest pins its parameters and the dictionary fingerprint.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::dictionary::{build_delete_index, DeleteIndex, FrequencyDictionary};
use crate::error::{Error, Result};
use crate::mwe::MweMap;
use crate::pipeline::{Artifacts, BoostConfig};
use crate::ranker::load_model;
use crate::tsv;

pub const DICTIONARY_FILE: &str = "dictionary.tsv";
pub const MANIFEST_FILE: &str = "manifest.conf";
pub const INDEX_DUMP_FILE: &str = "index.tsv";
pub const MODEL_FILE: &str = "model.json";
pub const MWE_DIR: &str = "mwe";
pub const BOOST_FILE: &str = "boost.tsv";
pub const CONFIG_FILE: &str = "speller.conf";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub locale: String,
    pub prefix_length: usize,
    pub max_edit_distance: usize,
    pub terms: usize,
    pub fingerprint: u64,
}

impl Manifest {
    pub fn describe(dict: &FrequencyDictionary, index: &DeleteIndex) -> Self {
        Manifest {
            locale: dict.locale().to_owned(),
            prefix_length: index.prefix_length(),
            max_edit_distance: index.max_edit_distance(),
            terms: dict.len(),
            fingerprint: dict.fingerprint(),
        }
    }

    pub fn to_text(&self) -> String {
        format!(
            "locale = {}\nprefix_length = {}\nmax_edit_distance = {}\nterms = {}\nfingerprint = {:016x}\n",
            self.locale, self.prefix_length, self.max_edit_distance, self.terms, self.fingerprint
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = tsv::read_to_string(path)?;
        let mut fields: HashMap<&str, (usize, &str)> = HashMap::new();
        for kv in tsv::key_values(path, &text) {
            let (line, key, value) = kv?;
            fields.insert(key, (line, value));
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| Error::Config(format!("{}: missing key {key:?}", path.display())))
        };
        let number = |key: &str| -> Result<usize> {
            let (line, v) = get(key)?;
            v.parse()
                .map_err(|_| Error::load(path, line, format!("{key} is not a number: {v:?}")))
        };
        let (fp_line, fp) = get("fingerprint")?;
        Ok(Manifest {
            locale: get("locale")?.1.to_owned(),
            prefix_length: number("prefix_length")?,
            max_edit_distance: number("max_edit_distance")?,
            terms: number("terms")?,
            fingerprint: u64::from_str_radix(fp, 16)
                .map_err(|_| Error::load(path, fp_line, format!("bad fingerprint {fp:?}")))?,
        })
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the dictionary, the manifest and optionally the index dump.
pub fn save_index(dir: &Path, dict: &FrequencyDictionary, index: &DeleteIndex, dump_index: bool) -> Result<()> {
    create_dir(dir)?;
    tsv::write_atomic(&dir.join(DICTIONARY_FILE), dict.to_tsv().as_bytes())?;
    if dump_index {
        tsv::write_atomic(&dir.join(INDEX_DUMP_FILE), index.to_tsv(dict).as_bytes())?;
    }
    // The manifest goes last: a directory with a manifest is complete.
    tsv::write_atomic(&dir.join(MANIFEST_FILE), Manifest::describe(dict, index).to_text().as_bytes())
}

/// Loads the dictionary and rebuilds its index with the manifest's parameters.
pub fn load_index(dir: &Path) -> Result<(FrequencyDictionary, DeleteIndex)> {
    let manifest = Manifest::load(&dir.join(MANIFEST_FILE))?;
    if manifest.prefix_length == 0 {
        return Err(Error::Config("manifest prefix_length must be positive".into()));
    }
    let dict = FrequencyDictionary::load_artifact(&dir.join(DICTIONARY_FILE), &manifest.locale)?;
    if dict.fingerprint() != manifest.fingerprint || dict.len() != manifest.terms {
        return Err(Error::Config(format!(
            "{} does not match {}",
            dir.join(DICTIONARY_FILE).display(),
            dir.join(MANIFEST_FILE).display()
        )));
    }
    let index = build_delete_index(&dict, manifest.max_edit_distance, manifest.prefix_length);
    Ok((dict, index))
}

/// Every `mwe/<application>.tsv` file; a missing directory means no rewrites.
pub fn load_mwe_dir(dir: &Path) -> Result<HashMap<String, MweMap>> {
    let mwe_dir = dir.join(MWE_DIR);
    let mut maps = HashMap::new();
    if !mwe_dir.is_dir() {
        return Ok(maps);
    }
    let entries = fs::read_dir(&mwe_dir).map_err(|e| Error::io(&mwe_dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&mwe_dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("tsv") {
            continue;
        }
        let Some(app) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        maps.insert(app.to_owned(), MweMap::load(&path, app)?);
    }
    Ok(maps)
}

/// Loads a complete artifact set with default thresholds.
pub fn load_artifacts(dir: &Path) -> Result<Artifacts> {
    let (dict, index) = load_index(dir)?;
    let model = load_model(&dir.join(MODEL_FILE))?;
    let mut artifacts = Artifacts::new(dict, index, model)?;
    artifacts.mwe = load_mwe_dir(dir)?;
    let boost_path = dir.join(BOOST_FILE);
    if boost_path.exists() {
        artifacts.boost = BoostConfig::load(&boost_path)?;
    }
    Ok(artifacts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::DictionaryBuilder;
    use crate::features::FeatureSchema;
    use crate::mlp::{MlpModel, DEFAULT_HIDDEN};
    use crate::ranker::save_model;

    fn dict() -> FrequencyDictionary {
        let mut b = DictionaryBuilder::new("en");
        for (w, c) in [("museum", 10), ("medal", 20), ("creative", 5), ("cloud", 7)] {
            b.add_word_count(w, c).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn index_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let d = dict();
        let index = build_delete_index(&d, 2, 5);
        save_index(dir.path(), &d, &index, true).unwrap();
        let (d2, index2) = load_index(dir.path()).unwrap();
        assert_eq!(d2, d);
        assert_eq!(index2, index);
        let dump = fs::read_to_string(dir.path().join(INDEX_DUMP_FILE)).unwrap();
        assert!(dump.lines().any(|l| l == "mseu\tmuseum"));
    }

    #[test]
    fn edited_dictionary_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let d = dict();
        save_index(dir.path(), &d, &build_delete_index(&d, 2, 7), false).unwrap();
        let path = dir.path().join(DICTIONARY_FILE);
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("extra\t1\t0\t0\n");
        fs::write(&path, text).unwrap();
        assert!(matches!(load_index(dir.path()), Err(Error::Config(_))));
    }

    #[test]
    fn full_directory() {
        let dir = tempfile::tempdir().unwrap();
        let d = dict();
        save_index(dir.path(), &d, &build_delete_index(&d, 2, 7), false).unwrap();
        assert!(matches!(load_artifacts(dir.path()), Err(Error::Io { .. })));

        let model = MlpModel::zeros(FeatureSchema::default(), DEFAULT_HIDDEN, 0.2).unwrap();
        save_model(&model, &dir.path().join(MODEL_FILE)).unwrap();
        fs::create_dir(dir.path().join(MWE_DIR)).unwrap();
        fs::write(dir.path().join("mwe/cchome.tsv"), "creativecloud\tcreative cloud\n").unwrap();
        fs::write(dir.path().join("mwe/README"), "ignored").unwrap();
        fs::write(dir.path().join(BOOST_FILE), "cchome\tcloud\t2\n").unwrap();

        let a = load_artifacts(dir.path()).unwrap();
        assert_eq!(a.mwe.len(), 1);
        assert_eq!(a.mwe["cchome"].get("creativecloud"), Some("creative cloud"));
        assert_eq!(a.boost.multiplier("cchome", "cloud"), 2.0);
    }

    #[test]
    fn manifest_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(MANIFEST_FILE);
        fs::write(&path, "locale = en\nprefix_length = seven\n").unwrap();
        assert!(matches!(Manifest::load(&path), Err(Error::Config(_))));
        fs::write(&path, "locale = en\nprefix_length = x\nmax_edit_distance = 2\nterms = 1\nfingerprint = 0\n").unwrap();
        assert!(matches!(Manifest::load(&path), Err(Error::Load { line: 2, .. })));
        fs::write(&path, "no equals sign\n").unwrap();
        assert!(matches!(Manifest::load(&path), Err(Error::Load { line: 1, .. })));
    }
}
