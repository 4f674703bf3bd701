//! Query-level accuracy, precision and recall for any correction system.
//!
//! Strings are compared after normalization and whitespace collapsing.
//! Recall is measured over misspelled inputs, precision over inputs the
//! system changed; an empty denominator yields `None`, not zero.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::text::canonical_query;
use crate::tsv;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvalRecord {
    pub input: String,
    pub gold: String,
    pub predicted: String,
    pub input_was_misspelled: bool,
    pub system_changed: bool,
}

impl EvalRecord {
    pub fn new(input: &str, gold: &str, predicted: &str) -> Self {
        let (i, g, p) = (canonical_query(input), canonical_query(gold), canonical_query(predicted));
        EvalRecord {
            input_was_misspelled: i != g,
            system_changed: p != i,
            input: i,
            gold: g,
            predicted: p,
        }
    }

    pub fn is_correct(&self) -> bool {
        self.predicted == self.gold
    }
}

/// Raw counts; shards can be merged by summing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounts {
    pub total: usize,
    pub correct: usize,
    pub misspelled: usize,
    pub misspelled_corrected: usize,
    pub changed: usize,
    pub changed_correct: usize,
}

impl EvalCounts {
    pub fn add(&mut self, record: &EvalRecord) {
        let ok = record.is_correct();
        self.total += 1;
        self.correct += usize::from(ok);
        if record.input_was_misspelled {
            self.misspelled += 1;
            self.misspelled_corrected += usize::from(ok);
        }
        if record.system_changed {
            self.changed += 1;
            self.changed_correct += usize::from(ok);
        }
    }

    pub fn merge(&mut self, other: &EvalCounts) {
        self.total += other.total;
        self.correct += other.correct;
        self.misspelled += other.misspelled;
        self.misspelled_corrected += other.misspelled_corrected;
        self.changed += other.changed;
        self.changed_correct += other.changed_correct;
    }

    pub fn report(&self) -> Result<EvalReport> {
        if self.total == 0 {
            return Err(Error::Argument("cannot evaluate an empty record set".into()));
        }
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        Ok(EvalReport {
            accuracy: self.correct as f64 / self.total as f64,
            precision: ratio(self.changed_correct, self.changed),
            recall: ratio(self.misspelled_corrected, self.misspelled),
            counts: *self,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub counts: EvalCounts,
}

pub fn evaluate(records: &[EvalRecord]) -> Result<EvalReport> {
    let mut counts = EvalCounts::default();
    records.iter().for_each(|r| counts.add(r));
    counts.report()
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"));
        let c = &self.counts;
        writeln!(f, "metric     value   numerator/denominator")?;
        writeln!(f, "accuracy   {:.4}  {}/{}", self.accuracy, c.correct, c.total)?;
        writeln!(f, "precision  {:<6}  {}/{}", show(self.precision), c.changed_correct, c.changed)?;
        write!(f, "recall     {:<6}  {}/{}", show(self.recall), c.misspelled_corrected, c.misspelled)
    }
}

/// An `input<TAB>gold` row, optionally with a third `predicted` column for
/// scoring an external system's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalRow {
    pub input: String,
    pub gold: String,
    pub predicted: Option<String>,
}

pub fn read_eval_file(path: &Path) -> Result<Vec<EvalRow>> {
    let text = tsv::read_to_string(path)?;
    tsv::records(&text)
        .map(|r| match r.fields.as_slice() {
            [input, gold] => Ok(EvalRow {
                input: (*input).to_owned(),
                gold: (*gold).to_owned(),
                predicted: None,
            }),
            [input, gold, predicted] => Ok(EvalRow {
                input: (*input).to_owned(),
                gold: (*gold).to_owned(),
                predicted: Some((*predicted).to_owned()),
            }),
            _ => Err(Error::load(path, r.line, "expected input<TAB>gold[<TAB>predicted]")),
        })
        .collect()
}

/// Scores rows, taking predictions from the file's third column when
/// present and from `predict` otherwise.
pub fn score_rows(rows: &[EvalRow], mut predict: impl FnMut(&str) -> Result<String>) -> Result<Vec<EvalRecord>> {
    rows.iter()
        .map(|r| {
            let predicted = match &r.predicted {
                Some(p) => p.clone(),
                None => predict(&r.input)?,
            };
            Ok(EvalRecord::new(&r.input, &r.gold, &predicted))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Hand-counted: 6 misspelled inputs, 5 of them fixed; 6 changed by the
    /// system, 5 correctly; 8 of 10 predictions equal gold.
    fn fixture() -> Vec<EvalRecord> {
        [
            ("muzeem", "museum", "museum"),
            ("chnage", "change", "change"),
            ("frash", "fresh", "fresh"),
            ("mackrel", "mackerel", "mackerel"),
            ("glaicer park", "glacier park", "glacier park"),
            // misspelled, left alone
            ("hik", "hike", "hik"),
            // correct input, wrongly changed
            ("medal icon", "medal icon", "metal icon"),
            ("Burgundy  Background", "burgundy background", "burgundy background"),
            ("atlantic", "atlantic", "atlantic"),
            ("park", "park", "park"),
        ]
        .iter()
        .map(|(i, g, p)| EvalRecord::new(i, g, p))
        .collect()
    }

    #[test]
    fn hand_counted_fixture() {
        let r = evaluate(&fixture()).unwrap();
        assert_eq!(r.counts.total, 10);
        assert_eq!(r.accuracy, 0.8);
        assert_eq!(r.recall, Some(5.0 / 6.0));
        assert_eq!(r.precision, Some(5.0 / 6.0));
    }

    #[test]
    fn fixture_file_matches() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/eval_fixture.tsv");
        let records: Vec<_> = read_eval_file(&path)
            .unwrap()
            .iter()
            .map(|r| EvalRecord::new(&r.input, &r.gold, r.predicted.as_deref().unwrap()))
            .collect();
        assert_eq!(records, fixture());
    }

    #[test]
    fn all_correct_inputs_unchanged() {
        let records: Vec<_> = ["a", "b c", "d"].iter().map(|q| EvalRecord::new(q, q, q)).collect();
        let r = evaluate(&records).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.recall, None);
        assert_eq!(r.precision, None);
    }

    #[test]
    fn echo_system() {
        let records = vec![
            EvalRecord::new("teh", "the", "teh"),
            EvalRecord::new("the", "the", "the"),
        ];
        let r = evaluate(&records).unwrap();
        assert_eq!(r.recall, Some(0.0));
        assert_eq!(r.precision, None);
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn empty_is_argument_error() {
        assert!(matches!(evaluate(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn comparison_is_normalized() {
        let r = EvalRecord::new("Museum  Tour", "museum tour", "MUSEUM tour");
        assert!(!r.input_was_misspelled);
        assert!(!r.system_changed);
        assert!(r.is_correct());
    }

    #[test]
    fn eval_file_formats() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eval.tsv");
        std::fs::write(&path, "# input gold predicted\nmuzeem\tmuseum\nteh\tthe\tthe\n").unwrap();
        let rows = read_eval_file(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].predicted, None);
        assert_eq!(rows[1].predicted.as_deref(), Some("the"));
        std::fs::write(&path, "only-one-field\n").unwrap();
        assert!(read_eval_file(&path).is_err());
    }

    fn arb_record() -> impl Strategy<Value = EvalRecord> {
        ("[ab]{1,2}", "[ab]{1,2}", "[ab]{1,2}").prop_map(|(i, g, p)| EvalRecord::new(&i, &g, &p))
    }

    proptest! {
        #[test]
        fn metrics_in_unit_interval_and_order_free(mut records in proptest::collection::vec(arb_record(), 1..30)) {
            let r = evaluate(&records).unwrap();
            for v in [Some(r.accuracy), r.precision, r.recall].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            records.reverse();
            prop_assert_eq!(evaluate(&records).unwrap(), r);
        }

        #[test]
        fn perfect_system(inputs in proptest::collection::vec(("[ab]{1,2}", "[ab]{1,2}"), 1..30)) {
            let records: Vec<_> = inputs.iter().map(|(i, g)| EvalRecord::new(i, g, g)).collect();
            let r = evaluate(&records).unwrap();
            prop_assert_eq!(r.accuracy, 1.0);
            if r.counts.misspelled > 0 {
                prop_assert_eq!(r.recall, Some(1.0));
                prop_assert_eq!(r.precision, Some(1.0));
            }
        }

        #[test]
        fn shard_merge_is_exact(records in proptest::collection::vec(arb_record(), 1..30), split in 0usize..30) {
            let split = split.min(records.len());
            let mut a = EvalCounts::default();
            records[..split].iter().for_each(|r| a.add(r));
            let mut b = EvalCounts::default();
            records[split..].iter().for_each(|r| b.add(r));
            a.merge(&b);
            prop_assert_eq!(a.report().unwrap(), evaluate(&records).unwrap());
        }
    }
}
