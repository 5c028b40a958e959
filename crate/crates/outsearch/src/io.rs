//! Dataset, prediction, and metrics file formats.
//!
//! Datasets are CoNLL-style TSV: one token per line, `feat1 feat2 …<TAB>label`,
//! a blank line between sequences, UTF-8 with LF endings. A feature is either
//! a bare name (value 1.0) or `name=value` when the part after the last `=`
//! parses as a number.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Label, LabelAlphabet, ObservationVector, SequenceExample};
use crate::features::FeatureInterner;
use crate::{Error, Result};

fn parse_error(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        msg: msg.into(),
    }
}

/// Splits a feature token into (name, value). The value is taken from after
/// the last `=` only when it parses as a number; otherwise the whole token is
/// the name (so label-valued features like `o=L1` keep their spelling).
fn parse_feature(token: &str) -> (&str, f64) {
    if let Some(pos) = token.rfind('=') {
        if let Ok(v) = token[pos + 1..].parse::<f64>() {
            return (&token[..pos], v);
        }
    }
    (token, 1.0)
}

/// Parses dataset text. With a fixed alphabet, unknown labels are errors;
/// otherwise the alphabet is inferred in first-seen order. Example ids are
/// `ex0`, `ex1`, … by position.
pub fn parse_dataset(text: &str, path: &str, alphabet: Option<&LabelAlphabet>) -> Result<Dataset> {
    struct RawToken {
        line: usize,
        features: Vec<(String, f64)>,
        label: String,
    }
    let mut sequences: Vec<Vec<RawToken>> = Vec::new();
    let mut current: Vec<RawToken> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                sequences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (feat_part, label) = line
            .rsplit_once('\t')
            .ok_or_else(|| parse_error(path, lineno, "expected `features<TAB>label`"))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(parse_error(path, lineno, "empty label"));
        }
        let features = feat_part
            .split_whitespace()
            .map(|tok| {
                let (name, v) = parse_feature(tok);
                (name.to_owned(), v)
            })
            .collect();
        current.push(RawToken {
            line: lineno,
            features,
            label: label.to_owned(),
        });
    }
    if !current.is_empty() {
        sequences.push(current);
    }
    if sequences.is_empty() {
        return Err(parse_error(path, 1, "empty dataset"));
    }

    let alphabet = match alphabet {
        Some(a) => a.clone(),
        None => {
            let mut seen: Vec<String> = Vec::new();
            for tok in sequences.iter().flatten() {
                if !seen.iter().any(|l| l == &tok.label) {
                    seen.push(tok.label.clone());
                }
            }
            LabelAlphabet::new(seen)?
        }
    };

    let mut obs_vocab = FeatureInterner::new();
    let mut examples = Vec::with_capacity(sequences.len());
    for (i, seq) in sequences.iter().enumerate() {
        let mut tokens = Vec::with_capacity(seq.len());
        let mut gold: Vec<Label> = Vec::with_capacity(seq.len());
        for tok in seq {
            let ordinal = alphabet.ordinal(&tok.label).ok_or_else(|| {
                parse_error(path, tok.line, format!("label '{}' not in alphabet", tok.label))
            })?;
            gold.push(ordinal);
            let mut ov = ObservationVector::new();
            for (name, v) in &tok.features {
                ov.add(obs_vocab.intern(name), *v);
            }
            tokens.push(ov);
        }
        examples.push(SequenceExample {
            id: format!("ex{i}"),
            tokens,
            gold: Some(gold),
        });
    }
    let ds = Dataset {
        alphabet,
        obs_vocab,
        examples,
    };
    ds.validate()?;
    Ok(ds)
}

pub fn load_dataset(path: &Path, alphabet: Option<&LabelAlphabet>) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string(), alphabet)
}

/// Serializes a dataset (gold labels required) back to the TSV format.
pub fn write_dataset_string(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    for (i, ex) in dataset.examples.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let gold = ex.gold()?;
        for (t, tok) in ex.tokens.iter().enumerate() {
            let mut first = true;
            for (fid, v) in tok.iter() {
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(dataset.obs_vocab.name(fid));
                if v != 1.0 {
                    out.push('=');
                    out.push_str(&v.to_string());
                }
            }
            out.push('\t');
            out.push_str(dataset.alphabet.label(gold[t]));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    std::fs::write(path, write_dataset_string(dataset)?)?;
    Ok(())
}

/// Predictions TSV: `example_id<TAB>label1 label2 …` per example.
pub fn write_predictions<W: Write>(
    w: &mut W,
    alphabet: &LabelAlphabet,
    predictions: &[(String, Vec<Label>)],
) -> Result<()> {
    for (id, labels) in predictions {
        let row: Vec<&str> = labels.iter().map(|&l| alphabet.label(l)).collect();
        writeln!(w, "{id}\t{}", row.join(" "))?;
    }
    Ok(())
}

/// Evaluation metrics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub recurrent_accuracy: f64,
    pub exact_imitation_accuracy: f64,
    pub mean_search_steps: f64,
}

pub fn write_metrics<W: Write>(w: &mut W, metrics: &Metrics) -> Result<()> {
    let mut s = serde_json::to_string_pretty(metrics)?;
    s.push('\n');
    w.write_all(s.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_SEQ: &str = "w=the cap\tDET\nw=dog\tNOUN\nw=ran\tVERB\n\nw=it\tNOUN\nw=ran\tVERB\n";

    #[test]
    fn parses_two_sequences_with_inferred_alphabet() {
        let ds = parse_dataset(TWO_SEQ, "mem", None).unwrap();
        assert_eq!(ds.examples.len(), 2);
        assert_eq!(ds.examples[0].len(), 3);
        assert_eq!(ds.examples[1].len(), 2);
        assert_eq!(ds.examples[0].id, "ex0");
        assert_eq!(ds.examples[1].id, "ex1");
        // First-seen label order.
        let labels: Vec<&str> = ds.alphabet.labels().collect();
        assert_eq!(labels, vec!["DET", "NOUN", "VERB"]);
        assert_eq!(ds.examples[0].gold().unwrap(), &[0, 1, 2]);
        assert_eq!(ds.examples[1].gold().unwrap(), &[1, 2]);
    }

    #[test]
    fn trailing_blank_lines_change_nothing() {
        let a = parse_dataset(TWO_SEQ, "mem", None).unwrap();
        let b = parse_dataset(&format!("{TWO_SEQ}\n\n"), "mem", None).unwrap();
        assert_eq!(write_dataset_string(&a).unwrap(), write_dataset_string(&b).unwrap());
    }

    #[test]
    fn numeric_feature_values_round_trip() {
        let text = "w=dog count=2.5\tNOUN\nplain\tVERB\n";
        let ds = parse_dataset(text, "mem", None).unwrap();
        let tok = &ds.examples[0].tokens[0];
        let count_id = ds.obs_vocab.get("count").unwrap();
        let word_id = ds.obs_vocab.get("w=dog").unwrap();
        assert_eq!(tok.iter().find(|(id, _)| *id == count_id).unwrap().1, 2.5);
        assert_eq!(tok.iter().find(|(id, _)| *id == word_id).unwrap().1, 1.0);
        assert_eq!(write_dataset_string(&ds).unwrap(), text);
    }

    #[test]
    fn unknown_label_under_fixed_alphabet_names_the_line() {
        let alphabet = LabelAlphabet::new(["DET", "NOUN"]).unwrap();
        let err = parse_dataset(TWO_SEQ, "mem", Some(&alphabet)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3), // first VERB
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_and_empty_inputs_are_rejected() {
        assert!(parse_dataset("no tab here\n", "mem", None).is_err());
        assert!(parse_dataset("", "mem", None).is_err());
        assert!(parse_dataset("\n\n", "mem", None).is_err());
        assert!(parse_dataset("w=x\t\n", "mem", None).is_err());
    }

    #[test]
    fn predictions_tsv_shape() {
        let alphabet = LabelAlphabet::new(["A", "B"]).unwrap();
        let mut buf = Vec::new();
        write_predictions(
            &mut buf,
            &alphabet,
            &[("ex0".into(), vec![0, 1, 0]), ("ex1".into(), vec![1])],
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "ex0\tA B A\nex1\tB\n");
    }

    #[test]
    fn metrics_json_round_trips() {
        let m = Metrics {
            accuracy: 0.875,
            recurrent_accuracy: 0.75,
            exact_imitation_accuracy: 0.9,
            mean_search_steps: 4.0,
        };
        let mut buf = Vec::new();
        write_metrics(&mut buf, &m).unwrap();
        let back: Metrics = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, m);
    }
}
