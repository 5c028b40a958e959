//! Label alphabets, sequence examples, and datasets.

use std::collections::{BTreeMap, HashMap};

use crate::features::FeatureInterner;
use crate::{Error, Result};

/// Label ordinal into a [`LabelAlphabet`].
pub type Label = usize;

/// Ordered set of distinct label strings with 0-based ordinals.
#[derive(Debug, Clone)]
pub struct LabelAlphabet {
    labels: Vec<String>,
    index: HashMap<String, Label>,
}

impl LabelAlphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::Usage(format!(
                "alphabet needs at least 2 labels, got {}",
                labels.len()
            )));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Usage(format!("duplicate label '{l}' in alphabet")));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: size >= 2
    }

    pub fn label(&self, ordinal: Label) -> &str {
        &self.labels[ordinal]
    }

    pub fn ordinal(&self, name: &str) -> Option<Label> {
        self.index.get(name).copied()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|s| s.as_str())
    }
}

/// Per-token observation features: sparse map from interned feature id
/// (into the dataset's observation vocabulary) to a non-zero value.
#[derive(Debug, Clone, Default)]
pub struct ObservationVector {
    features: BTreeMap<u32, f64>,
}

impl ObservationVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a feature value; zero-valued results are dropped.
    pub fn add(&mut self, id: u32, value: f64) {
        let v = self.features.entry(id).or_insert(0.0);
        *v += value;
        if *v == 0.0 {
            self.features.remove(&id);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.features.iter().map(|(&id, &v)| (id, v))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// A structured input (one observation vector per position) with an
/// optional gold label sequence.
#[derive(Debug, Clone)]
pub struct SequenceExample {
    pub id: String,
    pub tokens: Vec<ObservationVector>,
    pub gold: Option<Vec<Label>>,
}

impl SequenceExample {
    /// Sequence length T.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn gold(&self) -> Result<&[Label]> {
        self.gold
            .as_deref()
            .ok_or_else(|| Error::Usage(format!("example '{}' has no gold labels", self.id)))
    }
}

/// A collection of examples sharing one alphabet and one observation
/// feature vocabulary.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub alphabet: LabelAlphabet,
    pub obs_vocab: FeatureInterner,
    pub examples: Vec<SequenceExample>,
}

impl Dataset {
    pub fn validate(&self) -> Result<()> {
        for ex in &self.examples {
            if ex.is_empty() {
                return Err(Error::Usage(format!("example '{}' is empty", ex.id)));
            }
            if let Some(gold) = &ex.gold {
                if gold.len() != ex.len() {
                    return Err(Error::Usage(format!(
                        "example '{}': gold length {} != T {}",
                        ex.id,
                        gold.len(),
                        ex.len()
                    )));
                }
                if gold.iter().any(|&l| l >= self.alphabet.len()) {
                    return Err(Error::Usage(format!(
                        "example '{}': gold label out of alphabet range",
                        ex.id
                    )));
                }
            }
        }
        Ok(())
    }
}
