//! Linear models over interned feature names, with JSON persistence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::{FeatureInterner, SparseVector};
use crate::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Classifier,
    Cost,
}

/// Model metadata carried alongside the weights.
///
/// `order` is the history length for classifier models and the label
/// context order (2 or 3) for cost models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelMeta {
    pub kind: ModelKind,
    pub order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_unigram_obs: Option<bool>,
    pub alphabet: Vec<String>,
}

/// Sparse linear model: weights over interned feature names.
///
/// Scoring is pure; mutation happens only during training.
#[derive(Debug, Clone)]
pub struct LinearModel {
    weights: SparseVector,
    interner: FeatureInterner,
    meta: ModelMeta,
}

impl LinearModel {
    pub fn new(meta: ModelMeta) -> Self {
        Self {
            weights: SparseVector::new(),
            interner: FeatureInterner::new(),
            meta,
        }
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn weights(&self) -> &SparseVector {
        &self.weights
    }

    pub fn interner(&self) -> &FeatureInterner {
        &self.interner
    }

    /// Weight of a feature name; unseen names weigh 0.
    pub fn weight(&self, name: &str) -> f64 {
        match self.interner.get(name) {
            Some(id) => self.weights.get(id),
            None => 0.0,
        }
    }

    /// Adds `delta` to the named feature's weight, interning the name.
    pub fn add_to(&mut self, name: &str, delta: f64) {
        let id = self.interner.intern(name);
        self.weights.add(id, delta);
    }

    pub fn set(&mut self, name: &str, value: f64) {
        let id = self.interner.intern(name);
        self.weights.set(id, value);
    }

    pub fn scale(&mut self, c: f64) {
        self.weights.scale(c);
    }

    pub fn num_nonzero(&self) -> usize {
        self.weights.iter().filter(|(_, v)| *v != 0.0).count()
    }

    /// Serializes to the versioned JSON document. Features are listed in
    /// first-interned order with zero weights omitted; weights round-trip
    /// exactly through the shortest decimal representation.
    pub fn to_json(&self) -> Result<String> {
        let features: Vec<(String, f64)> = (0..self.interner.len() as u32)
            .filter_map(|id| {
                let w = self.weights.get(id);
                (w != 0.0).then(|| (self.interner.name(id).to_owned(), w))
            })
            .collect();
        let doc = PersistedModel {
            version: MODEL_FORMAT_VERSION,
            model_kind: self.meta.kind,
            order: self.meta.order,
            window: self.meta.window,
            include_unigram_obs: self.meta.include_unigram_obs,
            alphabet: self.meta.alphabet.clone(),
            features,
        };
        let mut s = serde_json::to_string(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PersistedModel = serde_json::from_str(s)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelMismatch(format!(
                "unsupported model format version {}",
                doc.version
            )));
        }
        let mut model = LinearModel::new(ModelMeta {
            kind: doc.model_kind,
            order: doc.order,
            window: doc.window,
            include_unigram_obs: doc.include_unigram_obs,
            alphabet: doc.alphabet,
        });
        for (name, w) in &doc.features {
            model.set(name, *w);
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)?;
        Self::from_json(&s)
    }
}

/// Lazily-averaged weight accumulator backing the off-by-default
/// averaged-Perceptron option of both trainers.
pub(crate) struct Averager {
    totals: std::collections::HashMap<u32, f64>,
    stamps: std::collections::HashMap<u32, u64>,
    ticks: u64,
}

impl Averager {
    pub(crate) fn new() -> Self {
        Self {
            totals: std::collections::HashMap::new(),
            stamps: std::collections::HashMap::new(),
            ticks: 0,
        }
    }

    /// Advances the averaging clock by one training instance.
    pub(crate) fn tick(&mut self) {
        self.ticks += 1;
    }

    /// Flushes the pending contribution of a weight that is about to change.
    /// Must be called before the update is applied.
    pub(crate) fn note_by_name(&mut self, model: &mut LinearModel, name: &str) {
        let old = model.weight(name);
        model.add_to(name, 0.0); // force interning so the id exists
        let id = model.interner().get(name).expect("just interned");
        let stamp = self.stamps.entry(id).or_insert(0);
        *self.totals.entry(id).or_insert(0.0) += (self.ticks - *stamp) as f64 * old;
        *stamp = self.ticks;
    }

    /// Replaces the model's weights with their running averages.
    pub(crate) fn finalize(mut self, model: &mut LinearModel) {
        if self.ticks == 0 {
            return;
        }
        let ids: Vec<u32> = model.weights().iter().map(|(id, _)| id).collect();
        for id in ids {
            let w = model.weights().get(id);
            let stamp = self.stamps.entry(id).or_insert(0);
            *self.totals.entry(id).or_insert(0.0) += (self.ticks - *stamp) as f64 * w;
            *stamp = self.ticks;
        }
        let n = self.ticks as f64;
        for (id, total) in self.totals {
            let name = model.interner().name(id).to_owned();
            model.set(&name, total / n);
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PersistedModel {
    version: u32,
    model_kind: ModelKind,
    order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    include_unigram_obs: Option<bool>,
    alphabet: Vec<String>,
    features: Vec<(String, f64)>,
}
