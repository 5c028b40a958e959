//! The primitive left-to-right decision space for sequence labeling: node
//! features, the recurrent classifier, exact-imitation training, and
//! discrepancy-overridden rollouts.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Label, LabelAlphabet, SequenceExample};
use crate::features::{FeatureInterner, NamedVector};
use crate::loss::hamming_loss;
use crate::model::{LinearModel, ModelKind, ModelMeta};
use crate::{Error, Result};

/// Reserved indicator for label positions before the sequence start.
pub const BOS: &str = "<BOS>";

/// Feature template for the recurrent classifier: observation window radius
/// and number of previous predicted labels used as features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassifierFeatureConfig {
    pub window: usize,
    pub history: usize,
}

impl Default for ClassifierFeatureConfig {
    fn default() -> Self {
        // Radius 1 = a 3-token sliding window; previous label as a feature.
        Self {
            window: 1,
            history: 1,
        }
    }
}

impl ClassifierFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.history < 1 {
            return Err(Error::Usage("classifier history must be >= 1".into()));
        }
        Ok(())
    }
}

/// A node of the primitive search space: `t` decisions made, `prefix`
/// holds the labels chosen so far. Terminal iff `t == T`.
#[derive(Debug, Clone, Copy)]
pub struct PrimitiveNode<'a> {
    pub t: usize,
    pub prefix: &'a [Label],
}

impl<'a> PrimitiveNode<'a> {
    pub fn new(t: usize, prefix: &'a [Label]) -> Self {
        debug_assert_eq!(prefix.len(), t);
        Self { t, prefix }
    }

    pub fn is_terminal(&self, example: &SequenceExample) -> bool {
        self.t == example.len()
    }
}

/// Set of (position, label) overrides; positions are 1-based, at most one
/// override per position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiscrepancySet {
    overrides: BTreeMap<usize, Label>,
}

impl DiscrepancySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns a copy with an additional override at `position` (1-based).
    pub fn with_override(&self, position: usize, label: Label) -> Self {
        debug_assert!(position >= 1);
        let mut overrides = self.overrides.clone();
        overrides.insert(position, label);
        Self { overrides }
    }

    pub fn get(&self, position: usize) -> Option<Label> {
        self.overrides.get(&position).copied()
    }

    pub fn contains_position(&self, position: usize) -> bool {
        self.overrides.contains_key(&position)
    }

    pub fn len(&self) -> usize {
        self.overrides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.overrides.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Label)> + '_ {
        self.overrides.iter().map(|(&p, &l)| (p, l))
    }
}

fn push_offset_prefix(buf: &mut String, off: isize) {
    use std::fmt::Write;
    if off > 0 {
        let _ = write!(buf, "+{off}:");
    } else {
        let _ = write!(buf, "{off}:");
    }
}

/// Feature vector of a non-terminal primitive node: windowed observation
/// features (name-prefixed by token offset) plus indicators for the last
/// `history` predicted labels, with BOS fill before the sequence start.
pub fn node_features(
    example: &SequenceExample,
    node: PrimitiveNode<'_>,
    config: &ClassifierFeatureConfig,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
) -> Result<NamedVector> {
    if node.is_terminal(example) {
        return Err(Error::Usage(format!(
            "node_features on terminal node of '{}'",
            example.id
        )));
    }
    let t = node.t;
    let mut feats = NamedVector::new();
    let w = config.window as isize;
    for off in -w..=w {
        let idx = t as isize + off;
        if idx < 0 || idx as usize >= example.len() {
            continue;
        }
        for (fid, v) in example.tokens[idx as usize].iter() {
            let mut name = String::new();
            push_offset_prefix(&mut name, off);
            name.push_str(obs_vocab.name(fid));
            feats.add(name, v);
        }
    }
    for j in 1..=config.history {
        let label = if t >= j {
            alphabet.label(node.prefix[t - j])
        } else {
            BOS
        };
        feats.add(format!("prev{j}={label}"), 1.0);
    }
    Ok(feats)
}

/// Argmax over per-label weight blocks (feature names prefixed by the label
/// string); ties break toward the smallest label ordinal.
pub fn classify_features(
    model: &LinearModel,
    alphabet: &LabelAlphabet,
    feats: &NamedVector,
) -> Label {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    let mut key = String::new();
    for a in 0..alphabet.len() {
        let label = alphabet.label(a);
        let mut score = 0.0;
        for (name, v) in feats.iter() {
            key.clear();
            key.push_str(label);
            key.push('|');
            key.push_str(name);
            score += model.weight(&key) * v;
        }
        if score > best_score {
            best_score = score;
            best = a;
        }
    }
    best
}

/// A recurrent classifier: an immutable linear model plus the pieces needed
/// to evaluate it on a dataset's examples.
#[derive(Debug, Clone, Copy)]
pub struct Classifier<'a> {
    pub model: &'a LinearModel,
    pub config: &'a ClassifierFeatureConfig,
    pub alphabet: &'a LabelAlphabet,
    pub obs_vocab: &'a FeatureInterner,
}

impl<'a> Classifier<'a> {
    pub fn node_features(
        &self,
        example: &SequenceExample,
        node: PrimitiveNode<'_>,
    ) -> Result<NamedVector> {
        node_features(example, node, self.config, self.alphabet, self.obs_vocab)
    }

    pub fn classify(&self, example: &SequenceExample, node: PrimitiveNode<'_>) -> Result<Label> {
        let feats = self.node_features(example, node)?;
        Ok(classify_features(self.model, self.alphabet, &feats))
    }

    /// Left-to-right decoding with discrepancy overrides: at 1-based step i,
    /// emit `D(i)` when present, otherwise the classifier's choice. With an
    /// empty set this is the plain recurrent prediction h(x).
    pub fn rollout(&self, example: &SequenceExample, d: &DiscrepancySet) -> Vec<Label> {
        let mut out = Vec::with_capacity(example.len());
        for t in 0..example.len() {
            let label = match d.get(t + 1) {
                Some(l) => l,
                None => self
                    .classify(example, PrimitiveNode::new(t, &out))
                    .expect("non-terminal by construction"),
            };
            out.push(label);
        }
        out
    }

    /// Fraction of gold-path decisions the classifier gets wrong (e/T).
    pub fn exact_imitation_error(&self, example: &SequenceExample) -> Result<f64> {
        let gold = example.gold()?;
        let mut errors = 0;
        for t in 0..example.len() {
            let pred = self.classify(example, PrimitiveNode::new(t, &gold[..t]))?;
            if pred != gold[t] {
                errors += 1;
            }
        }
        Ok(errors as f64 / example.len() as f64)
    }

    /// Normalized Hamming distance of the free-running prediction from gold.
    pub fn recurrent_error(&self, example: &SequenceExample) -> Result<f64> {
        let gold = example.gold()?;
        hamming_loss(&self.rollout(example, &DiscrepancySet::new()), gold)
    }
}

/// Memoizes classifier decisions per example. A decision depends only on the
/// position and the last `history` emitted labels, so rollouts that share
/// suffix context reuse prior work. Purely an evaluation cache.
pub struct CachedPolicy<'a> {
    clf: Classifier<'a>,
    example: &'a SequenceExample,
    memo: RefCell<HashMap<(usize, Vec<Label>), Label>>,
}

impl<'a> CachedPolicy<'a> {
    pub fn new(clf: Classifier<'a>, example: &'a SequenceExample) -> Self {
        Self {
            clf,
            example,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn decide(&self, t: usize, prefix: &[Label]) -> Label {
        let start = t.saturating_sub(self.clf.config.history);
        let key = (t, prefix[start..t].to_vec());
        if let Some(&l) = self.memo.borrow().get(&key) {
            return l;
        }
        let l = self
            .clf
            .classify(self.example, PrimitiveNode::new(t, prefix))
            .expect("non-terminal by construction");
        self.memo.borrow_mut().insert(key, l);
        l
    }

    pub fn rollout(&self, d: &DiscrepancySet) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.example.len());
        for t in 0..self.example.len() {
            let label = match d.get(t + 1) {
                Some(l) => l,
                None => self.decide(t, &out),
            };
            out.push(label);
        }
        out
    }
}

/// Training knobs for the multiclass Perceptron.
#[derive(Debug, Clone)]
pub struct ImitationTrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    /// Off by default; averages weights over all update steps when set.
    pub averaged: bool,
    /// Fixed dataset order unless a shuffle seed is given.
    pub shuffle_seed: Option<u64>,
}

impl Default for ImitationTrainConfig {
    fn default() -> Self {
        Self {
            iterations: 100,
            learning_rate: 1.0,
            averaged: false,
            shuffle_seed: None,
        }
    }
}

use crate::model::Averager;

/// Trains the recurrent classifier by exact imitation: one multiclass
/// Perceptron example per node on each gold path, features computed with
/// gold previous labels. Returns the final model.
pub fn train_exact_imitation(
    dataset: &Dataset,
    config: &ClassifierFeatureConfig,
    train: &ImitationTrainConfig,
) -> Result<LinearModel> {
    config.validate()?;
    if dataset.examples.is_empty() {
        return Err(Error::Usage("cannot train on an empty dataset".into()));
    }
    for ex in &dataset.examples {
        ex.gold()?;
    }

    let mut model = LinearModel::new(ModelMeta {
        kind: ModelKind::Classifier,
        order: config.history,
        window: Some(config.window),
        include_unigram_obs: None,
        alphabet: dataset.alphabet.labels().map(str::to_owned).collect(),
    });
    let mut averager = train.averaged.then(Averager::new);
    let eta = train.learning_rate;

    let mut order: Vec<usize> = (0..dataset.examples.len()).collect();
    let mut rng = train.shuffle_seed.map(ChaCha8Rng::seed_from_u64);

    let mut key = String::new();
    for _ in 0..train.iterations {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        for &i in &order {
            let ex = &dataset.examples[i];
            let gold = ex.gold()?;
            for t in 0..ex.len() {
                let feats = node_features(
                    ex,
                    PrimitiveNode::new(t, &gold[..t]),
                    config,
                    &dataset.alphabet,
                    &dataset.obs_vocab,
                )?;
                let pred = classify_features(&model, &dataset.alphabet, &feats);
                if let Some(avg) = averager.as_mut() {
                    avg.tick();
                }
                if pred != gold[t] {
                    let gold_label = dataset.alphabet.label(gold[t]);
                    let pred_label = dataset.alphabet.label(pred);
                    for (name, v) in feats.iter() {
                        for (label, sign) in [(gold_label, 1.0), (pred_label, -1.0)] {
                            key.clear();
                            key.push_str(label);
                            key.push('|');
                            key.push_str(name);
                            if let Some(avg) = averager.as_mut() {
                                avg.note_by_name(&mut model, &key);
                            }
                            model.add_to(&key, sign * eta * v);
                        }
                    }
                }
            }
        }
    }
    if let Some(avg) = averager {
        avg.finalize(&mut model);
    }
    Ok(model)
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use crate::data::{Dataset, ObservationVector};

    /// Toy dataset: alphabet {A, B}; one example, T = 3, gold A B A;
    /// token k carries a single obs feature `o=t{k}`.
    pub fn toy_dataset() -> Dataset {
        let alphabet = LabelAlphabet::new(["A", "B"]).unwrap();
        let mut obs_vocab = FeatureInterner::new();
        let mut tokens = Vec::new();
        for k in 1..=3 {
            let mut ov = ObservationVector::new();
            ov.add(obs_vocab.intern(&format!("o=t{k}")), 1.0);
            tokens.push(ov);
        }
        Dataset {
            alphabet,
            obs_vocab,
            examples: vec![SequenceExample {
                id: "toy0".into(),
                tokens,
                gold: Some(vec![0, 1, 0]),
            }],
        }
    }

    /// Stub classifier favoring A unconditionally (weight +1 on label A for
    /// every token observation); history-insensitive.
    pub fn h0(dataset: &Dataset) -> LinearModel {
        let mut m = LinearModel::new(ModelMeta {
            kind: ModelKind::Classifier,
            order: 1,
            window: Some(0),
            include_unigram_obs: None,
            alphabet: dataset.alphabet.labels().map(str::to_owned).collect(),
        });
        for name in dataset.obs_vocab.names() {
            m.add_to(&format!("A|0:{name}"), 1.0);
        }
        m
    }

    pub fn window0() -> ClassifierFeatureConfig {
        ClassifierFeatureConfig {
            window: 0,
            history: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_fixtures::*;
    use super::*;
    use crate::data::ObservationVector;

    fn toy_classifier<'a>(
        ds: &'a Dataset,
        model: &'a LinearModel,
        config: &'a ClassifierFeatureConfig,
    ) -> Classifier<'a> {
        Classifier {
            model,
            config,
            alphabet: &ds.alphabet,
            obs_vocab: &ds.obs_vocab,
        }
    }

    #[test]
    fn node_features_at_sequence_start_emit_bos() {
        let ds = toy_dataset();
        let cfg = window0();
        let ex = &ds.examples[0];
        let feats =
            node_features(ex, PrimitiveNode::new(0, &[]), &cfg, &ds.alphabet, &ds.obs_vocab)
                .unwrap();
        let got: Vec<(&str, f64)> = feats.iter().collect();
        assert_eq!(got, vec![("0:o=t1", 1.0), ("prev1=<BOS>", 1.0)]);
    }

    #[test]
    fn node_features_use_previous_predicted_label() {
        let ds = toy_dataset();
        let cfg = window0();
        let ex = &ds.examples[0];
        let feats =
            node_features(ex, PrimitiveNode::new(1, &[0]), &cfg, &ds.alphabet, &ds.obs_vocab)
                .unwrap();
        let got: Vec<(&str, f64)> = feats.iter().collect();
        assert_eq!(got, vec![("0:o=t2", 1.0), ("prev1=A", 1.0)]);
    }

    #[test]
    fn node_features_window_composes_offset_prefixes() {
        let ds = toy_dataset();
        let cfg = ClassifierFeatureConfig {
            window: 1,
            history: 1,
        };
        let ex = &ds.examples[0];
        let feats =
            node_features(ex, PrimitiveNode::new(1, &[0]), &cfg, &ds.alphabet, &ds.obs_vocab)
                .unwrap();
        for name in ["-1:o=t1", "0:o=t2", "+1:o=t3"] {
            assert_eq!(feats.get(name), 1.0, "missing {name}");
        }
    }

    #[test]
    fn node_features_reject_terminal_nodes() {
        let ds = toy_dataset();
        let ex = &ds.examples[0];
        let err = node_features(
            ex,
            PrimitiveNode::new(3, &[0, 1, 0]),
            &window0(),
            &ds.alphabet,
            &ds.obs_vocab,
        );
        assert!(err.is_err());
    }

    #[test]
    fn zero_model_classifies_to_ordinal_zero() {
        let ds = toy_dataset();
        let cfg = window0();
        let zero = LinearModel::new(ModelMeta {
            kind: ModelKind::Classifier,
            order: 1,
            window: Some(0),
            include_unigram_obs: None,
            alphabet: vec!["A".into(), "B".into()],
        });
        let clf = toy_classifier(&ds, &zero, &cfg);
        let ex = &ds.examples[0];
        for (t, prefix) in [(0, vec![]), (1, vec![1]), (2, vec![1, 1])] {
            assert_eq!(clf.classify(ex, PrimitiveNode::new(t, &prefix)).unwrap(), 0);
        }
    }

    #[test]
    fn single_active_weight_drives_classification() {
        let ds = toy_dataset();
        let cfg = window0();
        let mut m = LinearModel::new(ModelMeta {
            kind: ModelKind::Classifier,
            order: 1,
            window: Some(0),
            include_unigram_obs: None,
            alphabet: vec!["A".into(), "B".into()],
        });
        m.add_to("B|prev1=A", 1.0);
        let clf = toy_classifier(&ds, &m, &cfg);
        let ex = &ds.examples[0];
        assert_eq!(clf.classify(ex, PrimitiveNode::new(1, &[0])).unwrap(), 1);
    }

    #[test]
    fn h0_stub_always_predicts_a() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = h0(&ds);
        let clf = toy_classifier(&ds, &m, &cfg);
        let ex = &ds.examples[0];
        for (t, prefix) in [(0, vec![]), (1, vec![1]), (2, vec![0, 1])] {
            assert_eq!(clf.classify(ex, PrimitiveNode::new(t, &prefix)).unwrap(), 0);
        }
    }

    #[test]
    fn rollout_without_discrepancies_is_recurrent_prediction() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = h0(&ds);
        let clf = toy_classifier(&ds, &m, &cfg);
        assert_eq!(clf.rollout(&ds.examples[0], &DiscrepancySet::new()), vec![0, 0, 0]);
    }

    #[test]
    fn rollout_applies_overrides() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = h0(&ds);
        let clf = toy_classifier(&ds, &m, &cfg);
        let d = DiscrepancySet::new().with_override(2, 1);
        assert_eq!(clf.rollout(&ds.examples[0], &d), vec![0, 1, 0]);
    }

    #[test]
    fn full_override_ignores_the_model() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = h0(&ds); // would predict AAA on its own
        let clf = toy_classifier(&ds, &m, &cfg);
        let d = DiscrepancySet::new()
            .with_override(1, 1)
            .with_override(2, 0)
            .with_override(3, 1);
        assert_eq!(clf.rollout(&ds.examples[0], &d), vec![1, 0, 1]);
    }

    #[test]
    fn cached_policy_matches_direct_rollout() {
        let ds = toy_dataset();
        let cfg = ClassifierFeatureConfig {
            window: 1,
            history: 1,
        };
        let mut m = h0(&ds);
        m.add_to("B|prev1=B", 2.0);
        let clf = toy_classifier(&ds, &m, &cfg);
        let cached = CachedPolicy::new(clf, &ds.examples[0]);
        for d in [
            DiscrepancySet::new(),
            DiscrepancySet::new().with_override(1, 1),
            DiscrepancySet::new().with_override(2, 1).with_override(3, 0),
        ] {
            assert_eq!(cached.rollout(&d), clf.rollout(&ds.examples[0], &d));
        }
    }

    #[test]
    fn exact_imitation_error_of_h0_on_toy() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = h0(&ds);
        let clf = toy_classifier(&ds, &m, &cfg);
        // Gold is ABA; h0 errs only where gold is B.
        assert_eq!(clf.exact_imitation_error(&ds.examples[0]).unwrap(), 1.0 / 3.0);
        assert_eq!(clf.recurrent_error(&ds.examples[0]).unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn always_wrong_model_has_error_one() {
        let ds = toy_dataset();
        let cfg = window0();
        let mut m = LinearModel::new(ModelMeta {
            kind: ModelKind::Classifier,
            order: 1,
            window: Some(0),
            include_unigram_obs: None,
            alphabet: vec!["A".into(), "B".into()],
        });
        // Predicts B where gold is A and A where gold is B (gold ABA).
        m.add_to("B|0:o=t1", 1.0);
        m.add_to("A|0:o=t2", 1.0);
        m.add_to("B|0:o=t3", 1.0);
        let clf = toy_classifier(&ds, &m, &cfg);
        assert_eq!(clf.exact_imitation_error(&ds.examples[0]).unwrap(), 1.0);
    }

    /// History-sensitive model where one early mistake flips everything
    /// after it: recurrent error exceeds exact imitation error.
    #[test]
    fn error_propagation_makes_recurrent_error_exceed_imitation_error() {
        let alphabet = LabelAlphabet::new(["A", "B"]).unwrap();
        let mut obs_vocab = FeatureInterner::new();
        let mut t1 = ObservationVector::new();
        t1.add(obs_vocab.intern("o=trap"), 1.0);
        let ds = Dataset {
            alphabet,
            obs_vocab,
            examples: vec![SequenceExample {
                id: "prop".into(),
                tokens: vec![t1, ObservationVector::new(), ObservationVector::new()],
                gold: Some(vec![0, 0, 0]),
            }],
        };
        let cfg = window0();
        let mut m = LinearModel::new(ModelMeta {
            kind: ModelKind::Classifier,
            order: 1,
            window: Some(0),
            include_unigram_obs: None,
            alphabet: vec!["A".into(), "B".into()],
        });
        m.add_to("B|0:o=trap", 1.0); // one bad first decision
        m.add_to("B|prev1=B", 1.0); // which then self-perpetuates
        let clf = Classifier {
            model: &m,
            config: &cfg,
            alphabet: &ds.alphabet,
            obs_vocab: &ds.obs_vocab,
        };
        let ex = &ds.examples[0];
        // Gold-prefix decisions: t=0 errs (trap), t=1 and t=2 see prev=A and tie to A.
        assert_eq!(clf.exact_imitation_error(ex).unwrap(), 1.0 / 3.0);
        // Free-running: B at t=0, then prev1=B keeps selecting B.
        assert_eq!(clf.rollout(ex, &DiscrepancySet::new()), vec![1, 1, 1]);
        assert_eq!(clf.recurrent_error(ex).unwrap(), 1.0);
    }

    #[test]
    fn training_zero_iterations_yields_zero_model() {
        let ds = toy_dataset();
        let cfg = window0();
        let m = train_exact_imitation(
            &ds,
            &cfg,
            &ImitationTrainConfig {
                iterations: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(m.num_nonzero(), 0);
        let clf = toy_classifier(&ds, &m, &cfg);
        assert_eq!(clf.rollout(&ds.examples[0], &DiscrepancySet::new()), vec![0, 0, 0]);
    }

    #[test]
    fn training_on_constant_gold_predicts_that_label_after_one_pass() {
        // Gold label is constant B; after one pass the model must predict B
        // on all training nodes.
        let alphabet = LabelAlphabet::new(["A", "B"]).unwrap();
        let mut obs_vocab = FeatureInterner::new();
        let mut tok = ObservationVector::new();
        tok.add(obs_vocab.intern("o=x"), 1.0);
        let ds = Dataset {
            alphabet,
            obs_vocab,
            examples: vec![SequenceExample {
                id: "const".into(),
                tokens: vec![tok.clone(), tok],
                gold: Some(vec![1, 1]),
            }],
        };
        let cfg = window0();
        let m = train_exact_imitation(
            &ds,
            &cfg,
            &ImitationTrainConfig {
                iterations: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let clf = Classifier {
            model: &m,
            config: &cfg,
            alphabet: &ds.alphabet,
            obs_vocab: &ds.obs_vocab,
        };
        let ex = &ds.examples[0];
        let gold = ex.gold().unwrap();
        for t in 0..ex.len() {
            assert_eq!(clf.classify(ex, PrimitiveNode::new(t, &gold[..t])).unwrap(), 1);
        }
    }

    #[test]
    fn separable_data_reaches_zero_training_mistakes() {
        // One-position examples whose label is determined by the observation.
        let alphabet = LabelAlphabet::new(["A", "B"]).unwrap();
        let mut obs_vocab = FeatureInterner::new();
        let ida = obs_vocab.intern("o=a");
        let idb = obs_vocab.intern("o=b");
        let mk = |id: u32, gold: Label, name: &str| {
            let mut tok = ObservationVector::new();
            tok.add(id, 1.0);
            SequenceExample {
                id: name.into(),
                tokens: vec![tok],
                gold: Some(vec![gold]),
            }
        };
        let ds = Dataset {
            alphabet,
            obs_vocab,
            examples: vec![mk(ida, 0, "e0"), mk(idb, 1, "e1")],
        };
        let cfg = window0();
        let m = train_exact_imitation(
            &ds,
            &cfg,
            &ImitationTrainConfig {
                iterations: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let clf = Classifier {
            model: &m,
            config: &cfg,
            alphabet: &ds.alphabet,
            obs_vocab: &ds.obs_vocab,
        };
        for ex in &ds.examples {
            assert_eq!(clf.exact_imitation_error(ex).unwrap(), 0.0);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let ds = toy_dataset();
        let cfg = ClassifierFeatureConfig::default();
        let tc = ImitationTrainConfig {
            iterations: 5,
            ..Default::default()
        };
        let a = train_exact_imitation(&ds, &cfg, &tc).unwrap();
        let b = train_exact_imitation(&ds, &cfg, &tc).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }

    #[test]
    fn averaged_training_runs_and_differs_when_updates_vary() {
        let ds = toy_dataset();
        let cfg = ClassifierFeatureConfig::default();
        let plain = train_exact_imitation(
            &ds,
            &cfg,
            &ImitationTrainConfig {
                iterations: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let avg = train_exact_imitation(
            &ds,
            &cfg,
            &ImitationTrainConfig {
                iterations: 3,
                averaged: true,
                ..Default::default()
            },
        )
        .unwrap();
        // Both models exist and score; the averaged one has the same support.
        assert_eq!(plain.interner().len(), avg.interner().len());
    }
}
