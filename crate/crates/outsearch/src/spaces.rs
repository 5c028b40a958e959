//! Search spaces over complete outputs: the Flipbit space (states are full
//! label sequences, one step flips one position) and the limited-discrepancy
//! space (states are discrepancy sets over the recurrent classifier), plus
//! brute-force target-depth oracles.

use std::collections::BTreeSet;

use crate::classifier::{CachedPolicy, Classifier, DiscrepancySet};
use crate::data::{Label, SequenceExample};
use crate::loss::hamming_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Flipbit,
    Lds,
}

impl std::fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceKind::Flipbit => write!(f, "flipbit"),
            SpaceKind::Lds => write!(f, "lds"),
        }
    }
}

/// State payload: how the denoted output is represented.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatePayload {
    /// The output *is* the label sequence held in `output`.
    Flipbit,
    /// The output is the rollout of the classifier under this discrepancy set.
    Lds(DiscrepancySet),
}

/// A complete candidate output paired with how it was reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputState {
    pub payload: StatePayload,
    /// The complete output this state denotes (length T).
    pub output: Vec<Label>,
    /// Steps from the initial state.
    pub depth: usize,
}

/// A search space over complete outputs, bound to one recurrent classifier.
#[derive(Debug, Clone, Copy)]
pub struct SearchSpace<'a> {
    pub kind: SpaceKind,
    pub classifier: Classifier<'a>,
}

impl<'a> SearchSpace<'a> {
    pub fn new(kind: SpaceKind, classifier: Classifier<'a>) -> Self {
        Self { kind, classifier }
    }

    /// Both spaces start at the classifier's own prediction h(x); the LDS
    /// initial state carries the empty discrepancy set.
    pub fn initial_state(&self, example: &SequenceExample) -> OutputState {
        let output = self.classifier.rollout(example, &DiscrepancySet::new());
        let payload = match self.kind {
            SpaceKind::Flipbit => StatePayload::Flipbit,
            SpaceKind::Lds => StatePayload::Lds(DiscrepancySet::new()),
        };
        OutputState {
            payload,
            output,
            depth: 0,
        }
    }

    /// Ordered successor list. The ordering (position-major, label-minor) is
    /// the fixed tie-break order used by the ranking-based searches.
    pub fn successors(&self, example: &SequenceExample, state: &OutputState) -> Vec<OutputState> {
        match &state.payload {
            StatePayload::Flipbit => self.flipbit_successors(example, state),
            StatePayload::Lds(d) => self.lds_successors(example, state, d),
        }
    }

    fn flipbit_successors(
        &self,
        example: &SequenceExample,
        state: &OutputState,
    ) -> Vec<OutputState> {
        let n_labels = self.classifier.alphabet.len();
        let t_len = example.len();
        let mut out = Vec::with_capacity(t_len * (n_labels - 1));
        for t in 0..t_len {
            for a in 0..n_labels {
                if a == state.output[t] {
                    continue;
                }
                let mut labels = state.output.clone();
                labels[t] = a;
                out.push(OutputState {
                    payload: StatePayload::Flipbit,
                    output: labels,
                    depth: state.depth + 1,
                });
            }
        }
        out
    }

    /// LDS children add one discrepancy at a free position. Children whose
    /// denoted output equals the parent's are suppressed (no-op overrides),
    /// and among survivors only the first of each distinct output is kept.
    fn lds_successors(
        &self,
        example: &SequenceExample,
        state: &OutputState,
        d: &DiscrepancySet,
    ) -> Vec<OutputState> {
        let policy = CachedPolicy::new(self.classifier, example);
        let n_labels = self.classifier.alphabet.len();
        let mut seen: BTreeSet<Vec<Label>> = BTreeSet::new();
        let mut out = Vec::new();
        for pos in 1..=example.len() {
            if d.contains_position(pos) {
                continue;
            }
            for a in 0..n_labels {
                let child_d = d.with_override(pos, a);
                let output = policy.rollout(&child_d);
                if output == state.output || !seen.insert(output.clone()) {
                    continue;
                }
                out.push(OutputState {
                    payload: StatePayload::Lds(child_d),
                    output,
                    depth: state.depth + 1,
                });
            }
        }
        out
    }
}

/// Minimum size of a discrepancy set whose rollout reproduces gold, found by
/// brute-force enumeration from small sets to large. Independent of the
/// successor implementation; intended for small instances (T <= 8, |A| <= 4).
pub fn lds_target_depth_oracle(classifier: Classifier<'_>, example: &SequenceExample) -> usize {
    let gold = example.gold().expect("oracle needs gold labels");
    let policy = CachedPolicy::new(classifier, example);
    let t_len = example.len();
    let n_labels = classifier.alphabet.len();
    for size in 0..=t_len {
        let mut positions: Vec<usize> = (1..=size).collect();
        loop {
            // All label assignments for this position combination.
            let mut assignment = vec![0usize; size];
            loop {
                let mut d = DiscrepancySet::new();
                for (k, &pos) in positions.iter().enumerate() {
                    d = d.with_override(pos, assignment[k]);
                }
                if policy.rollout(&d) == gold {
                    return size;
                }
                // Next assignment (odometer).
                let mut k = 0;
                loop {
                    if k == size {
                        break;
                    }
                    assignment[k] += 1;
                    if assignment[k] < n_labels {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
                if k == size {
                    break;
                }
            }
            if size == 0 {
                break;
            }
            // Next position combination in lexicographic order.
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if positions[i] < t_len - (size - 1 - i) {
                    positions[i] += 1;
                    for j in i + 1..size {
                        positions[j] = positions[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    positions.clear();
                    break;
                }
            }
            if positions.is_empty() {
                break;
            }
        }
    }
    // Unreachable: the full-override set of size T always attains gold.
    t_len
}

/// Minimal number of flips from the initial Flipbit state to gold: the raw
/// Hamming distance between h(x) and gold.
pub fn flipbit_target_depth_oracle(classifier: Classifier<'_>, example: &SequenceExample) -> usize {
    let gold = example.gold().expect("oracle needs gold labels");
    let initial = classifier.rollout(example, &DiscrepancySet::new());
    hamming_count(&initial, gold)
}
