//! Ranking-based search over complete outputs: greedy search and best-first
//! beam search, with anytime best-so-far tracking and optional recording of
//! the pairwise ranking decisions that drive cost-function training.

use std::collections::HashSet;
use std::io::Write;
use std::time::{Duration, Instant};

use crate::costlearn::{cost, CostFeatureConfig};
use crate::data::{Label, LabelAlphabet, SequenceExample};
use crate::features::FeatureInterner;
use crate::loss::hamming_loss;
use crate::model::LinearModel;
use crate::spaces::SearchSpace;
use crate::Result;

/// Scores a complete output; lower is better. Comparisons always use
/// (score, generation index) so ties are broken deterministically toward
/// the earlier-generated state.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    /// True-loss guidance against a known gold output (training time).
    Loss { gold: &'a [Label] },
    /// Learned-cost guidance (prediction time).
    Cost {
        model: &'a LinearModel,
        config: &'a CostFeatureConfig,
        alphabet: &'a LabelAlphabet,
        obs_vocab: &'a FeatureInterner,
    },
    /// Scores everything 0; exposes pure tie-break behavior.
    Constant,
}

impl Scorer<'_> {
    pub fn score(&self, example: &SequenceExample, output: &[Label]) -> f64 {
        match self {
            Scorer::Loss { gold } => {
                hamming_loss(output, gold).expect("scorer outputs match gold length")
            }
            Scorer::Cost {
                model,
                config,
                alphabet,
                obs_vocab,
            } => cost(model, example, output, alphabet, obs_vocab, config)
                .expect("output length matches example"),
            Scorer::Constant => 0.0,
        }
    }

    pub fn is_loss_guided(&self) -> bool {
        matches!(self, Scorer::Loss { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionKind {
    Sibling,
    BeamInOut,
    BestSoFar,
    YStarVsOpen,
}

/// One side of a recorded ranking decision.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSide {
    pub output: Vec<Label>,
    /// Generation index of the state within its run (tie-break key).
    pub gen: u64,
}

/// A recorded pairwise preference: `better` must out-rank `worse` under the
/// scorer that produced it (ties resolved by generation index).
#[derive(Debug, Clone, PartialEq)]
pub struct RankingDecision {
    pub kind: DecisionKind,
    pub better: DecisionSide,
    pub worse: DecisionSide,
}

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub step: usize,
    /// Output of the state expanded at this step (the initial state at step 0).
    pub expanded: Vec<Label>,
    pub best_score: f64,
    pub best_output: Vec<Label>,
    pub elapsed: Duration,
}

/// Record of one search run over one example.
#[derive(Debug, Clone)]
pub struct SearchRun {
    pub example_id: String,
    pub decisions: Vec<RankingDecision>,
    pub best_output: Vec<Label>,
    pub best_score: f64,
    pub trace: Vec<TraceStep>,
    /// Expansions actually performed.
    pub steps: usize,
}

/// A scored state in a run: score plus generation index.
#[derive(Debug, Clone)]
pub(crate) struct Scored {
    pub output: Vec<Label>,
    pub score: f64,
    pub gen: u64,
}

impl Scored {
    pub(crate) fn beats(&self, other: &Scored) -> bool {
        self.score < other.score || (self.score == other.score && self.gen < other.gen)
    }

    fn side(&self) -> DecisionSide {
        DecisionSide {
            output: self.output.clone(),
            gen: self.gen,
        }
    }
}

/// Greedy search: at each level expand the current state and move to its
/// best-scoring successor, tracking the best state seen anywhere. With
/// `record`, emits sibling decisions (chosen over every other successor)
/// and a best-so-far decision whenever the incumbent changes.
pub fn greedy_search(
    space: &SearchSpace<'_>,
    example: &SequenceExample,
    scorer: &Scorer<'_>,
    max_steps: usize,
    record: bool,
) -> SearchRun {
    let start = Instant::now();
    let mut gen: u64 = 0;
    let init = space.initial_state(example);
    let mut cur_state = init.clone();
    let mut cur = Scored {
        output: init.output.clone(),
        score: scorer.score(example, &init.output),
        gen,
    };
    let mut best = cur.clone();
    let mut decisions = Vec::new();
    let mut trace = vec![TraceStep {
        step: 0,
        expanded: cur.output.clone(),
        best_score: best.score,
        best_output: best.output.clone(),
        elapsed: start.elapsed(),
    }];
    let mut steps = 0;

    for step in 1..=max_steps {
        // Nothing left to improve under true loss.
        if scorer.is_loss_guided() && best.score == 0.0 {
            break;
        }
        let succ_states = space.successors(example, &cur_state);
        if succ_states.is_empty() {
            break;
        }
        let scored: Vec<Scored> = succ_states
            .iter()
            .map(|s| {
                gen += 1;
                Scored {
                    output: s.output.clone(),
                    score: scorer.score(example, &s.output),
                    gen,
                }
            })
            .collect();
        let mut chosen_idx = 0;
        for (i, s) in scored.iter().enumerate().skip(1) {
            if s.beats(&scored[chosen_idx]) {
                chosen_idx = i;
            }
        }
        if record {
            for (i, s) in scored.iter().enumerate() {
                if i != chosen_idx {
                    decisions.push(RankingDecision {
                        kind: DecisionKind::Sibling,
                        better: scored[chosen_idx].side(),
                        worse: s.side(),
                    });
                }
            }
        }
        if scored[chosen_idx].beats(&best) {
            if record {
                decisions.push(RankingDecision {
                    kind: DecisionKind::BestSoFar,
                    better: scored[chosen_idx].side(),
                    worse: best.side(),
                });
            }
            best = scored[chosen_idx].clone();
        }
        steps = step;
        trace.push(TraceStep {
            step,
            expanded: cur.output.clone(),
            best_score: best.score,
            best_output: best.output.clone(),
            elapsed: start.elapsed(),
        });
        cur = scored[chosen_idx].clone();
        cur_state = succ_states.into_iter().nth(chosen_idx).expect("index valid");
    }

    SearchRun {
        example_id: example.id.clone(),
        decisions,
        best_output: best.output,
        best_score: best.score,
        trace,
        steps,
    }
}

/// Best-first beam search: keep the `b` best open states; each iteration
/// expand the best of them, merge its (globally deduplicated) successors,
/// and keep the best `b` of the result. With `record`, emits expansion
/// decisions (expanded over every other beam member), beam-in-out decisions
/// (every kept candidate over every cut candidate), and best-so-far changes.
pub fn best_first_beam_search(
    space: &SearchSpace<'_>,
    example: &SequenceExample,
    scorer: &Scorer<'_>,
    beam_width: usize,
    max_expansions: usize,
    record: bool,
) -> SearchRun {
    assert!(beam_width >= 1, "beam width must be >= 1");
    let start = Instant::now();
    let mut gen: u64 = 0;
    let init = space.initial_state(example);
    let init_scored = Scored {
        output: init.output.clone(),
        score: scorer.score(example, &init.output),
        gen,
    };
    let mut closed: HashSet<Vec<Label>> = HashSet::new();
    closed.insert(init.output.clone());
    let mut beam = vec![(init_scored.clone(), init)];
    let mut best = init_scored;
    let mut decisions = Vec::new();
    let mut trace = vec![TraceStep {
        step: 0,
        expanded: best.output.clone(),
        best_score: best.score,
        best_output: best.output.clone(),
        elapsed: start.elapsed(),
    }];
    let mut steps = 0;

    for step in 1..=max_expansions {
        if beam.is_empty() {
            break;
        }
        if scorer.is_loss_guided() && best.score == 0.0 {
            break;
        }
        let mut y_idx = 0;
        for (i, (s, _)) in beam.iter().enumerate().skip(1) {
            if s.beats(&beam[y_idx].0) {
                y_idx = i;
            }
        }
        let (y_scored, y_state) = beam.remove(y_idx);
        if record {
            for (s, _) in &beam {
                decisions.push(RankingDecision {
                    kind: DecisionKind::Sibling,
                    better: y_scored.side(),
                    worse: s.side(),
                });
            }
        }
        let mut candidates = beam;
        for child in space.successors(example, &y_state) {
            if !closed.insert(child.output.clone()) {
                continue;
            }
            gen += 1;
            let scored = Scored {
                output: child.output.clone(),
                score: scorer.score(example, &child.output),
                gen,
            };
            if scored.beats(&best) {
                if record {
                    decisions.push(RankingDecision {
                        kind: DecisionKind::BestSoFar,
                        better: scored.side(),
                        worse: best.side(),
                    });
                }
                best = scored.clone();
            }
            candidates.push((scored, child));
        }
        candidates.sort_by(|(a, _), (b, _)| {
            a.score
                .partial_cmp(&b.score)
                .expect("scores are finite")
                .then(a.gen.cmp(&b.gen))
        });
        let cut = if candidates.len() > beam_width {
            candidates.split_off(beam_width)
        } else {
            Vec::new()
        };
        if record {
            for (kept, _) in &candidates {
                for (dropped, _) in &cut {
                    decisions.push(RankingDecision {
                        kind: DecisionKind::BeamInOut,
                        better: kept.side(),
                        worse: dropped.side(),
                    });
                }
            }
        }
        steps = step;
        trace.push(TraceStep {
            step,
            expanded: y_scored.output.clone(),
            best_score: best.score,
            best_output: best.output.clone(),
            elapsed: start.elapsed(),
        });
        beam = candidates;
    }

    SearchRun {
        example_id: example.id.clone(),
        decisions,
        best_output: best.output,
        best_score: best.score,
        trace,
        steps,
    }
}

/// One (elapsed seconds, best-so-far accuracy) point per trace step.
pub fn anytime_curve(run: &SearchRun, gold: &[Label]) -> Result<Vec<(f64, f64)>> {
    run.trace
        .iter()
        .map(|t| {
            Ok((
                t.elapsed.as_secs_f64(),
                1.0 - hamming_loss(&t.best_output, gold)?,
            ))
        })
        .collect()
}

/// Checks every recorded decision against a scorer: `better` must score
/// strictly lower, or tie and win on generation index. Returns the number
/// of contradictions.
pub fn replay_contradictions(
    run: &SearchRun,
    example: &SequenceExample,
    scorer: &Scorer<'_>,
) -> usize {
    run.decisions
        .iter()
        .filter(|d| {
            let sb = scorer.score(example, &d.better.output);
            let sw = scorer.score(example, &d.worse.output);
            !(sb < sw || (sb == sw && d.better.gen < d.worse.gen))
        })
        .count()
}

/// Writes anytime traces as CSV rows (example_id, step, elapsed_seconds,
/// best_so_far_accuracy).
pub fn write_anytime_csv<W: Write>(w: &mut W, runs: &[(&SearchRun, &[Label])]) -> Result<()> {
    writeln!(w, "example_id,step,elapsed_seconds,best_so_far_accuracy")?;
    for (run, gold) in runs {
        for (t, (elapsed, acc)) in run.trace.iter().zip(anytime_curve(run, gold)?) {
            writeln!(w, "{},{},{},{}", run.example_id, t.step, elapsed, acc)?;
        }
    }
    Ok(())
}
