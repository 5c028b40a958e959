//! Cost-function features over complete input-output pairs, the ranking
//! Perceptron update, and the online training loop that imitates
//! loss-guided search.

use std::io::Write;

use crate::classifier::BOS;
use crate::data::{Dataset, Label, LabelAlphabet, SequenceExample};
use crate::features::{FeatureInterner, NamedVector};
use crate::model::{Averager, LinearModel, ModelKind, ModelMeta};
use crate::search::{
    best_first_beam_search, greedy_search, DecisionKind, DecisionSide, RankingDecision, Scored,
    Scorer, SearchRun,
};
use crate::spaces::{SearchSpace, SpaceKind};
use crate::{Error, Result};

/// Feature template for the cost function: label pairs always, label triples
/// when `order == 3`, and token observations conjoined with labels when
/// `include_unigram_obs` is set.
#[derive(Debug, Clone, Copy)]
pub struct CostFeatureConfig {
    pub order: usize,
    pub include_unigram_obs: bool,
}

impl Default for CostFeatureConfig {
    fn default() -> Self {
        Self {
            order: 2,
            include_unigram_obs: true,
        }
    }
}

impl CostFeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.order == 2 || self.order == 3) {
            return Err(Error::Usage(format!(
                "cost feature order must be 2 or 3, got {}",
                self.order
            )));
        }
        Ok(())
    }
}

/// Φ(x, y): sum over positions of label-conjoined observation features,
/// neighboring-pair indicators, and (third order) triple indicators, with
/// BOS placeholders at the boundary. Pure and deterministic.
pub fn cost_features(
    example: &SequenceExample,
    output: &[Label],
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    config: &CostFeatureConfig,
) -> Result<NamedVector> {
    config.validate()?;
    if output.len() != example.len() {
        return Err(Error::Usage(format!(
            "cost_features: output length {} != T {}",
            output.len(),
            example.len()
        )));
    }
    let mut feats = NamedVector::new();
    for t in 0..output.len() {
        let cur = alphabet.label(output[t]);
        if config.include_unigram_obs {
            for (fid, v) in example.tokens[t].iter() {
                feats.add(format!("u:{cur}|{}", obs_vocab.name(fid)), v);
            }
        }
        let prev = if t >= 1 { alphabet.label(output[t - 1]) } else { BOS };
        feats.add(format!("p:{prev}|{cur}"), 1.0);
        if config.order == 3 {
            let prev2 = if t >= 2 { alphabet.label(output[t - 2]) } else { BOS };
            feats.add(format!("t:{prev2}|{prev}|{cur}"), 1.0);
        }
    }
    Ok(feats)
}

/// C(x, y) = w · Φ(x, y); lower is better. Accumulates in feature-name order
/// so the result does not depend on id allocation.
pub fn cost(
    model: &LinearModel,
    example: &SequenceExample,
    output: &[Label],
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    config: &CostFeatureConfig,
) -> Result<f64> {
    let feats = cost_features(example, output, alphabet, obs_vocab, config)?;
    Ok(feats.iter().map(|(n, v)| model.weight(n) * v).sum())
}

/// Margin-0 ranking Perceptron step: a decision is violated iff
/// cost(better) >= cost(worse) (ties count — `better` must strictly win).
/// On violation, w += η·(Φ(worse) − Φ(better)). Returns whether a violation
/// occurred.
pub fn perceptron_update(
    model: &mut LinearModel,
    example: &SequenceExample,
    better: &[Label],
    worse: &[Label],
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    config: &CostFeatureConfig,
) -> Result<bool> {
    if better == worse {
        return Err(Error::Usage(
            "ranking decision requires distinct outputs".into(),
        ));
    }
    update_inner(
        model, example, better, worse, eta, alphabet, obs_vocab, config, &mut None,
    )
}

#[allow(clippy::too_many_arguments)]
fn update_inner(
    model: &mut LinearModel,
    example: &SequenceExample,
    better: &[Label],
    worse: &[Label],
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
) -> Result<bool> {
    let phi_better = cost_features(example, better, alphabet, obs_vocab, config)?;
    let phi_worse = cost_features(example, worse, alphabet, obs_vocab, config)?;
    let cb: f64 = phi_better.iter().map(|(n, v)| model.weight(n) * v).sum();
    let cw: f64 = phi_worse.iter().map(|(n, v)| model.weight(n) * v).sum();
    if let Some(avg) = averager.as_mut() {
        avg.tick();
    }
    if cb < cw {
        return Ok(false);
    }
    for (feats, sign) in [(&phi_worse, 1.0), (&phi_better, -1.0)] {
        for (name, v) in feats.iter() {
            if let Some(avg) = averager.as_mut() {
                avg.note_by_name(model, name);
            }
            model.add_to(name, sign * eta * v);
        }
    }
    Ok(true)
}

/// Which search procedure generates training constraints (and predictions).
#[derive(Debug, Clone, Copy)]
pub enum Procedure {
    /// Step budget defaults to the sequence length when `None`.
    Greedy { max_steps: Option<usize> },
    Beam { width: usize, expansions: usize },
}

/// Constraint-generation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Guide by loss for the whole run; record all of the procedure's
    /// decisions.
    FullLossGuided,
    /// Guide by loss until the gold output is generated, then switch to the
    /// current cost model and only rank gold above the best-cost open
    /// node(s). The default, and the cheaper constraint set.
    ImitationThenYStar,
}

#[derive(Debug, Clone)]
pub struct CostTrainConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub scheme: Scheme,
    pub averaged: bool,
}

impl Default for CostTrainConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rate: 0.01,
            scheme: Scheme::ImitationThenYStar,
            averaged: false,
        }
    }
}

impl CostTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::Usage("cost iterations must be >= 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::Usage("learning rate must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-pass training statistics.
#[derive(Debug, Clone, Copy)]
pub struct PassStats {
    pub iteration: usize,
    pub examples_seen: usize,
    pub decisions_emitted: usize,
    pub violations: usize,
    pub phase1_failures: usize,
}

/// Training log CSV (iteration, examples_seen, decisions_emitted,
/// violations, phase1_failures).
pub fn write_training_log<W: Write>(w: &mut W, log: &[PassStats]) -> Result<()> {
    writeln!(
        w,
        "iteration,examples_seen,decisions_emitted,violations,phase1_failures"
    )?;
    for s in log {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.iteration, s.examples_seen, s.decisions_emitted, s.violations, s.phase1_failures
        )?;
    }
    Ok(())
}

pub(crate) struct ExampleOutcome {
    pub decisions: Vec<RankingDecision>,
    pub violations: usize,
    pub phase1_failed: bool,
}

/// Online cost-function training: for each pass, run the configured search
/// on each example imitating loss-guided behavior per the scheme, applying
/// a Perceptron update to every emitted decision immediately. Stops early
/// after a zero-violation pass. Returns the model and the per-pass log.
pub fn train_cost_function(
    dataset: &Dataset,
    classifier: crate::classifier::Classifier<'_>,
    space_kind: SpaceKind,
    procedure: Procedure,
    config: &CostTrainConfig,
    cost_config: &CostFeatureConfig,
) -> Result<(LinearModel, Vec<PassStats>)> {
    config.validate()?;
    cost_config.validate()?;
    if dataset.examples.is_empty() {
        return Err(Error::Usage("cannot train on an empty dataset".into()));
    }
    let mut model = LinearModel::new(ModelMeta {
        kind: ModelKind::Cost,
        order: cost_config.order,
        window: None,
        include_unigram_obs: Some(cost_config.include_unigram_obs),
        alphabet: dataset.alphabet.labels().map(str::to_owned).collect(),
    });
    let mut averager = config.averaged.then(Averager::new);
    let space = SearchSpace::new(space_kind, classifier);
    let mut log = Vec::new();

    for iteration in 0..config.iterations {
        let mut stats = PassStats {
            iteration,
            examples_seen: 0,
            decisions_emitted: 0,
            violations: 0,
            phase1_failures: 0,
        };
        for ex in &dataset.examples {
            let outcome = train_on_example(
                &mut model,
                &space,
                ex,
                &dataset.alphabet,
                &dataset.obs_vocab,
                procedure,
                config.scheme,
                config.learning_rate,
                cost_config,
                &mut averager,
            )?;
            stats.examples_seen += 1;
            stats.decisions_emitted += outcome.decisions.len();
            stats.violations += outcome.violations;
            if outcome.phase1_failed {
                stats.phase1_failures += 1;
            }
        }
        let done = stats.violations == 0;
        log.push(stats);
        if done {
            break;
        }
    }
    if let Some(avg) = averager {
        avg.finalize(&mut model);
    }
    Ok((model, log))
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn train_on_example(
    model: &mut LinearModel,
    space: &SearchSpace<'_>,
    example: &SequenceExample,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    procedure: Procedure,
    scheme: Scheme,
    eta: f64,
    cost_config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
) -> Result<ExampleOutcome> {
    let gold = example.gold()?;
    match scheme {
        Scheme::FullLossGuided => {
            let run = match procedure {
                Procedure::Greedy { max_steps } => greedy_search(
                    space,
                    example,
                    &Scorer::Loss { gold },
                    max_steps.unwrap_or(example.len()),
                    true,
                ),
                Procedure::Beam { width, expansions } => best_first_beam_search(
                    space,
                    example,
                    &Scorer::Loss { gold },
                    width,
                    expansions,
                    true,
                ),
            };
            apply_run_decisions(
                model, example, &run, eta, alphabet, obs_vocab, cost_config, averager,
            )
        }
        Scheme::ImitationThenYStar => match procedure {
            Procedure::Greedy { max_steps } => imitation_ystar_greedy(
                model,
                space,
                example,
                gold,
                max_steps.unwrap_or(example.len()),
                eta,
                alphabet,
                obs_vocab,
                cost_config,
                averager,
            ),
            Procedure::Beam { width, expansions } => imitation_ystar_beam(
                model, space, example, gold, width, expansions, eta, alphabet, obs_vocab,
                cost_config, averager,
            ),
        },
    }
}

#[allow(clippy::too_many_arguments)]
fn apply_run_decisions(
    model: &mut LinearModel,
    example: &SequenceExample,
    run: &SearchRun,
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    cost_config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
) -> Result<ExampleOutcome> {
    let mut violations = 0;
    for d in &run.decisions {
        if update_inner(
            model,
            example,
            &d.better.output,
            &d.worse.output,
            eta,
            alphabet,
            obs_vocab,
            cost_config,
            averager,
        )? {
            violations += 1;
        }
    }
    Ok(ExampleOutcome {
        decisions: run.decisions.clone(),
        violations,
        phase1_failed: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn imitation_ystar_greedy(
    model: &mut LinearModel,
    space: &SearchSpace<'_>,
    example: &SequenceExample,
    gold: &[Label],
    max_steps: usize,
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    cost_config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
) -> Result<ExampleOutcome> {
    let mut gen: u64 = 0;
    let loss = Scorer::Loss { gold };
    let init = space.initial_state(example);
    let mut cur_state = init.clone();
    let mut cur = Scored {
        output: init.output.clone(),
        score: loss.score(example, &init.output),
        gen,
    };
    let mut best = cur.clone();
    let mut decisions: Vec<RankingDecision> = Vec::new();
    let mut violations = 0;
    let mut step = 0;

    // Phase 1: imitate loss-guided greedy search until reaching gold.
    while cur.output != gold {
        if step >= max_steps {
            return Ok(ExampleOutcome {
                decisions,
                violations,
                phase1_failed: true,
            });
        }
        step += 1;
        let succ_states = space.successors(example, &cur_state);
        if succ_states.is_empty() {
            return Ok(ExampleOutcome {
                decisions,
                violations,
                phase1_failed: true,
            });
        }
        let scored: Vec<Scored> = succ_states
            .iter()
            .map(|s| {
                gen += 1;
                Scored {
                    output: s.output.clone(),
                    score: loss.score(example, &s.output),
                    gen,
                }
            })
            .collect();
        let mut chosen = 0;
        for (i, s) in scored.iter().enumerate().skip(1) {
            if s.beats(&scored[chosen]) {
                chosen = i;
            }
        }
        for (i, s) in scored.iter().enumerate() {
            if i != chosen {
                emit(
                    model, example, DecisionKind::Sibling, &scored[chosen], s, eta, alphabet,
                    obs_vocab, cost_config, averager, &mut decisions, &mut violations,
                )?;
            }
        }
        if scored[chosen].beats(&best) {
            emit(
                model, example, DecisionKind::BestSoFar, &scored[chosen], &best, eta, alphabet,
                obs_vocab, cost_config, averager, &mut decisions, &mut violations,
            )?;
            best = scored[chosen].clone();
        }
        cur = scored[chosen].clone();
        cur_state = succ_states.into_iter().nth(chosen).expect("index valid");
    }

    // Phase 2: continue guided by the evolving cost model; only rank the
    // gold state above the best-cost successor at each step.
    let gold_state = cur.clone();
    while step < max_steps {
        step += 1;
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
                    score: cost(model, example, &s.output, alphabet, obs_vocab, cost_config)
                        .expect("valid output length"),
                    gen,
                }
            })
            .collect();
        let mut chosen = 0;
        for (i, s) in scored.iter().enumerate().skip(1) {
            if s.beats(&scored[chosen]) {
                chosen = i;
            }
        }
        if scored[chosen].output != gold_state.output {
            emit(
                model,
                example,
                DecisionKind::YStarVsOpen,
                &gold_state,
                &scored[chosen],
                eta,
                alphabet,
                obs_vocab,
                cost_config,
                averager,
                &mut decisions,
                &mut violations,
            )?;
        }
        cur_state = succ_states.into_iter().nth(chosen).expect("index valid");
    }

    Ok(ExampleOutcome {
        decisions,
        violations,
        phase1_failed: false,
    })
}

#[allow(clippy::too_many_arguments)]
fn imitation_ystar_beam(
    model: &mut LinearModel,
    space: &SearchSpace<'_>,
    example: &SequenceExample,
    gold: &[Label],
    beam_width: usize,
    max_expansions: usize,
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    cost_config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
) -> Result<ExampleOutcome> {
    let mut gen: u64 = 0;
    let loss = Scorer::Loss { gold };
    let init = space.initial_state(example);
    let init_scored = Scored {
        output: init.output.clone(),
        score: loss.score(example, &init.output),
        gen,
    };
    let mut closed: std::collections::HashSet<Vec<Label>> = std::collections::HashSet::new();
    closed.insert(init.output.clone());
    let mut best = init_scored.clone();
    let mut beam = vec![(init_scored, init)];
    let mut decisions: Vec<RankingDecision> = Vec::new();
    let mut violations = 0;
    let mut step = 0;
    let mut gold_state: Option<Scored> = if init_scored_is_gold(&beam, gold) {
        Some(beam[0].0.clone())
    } else {
        None
    };

    // Phase 1: imitate loss-guided beam search until gold is generated.
    while gold_state.is_none() {
        if step >= max_expansions || beam.is_empty() {
            return Ok(ExampleOutcome {
                decisions,
                violations,
                phase1_failed: true,
            });
        }
        step += 1;
        let mut y_idx = 0;
        for (i, (s, _)) in beam.iter().enumerate().skip(1) {
            if s.beats(&beam[y_idx].0) {
                y_idx = i;
            }
        }
        let (y_scored, y_state) = beam.remove(y_idx);
        for (s, _) in &beam {
            emit(
                model, example, DecisionKind::Sibling, &y_scored, s, eta, alphabet, obs_vocab,
                cost_config, averager, &mut decisions, &mut violations,
            )?;
        }
        let mut candidates = beam;
        for child in space.successors(example, &y_state) {
            if !closed.insert(child.output.clone()) {
                continue;
            }
            gen += 1;
            let scored = Scored {
                output: child.output.clone(),
                score: loss.score(example, &child.output),
                gen,
            };
            if scored.beats(&best) {
                emit(
                    model, example, DecisionKind::BestSoFar, &scored, &best, eta, alphabet,
                    obs_vocab, cost_config, averager, &mut decisions, &mut violations,
                )?;
                best = scored.clone();
            }
            if scored.output == gold {
                gold_state = Some(scored.clone());
            }
            candidates.push((scored, child));
        }
        candidates.sort_by(|(a, _), (b, _)| {
            a.score
                .partial_cmp(&b.score)
                .expect("finite scores")
                .then(a.gen.cmp(&b.gen))
        });
        let cut = if candidates.len() > beam_width {
            candidates.split_off(beam_width)
        } else {
            Vec::new()
        };
        for (kept, _) in &candidates {
            for (dropped, _) in &cut {
                emit(
                    model, example, DecisionKind::BeamInOut, kept, dropped, eta, alphabet,
                    obs_vocab, cost_config, averager, &mut decisions, &mut violations,
                )?;
            }
        }
        beam = candidates;
    }
    let gold_state = gold_state.expect("phase 1 ended with gold generated");

    // Phase 2: continue guided by the evolving cost model; each iteration,
    // rank gold above every beam member that out-scores it (decisions
    // evaluated against the pre-step model, updates applied in order).
    while step < max_expansions && !beam.is_empty() {
        step += 1;
        // Re-score the frontier under the current model.
        for (s, _) in beam.iter_mut() {
            s.score = cost(model, example, &s.output, alphabet, obs_vocab, cost_config)
                .expect("valid output length");
        }
        let gold_cost = cost(
            model,
            example,
            &gold_state.output,
            alphabet,
            obs_vocab,
            cost_config,
        )
        .expect("valid output length");
        let gold_scored = Scored {
            output: gold_state.output.clone(),
            score: gold_cost,
            gen: gold_state.gen,
        };
        let out_scoring: Vec<Scored> = beam
            .iter()
            .filter(|(s, _)| s.beats(&gold_scored) && s.output != gold_scored.output)
            .map(|(s, _)| s.clone())
            .collect();
        for open in &out_scoring {
            emit(
                model,
                example,
                DecisionKind::YStarVsOpen,
                &gold_scored,
                open,
                eta,
                alphabet,
                obs_vocab,
                cost_config,
                averager,
                &mut decisions,
                &mut violations,
            )?;
        }
        let mut y_idx = 0;
        for (i, (s, _)) in beam.iter().enumerate().skip(1) {
            if s.beats(&beam[y_idx].0) {
                y_idx = i;
            }
        }
        let (_, y_state) = beam.remove(y_idx);
        let mut candidates = beam;
        for child in space.successors(example, &y_state) {
            if !closed.insert(child.output.clone()) {
                continue;
            }
            gen += 1;
            let scored = Scored {
                output: child.output.clone(),
                score: cost(model, example, &child.output, alphabet, obs_vocab, cost_config)
                    .expect("valid output length"),
                gen,
            };
            candidates.push((scored, child));
        }
        candidates.sort_by(|(a, _), (b, _)| {
            a.score
                .partial_cmp(&b.score)
                .expect("finite scores")
                .then(a.gen.cmp(&b.gen))
        });
        candidates.truncate(beam_width);
        beam = candidates;
    }

    Ok(ExampleOutcome {
        decisions,
        violations,
        phase1_failed: false,
    })
}

fn init_scored_is_gold(beam: &[(Scored, crate::spaces::OutputState)], gold: &[Label]) -> bool {
    beam.first().is_some_and(|(s, _)| s.output == gold)
}

#[allow(clippy::too_many_arguments)]
fn emit(
    model: &mut LinearModel,
    example: &SequenceExample,
    kind: DecisionKind,
    better: &Scored,
    worse: &Scored,
    eta: f64,
    alphabet: &LabelAlphabet,
    obs_vocab: &FeatureInterner,
    cost_config: &CostFeatureConfig,
    averager: &mut Option<Averager>,
    decisions: &mut Vec<RankingDecision>,
    violations: &mut usize,
) -> Result<()> {
    decisions.push(RankingDecision {
        kind,
        better: DecisionSide {
            output: better.output.clone(),
            gen: better.gen,
        },
        worse: DecisionSide {
            output: worse.output.clone(),
            gen: worse.gen,
        },
    });
    if update_inner(
        model,
        example,
        &better.output,
        &worse.output,
        eta,
        alphabet,
        obs_vocab,
        cost_config,
        averager,
    )? {
        *violations += 1;
    }
    Ok(())
}
