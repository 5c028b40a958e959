//! The two-stage training pipeline (classifier, then cost function) and the
//! prediction/evaluation drivers used by the CLI.

use std::time::Instant;

use crate::classifier::{
    train_exact_imitation, Classifier, ClassifierFeatureConfig, ImitationTrainConfig,
};
use crate::costlearn::{
    train_cost_function, CostFeatureConfig, CostTrainConfig, PassStats, Procedure,
};
use crate::data::Dataset;
use crate::io::Metrics;
use crate::loss::hamming_loss;
use crate::model::{LinearModel, ModelKind};
use crate::search::{best_first_beam_search, greedy_search, Scorer, SearchRun};
use crate::spaces::{SearchSpace, SpaceKind};
use crate::{Error, Result};

/// Everything the two-stage trainer needs. Defaults follow the reference
/// setup: classifier 100 passes at lr 1.0, cost 500 passes at lr 0.01 with
/// second-order features.
#[derive(Debug, Clone)]
pub struct TwoStageTrainConfig {
    pub feature: ClassifierFeatureConfig,
    pub imitation: ImitationTrainConfig,
    pub cost_features: CostFeatureConfig,
    pub cost: CostTrainConfig,
    pub space: SpaceKind,
    pub procedure: Procedure,
}

impl Default for TwoStageTrainConfig {
    fn default() -> Self {
        Self {
            feature: ClassifierFeatureConfig::default(),
            imitation: ImitationTrainConfig::default(),
            cost_features: CostFeatureConfig::default(),
            cost: CostTrainConfig::default(),
            space: SpaceKind::Lds,
            procedure: Procedure::Greedy { max_steps: None },
        }
    }
}

/// Stage 1 trains the recurrent classifier by exact imitation; stage 2
/// trains the cost function for the chosen space and procedure against that
/// classifier. Returns (classifier model, cost model, per-pass log).
pub fn train_two_stage(
    dataset: &Dataset,
    config: &TwoStageTrainConfig,
) -> Result<(LinearModel, LinearModel, Vec<PassStats>)> {
    let clf_model = train_exact_imitation(dataset, &config.feature, &config.imitation)?;
    let clf = Classifier {
        model: &clf_model,
        config: &config.feature,
        alphabet: &dataset.alphabet,
        obs_vocab: &dataset.obs_vocab,
    };
    let (cost_model, log) = train_cost_function(
        dataset,
        clf,
        config.space,
        config.procedure,
        &config.cost,
        &config.cost_features,
    )?;
    Ok((clf_model, cost_model, log))
}

/// Reconstructs the classifier feature template from model metadata.
pub fn classifier_config_from_meta(model: &LinearModel) -> Result<ClassifierFeatureConfig> {
    if model.meta().kind != ModelKind::Classifier {
        return Err(Error::ModelMismatch(
            "expected a classifier model".into(),
        ));
    }
    let window = model
        .meta()
        .window
        .ok_or_else(|| Error::ModelMismatch("classifier model lacks a window".into()))?;
    let cfg = ClassifierFeatureConfig {
        window,
        history: model.meta().order,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reconstructs the cost feature template from model metadata.
pub fn cost_config_from_meta(model: &LinearModel) -> Result<CostFeatureConfig> {
    if model.meta().kind != ModelKind::Cost {
        return Err(Error::ModelMismatch("expected a cost model".into()));
    }
    let cfg = CostFeatureConfig {
        order: model.meta().order,
        include_unigram_obs: model.meta().include_unigram_obs.unwrap_or(true),
    };
    cfg.validate()
        .map_err(|e| Error::ModelMismatch(e.to_string()))?;
    Ok(cfg)
}

fn check_alphabet(model: &LinearModel, dataset: &Dataset, what: &str) -> Result<()> {
    let model_labels: Vec<&str> = model.meta().alphabet.iter().map(String::as_str).collect();
    let data_labels: Vec<&str> = dataset.alphabet.labels().collect();
    if model_labels != data_labels {
        return Err(Error::ModelMismatch(format!(
            "{what} alphabet {model_labels:?} != dataset alphabet {data_labels:?}"
        )));
    }
    Ok(())
}

/// Prediction-time settings.
#[derive(Debug, Clone, Copy)]
pub struct PredictConfig {
    pub space: SpaceKind,
    pub procedure: Procedure,
    /// Wall-clock budget in seconds; mapped to a step bound via a measured
    /// per-expansion cost. `Some(0.0)` means no expansions at all (the pure
    /// recurrent prediction). `None` uses the procedure's step bound.
    pub time_bound: Option<f64>,
}

/// Converts a wall-clock budget into an expansion budget by timing one
/// expansion of the example's initial state.
fn steps_for_time_bound(
    space: &SearchSpace<'_>,
    scorer: &Scorer<'_>,
    example: &crate::data::SequenceExample,
    time_bound: f64,
) -> usize {
    if time_bound <= 0.0 {
        return 0;
    }
    let start = Instant::now();
    let init = space.initial_state(example);
    for s in space.successors(example, &init) {
        let _ = scorer.score(example, &s.output);
    }
    let per_expansion = start.elapsed().as_secs_f64().max(1e-9);
    ((time_bound / per_expansion).floor() as usize).clamp(1, 1_000_000)
}

/// Runs the configured cost-guided search on every example. The models must
/// agree with each other and with the dataset's alphabet.
pub fn predict(
    dataset: &Dataset,
    clf_model: &LinearModel,
    cost_model: &LinearModel,
    config: &PredictConfig,
) -> Result<Vec<SearchRun>> {
    let feature_cfg = classifier_config_from_meta(clf_model)?;
    let cost_cfg = cost_config_from_meta(cost_model)?;
    check_alphabet(clf_model, dataset, "classifier")?;
    check_alphabet(cost_model, dataset, "cost model")?;

    let clf = Classifier {
        model: clf_model,
        config: &feature_cfg,
        alphabet: &dataset.alphabet,
        obs_vocab: &dataset.obs_vocab,
    };
    let space = SearchSpace::new(config.space, clf);
    let scorer = Scorer::Cost {
        model: cost_model,
        config: &cost_cfg,
        alphabet: &dataset.alphabet,
        obs_vocab: &dataset.obs_vocab,
    };

    let mut runs = Vec::with_capacity(dataset.examples.len());
    for ex in &dataset.examples {
        let budget = config
            .time_bound
            .map(|tb| steps_for_time_bound(&space, &scorer, ex, tb));
        let run = match config.procedure {
            Procedure::Greedy { max_steps } => {
                let steps = budget.unwrap_or_else(|| max_steps.unwrap_or(ex.len()));
                greedy_search(&space, ex, &scorer, steps, false)
            }
            Procedure::Beam { width, expansions } => {
                let steps = budget.unwrap_or(expansions);
                best_first_beam_search(&space, ex, &scorer, width, steps, false)
            }
        };
        runs.push(run);
    }
    Ok(runs)
}

/// Scores predictions against gold: search accuracy, the recurrent and
/// exact-imitation reference accuracies, and the mean expansion count.
pub fn evaluate(
    dataset: &Dataset,
    clf_model: &LinearModel,
    runs: &[SearchRun],
) -> Result<Metrics> {
    if runs.len() != dataset.examples.len() {
        return Err(Error::Usage(format!(
            "{} runs for {} examples",
            runs.len(),
            dataset.examples.len()
        )));
    }
    let feature_cfg = classifier_config_from_meta(clf_model)?;
    check_alphabet(clf_model, dataset, "classifier")?;
    let clf = Classifier {
        model: clf_model,
        config: &feature_cfg,
        alphabet: &dataset.alphabet,
        obs_vocab: &dataset.obs_vocab,
    };
    let n = dataset.examples.len() as f64;
    let mut loss_sum = 0.0;
    let mut recurrent_sum = 0.0;
    let mut imitation_sum = 0.0;
    let mut steps_sum = 0.0;
    for (ex, run) in dataset.examples.iter().zip(runs) {
        loss_sum += hamming_loss(&run.best_output, ex.gold()?)?;
        recurrent_sum += clf.recurrent_error(ex)?;
        imitation_sum += clf.exact_imitation_error(ex)?;
        steps_sum += run.steps as f64;
    }
    Ok(Metrics {
        accuracy: 1.0 - loss_sum / n,
        recurrent_accuracy: 1.0 - recurrent_sum / n,
        exact_imitation_accuracy: 1.0 - imitation_sum / n,
        mean_search_steps: steps_sum / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::test_fixtures::{h0, toy_dataset, window0};
    use crate::model::ModelMeta;

    fn toy_cost_prefers_gold() -> LinearModel {
        // Negative weight on gold's unigram features makes ABA the unique
        // cheapest output of the toy example.
        let mut m = LinearModel::new(ModelMeta {
            kind: ModelKind::Cost,
            order: 2,
            window: None,
            include_unigram_obs: Some(true),
            alphabet: vec!["A".into(), "B".into()],
        });
        m.add_to("u:A|o=t1", -1.0);
        m.add_to("u:B|o=t2", -1.0);
        m.add_to("u:A|o=t3", -1.0);
        m
    }

    fn meta_for_h0() -> TwoStageTrainConfig {
        TwoStageTrainConfig {
            feature: window0(),
            ..Default::default()
        }
    }

    #[test]
    fn perfect_classifier_gives_accuracy_one_in_any_space() {
        let ds = toy_dataset();
        let cfg = TwoStageTrainConfig {
            cost: CostTrainConfig {
                iterations: 50,
                ..Default::default()
            },
            ..Default::default()
        };
        let (clf_model, cost_model, _) = train_two_stage(&ds, &cfg).unwrap();
        for space in [SpaceKind::Flipbit, SpaceKind::Lds] {
            let runs = predict(
                &ds,
                &clf_model,
                &cost_model,
                &PredictConfig {
                    space,
                    procedure: Procedure::Greedy { max_steps: None },
                    time_bound: None,
                },
            )
            .unwrap();
            let metrics = evaluate(&ds, &clf_model, &runs).unwrap();
            assert_eq!(metrics.accuracy, 1.0);
            assert_eq!(metrics.recurrent_accuracy, 1.0);
        }
    }

    #[test]
    fn lds_greedy_fixes_h0_when_cost_prefers_gold() {
        let ds = toy_dataset();
        let clf_model = h0(&ds);
        let cost_model = toy_cost_prefers_gold();
        let runs = predict(
            &ds,
            &clf_model,
            &cost_model,
            &PredictConfig {
                space: SpaceKind::Lds,
                procedure: Procedure::Greedy { max_steps: None },
                time_bound: None,
            },
        )
        .unwrap();
        let metrics = evaluate(&ds, &clf_model, &runs).unwrap();
        assert_eq!(metrics.accuracy, 1.0);
        assert!((metrics.recurrent_accuracy - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_bound_returns_the_recurrent_prediction() {
        let ds = toy_dataset();
        let clf_model = h0(&ds);
        let cost_model = toy_cost_prefers_gold();
        for procedure in [
            Procedure::Greedy { max_steps: None },
            Procedure::Beam {
                width: 10,
                expansions: 100,
            },
        ] {
            let runs = predict(
                &ds,
                &clf_model,
                &cost_model,
                &PredictConfig {
                    space: SpaceKind::Flipbit,
                    procedure,
                    time_bound: Some(0.0),
                },
            )
            .unwrap();
            assert_eq!(runs[0].best_output, vec![0, 0, 0]);
            assert_eq!(runs[0].steps, 0);
        }
    }

    #[test]
    fn evaluate_recurrent_accuracy_matches_direct_computation() {
        let ds = toy_dataset();
        let clf_model = h0(&ds);
        let cost_model = toy_cost_prefers_gold();
        let runs = predict(
            &ds,
            &clf_model,
            &cost_model,
            &PredictConfig {
                space: SpaceKind::Flipbit,
                procedure: Procedure::Greedy { max_steps: None },
                time_bound: None,
            },
        )
        .unwrap();
        let metrics = evaluate(&ds, &clf_model, &runs).unwrap();
        let cfg = window0();
        let clf = Classifier {
            model: &clf_model,
            config: &cfg,
            alphabet: &ds.alphabet,
            obs_vocab: &ds.obs_vocab,
        };
        let direct: f64 = ds
            .examples
            .iter()
            .map(|ex| clf.recurrent_error(ex).unwrap())
            .sum::<f64>()
            / ds.examples.len() as f64;
        assert_eq!(metrics.recurrent_accuracy, 1.0 - direct);
    }

    #[test]
    fn mismatched_models_are_refused() {
        let ds = toy_dataset();
        let clf_model = h0(&ds);
        let mut wrong_alphabet = toy_cost_prefers_gold();
        // Same weights, different label set.
        wrong_alphabet = LinearModel::from_json(
            &wrong_alphabet
                .to_json()
                .unwrap()
                .replace("[\"A\",\"B\"]", "[\"X\",\"Y\"]"),
        )
        .unwrap();
        let cfg = PredictConfig {
            space: SpaceKind::Flipbit,
            procedure: Procedure::Greedy { max_steps: None },
            time_bound: None,
        };
        assert!(predict(&ds, &clf_model, &wrong_alphabet, &cfg).is_err());
        // Swapped model kinds.
        assert!(predict(&ds, &toy_cost_prefers_gold(), &clf_model, &cfg).is_err());
    }

    #[test]
    fn two_stage_training_is_deterministic() {
        let ds = toy_dataset();
        let mut cfg = meta_for_h0();
        cfg.cost.iterations = 30;
        let (c1, k1, _) = train_two_stage(&ds, &cfg).unwrap();
        let (c2, k2, _) = train_two_stage(&ds, &cfg).unwrap();
        assert_eq!(c1.to_json().unwrap(), c2.to_json().unwrap());
        assert_eq!(k1.to_json().unwrap(), k2.to_json().unwrap());
    }
}
