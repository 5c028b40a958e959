//! Command-line driver: synthetic data generation, two-stage training,
//! prediction, evaluation, and anytime-curve export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use outsearch::classifier::{ClassifierFeatureConfig, ImitationTrainConfig};
use outsearch::costlearn::{
    write_training_log, CostFeatureConfig, CostTrainConfig, Procedure, Scheme,
};
use outsearch::io::{load_dataset, save_dataset, write_metrics, write_predictions};
use outsearch::model::LinearModel;
use outsearch::pipeline::{
    evaluate, predict, train_two_stage, PredictConfig, TwoStageTrainConfig,
};
use outsearch::search::write_anytime_csv;
use outsearch::spaces::SpaceKind;
use outsearch::synth::{synthesize_dataset, SyntheticTaskConfig};
use outsearch::Result;

#[derive(Parser)]
#[command(
    name = "outsearch",
    about = "Anytime structured prediction by search over complete outputs",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded synthetic sequence-labeling dataset pair.
    Synth(SynthArgs),
    /// Train the recurrent classifier, then the cost function.
    Train(TrainArgs),
    /// Run cost-guided search and write predictions.
    Predict(PredictArgs),
    /// Run cost-guided search and report accuracy metrics.
    Evaluate(EvaluateArgs),
    /// Run cost-guided search and write the anytime trace CSV.
    Anytime(AnytimeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpaceArg {
    Flipbit,
    Lds,
}

impl From<SpaceArg> for SpaceKind {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Flipbit => SpaceKind::Flipbit,
            SpaceArg::Lds => SpaceKind::Lds,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcedureArg {
    Greedy,
    Beam,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Full,
    #[value(name = "imitation-y*")]
    ImitationYStar,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Full => Scheme::FullLossGuided,
            SchemeArg::ImitationYStar => Scheme::ImitationThenYStar,
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Search space over complete outputs.
    #[arg(long, value_enum, default_value = "lds")]
    space: SpaceArg,
    /// Search procedure.
    #[arg(long, value_enum, default_value = "greedy")]
    procedure: ProcedureArg,
    /// Beam width (beam procedure).
    #[arg(long, default_value_t = 100)]
    beam_width: usize,
    /// Expansion budget (beam procedure).
    #[arg(long, default_value_t = 200)]
    expansions: usize,
    /// Step budget for greedy search; defaults to the sequence length.
    #[arg(long)]
    max_steps: Option<usize>,
}

impl SearchArgs {
    fn procedure(&self) -> Procedure {
        match self.procedure {
            ProcedureArg::Greedy => Procedure::Greedy {
                max_steps: self.max_steps,
            },
            ProcedureArg::Beam => Procedure::Beam {
                width: self.beam_width,
                expansions: self.expansions,
            },
        }
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output path for the training split.
    #[arg(long)]
    train_out: PathBuf,
    /// Output path for the test split.
    #[arg(long)]
    test_out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    num_train: usize,
    #[arg(long, default_value_t = 50)]
    num_test: usize,
    #[arg(long, default_value_t = 4)]
    t_min: usize,
    #[arg(long, default_value_t = 8)]
    t_max: usize,
    #[arg(long, default_value_t = 3)]
    alphabet_size: usize,
    /// Probability a token's observation encodes a wrong label.
    #[arg(long, default_value_t = 0.0)]
    obs_noise: f64,
    /// Probability a gold label copies its predecessor.
    #[arg(long, default_value_t = 0.0)]
    history_coupling: f64,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Training data (CoNLL-style TSV).
    #[arg(long)]
    data: PathBuf,
    /// Output path for the classifier model.
    #[arg(long)]
    classifier_out: PathBuf,
    /// Output path for the cost model.
    #[arg(long)]
    cost_out: PathBuf,
    /// Output path for the training log CSV.
    #[arg(long)]
    log_out: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    /// Constraint-generation scheme for cost training.
    #[arg(long, value_enum, default_value = "imitation-y*")]
    scheme: SchemeArg,
    /// Observation window radius for the classifier.
    #[arg(long, default_value_t = 1)]
    window: usize,
    /// Number of previous predicted labels used as classifier features.
    #[arg(long, default_value_t = 1)]
    history: usize,
    /// Classifier training passes.
    #[arg(long, default_value_t = 100)]
    iterations: usize,
    /// Classifier learning rate.
    #[arg(long, default_value_t = 1.0)]
    learning_rate: f64,
    /// Cost-function training passes.
    #[arg(long, default_value_t = 500)]
    iterations_cost: usize,
    /// Cost-function learning rate.
    #[arg(long, default_value_t = 0.01)]
    learning_rate_cost: f64,
    /// Cost feature order (2 = label pairs, 3 = adds triples).
    #[arg(long, default_value_t = 2)]
    cost_order: usize,
    /// Drop label-conjoined observation features from the cost function.
    #[arg(long)]
    no_unigram_obs: bool,
    /// Average weights over all update steps (both trainers).
    #[arg(long)]
    averaged: bool,
    /// Shuffle seed for classifier training example order.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    classifier_model: PathBuf,
    #[arg(long)]
    cost_model: PathBuf,
    /// Output path for the predictions TSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Wall-clock budget per example in seconds; 0.0 returns the pure
    /// recurrent prediction.
    #[arg(long)]
    time_bound: Option<f64>,
    /// Also write the anytime trace CSV here.
    #[arg(long)]
    anytime: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    classifier_model: PathBuf,
    #[arg(long)]
    cost_model: PathBuf,
    /// Output path for the metrics JSON (stdout when omitted).
    #[arg(long)]
    metrics_out: Option<PathBuf>,
    /// Also write the predictions TSV here.
    #[arg(long)]
    predictions_out: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    time_bound: Option<f64>,
    /// Also write the anytime trace CSV here.
    #[arg(long)]
    anytime: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnytimeArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    classifier_model: PathBuf,
    #[arg(long)]
    cost_model: PathBuf,
    /// Output path for the anytime trace CSV.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    time_bound: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Train(a) => cmd_train(a),
        Cmd::Predict(a) => cmd_predict(a),
        Cmd::Evaluate(a) => cmd_evaluate(a),
        Cmd::Anytime(a) => cmd_anytime(a),
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let config = SyntheticTaskConfig {
        seed: a.seed,
        num_train: a.num_train,
        num_test: a.num_test,
        t_min: a.t_min,
        t_max: a.t_max,
        alphabet_size: a.alphabet_size,
        obs_noise: a.obs_noise,
        history_coupling: a.history_coupling,
    };
    let (train, test) = synthesize_dataset(&config)?;
    save_dataset(&a.train_out, &train)?;
    save_dataset(&a.test_out, &test)?;
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let dataset = load_dataset(&a.data, None)?;
    let config = TwoStageTrainConfig {
        feature: ClassifierFeatureConfig {
            window: a.window,
            history: a.history,
        },
        imitation: ImitationTrainConfig {
            iterations: a.iterations,
            learning_rate: a.learning_rate,
            averaged: a.averaged,
            shuffle_seed: a.seed,
        },
        cost_features: CostFeatureConfig {
            order: a.cost_order,
            include_unigram_obs: !a.no_unigram_obs,
        },
        cost: CostTrainConfig {
            iterations: a.iterations_cost,
            learning_rate: a.learning_rate_cost,
            scheme: a.scheme.into(),
            averaged: a.averaged,
        },
        space: a.search.space.into(),
        procedure: a.search.procedure(),
    };
    let (clf_model, cost_model, log) = train_two_stage(&dataset, &config)?;
    clf_model.save(&a.classifier_out)?;
    cost_model.save(&a.cost_out)?;
    if let Some(path) = &a.log_out {
        let mut w = BufWriter::new(File::create(path)?);
        write_training_log(&mut w, &log)?;
        w.flush()?;
    }
    Ok(())
}

fn run_search(
    data: &PathBuf,
    classifier_model: &PathBuf,
    cost_model: &PathBuf,
    search: &SearchArgs,
    time_bound: Option<f64>,
) -> Result<(
    outsearch::data::Dataset,
    LinearModel,
    Vec<outsearch::search::SearchRun>,
)> {
    let clf_model = LinearModel::load(classifier_model)?;
    let cost_model = LinearModel::load(cost_model)?;
    // Read the data under the model's alphabet so label ordinals line up
    // regardless of first-seen order in the file.
    let alphabet = outsearch::data::LabelAlphabet::new(clf_model.meta().alphabet.clone())?;
    let dataset = load_dataset(data, Some(&alphabet))?;
    let config = PredictConfig {
        space: search.space.into(),
        procedure: search.procedure(),
        time_bound,
    };
    let runs = predict(&dataset, &clf_model, &cost_model, &config)?;
    Ok((dataset, clf_model, runs))
}

fn write_anytime(
    path: &PathBuf,
    dataset: &outsearch::data::Dataset,
    runs: &[outsearch::search::SearchRun],
) -> Result<()> {
    let pairs: Vec<_> = runs
        .iter()
        .zip(&dataset.examples)
        .map(|(run, ex)| Ok((run, ex.gold()?)))
        .collect::<Result<_>>()?;
    let mut w = BufWriter::new(File::create(path)?);
    write_anytime_csv(&mut w, &pairs)?;
    w.flush()?;
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let (dataset, _, runs) = run_search(
        &a.data,
        &a.classifier_model,
        &a.cost_model,
        &a.search,
        a.time_bound,
    )?;
    let predictions: Vec<_> = runs
        .iter()
        .map(|r| (r.example_id.clone(), r.best_output.clone()))
        .collect();
    let mut w = BufWriter::new(File::create(&a.out)?);
    write_predictions(&mut w, &dataset.alphabet, &predictions)?;
    w.flush()?;
    if let Some(path) = &a.anytime {
        write_anytime(path, &dataset, &runs)?;
    }
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let (dataset, clf_model, runs) = run_search(
        &a.data,
        &a.classifier_model,
        &a.cost_model,
        &a.search,
        a.time_bound,
    )?;
    let metrics = evaluate(&dataset, &clf_model, &runs)?;
    match &a.metrics_out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_metrics(&mut w, &metrics)?;
            w.flush()?;
        }
        None => write_metrics(&mut std::io::stdout().lock(), &metrics)?,
    }
    if let Some(path) = &a.predictions_out {
        let predictions: Vec<_> = runs
            .iter()
            .map(|r| (r.example_id.clone(), r.best_output.clone()))
            .collect();
        let mut w = BufWriter::new(File::create(path)?);
        write_predictions(&mut w, &dataset.alphabet, &predictions)?;
        w.flush()?;
    }
    if let Some(path) = &a.anytime {
        write_anytime(path, &dataset, &runs)?;
    }
    Ok(())
}

fn cmd_anytime(a: AnytimeArgs) -> Result<()> {
    let (dataset, _, runs) = run_search(
        &a.data,
        &a.classifier_model,
        &a.cost_model,
        &a.search,
        a.time_bound,
    )?;
    write_anytime(&a.out, &dataset, &runs)
}
