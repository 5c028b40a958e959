//! Seeded synthetic sequence-labeling tasks: gold labels follow a first-order
//! chain, observations encode the gold label with optional corruption.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Label, LabelAlphabet, ObservationVector, SequenceExample};
use crate::features::FeatureInterner;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SyntheticTaskConfig {
    pub seed: u64,
    pub num_train: usize,
    pub num_test: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub alphabet_size: usize,
    /// Probability that a token's observation encodes a wrong label.
    pub obs_noise: f64,
    /// Probability that a gold label copies its predecessor.
    pub history_coupling: f64,
}

impl Default for SyntheticTaskConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            num_train: 100,
            num_test: 50,
            t_min: 4,
            t_max: 8,
            alphabet_size: 3,
            obs_noise: 0.0,
            history_coupling: 0.0,
        }
    }
}

impl SyntheticTaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_min < 1 || self.t_min > self.t_max {
            return Err(Error::Usage(format!(
                "need 1 <= t_min <= t_max, got {}..{}",
                self.t_min, self.t_max
            )));
        }
        if self.alphabet_size < 2 {
            return Err(Error::Usage("alphabet_size must be >= 2".into()));
        }
        for (name, p) in [
            ("obs_noise", self.obs_noise),
            ("history_coupling", self.history_coupling),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Usage(format!("{name} must be in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Generates a (train, test) dataset pair from one seeded stream, so the two
/// splits are disjoint draws. Same config → identical datasets.
pub fn synthesize_dataset(config: &SyntheticTaskConfig) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let labels: Vec<String> = (0..config.alphabet_size).map(|i| format!("L{i}")).collect();
    let alphabet = LabelAlphabet::new(labels.clone())?;
    let mut obs_vocab = FeatureInterner::new();
    let obs_ids: Vec<u32> = labels.iter().map(|l| obs_vocab.intern(&format!("o={l}"))).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let gen_split = |prefix: &str, n: usize, rng: &mut ChaCha8Rng| -> Vec<SequenceExample> {
        (0..n)
            .map(|i| {
                let t_len = rng.random_range(config.t_min..=config.t_max);
                let mut gold: Vec<Label> = Vec::with_capacity(t_len);
                let mut tokens = Vec::with_capacity(t_len);
                for t in 0..t_len {
                    let label = if t > 0 && rng.random_bool(config.history_coupling) {
                        gold[t - 1]
                    } else {
                        rng.random_range(0..config.alphabet_size)
                    };
                    gold.push(label);
                    let observed = if config.obs_noise > 0.0 && rng.random_bool(config.obs_noise) {
                        // A wrong label, uniform over the others.
                        let shift = rng.random_range(1..config.alphabet_size);
                        (label + shift) % config.alphabet_size
                    } else {
                        label
                    };
                    let mut ov = ObservationVector::new();
                    ov.add(obs_ids[observed], 1.0);
                    tokens.push(ov);
                }
                SequenceExample {
                    id: format!("{prefix}{i}"),
                    tokens,
                    gold: Some(gold),
                }
            })
            .collect()
    };
    let train_examples = gen_split("train", config.num_train, &mut rng);
    let test_examples = gen_split("test", config.num_test, &mut rng);

    let train = Dataset {
        alphabet: LabelAlphabet::new(labels.clone())?,
        obs_vocab: obs_vocab.clone(),
        examples: train_examples,
    };
    let test = Dataset {
        alphabet,
        obs_vocab,
        examples: test_examples,
    };
    train.validate()?;
    test.validate()?;
    Ok((train, test))
}
