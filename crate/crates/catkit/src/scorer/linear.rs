//! Logistic scorer over hashed cross features, trained with SGD on binary
//! cross entropy under a warmup/decay learning-rate schedule.

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::binio::{self, HashingWriter, PayloadReader};
use super::features::{featurize, FeatureVector};
use crate::error::{Error, Result};
use crate::sampler::TrainingExample;

pub const LINEAR_MAGIC: &[u8; 4] = b"CKLM";
pub const LINEAR_VERSION: u32 = 1;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConfig {
    /// log2 of the hashed feature space.
    pub bits: u32,
    pub epochs: u32,
    pub base_lr: f64,
    pub warmup_fraction: f64,
    pub seed: u64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            bits: 22,
            epochs: 1,
            base_lr: 0.1,
            warmup_fraction: 0.10,
            seed: 1,
        }
    }
}

/// Learning rate at `step` (0-based) of `total_steps`: a linear ramp from
/// base_lr/warmup_steps up to base_lr over the warmup, then linear decay
/// reaching zero at the final step.
pub fn lr_at(step: usize, total_steps: usize, base_lr: f64, warmup_fraction: f64) -> Result<f64> {
    if step >= total_steps {
        return Err(Error::InvalidInput(format!(
            "step {step} out of range for {total_steps} total steps"
        )));
    }
    if !(0.0 < warmup_fraction && warmup_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "warmup fraction {warmup_fraction} outside (0, 1)"
        )));
    }
    let warmup_steps = (warmup_fraction * total_steps as f64).ceil() as usize;
    let warmup_steps = warmup_steps.max(1);
    if step < warmup_steps {
        Ok(base_lr * (step + 1) as f64 / warmup_steps as f64)
    } else {
        let decay_span = (total_steps - warmup_steps) as f64;
        Ok(base_lr * (total_steps - 1 - step) as f64 / decay_span)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable binary cross entropy from the logit.
fn bce_from_logit(z: f64, label: f64) -> f64 {
    z.max(0.0) - z * label + (-z.abs()).exp().ln_1p()
}

/// A trained (or zero-initialized) linear scorer.
#[derive(Debug, Clone)]
pub struct LinearScorerModel {
    weights: Vec<f64>,
    bias: f64,
    config: LinearConfig,
    /// Mean training BCE per epoch.
    loss_trace: Vec<f64>,
}

impl LinearScorerModel {
    /// All-zero model: scores 0.5 for every pair.
    pub fn zeroed(config: LinearConfig) -> Self {
        LinearScorerModel {
            weights: vec![0.0; 1usize << config.bits],
            bias: 0.0,
            config,
            loss_trace: Vec::new(),
        }
    }

    pub fn config(&self) -> &LinearConfig {
        &self.config
    }

    pub fn loss_trace(&self) -> &[f64] {
        &self.loss_trace
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn margin(&self, features: &FeatureVector) -> f64 {
        features.dot(&self.weights) + self.bias
    }

    /// Probability that the category describes the document.
    pub fn score(&self, category: &str, document: &str) -> f64 {
        sigmoid(self.margin(&featurize(category, document, self.config.bits)))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = HashingWriter::new(BufWriter::new(file));
        let io = |e| Error::io(path, e);
        w.write_all(LINEAR_MAGIC).map_err(io)?;
        binio::write_u32(&mut w, LINEAR_VERSION).map_err(io)?;
        binio::write_u32(&mut w, self.config.bits).map_err(io)?;
        binio::write_u32(&mut w, self.config.epochs).map_err(io)?;
        binio::write_f64(&mut w, self.config.base_lr).map_err(io)?;
        binio::write_f64(&mut w, self.config.warmup_fraction).map_err(io)?;
        binio::write_u64(&mut w, self.config.seed).map_err(io)?;
        binio::write_f64(&mut w, self.bias).map_err(io)?;
        binio::write_u64(&mut w, self.weights.len() as u64).map_err(io)?;
        for &weight in &self.weights {
            binio::write_f64(&mut w, weight).map_err(io)?;
        }
        binio::write_u32(&mut w, self.loss_trace.len() as u32).map_err(io)?;
        for &loss in &self.loss_trace {
            binio::write_f64(&mut w, loss).map_err(io)?;
        }
        let mut inner = w.finish().map_err(io)?;
        inner.flush().map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let payload = binio::read_checksummed(path)?;
        let mut r = PayloadReader::new(&payload);
        r.magic(LINEAR_MAGIC)?;
        let version = r.u32()?;
        if version != LINEAR_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: LINEAR_VERSION,
            });
        }
        let bits = r.u32()?;
        let epochs = r.u32()?;
        let base_lr = r.f64()?;
        let warmup_fraction = r.f64()?;
        let seed = r.u64()?;
        let bias = r.f64()?;
        let n_weights = r.u64()? as usize;
        if n_weights != 1usize << bits {
            return Err(Error::ModelFormat(format!(
                "weight count {n_weights} does not match 2^{bits}"
            )));
        }
        let weights = r.f64_vec(n_weights)?;
        let trace_len = r.u32()? as usize;
        let loss_trace = r.f64_vec(trace_len)?;
        r.done()?;
        Ok(LinearScorerModel {
            weights,
            bias,
            config: LinearConfig {
                bits,
                epochs,
                base_lr,
                warmup_fraction,
                seed,
            },
            loss_trace,
        })
    }

    /// Human-readable dump of the non-zero weights.
    pub fn debug_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(
            w,
            "linear-model bits={} epochs={} base_lr={} warmup={} seed={} bias={}",
            self.config.bits,
            self.config.epochs,
            self.config.base_lr,
            self.config.warmup_fraction,
            self.config.seed,
            self.bias
        )?;
        writeln!(w, "epoch-loss {:?}", self.loss_trace)?;
        for (index, &weight) in self.weights.iter().enumerate() {
            if weight != 0.0 {
                writeln!(w, "{index}\t{weight}")?;
            }
        }
        Ok(())
    }
}

/// Trains a logistic model on binary examples.
///
/// Examples are shuffled once per epoch by a seeded generator; the learning
/// rate follows [`lr_at`]. The result is fully determined by (examples,
/// config).
pub fn train_linear(examples: &[TrainingExample], config: &LinearConfig) -> Result<LinearScorerModel> {
    let positives = examples.iter().filter(|e| e.label == 1).count();
    if positives == 0 || positives == examples.len() {
        return Err(Error::InvalidInput(
            "training needs at least one positive and one negative example".into(),
        ));
    }

    let mut model = LinearScorerModel::zeroed(config.clone());
    let total_steps = examples.len() * config.epochs as usize;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut step = 0usize;
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &example_index in &order {
            let ex = &examples[example_index];
            let features = featurize(&ex.category, &ex.document, config.bits);
            let label = ex.label as f64;
            let lr = lr_at(step, total_steps, config.base_lr, config.warmup_fraction)?;
            let z = model.margin(&features);
            let p = sigmoid(z);
            let loss = bce_from_logit(z, label);
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "non-finite loss at epoch {epoch} step {step} (z={z}, lr={lr})"
                )));
            }
            epoch_loss += loss;
            let gradient = p - label;
            for &(index, count) in features.entries() {
                model.weights[index] -= lr * gradient * count;
            }
            model.bias -= lr * gradient;
            step += 1;
        }
        model.loss_trace.push(epoch_loss / examples.len() as f64);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example(category: &str, document: &str, label: u8) -> TrainingExample {
        TrainingExample {
            category: category.into(),
            document: document.into(),
            label,
            doc_id: "t".into(),
        }
    }

    mod schedule {
        use super::*;

        #[test]
        fn peak_reached_at_warmup_boundary() {
            // 1000 steps, 10% warmup: step 99 is the last warmup step.
            let lr = lr_at(99, 1000, 0.5, 0.1).unwrap();
            assert!((lr - 0.5).abs() < 1e-15);
        }

        #[test]
        fn first_step_is_base_over_warmup_steps() {
            let lr = lr_at(0, 1000, 0.2, 0.1).unwrap();
            assert!((lr - 0.2 / 100.0).abs() < 1e-15);
        }

        #[test]
        fn last_step_is_near_zero() {
            let total = 1000;
            let lr = lr_at(total - 1, total, 0.3, 0.1).unwrap();
            assert!(lr <= 0.3 / (0.9 * total as f64));
            assert!(lr >= 0.0);
        }

        #[test]
        fn domain_violations_error() {
            assert!(lr_at(10, 10, 0.1, 0.1).is_err());
            assert!(lr_at(0, 10, 0.1, 0.0).is_err());
            assert!(lr_at(0, 10, 0.1, 1.0).is_err());
        }

        #[test]
        fn continuous_piecewise_linear_with_peak_base_lr() {
            let total = 400;
            let base = 0.7;
            let lrs: Vec<f64> = (0..total)
                .map(|s| lr_at(s, total, base, 0.1).unwrap())
                .collect();
            let max = lrs.iter().cloned().fold(f64::MIN, f64::max);
            assert!((max - base).abs() < 1e-12);
            // No jump larger than the ramp slope anywhere.
            let warmup_steps = 40.0;
            let max_slope = base / warmup_steps + 1e-12;
            for pair in lrs.windows(2) {
                assert!((pair[1] - pair[0]).abs() <= max_slope);
            }
        }
    }

    fn toy_training_set() -> Vec<TrainingExample> {
        // Two categories with disjoint signature tokens.
        let mut examples = Vec::new();
        for i in 0..60 {
            let (cat, other, tok) = if i % 2 == 0 {
                ("redcat", "bluecat", "crimson scarlet ruby")
            } else {
                ("bluecat", "redcat", "azure cobalt navy")
            };
            examples.push(example(cat, tok, 1));
            examples.push(example(other, tok, 0));
        }
        examples
    }

    #[test]
    fn separable_toy_set_reaches_low_loss() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 16,
            epochs: 8,
            base_lr: 0.5,
            ..LinearConfig::default()
        };
        let model = train_linear(&examples, &config).unwrap();
        let final_loss = *model.loss_trace().last().unwrap();
        assert!(final_loss < 0.1, "final epoch mean BCE {final_loss}");
    }

    #[test]
    fn zero_epochs_scores_half_everywhere() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 12,
            epochs: 0,
            ..LinearConfig::default()
        };
        let model = train_linear(&examples, &config).unwrap();
        assert_eq!(model.score("anything", "at all"), 0.5);
        assert_eq!(model.score("redcat", "crimson"), 0.5);
    }

    #[test]
    fn same_seed_same_model_bytes() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 12,
            epochs: 2,
            seed: 11,
            ..LinearConfig::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let path_a = dir.path().join("a.bin");
        let path_b = dir.path().join("b.bin");
        train_linear(&examples, &config).unwrap().save(&path_a).unwrap();
        train_linear(&examples, &config).unwrap().save(&path_b).unwrap();
        assert_eq!(
            std::fs::read(&path_a).unwrap(),
            std::fs::read(&path_b).unwrap()
        );
    }

    #[test]
    fn divergent_lr_aborts_with_diagnostics() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 12,
            epochs: 50,
            base_lr: 1e305,
            ..LinearConfig::default()
        };
        match train_linear(&examples, &config) {
            Err(Error::Training(message)) => assert!(message.contains("non-finite")),
            other => panic!("expected divergence error, got {other:?}"),
        }
    }

    #[test]
    fn all_same_label_is_rejected() {
        let examples = vec![example("a", "x", 1), example("b", "y", 1)];
        assert!(train_linear(&examples, &LinearConfig::default()).is_err());
    }

    #[test]
    fn trained_positive_category_outranks_negatives() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 16,
            epochs: 8,
            base_lr: 0.5,
            ..LinearConfig::default()
        };
        let model = train_linear(&examples, &config).unwrap();
        assert!(model.score("redcat", "crimson ruby") > model.score("bluecat", "crimson ruby"));
        assert!(model.score("bluecat", "navy azure") > model.score("redcat", "navy azure"));
    }

    #[test]
    fn co_occurring_token_raises_score_monotonically() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 16,
            epochs: 4,
            base_lr: 0.5,
            ..LinearConfig::default()
        };
        let model = train_linear(&examples, &config).unwrap();
        // Adding a second signature token can only add positively-weighted
        // cross features for the true category.
        let one = model.score("redcat", "crimson");
        let two = model.score("redcat", "crimson scarlet");
        assert!(two > one, "{two} <= {one}");
    }

    #[test]
    fn save_load_round_trip_preserves_scores() {
        let examples = toy_training_set();
        let config = LinearConfig {
            bits: 12,
            epochs: 2,
            ..LinearConfig::default()
        };
        let model = train_linear(&examples, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        model.save(&path).unwrap();
        let loaded = LinearScorerModel::load(&path).unwrap();
        for (cat, doc) in [("redcat", "crimson"), ("bluecat", "unseen words")] {
            assert_eq!(model.score(cat, doc), loaded.score(cat, doc));
        }
        assert_eq!(model.loss_trace(), loaded.loss_trace());
    }

    #[test]
    fn corrupted_file_is_detected() {
        let model = LinearScorerModel::zeroed(LinearConfig {
            bits: 8,
            ..LinearConfig::default()
        });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        model.save(&path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        std::fs::write(&path, bytes).unwrap();
        match LinearScorerModel::load(&path) {
            Err(Error::Corrupt { .. }) => {}
            other => panic!("expected corruption error, got {other:?}"),
        }
    }

    mod gradient_check {
        use super::*;
        use rand::Rng;

        /// Analytic BCE gradient vs central finite differences on random
        /// sparse probes.
        #[test]
        fn analytic_matches_central_differences() {
            let mut rng = ChaCha20Rng::seed_from_u64(42);
            let dim = 64;
            for _ in 0..100 {
                let nnz = rng.random_range(1..8);
                let features: Vec<(usize, f64)> = rand::seq::index::sample(&mut rng, dim, nnz)
                    .into_iter()
                    .map(|index| (index, rng.random_range(1..3) as f64))
                    .collect();
                let label = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
                let mut weights: Vec<f64> =
                    (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();

                let z = |w: &[f64]| -> f64 {
                    features.iter().map(|&(i, c)| w[i] * c).sum::<f64>()
                };
                let loss = |w: &[f64]| bce_from_logit(z(w), label);

                let p = sigmoid(z(&weights));
                for &(index, count) in &features {
                    let analytic = (p - label) * count;
                    let h = 1e-5;
                    let original = weights[index];
                    weights[index] = original + h;
                    let up = loss(&weights);
                    weights[index] = original - h;
                    let down = loss(&weights);
                    weights[index] = original;
                    let numeric = (up - down) / (2.0 * h);
                    let relative = (analytic - numeric).abs()
                        / analytic.abs().max(numeric.abs()).max(1e-12);
                    assert!(
                        relative <= 1e-6,
                        "gradient mismatch: analytic {analytic}, numeric {numeric}, rel {relative}"
                    );
                }
            }
        }
    }
}
