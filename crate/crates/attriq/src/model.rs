//! The binary attribute-presence classifier and the dictionary-lookup
//! baseline.
//!
//! The classifier is L2-regularized logistic regression fit by
//! full-batch gradient descent — deterministic given a seed, free of
//! numeric dependencies, and linear so the learned weights stay
//! readable. The baseline declares an attribute present whenever any
//! candidate span claims it, conflicts ignored; it exists to quantify
//! exactly the errors the classifier is supposed to fix.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::AttributeSchema;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::lexicon::CandidateSpan;

const MODEL_FORMAT_VERSION: u32 = 1;
const MODEL_FORMAT_NAME: &str = "attriq-model";

/// One training or evaluation query with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledQuery {
    pub query: String,
    /// Target attribute the label is about.
    pub target: String,
    /// Candidate value whose presence is in question.
    pub candidate_value: String,
    /// True when the candidate really is the target attribute here.
    pub label: bool,
    /// The value the query genuinely carries for the target, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_value: Option<String>,
}

/// Gradient-descent settings; the defaults train every corpus in this
/// repository to convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// L2 penalty on the weights (bias exempt).
    pub l2: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Reweight examples by inverse class frequency.
    pub class_weighting: bool,
    /// Decision threshold stamped on the trained model.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            l2: 1e-4,
            epochs: 2000,
            seed: 42,
            class_weighting: true,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::InvalidConfig("l2 must be non-negative".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig("threshold must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Provenance stored with a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub schema_fingerprint: String,
}

/// A trained logistic-regression classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Probability at or above which the decision is "present".
    pub threshold: f64,
    pub training_meta: TrainingMeta,
}

impl Model {
    /// Reject feature data computed under a different schema.
    pub fn verify_schema(&self, schema: &AttributeSchema) -> Result<()> {
        let data = schema.fingerprint();
        if self.training_meta.schema_fingerprint != data {
            return Err(Error::FingerprintMismatch {
                model: self.training_meta.schema_fingerprint.clone(),
                data,
            });
        }
        Ok(())
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

/// Numerically stable binary cross-entropy of a logit against a 0/1
/// label: `max(z,0) - z*y + ln(1 + exp(-|z|))`.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Weighted regularized training loss at a weight point.
///
/// `J = (1/W) Σ wᵢ·bce(zᵢ, yᵢ) + (λ/2)·‖w‖²` with `W = Σ wᵢ`; the bias
/// carries no penalty. Public so gradient checks can probe the exact
/// objective the trainer descends.
pub fn training_loss(
    weights: &[f64],
    bias: f64,
    xs: &[Vec<f64>],
    ys: &[bool],
    sample_weights: &[f64],
    l2: f64,
) -> f64 {
    let total_weight: f64 = sample_weights.iter().sum();
    let mut loss = 0.0;
    for ((x, &y), &sw) in xs.iter().zip(ys).zip(sample_weights) {
        let z = dot(weights, x) + bias;
        loss += sw * bce_from_logit(z, if y { 1.0 } else { 0.0 });
    }
    loss / total_weight + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`training_loss`] in (weights, bias).
pub fn training_gradient(
    weights: &[f64],
    bias: f64,
    xs: &[Vec<f64>],
    ys: &[bool],
    sample_weights: &[f64],
    l2: f64,
) -> (Vec<f64>, f64) {
    let total_weight: f64 = sample_weights.iter().sum();
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for ((x, &y), &sw) in xs.iter().zip(ys).zip(sample_weights) {
        let z = dot(weights, x) + bias;
        let residual = sw * (sigmoid(z) - if y { 1.0 } else { 0.0 });
        for (g, &xi) in grad_w.iter_mut().zip(x) {
            *g += residual * xi;
        }
        grad_b += residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / total_weight + l2 * w;
    }
    (grad_w, grad_b / total_weight)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fit a model; also returns the loss at the end of every epoch, which
/// is non-increasing at the default learning rate.
pub fn train_with_history(
    schema: &AttributeSchema,
    examples: &[(FeatureVector, bool)],
    config: &TrainConfig,
) -> Result<(Model, Vec<f64>)> {
    config.validate()?;
    let expected = 2 * (schema.len() - 1);
    for (fv, _) in examples {
        if fv.width() != expected {
            return Err(Error::WidthMismatch {
                expected,
                actual: fv.width(),
            });
        }
    }
    let n_present = examples.iter().filter(|(_, y)| *y).count();
    let n_absent = examples.len() - n_present;
    if n_present == 0 || n_absent == 0 {
        return Err(Error::Training(format!(
            "need both classes; got {n_present} present and {n_absent} absent"
        )));
    }

    let xs: Vec<Vec<f64>> = examples.iter().map(|(fv, _)| fv.dense.clone()).collect();
    let ys: Vec<bool> = examples.iter().map(|(_, y)| *y).collect();
    let n = examples.len() as f64;
    let sample_weights: Vec<f64> = if config.class_weighting {
        ys.iter()
            .map(|&y| n / (2.0 * if y { n_present } else { n_absent } as f64))
            .collect()
    } else {
        vec![1.0; examples.len()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights: Vec<f64> = (0..expected).map(|_| rng.gen_range(-0.01..0.01)).collect();
    let mut bias = 0.0;

    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (grad_w, grad_b) =
            training_gradient(&weights, bias, &xs, &ys, &sample_weights, config.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= config.learning_rate * g;
        }
        bias -= config.learning_rate * grad_b;
        history.push(training_loss(&weights, bias, &xs, &ys, &sample_weights, config.l2));
    }

    let model = Model {
        weights,
        bias,
        threshold: config.threshold,
        training_meta: TrainingMeta {
            seed: config.seed,
            epochs: config.epochs,
            learning_rate: config.learning_rate,
            l2: config.l2,
            schema_fingerprint: schema.fingerprint(),
        },
    };
    Ok((model, history))
}

/// Fit a model, discarding the loss history.
pub fn train(
    schema: &AttributeSchema,
    examples: &[(FeatureVector, bool)],
    config: &TrainConfig,
) -> Result<Model> {
    train_with_history(schema, examples, config).map(|(model, _)| model)
}

/// Score one feature vector: (probability, present?).
pub fn predict(model: &Model, fv: &FeatureVector) -> Result<(f64, bool)> {
    if fv.width() != model.weights.len() {
        return Err(Error::WidthMismatch {
            expected: model.weights.len(),
            actual: fv.width(),
        });
    }
    let p = sigmoid(dot(&model.weights, &fv.dense) + model.bias);
    Ok((p, p >= model.threshold))
}

/// Dictionary-lookup baseline: the attribute is present iff any
/// candidate span claims it. Overlaps and conflicts are ignored, which
/// is precisely this baseline's characteristic failure.
pub fn baseline_predict(spans: &[CandidateSpan], m: &str) -> bool {
    spans.iter().any(|s| s.attribute == m)
}

/// Serialized model file.
#[derive(Serialize, Deserialize)]
struct ModelSnapshot {
    format: String,
    format_version: u32,
    weights: Vec<f64>,
    bias: f64,
    threshold: f64,
    training_meta: TrainingMeta,
}

/// Write a model as a versioned JSON file.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let snapshot = ModelSnapshot {
        format: MODEL_FORMAT_NAME.to_string(),
        format_version: MODEL_FORMAT_VERSION,
        weights: model.weights.clone(),
        bias: model.bias,
        threshold: model.threshold,
        training_meta: model.training_meta.clone(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &snapshot)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Load a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<Model> {
    let file = File::open(path)?;
    let snapshot: ModelSnapshot = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
    if snapshot.format != MODEL_FORMAT_NAME {
        return Err(Error::corrupt(
            path,
            format!("not a model file (format {:?})", snapshot.format),
        ));
    }
    if snapshot.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            path: path.display().to_string(),
            found: snapshot.format_version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    if !(snapshot.threshold > 0.0 && snapshot.threshold < 1.0) {
        return Err(Error::corrupt(
            path,
            format!("threshold {} outside (0, 1)", snapshot.threshold),
        ));
    }
    Ok(Model {
        weights: snapshot.weights,
        bias: snapshot.bias,
        threshold: snapshot.threshold,
        training_meta: snapshot.training_meta,
    })
}

/// Write labeled queries as newline-delimited JSON.
pub fn save_labeled_queries(queries: &[LabeledQuery], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for q in queries {
        serde_json::to_writer(&mut out, q).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read labeled queries written by [`save_labeled_queries`].
pub fn load_labeled_queries(path: &Path) -> Result<Vec<LabeledQuery>> {
    let file = File::open(path)?;
    let mut queries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        queries.push(
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                line: i + 1,
                message: e.to_string(),
            })?,
        );
    }
    Ok(queries)
}
