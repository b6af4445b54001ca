//! Multilayer perceptron binary classifier: ReLU hidden layers, softmax
//! output, cross-entropy loss, mini-batch SGD with exact backpropagation.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::{rng_from_seed, sample_standard_normal};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    /// weights[l] has shape layer_sizes[l+1] x layer_sizes[l]
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 200, batch_size: 32, learning_rate: 0.01, l2: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

/// He-initialized model: weights ~ Normal(0, 2/fan_in), biases zero.
pub fn init(layer_sizes: &[usize], seed: u64) -> Result<MlpModel> {
    if layer_sizes.len() < 2 {
        return Err(CoreError::InvalidArchitecture { reason: "need at least 2 layers".to_string() });
    }
    if *layer_sizes.last().unwrap() != 2 {
        return Err(CoreError::InvalidArchitecture { reason: "output layer must have size 2".to_string() });
    }
    if layer_sizes.iter().any(|&s| s == 0) {
        return Err(CoreError::InvalidArchitecture { reason: "zero-size layer".to_string() });
    }
    let mut rng = rng_from_seed(seed);
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for w in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let std = libm::sqrt(2.0 / fan_in as f64);
        let mut m = Matrix::zeros(fan_out, fan_in);
        for v in m.data_mut() {
            *v = std * sample_standard_normal(&mut rng);
        }
        weights.push(m);
        biases.push(vec![0.0; fan_out]);
    }
    Ok(MlpModel { layer_sizes: layer_sizes.to_vec(), weights, biases })
}

impl MlpModel {
    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn squared_weight_norm(&self) -> f64 {
        self.weights.iter().flat_map(|w| w.data()).map(|v| v * v).sum()
    }
}

/// Per-layer activations from a forward pass; activations[0] is the input,
/// the last entry holds softmax probabilities.
struct ForwardTrace {
    activations: Vec<Matrix>,
}

fn forward_trace(model: &MlpModel, batch: &Matrix) -> Result<ForwardTrace> {
    if batch.cols() != model.input_size() {
        return Err(CoreError::DimensionMismatch { expected: model.input_size(), got: batch.cols() });
    }
    let n_layers = model.weights.len();
    let mut activations = Vec::with_capacity(n_layers + 1);
    activations.push(batch.clone());
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let prev = activations.last().unwrap();
        let mut z = Matrix::zeros(prev.rows(), w.rows());
        for i in 0..prev.rows() {
            let a = prev.row(i);
            let out = z.row_mut(i);
            for (o, (wr, bias)) in out.iter_mut().zip(w.iter_rows().zip(b)) {
                let mut acc = *bias;
                for (wv, av) in wr.iter().zip(a) {
                    acc += wv * av;
                }
                *o = acc;
            }
        }
        if l + 1 < n_layers {
            for v in z.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        } else {
            softmax_rows(&mut z);
        }
        activations.push(z);
    }
    Ok(ForwardTrace { activations })
}

/// In-place row softmax, stabilized by subtracting the row max.
fn softmax_rows(z: &mut Matrix) {
    for i in 0..z.rows() {
        let row = z.row_mut(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Class-probability matrix (m x 2) for a batch.
pub fn forward(model: &MlpModel, batch: &Matrix) -> Result<Matrix> {
    if batch.rows() == 0 {
        return Err(CoreError::EmptyBatch);
    }
    let mut trace = forward_trace(model, batch)?;
    Ok(trace.activations.pop().unwrap())
}

/// Mean cross-entropy loss (plus L2 penalty) and exact backprop gradients.
pub fn loss_and_gradients(
    model: &MlpModel,
    batch: &Matrix,
    labels: &[u8],
    l2: f64,
) -> Result<(f64, Gradients)> {
    let m = batch.rows();
    if m == 0 {
        return Err(CoreError::EmptyBatch);
    }
    if labels.len() != m {
        return Err(CoreError::LengthMismatch { expected: m, got: labels.len() });
    }
    let trace = forward_trace(model, batch)?;
    let probs = trace.activations.last().unwrap();

    let mut loss = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        loss -= libm::log(probs.get(i, label as usize).max(f64::MIN_POSITIVE));
    }
    loss /= m as f64;
    loss += 0.5 * l2 * model.squared_weight_norm();

    // delta at the output: (p - onehot) / m
    let mut delta = probs.clone();
    for (i, &label) in labels.iter().enumerate() {
        let v = delta.get(i, label as usize) - 1.0;
        delta.set(i, label as usize, v);
    }
    for v in delta.data_mut() {
        *v /= m as f64;
    }

    let n_layers = model.weights.len();
    let mut grad_w: Vec<Matrix> = Vec::with_capacity(n_layers);
    let mut grad_b: Vec<Vec<f64>> = Vec::with_capacity(n_layers);

    for l in (0..n_layers).rev() {
        let a_prev = &trace.activations[l];
        let w = &model.weights[l];

        let mut gw = Matrix::zeros(w.rows(), w.cols());
        let mut gb = vec![0.0; w.rows()];
        for i in 0..m {
            let d = delta.row(i);
            let a = a_prev.row(i);
            for (o, &dv) in d.iter().enumerate() {
                gb[o] += dv;
                let gr = gw.row_mut(o);
                for (g, av) in gr.iter_mut().zip(a) {
                    *g += dv * av;
                }
            }
        }
        if l2 > 0.0 {
            for (g, wv) in gw.data_mut().iter_mut().zip(w.data()) {
                *g += l2 * wv;
            }
        }

        if l > 0 {
            // propagate: delta_prev = (delta . W) * relu'(a_prev)
            let mut prev_delta = Matrix::zeros(m, w.cols());
            for i in 0..m {
                let d = delta.row(i);
                let out = prev_delta.row_mut(i);
                for (o, &dv) in d.iter().enumerate() {
                    let wr = w.row(o);
                    for (pd, wv) in out.iter_mut().zip(wr) {
                        *pd += dv * wv;
                    }
                }
                let a = a_prev.row(i);
                for (pd, &av) in out.iter_mut().zip(a) {
                    if av <= 0.0 {
                        *pd = 0.0;
                    }
                }
            }
            delta = prev_delta;
        }

        grad_w.push(gw);
        grad_b.push(gb);
    }
    grad_w.reverse();
    grad_b.reverse();
    Ok((loss, Gradients { weights: grad_w, biases: grad_b }))
}

/// Mini-batch SGD with per-epoch seeded shuffling. Aborts on non-finite loss.
pub fn train(
    model: &MlpModel,
    data: &Dataset,
    config: &TrainConfig,
) -> Result<(MlpModel, TrainHistory)> {
    if data.n() == 0 {
        return Err(CoreError::EmptyDataset);
    }
    if data.d() != model.input_size() {
        return Err(CoreError::DimensionMismatch { expected: model.input_size(), got: data.d() });
    }
    let mut model = model.clone();
    let mut history = TrainHistory::default();
    let mut rng = rng_from_seed(config.seed);
    let mut order: Vec<usize> = (0..data.n()).collect();
    let batch_size = config.batch_size.max(1);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut n_batches = 0usize;
        for chunk in order.chunks(batch_size) {
            let batch = data.x.select_rows(chunk);
            let labels: Vec<u8> = chunk.iter().map(|&i| data.y[i]).collect();
            let (loss, grads) = loss_and_gradients(&model, &batch, &labels, config.l2)?;
            if !loss.is_finite() {
                return Err(CoreError::NonFiniteLoss { epoch });
            }
            epoch_loss += loss;
            n_batches += 1;
            for ((w, gw), (b, gb)) in model
                .weights
                .iter_mut()
                .zip(&grads.weights)
                .zip(model.biases.iter_mut().zip(&grads.biases))
            {
                for (wv, gv) in w.data_mut().iter_mut().zip(gw.data()) {
                    *wv -= config.learning_rate * gv;
                }
                for (bv, gv) in b.iter_mut().zip(gb) {
                    *bv -= config.learning_rate * gv;
                }
            }
        }
        history.loss.push(epoch_loss / n_batches as f64);
        let preds = predict(&model, &data.x, 0.5)?;
        let correct = preds.iter().zip(&data.y).filter(|(p, y)| p == y).count();
        history.accuracy.push(correct as f64 / data.n() as f64);
    }
    Ok((model, history))
}

/// Positive-class probability per row.
pub fn predict_proba(model: &MlpModel, batch: &Matrix) -> Result<Vec<f64>> {
    let probs = forward(model, batch)?;
    Ok((0..probs.rows()).map(|i| probs.get(i, 1)).collect())
}

/// Hard labels; ties at the threshold classify positive.
pub fn predict(model: &MlpModel, batch: &Matrix, threshold: f64) -> Result<Vec<u8>> {
    Ok(predict_proba(model, batch)?
        .into_iter()
        .map(|p| u8::from(p >= threshold))
        .collect())
}
