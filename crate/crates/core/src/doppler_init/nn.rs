//! Dense feedforward regressor trained with backpropagation and Adam.
//!
//! The model maps a stacked real/imaginary pilot branch (2M reals) through
//! ReLU hidden layers of widths {M, M, M/2, M/2} to a scalar linear head.
//! Training minimizes the mean squared error of the normalized Doppler and
//! keeps the weights with the best validation loss. All arithmetic is f64 so
//! analytic gradients can be checked against central differences tightly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// One dense layer, weights row-major with shape [out_dim][in_dim].
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    fn new_seeded(in_dim: usize, out_dim: usize, rng: &mut impl Rng) -> Self {
        // Variance-scaled uniform init: U(-s, s) with s = sqrt(6/fan_in).
        let s = (6.0 / in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.gen_range(-s..s)).collect();
        Self {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
        }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }
}

/// Feedforward Doppler regressor with its input/output scaling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FnnModel {
    /// Subcarrier count the model was built for; the input is 2M reals.
    pub num_subcarriers: usize,
    /// Output denormalization: the head predicts ν/ν_max.
    pub nu_max_hz: f64,
    /// Dense layers; ReLU on all but the last, which is linear.
    pub layers: Vec<DenseLayer>,
}

impl FnnModel {
    /// Fresh regressor with hidden widths {M, M, M/2, M/2} and a scalar head.
    pub fn new_regressor(num_subcarriers: usize, nu_max_hz: f64, seed: u64) -> Result<Self> {
        if num_subcarriers < 2 || num_subcarriers % 2 != 0 {
            return Err(Error::Parameter("subcarrier count must be even and >= 2".into()));
        }
        if !(nu_max_hz > 0.0) {
            return Err(Error::Parameter("output scale must be positive".into()));
        }
        let m = num_subcarriers;
        let dims = [2 * m, m, m, m / 2, m / 2, 1];
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|w| DenseLayer::new_seeded(w[0], w[1], &mut rng))
            .collect();
        Ok(Self {
            num_subcarriers,
            nu_max_hz,
            layers,
        })
    }

    /// Builds a model from explicit layers, checking the dimension chain.
    pub fn from_layers(num_subcarriers: usize, nu_max_hz: f64, layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Model("model has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(Error::Model(format!(
                    "layer dimensions do not chain: {} -> {}",
                    pair[0].out_dim, pair[1].in_dim
                )));
            }
        }
        for layer in &layers {
            if layer.weights.len() != layer.in_dim * layer.out_dim
                || layer.bias.len() != layer.out_dim
            {
                return Err(Error::Model("layer buffer sizes are inconsistent".into()));
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(Error::Model("model parameters must be finite".into()));
            }
        }
        Ok(Self {
            num_subcarriers,
            nu_max_hz,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    /// Raw head output (normalized Doppler) for one input vector.
    pub fn forward_normalized(&self, input: &[f64]) -> Result<f64> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "model expects {} inputs, got {}",
                self.input_dim(),
                input.len()
            )));
        }
        let last = self.layers.len() - 1;
        let mut act = input.to_vec();
        for (idx, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(layer.out_dim);
            for o in 0..layer.out_dim {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut z = layer.bias[o];
                for (w, a) in row.iter().zip(&act) {
                    z += w * a;
                }
                next.push(if idx < last { z.max(0.0) } else { z });
            }
            act = next;
        }
        Ok(act[0])
    }

    /// Doppler prediction in Hz: head output times ν_max.
    pub fn predict_hz(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward_normalized(input)? * self.nu_max_hz)
    }
}

/// Per-layer parameter gradients, same shapes as the model layers.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(model: &FnnModel) -> Self {
        Self {
            weights: model.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: model.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }
}

/// Mean squared error and its parameter gradients over a batch.
///
/// `inputs` is row-major [batch][input_dim]; `targets` one value per row.
pub fn loss_and_gradients(model: &FnnModel, inputs: &[f64], targets: &[f64]) -> Result<(f64, Gradients)> {
    let in_dim = model.input_dim();
    let batch = targets.len();
    if inputs.len() != batch * in_dim {
        return Err(Error::Dimension("input buffer does not match batch size".into()));
    }
    if batch == 0 {
        return Err(Error::Parameter("empty batch".into()));
    }
    let last = model.layers.len() - 1;

    // Forward pass keeping every activation; activations[0] is the input.
    let mut activations: Vec<Vec<f64>> = Vec::with_capacity(model.layers.len() + 1);
    activations.push(inputs.to_vec());
    for (idx, layer) in model.layers.iter().enumerate() {
        let prev = &activations[idx];
        let mut out = vec![0.0; batch * layer.out_dim];
        for i in 0..batch {
            let x = &prev[i * layer.in_dim..(i + 1) * layer.in_dim];
            let row_out = &mut out[i * layer.out_dim..(i + 1) * layer.out_dim];
            for o in 0..layer.out_dim {
                let w = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                let mut z = layer.bias[o];
                for (wv, xv) in w.iter().zip(x) {
                    z += wv * xv;
                }
                row_out[o] = if idx < last { z.max(0.0) } else { z };
            }
        }
        activations.push(out);
    }

    let preds = &activations[model.layers.len()];
    let mut loss = 0.0;
    // dL/da for the head, L = mean (a - y)².
    let mut delta: Vec<f64> = preds
        .iter()
        .zip(targets)
        .map(|(a, y)| {
            let e = a - y;
            loss += e * e;
            2.0 * e / batch as f64
        })
        .collect();
    loss /= batch as f64;

    let mut grads = Gradients::zeros_like(model);
    for idx in (0..model.layers.len()).rev() {
        let layer = &model.layers[idx];
        // ReLU derivative masks every hidden layer's delta.
        if idx < last {
            let act = &activations[idx + 1];
            for (d, a) in delta.iter_mut().zip(act) {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        let prev = &activations[idx];
        let gw = &mut grads.weights[idx];
        let gb = &mut grads.bias[idx];
        for i in 0..batch {
            let d = &delta[i * layer.out_dim..(i + 1) * layer.out_dim];
            let x = &prev[i * layer.in_dim..(i + 1) * layer.in_dim];
            for o in 0..layer.out_dim {
                let dv = d[o];
                if dv == 0.0 {
                    continue;
                }
                gb[o] += dv;
                let gr = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (g, xv) in gr.iter_mut().zip(x) {
                    *g += dv * xv;
                }
            }
        }
        if idx > 0 {
            let mut next_delta = vec![0.0; batch * layer.in_dim];
            for i in 0..batch {
                let d = &delta[i * layer.out_dim..(i + 1) * layer.out_dim];
                let nd = &mut next_delta[i * layer.in_dim..(i + 1) * layer.in_dim];
                for o in 0..layer.out_dim {
                    let dv = d[o];
                    if dv == 0.0 {
                        continue;
                    }
                    let w = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                    for (n, wv) in nd.iter_mut().zip(w) {
                        *n += dv * wv;
                    }
                }
            }
            delta = next_delta;
        }
    }

    Ok((loss, grads))
}

/// Mean squared error of the model over a dataset (no gradients).
pub fn dataset_mse(model: &FnnModel, inputs: &[f64], targets: &[f64]) -> Result<f64> {
    let in_dim = model.input_dim();
    let mut acc = 0.0;
    for (i, y) in targets.iter().enumerate() {
        let a = model.forward_normalized(&inputs[i * in_dim..(i + 1) * in_dim])?;
        acc += (a - y) * (a - y);
    }
    Ok(acc / targets.len() as f64)
}

struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    fn new(model: &FnnModel) -> Self {
        let shapes: Vec<usize> = model
            .layers
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect();
        Self {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut FnnModel, grads: &Gradients, lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        const EPS: f64 = 1e-8;
        self.t += 1;
        let bc1 = 1.0 - B1.powi(self.t as i32);
        let bc2 = 1.0 - B2.powi(self.t as i32);
        for (li, layer) in model.layers.iter_mut().enumerate() {
            let slots = [
                (&mut layer.weights, &grads.weights[li], 2 * li),
                (&mut layer.bias, &grads.bias[li], 2 * li + 1),
            ];
            for (params, grad, si) in slots {
                let m = &mut self.m[si];
                let v = &mut self.v[si];
                for k in 0..params.len() {
                    m[k] = B1 * m[k] + (1.0 - B1) * grad[k];
                    v[k] = B2 * v[k] + (1.0 - B2) * grad[k] * grad[k];
                    let mh = m[k] / bc1;
                    let vh = v[k] / bc2;
                    params[k] -= lr * mh / (vh.sqrt() + EPS);
                }
            }
        }
    }
}

/// Summary of one training run.
#[derive(Debug, Clone)]
pub struct TrainingReport {
    /// Validation MSE of the freshly initialized model.
    pub initial_val_mse: f64,
    /// Best validation MSE reached (the returned model's score).
    pub best_val_mse: f64,
    /// Validation MSE after each epoch.
    pub val_mse_history: Vec<f64>,
}

/// Trains `model` in place with Adam and mini-batches; returns the weights
/// with the best validation MSE and the loss history.
///
/// The learning rate follows a cosine decay from `lr` to zero over the run.
/// `epoch_hook` runs on the training input buffer before every epoch so the
/// caller can re-realize nuisance parameters (noise draws, phase rotations)
/// without growing the sample set; pass a no-op for plain training. Feature
/// standardization is the caller's concern; this routine sees raw buffers.
pub fn train(
    model: &mut FnnModel,
    train_inputs: &mut [f64],
    train_targets: &[f64],
    val_inputs: &[f64],
    val_targets: &[f64],
    batch_size: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
    mut epoch_hook: impl FnMut(usize, &mut [f64]),
) -> Result<TrainingReport> {
    if batch_size == 0 || epochs == 0 {
        return Err(Error::Parameter("batch size and epochs must be positive".into()));
    }
    let in_dim = model.input_dim();
    let n_train = train_targets.len();
    if train_inputs.len() != n_train * in_dim || n_train == 0 {
        return Err(Error::Dimension("training buffers are inconsistent".into()));
    }

    let initial_val_mse = dataset_mse(model, val_inputs, val_targets)?;
    let mut best_val_mse = initial_val_mse;
    let mut best_layers = model.layers.clone();
    let mut history = Vec::with_capacity(epochs);

    let mut adam = AdamState::new(model);
    let mut order: Vec<usize> = (0..n_train).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let batches_per_epoch = n_train.div_ceil(batch_size);
    let total_steps = (batches_per_epoch * epochs) as f64;
    let mut step = 0usize;

    let mut batch_in = vec![0.0; batch_size * in_dim];
    let mut batch_tgt = vec![0.0; batch_size];

    for epoch in 0..epochs {
        epoch_hook(epoch, train_inputs);
        // Fisher-Yates shuffle with the seeded generator.
        for i in (1..n_train).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(batch_size) {
            let b = chunk.len();
            for (row, &src) in chunk.iter().enumerate() {
                batch_in[row * in_dim..(row + 1) * in_dim]
                    .copy_from_slice(&train_inputs[src * in_dim..(src + 1) * in_dim]);
                batch_tgt[row] = train_targets[src];
            }
            let (_, grads) = loss_and_gradients(model, &batch_in[..b * in_dim], &batch_tgt[..b])?;
            let progress = step as f64 / total_steps;
            let lr_t = lr * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos());
            adam.step(model, &grads, lr_t);
            step += 1;
        }
        let val_mse = dataset_mse(model, val_inputs, val_targets)?;
        if !val_mse.is_finite() {
            return Err(Error::Training(format!(
                "validation MSE diverged after {step} steps"
            )));
        }
        if val_mse < best_val_mse {
            best_val_mse = val_mse;
            best_layers = model.layers.clone();
        }
        history.push(val_mse);
    }

    model.layers = best_layers;
    Ok(TrainingReport {
        initial_val_mse,
        best_val_mse,
        val_mse_history: history,
    })
}

/// Rewrites the first layer so the model absorbs the affine feature
/// standardization x' = (x - mean)/std used during training.
pub fn fold_standardization(model: &mut FnnModel, mean: &[f64], std: &[f64]) -> Result<()> {
    let layer = &mut model.layers[0];
    if mean.len() != layer.in_dim || std.len() != layer.in_dim {
        return Err(Error::Dimension("standardization vectors do not match input".into()));
    }
    for o in 0..layer.out_dim {
        let row = &mut layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
        let mut shift = 0.0;
        for k in 0..row.len() {
            let w = row[k] / std[k];
            shift += w * mean[k];
            row[k] = w;
        }
        layer.bias[o] -= shift;
    }
    Ok(())
}
