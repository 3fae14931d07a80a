use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, Axis, Zip};

use super::config::{Activation, RnnConfig};
use super::forward::{check_sequence, forward_batch, ForwardCache, CHUNK};
use super::params::RnnParams;
use crate::error::{Error, Result};

/// Paired input and label sequences.
#[derive(Debug, Clone, Default)]
pub struct SequenceBatch {
    pub inputs: Vec<Array2<f64>>,
    pub labels: Vec<Array2<f64>>,
}

impl SequenceBatch {
    pub fn new(inputs: Vec<Array2<f64>>, labels: Vec<Array2<f64>>) -> Result<Self> {
        let b = SequenceBatch { inputs, labels };
        if b.inputs.len() != b.labels.len() {
            return Err(Error::Shape(format!(
                "{} inputs vs {} labels",
                b.inputs.len(),
                b.labels.len()
            )));
        }
        for (i, (x, y)) in b.inputs.iter().zip(&b.labels).enumerate() {
            if x.nrows() != y.nrows() {
                return Err(Error::Shape(format!(
                    "instance {i}: input length {} vs label length {}",
                    x.nrows(),
                    y.nrows()
                )));
            }
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub(crate) fn check(&self, config: &RnnConfig) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Shape("empty batch".into()));
        }
        for (x, y) in self.inputs.iter().zip(&self.labels) {
            check_sequence(config, x, config.input_size, "input")?;
            check_sequence(config, y, config.output_size, "label")?;
        }
        Ok(())
    }
}

/// Accumulates into `grad` the gradient of `scale * Σ (ŷ - y)²` for the
/// sequences held in `cache`, walking time backwards and layers downwards.
fn backward(
    params: &RnnParams,
    activation: Activation,
    cache: &ForwardCache,
    labels: &[&Array2<f64>],
    scale: f64,
    grad: &mut RnnParams,
) -> f64 {
    let b = cache.batch_size();
    let nh = params.hidden_size();
    let k_layers = params.num_layers();
    let t_len = cache.seq_len();
    let mut carry: Vec<Array2<f64>> = vec![Array2::zeros((b, nh)); k_layers];
    let mut sq_sum = 0.0;

    for t in (0..t_len).rev() {
        let mut dy = cache.outputs[t].clone();
        for (mut row, y) in dy.axis_iter_mut(Axis(0)).zip(labels) {
            row -= &y.row(t);
        }
        sq_sum += dy.iter().map(|v| v * v).sum::<f64>();
        dy.mapv_inplace(|v| 2.0 * scale * v);

        let h_top = &cache.hidden[k_layers - 1][t + 1];
        general_mat_mul(1.0, &dy.t(), h_top, 1.0, &mut grad.w_out);
        grad.b_out += &dy.sum_axis(Axis(0));

        let mut dh = dy.dot(&params.w_out);
        for k in (0..k_layers).rev() {
            dh += &carry[k];
            let a = &cache.preactivations[k][t];
            let h = &cache.hidden[k][t + 1];
            Zip::from(&mut dh)
                .and(a)
                .and(h)
                .for_each(|d, &a, &h| *d *= activation.derivative(a, h));
            let da = dh;

            general_mat_mul(1.0, &da.t(), &cache.hidden[k][t], 1.0, &mut grad.w_rec[k]);
            let db = da.sum_axis(Axis(0));
            grad.b_rec[k] += &db;
            carry[k] = da.dot(&params.w_rec[k]);

            if k > 0 {
                general_mat_mul(1.0, &da.t(), &cache.hidden[k - 1][t + 1], 1.0, &mut grad.w_stack[k - 1]);
                grad.b_stack[k - 1] += &db;
                dh = da.dot(&params.w_stack[k - 1]);
            } else {
                general_mat_mul(1.0, &da.t(), &cache.inputs[t], 1.0, &mut grad.w_in);
                grad.b_in += &db;
                dh = da;
            }
        }
    }
    sq_sum
}

/// Loss and its exact gradient over the selected instances of `batch`.
///
/// Instances are processed in chunks, in index order, so the reduction order
/// is fixed for a given selection.
pub fn loss_and_grad(
    params: &RnnParams,
    config: &RnnConfig,
    batch: &SequenceBatch,
    indices: &[usize],
) -> Result<(f64, RnnParams)> {
    let count = indices.len() * config.seq_len * config.output_size;
    if count == 0 {
        return Err(Error::Shape("empty batch".into()));
    }
    let scale = 1.0 / count as f64;
    let mut grad = params.zeros_like();
    let mut sq_sum = 0.0;
    for chunk in indices.chunks(CHUNK) {
        let xs: Vec<&Array2<f64>> = chunk.iter().map(|&i| &batch.inputs[i]).collect();
        let ys: Vec<&Array2<f64>> = chunk.iter().map(|&i| &batch.labels[i]).collect();
        let cache = forward_batch(params, config.hidden_activation, &xs)?;
        sq_sum += backward(params, config.hidden_activation, &cache, &ys, scale, &mut grad);
    }
    for (name, t) in grad.tensor_names().iter().zip(grad.tensors()) {
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { tensor: name.clone() });
        }
    }
    Ok((sq_sum * scale, grad))
}

/// Gradient of the mean squared error over the whole batch.
pub fn bptt_grads(params: &RnnParams, config: &RnnConfig, batch: &SequenceBatch) -> Result<RnnParams> {
    batch.check(config)?;
    let all: Vec<usize> = (0..batch.len()).collect();
    loss_and_grad(params, config, batch, &all).map(|(_, g)| g)
}

/// Mean squared error of the network over the whole batch, forward only.
pub fn batch_loss(params: &RnnParams, config: &RnnConfig, batch: &SequenceBatch) -> Result<f64> {
    let mut sq_sum = 0.0;
    for (xs, ys) in batch.inputs.chunks(CHUNK).zip(batch.labels.chunks(CHUNK)) {
        let refs: Vec<&Array2<f64>> = xs.iter().collect();
        let cache = forward_batch(params, config.hidden_activation, &refs)?;
        for (t, y_t) in cache.outputs.iter().enumerate() {
            for (row, y) in y_t.axis_iter(Axis(0)).zip(ys) {
                sq_sum += row.iter().zip(y.row(t)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
        }
    }
    Ok(sq_sum / (batch.len() * config.seq_len * config.output_size) as f64)
}
