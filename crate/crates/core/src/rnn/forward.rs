use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, Axis};

use super::config::{Activation, RnnConfig};
use super::params::RnnParams;
use crate::error::{Error, Result};

/// Number of sequences propagated together through one batched pass.
pub(crate) const CHUNK: usize = 64;

/// Intermediates of a forward pass over `B` sequences processed side by side.
///
/// Row `b` of every matrix belongs to sequence `b`. `hidden[k][0]` is the zero
/// initial state and `hidden[k][t + 1]` the state after consuming input `t`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: Vec<Array2<f64>>,
    pub hidden: Vec<Vec<Array2<f64>>>,
    pub preactivations: Vec<Vec<Array2<f64>>>,
    pub outputs: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, |x| x.nrows())
    }

    pub fn seq_len(&self) -> usize {
        self.outputs.len()
    }

    /// Output sequence `b` as a `T × N_o` matrix.
    pub fn output_sequence(&self, b: usize) -> Array2<f64> {
        let no = self.outputs[0].ncols();
        let mut out = Array2::zeros((self.seq_len(), no));
        for (t, y) in self.outputs.iter().enumerate() {
            out.row_mut(t).assign(&y.row(b));
        }
        out
    }
}

/// Runs one `T × N_i` sequence through the network.
pub fn forward(params: &RnnParams, config: &RnnConfig, x: &Array2<f64>) -> Result<ForwardCache> {
    check_sequence(config, x, config.input_size, "input")?;
    forward_batch(params, config.hidden_activation, &[x])
}

pub(crate) fn check_sequence(config: &RnnConfig, x: &Array2<f64>, width: usize, what: &str) -> Result<()> {
    if x.nrows() != config.seq_len || x.ncols() != width {
        return Err(Error::Shape(format!(
            "{what} sequence is {}x{}, expected {}x{}",
            x.nrows(),
            x.ncols(),
            config.seq_len,
            width
        )));
    }
    Ok(())
}

/// Batched forward pass. All sequences must share one length.
pub(crate) fn forward_batch(
    params: &RnnParams,
    activation: Activation,
    xs: &[&Array2<f64>],
) -> Result<ForwardCache> {
    let b = xs.len();
    let t_len = xs[0].nrows();
    let nh = params.hidden_size();
    let k_layers = params.num_layers();

    let inputs: Vec<Array2<f64>> = (0..t_len)
        .map(|t| {
            let mut xt = Array2::zeros((b, params.input_size()));
            for (row, x) in xt.axis_iter_mut(Axis(0)).zip(xs) {
                let mut row = row;
                row.assign(&x.row(t));
            }
            xt
        })
        .collect();

    // Per-layer bias sums broadcast over rows.
    let biases: Vec<Array1<f64>> = (0..k_layers)
        .map(|k| {
            let bx = if k == 0 { &params.b_in } else { &params.b_stack[k - 1] };
            bx + &params.b_rec[k]
        })
        .collect();

    let mut hidden: Vec<Vec<Array2<f64>>> = (0..k_layers)
        .map(|_| {
            let mut v = Vec::with_capacity(t_len + 1);
            v.push(Array2::zeros((b, nh)));
            v
        })
        .collect();
    let mut preactivations: Vec<Vec<Array2<f64>>> =
        (0..k_layers).map(|_| Vec::with_capacity(t_len)).collect();
    let mut outputs = Vec::with_capacity(t_len);

    for t in 0..t_len {
        for k in 0..k_layers {
            let mut a = Array2::from_shape_fn((b, nh), |(_, j)| biases[k][j]);
            if k == 0 {
                general_mat_mul(1.0, &inputs[t], &params.w_in.t(), 1.0, &mut a);
            } else {
                general_mat_mul(1.0, &hidden[k - 1][t + 1], &params.w_stack[k - 1].t(), 1.0, &mut a);
            }
            general_mat_mul(1.0, &hidden[k][t], &params.w_rec[k].t(), 1.0, &mut a);
            let h = a.mapv(|v| activation.apply(v));
            preactivations[k].push(a);
            hidden[k].push(h);
        }
        let mut y = Array2::from_shape_fn((b, params.output_size()), |(_, j)| params.b_out[j]);
        general_mat_mul(1.0, &hidden[k_layers - 1][t + 1], &params.w_out.t(), 1.0, &mut y);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericOverflow { step: t });
        }
        outputs.push(y);
    }

    Ok(ForwardCache {
        inputs,
        hidden,
        preactivations,
        outputs,
    })
}

/// Network outputs for every input sequence, in input order.
pub fn predict(params: &RnnParams, config: &RnnConfig, inputs: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
    let mut out = Vec::with_capacity(inputs.len());
    for chunk in inputs.chunks(CHUNK) {
        for x in chunk {
            check_sequence(config, x, config.input_size, "input")?;
        }
        let refs: Vec<&Array2<f64>> = chunk.iter().collect();
        let cache = forward_batch(params, config.hidden_activation, &refs)?;
        out.extend((0..chunk.len()).map(|b| cache.output_sequence(b)));
    }
    Ok(out)
}
