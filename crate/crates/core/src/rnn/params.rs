use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::RnnConfig;
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Weights and biases of a stacked RNN. One set is shared by every time-step.
///
/// Layer `k` (zero based) has a recurrent matrix `w_rec[k]` and bias
/// `b_rec[k]`. The first layer reads the input through `w_in`/`b_in`; layer
/// `k >= 1` reads layer `k - 1` through `w_stack[k - 1]`/`b_stack[k - 1]`.
/// Matrices map column vectors, so `w_in` is `hidden × input`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RnnParams {
    pub w_in: Array2<f64>,
    pub b_in: Array1<f64>,
    pub w_rec: Vec<Array2<f64>>,
    pub b_rec: Vec<Array1<f64>>,
    pub w_stack: Vec<Array2<f64>>,
    pub b_stack: Vec<Array1<f64>>,
    pub w_out: Array2<f64>,
    pub b_out: Array1<f64>,
}

impl RnnParams {
    pub fn zeros(config: &RnnConfig) -> Self {
        let (ni, nh, no, k) = (
            config.input_size,
            config.hidden_size,
            config.output_size,
            config.num_layers,
        );
        RnnParams {
            w_in: Array2::zeros((nh, ni)),
            b_in: Array1::zeros(nh),
            w_rec: vec![Array2::zeros((nh, nh)); k],
            b_rec: vec![Array1::zeros(nh); k],
            w_stack: vec![Array2::zeros((nh, nh)); k - 1],
            b_stack: vec![Array1::zeros(nh); k - 1],
            w_out: Array2::zeros((no, nh)),
            b_out: Array1::zeros(no),
        }
    }

    /// Weights i.i.d. uniform on `[-1/sqrt(N_h), 1/sqrt(N_h)]`, biases zero.
    pub fn init(config: &RnnConfig, seed: u64) -> Self {
        let mut params = Self::zeros(config);
        let bound = 1.0 / (config.hidden_size as f64).sqrt();
        let mut rng = rng_from(seed);
        let mut fill = |m: &mut Array2<f64>| {
            m.iter_mut().for_each(|w| *w = rng.gen_range(-bound..=bound));
        };
        fill(&mut params.w_in);
        for k in 0..config.num_layers {
            fill(&mut params.w_rec[k]);
            if k > 0 {
                fill(&mut params.w_stack[k - 1]);
            }
        }
        fill(&mut params.w_out);
        params
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
        z
    }

    pub fn num_layers(&self) -> usize {
        self.w_rec.len()
    }

    pub fn hidden_size(&self) -> usize {
        self.w_in.nrows()
    }

    pub fn input_size(&self) -> usize {
        self.w_in.ncols()
    }

    pub fn output_size(&self) -> usize {
        self.w_out.nrows()
    }

    /// Tensor names in the fixed order used by [`tensors`](Self::tensors).
    pub fn tensor_names(&self) -> Vec<String> {
        let k = self.num_layers();
        let mut names = vec!["w_in".to_string(), "b_in".to_string()];
        for i in 0..k {
            names.push(format!("w_rec[{i}]"));
            names.push(format!("b_rec[{i}]"));
        }
        for i in 0..k.saturating_sub(1) {
            names.push(format!("w_stack[{i}]"));
            names.push(format!("b_stack[{i}]"));
        }
        names.push("w_out".into());
        names.push("b_out".into());
        names
    }

    /// Flat views of every tensor, in a fixed order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![slice(&self.w_in), slice1(&self.b_in)];
        for (w, b) in self.w_rec.iter().zip(&self.b_rec) {
            out.push(slice(w));
            out.push(slice1(b));
        }
        for (w, b) in self.w_stack.iter().zip(&self.b_stack) {
            out.push(slice(w));
            out.push(slice1(b));
        }
        out.push(slice(&self.w_out));
        out.push(slice1(&self.b_out));
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.push(self.w_in.as_slice_mut().expect("standard layout"));
        out.push(self.b_in.as_slice_mut().expect("standard layout"));
        for (w, b) in self.w_rec.iter_mut().zip(self.b_rec.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        for (w, b) in self.w_stack.iter_mut().zip(self.b_stack.iter_mut()) {
            out.push(w.as_slice_mut().expect("standard layout"));
            out.push(b.as_slice_mut().expect("standard layout"));
        }
        out.push(self.w_out.as_slice_mut().expect("standard layout"));
        out.push(self.b_out.as_slice_mut().expect("standard layout"));
        out
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &RnnParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += alpha * s);
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= alpha);
        }
    }

    pub fn same_shape(&self, other: &RnnParams) -> bool {
        let a = self.tensor_shapes();
        a == other.tensor_shapes()
    }

    fn tensor_shapes(&self) -> Vec<Vec<usize>> {
        let mut s = vec![self.w_in.shape().to_vec(), self.b_in.shape().to_vec()];
        for (w, b) in self.w_rec.iter().zip(&self.b_rec) {
            s.push(w.shape().to_vec());
            s.push(b.shape().to_vec());
        }
        for (w, b) in self.w_stack.iter().zip(&self.b_stack) {
            s.push(w.shape().to_vec());
            s.push(b.shape().to_vec());
        }
        s.push(self.w_out.shape().to_vec());
        s.push(self.b_out.shape().to_vec());
        s
    }

    /// Checks that the tensors match `config` and hold only finite values.
    pub fn check(&self, config: &RnnConfig) -> Result<()> {
        if !self.same_shape(&RnnParams::zeros(config)) {
            return Err(Error::Shape(format!(
                "parameters do not match config (K={}, N_i={}, N_h={}, N_o={})",
                config.num_layers, config.input_size, config.hidden_size, config.output_size
            )));
        }
        for (name, t) in self.tensor_names().iter().zip(self.tensors()) {
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient {
                    tensor: name.clone(),
                });
            }
        }
        Ok(())
    }
}

fn slice(m: &Array2<f64>) -> &[f64] {
    m.as_slice().expect("standard layout")
}

fn slice1(v: &Array1<f64>) -> &[f64] {
    v.as_slice().expect("standard layout")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nh: usize) -> RnnConfig {
        RnnConfig {
            hidden_size: nh,
            num_layers: 3,
            ..RnnConfig::lorenz()
        }
    }

    #[test]
    fn init_is_deterministic() {
        let c = cfg(64);
        assert_eq!(RnnParams::init(&c, 7), RnnParams::init(&c, 7));
        assert_ne!(RnnParams::init(&c, 7), RnnParams::init(&c, 8));
    }

    #[test]
    fn init_biases_zero_and_weights_bounded() {
        let c = cfg(4);
        let p = RnnParams::init(&c, 3);
        for b in std::iter::once(&p.b_in)
            .chain(&p.b_rec)
            .chain(&p.b_stack)
            .chain(std::iter::once(&p.b_out))
        {
            assert!(b.iter().all(|&v| v == 0.0));
        }
        for (name, t) in p.tensor_names().iter().zip(p.tensors()) {
            if name.starts_with('w') {
                assert!(t.iter().all(|v| (-0.5..=0.5).contains(v)), "{name}");
            }
        }
    }

    #[test]
    fn shapes_follow_config() {
        let c = cfg(5);
        let p = RnnParams::zeros(&c);
        assert_eq!(p.w_in.dim(), (5, 3));
        assert_eq!(p.w_rec.len(), 3);
        assert_eq!(p.w_stack.len(), 2);
        assert_eq!(p.w_out.dim(), (3, 5));
        assert_eq!(p.tensor_names().len(), p.tensors().len());
        assert!(p.check(&c).is_ok());
        let mut other = c.clone();
        other.hidden_size = 6;
        assert!(p.check(&other).is_err());
    }
}
