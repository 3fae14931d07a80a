use ndarray::Array2;

use crate::error::{Error, Result};

fn check_pair(a: &[Array2<f64>], b: &[Array2<f64>]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("{} sequences vs {}", a.len(), b.len())));
    }
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        if x.dim() != y.dim() {
            return Err(Error::Shape(format!(
                "sequence {i}: {:?} vs {:?}",
                x.dim(),
                y.dim()
            )));
        }
    }
    Ok(())
}

/// Mean squared error over every scalar entry (sequences × steps × outputs).
pub fn mse_loss(outputs: &[Array2<f64>], labels: &[Array2<f64>]) -> Result<f64> {
    check_pair(outputs, labels)?;
    let mut count = 0usize;
    let mut sum = 0.0;
    for (y_hat, y) in outputs.iter().zip(labels) {
        sum += y_hat.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        count += y.len();
    }
    if count == 0 {
        return Err(Error::Shape("empty sequence set".into()));
    }
    Ok(sum / count as f64)
}

/// Root of the mean, over sequences, of the squared Frobenius norm of each
/// residual sequence.
pub fn rmse(predicted: &[Array2<f64>], truth: &[Array2<f64>]) -> Result<f64> {
    check_pair(predicted, truth)?;
    if truth.is_empty() {
        return Err(Error::Shape("empty sequence set".into()));
    }
    let total: f64 = predicted
        .iter()
        .zip(truth)
        .map(|(p, y)| p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    Ok((total / truth.len() as f64).sqrt())
}

/// Conventional per-observation RMSE of two equally long series.
pub fn series_rmse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(Error::Shape(format!(
            "series lengths {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    let s: f64 = predicted.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / truth.len() as f64).sqrt())
}
