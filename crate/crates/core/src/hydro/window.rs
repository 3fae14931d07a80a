use std::ops::Range;

use ndarray::Array2;

use super::HydroRecord;
use crate::error::{Error, Result};

/// Overlapping length-`L` windows offset by one day.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub window_len: usize,
    /// `L×2` matrices of `[precip, pet]`.
    pub inputs: Vec<Array2<f64>>,
    /// `L×1` matrices of flow; NaN where flow is missing.
    pub labels: Vec<Array2<f64>>,
    /// Index of each window's first day in the record list.
    pub start_indices: Vec<usize>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.start_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_indices.is_empty()
    }
}

/// Every window of length `len` lying entirely within `span`.
pub fn make_windows(records: &[HydroRecord], len: usize, span: Range<usize>) -> Result<WindowSet> {
    if len == 0 {
        return Err(Error::Config("window length must be positive".into()));
    }
    if span.end > records.len() || span.start > span.end {
        return Err(Error::Data(format!("span {span:?} outside {} records", records.len())));
    }
    if span.end - span.start < len {
        return Err(Error::Data(format!("span of {} days shorter than window {len}", span.end - span.start)));
    }
    let starts: Vec<usize> = (span.start..=span.end - len).collect();
    let mut inputs = Vec::with_capacity(starts.len());
    let mut labels = Vec::with_capacity(starts.len());
    for &s in &starts {
        let days = &records[s..s + len];
        inputs.push(Array2::from_shape_fn((len, 2), |(t, c)| if c == 0 { days[t].precip } else { days[t].pet }));
        labels.push(Array2::from_shape_fn((len, 1), |(t, _)| days[t].flow.unwrap_or(f64::NAN)));
    }
    Ok(WindowSet {
        window_len: len,
        inputs,
        labels,
        start_indices: starts,
    })
}

/// Averages overlapping window predictions into one value per day.
pub fn reconstruct_from_windows(predictions: &[Array2<f64>], starts: &[usize], total_len: usize) -> Result<Vec<f64>> {
    if predictions.len() != starts.len() {
        return Err(Error::Shape(format!("{} windows but {} starts", predictions.len(), starts.len())));
    }
    let mut mean = vec![0.0; total_len];
    let mut count = vec![0usize; total_len];
    for (w, &s) in predictions.iter().zip(starts) {
        if w.ncols() != 1 || s + w.nrows() > total_len {
            return Err(Error::Shape(format!("window at {s} of shape {:?} exceeds {total_len} days", w.dim())));
        }
        for (t, v) in w.column(0).iter().enumerate() {
            // running mean: days covered by equal values come back unchanged
            count[s + t] += 1;
            mean[s + t] += (v - mean[s + t]) / count[s + t] as f64;
        }
    }
    if let Some(day) = count.iter().position(|&c| c == 0) {
        return Err(Error::CoverageGap { day });
    }
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn flat(m: usize) -> Vec<HydroRecord> {
        let d0 = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        (0..m)
            .map(|i| HydroRecord {
                day_index: i,
                date: d0 + chrono::Duration::days(i as i64),
                precip: i as f64,
                pet: 1.0,
                temp: 5.0,
                flow: Some(i as f64 * 0.5),
            })
            .collect()
    }

    #[test]
    fn counts() {
        let w = make_windows(&flat(10), 5, 0..10).unwrap();
        assert_eq!(w.len(), 6);
        assert_eq!(w.start_indices, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(make_windows(&flat(2557), 45, 0..2557).unwrap().len(), 2513);
    }

    #[test]
    fn hand_mean() {
        let series = reconstruct_from_windows(&[array![[1.0], [3.0]], array![[5.0], [7.0]]], &[0, 1], 3).unwrap();
        assert_eq!(series, vec![1.0, 4.0, 7.0]);
    }

    #[test]
    fn uncovered_day_reported() {
        let r = reconstruct_from_windows(&[array![[1.0], [3.0]]], &[0], 3);
        assert!(matches!(r, Err(Error::CoverageGap { day: 2 })));
    }
}
