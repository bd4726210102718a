use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense 2-D map with physical axis coordinates. Undefined cells are `None`
/// and never carry a NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Map2 {
    pub rows: usize,
    pub cols: usize,
    pub row_label: String,
    pub col_label: String,
    pub row_coords: Vec<f64>,
    pub col_coords: Vec<f64>,
    pub values: Vec<Option<f64>>,
}

impl Map2 {
    pub fn new(
        row_label: &str,
        row_coords: Vec<f64>,
        col_label: &str,
        col_coords: Vec<f64>,
        values: Vec<Option<f64>>,
    ) -> Self {
        assert_eq!(values.len(), row_coords.len() * col_coords.len());
        Map2 {
            rows: row_coords.len(),
            cols: col_coords.len(),
            row_label: row_label.to_string(),
            col_label: col_label.to_string(),
            row_coords,
            col_coords,
            values,
        }
    }

    pub fn from_dense(
        row_label: &str,
        row_coords: Vec<f64>,
        col_label: &str,
        col_coords: Vec<f64>,
        values: Vec<f64>,
    ) -> Self {
        let values = values.into_iter().map(|v| v.is_finite().then_some(v)).collect();
        Self::new(row_label, row_coords, col_label, col_coords, values)
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row * self.cols + col]
    }

    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn sum(&self) -> f64 {
        self.defined().sum()
    }

    pub fn max(&self) -> Option<f64> {
        self.defined().reduce(f64::max)
    }

    pub fn min(&self) -> Option<f64> {
        self.defined().reduce(f64::min)
    }

    /// (row, col) of the largest defined value; ties resolve to the first.
    pub fn argmax(&self) -> Option<(usize, usize)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = *v {
                if best.map_or(true, |(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
        }
        best.map(|(i, _)| (i / self.cols, i % self.cols))
    }

    /// Rescale so the largest defined value is one.
    pub fn normalized_to_unit_max(&self) -> Self {
        let mut out = self.clone();
        if let Some(m) = self.max().filter(|m| *m != 0.0) {
            for v in out.values.iter_mut().flatten() {
                *v /= m;
            }
        }
        out
    }

    pub fn mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_some).collect()
    }

    /// Pearson correlation over cells defined in both maps.
    pub fn correlation(&self, other: &Map2) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::GridMismatch(format!(
                "{}x{} map vs {}x{} map",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let pairs: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&other.values)
            .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
            .collect();
        pearson(&pairs)
    }
}

pub fn pearson(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData("correlation needs two cells".into()));
    }
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(x, y), (a, b)| (x + a / n, y + b / n));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InsufficientData("correlation of a constant map".into()));
    }
    // separate roots: the product underflows for panels far in the tails
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Sum with a fixed pairwise reduction tree; the result depends only on the
/// order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 128;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_of_tiny_values() {
        let pairs: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 1e-150, i as f64 * 1e-150)).collect();
        let r = pearson(&pairs).unwrap();
        assert!(r <= 1.0 && r > 1.0 - 1e-15, "{r}");
    }

    fn map(values: Vec<f64>) -> Map2 {
        Map2::from_dense("r", vec![0.0, 1.0], "c", vec![0.0, 1.0, 2.0], values)
    }

    #[test]
    fn identical_maps_correlate_perfectly() {
        let m = map(vec![1.0, 2.0, 5.0, 0.0, 3.0, 4.0]);
        assert!((m.correlation(&m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_becomes_undefined() {
        let m = map(vec![1.0, f64::NAN, 5.0, f64::INFINITY, 3.0, 4.0]);
        assert_eq!(m.get(0, 1), None);
        assert_eq!(m.defined().count(), 4);
        assert_eq!(m.argmax(), Some((0, 2)));
    }

    #[test]
    fn unit_max() {
        let m = map(vec![1.0, 2.0, 8.0, 0.0, 3.0, 4.0]).normalized_to_unit_max();
        assert_eq!(m.max(), Some(1.0));
        assert_eq!(m.get(0, 0), Some(0.125));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 49_995_000.0);
    }

    #[test]
    fn mismatched_shapes_rejected() {
        let a = map(vec![0.0; 6]);
        let b = Map2::from_dense("r", vec![0.0], "c", vec![0.0], vec![1.0]);
        assert!(matches!(a.correlation(&b), Err(Error::GridMismatch(_))));
    }
}
