//! Schmidt decomposition of the bipartite (signal | idler) amplitude.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeGrid;
use crate::error::{Error, Result};

/// Schmidt coefficients as probabilities `λ_j = s_j² / Σ s_k²`, sorted
/// nonincreasing, and the Schmidt number `M = 1 / Σ λ_j²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
}

impl SchmidtSpectrum {
    /// Build from singular values of the amplitude matrix.
    pub fn from_singular_values(singular: &[f64]) -> Result<Self> {
        let mut sq: Vec<f64> = singular.iter().map(|s| s * s).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = sq.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InsufficientData(
                "Schmidt decomposition of an all-zero amplitude".into(),
            ));
        }
        let coefficients: Vec<f64> = sq.iter().map(|v| v / total).collect();
        let purity: f64 = coefficients.iter().map(|l| l * l).sum();
        Ok(SchmidtSpectrum {
            coefficients,
            schmidt_number: 1.0 / purity,
        })
    }

    /// True when the second coefficient is negligible against the first,
    /// i.e. the state is numerically separable.
    pub fn is_separable(&self) -> bool {
        match self.coefficients.as_slice() {
            [first, second, ..] => second.sqrt() < 1e-10 * first.sqrt(),
            _ => true,
        }
    }
}

/// Schmidt spectrum of a `rows × cols` row-major complex matrix.
pub fn schmidt_from_matrix(rows: usize, cols: usize, values: &[Complex64]) -> Result<SchmidtSpectrum> {
    if values.len() != rows * cols || rows == 0 || cols == 0 {
        return Err(Error::GridMismatch(format!(
            "{} values for a {rows}x{cols} matrix",
            values.len()
        )));
    }
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Domain("non-finite amplitude".into()));
    }
    let singular: Vec<f64> = if values.iter().all(|v| v.im == 0.0) {
        let m = DMatrix::from_row_iterator(rows, cols, values.iter().map(|v| v.re));
        m.singular_values().iter().copied().collect()
    } else {
        let m = DMatrix::from_row_iterator(rows, cols, values.iter().copied());
        m.singular_values().iter().copied().collect()
    };
    SchmidtSpectrum::from_singular_values(&singular)
}

/// Reshape Ψ to `[(k_s, λ_s) × (k_i, λ_i)]` and decompose.
pub fn schmidt_spectrum(grid: &AmplitudeGrid) -> Result<SchmidtSpectrum> {
    let n = grid.grid.bins_per_arm();
    schmidt_from_matrix(n, n, &grid.values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn separable_is_rank_one() {
        let f = [1.0, -2.0, 0.5];
        let g = [0.3, 0.7];
        let v: Vec<Complex64> = f.iter().flat_map(|a| g.iter().map(move |b| c(a * b))).collect();
        let s = schmidt_from_matrix(3, 2, &v).unwrap();
        assert!((s.schmidt_number - 1.0).abs() < 1e-12);
        assert!(s.is_separable());
    }

    #[test]
    fn bell_state_has_two_modes() {
        let v = [c(1.0), c(0.0), c(0.0), c(1.0)];
        let s = schmidt_from_matrix(2, 2, &v).unwrap();
        assert!((s.schmidt_number - 2.0).abs() < 1e-12);
        assert!(!s.is_separable());
    }

    #[test]
    fn invariant_under_global_phase_and_scale() {
        let v: Vec<Complex64> = (0..12).map(|i| c(((i * 7) % 5) as f64 - 1.5)).collect();
        let a = schmidt_from_matrix(3, 4, &v).unwrap();
        let phase = Complex64::from_polar(3.7, 0.9);
        let w: Vec<Complex64> = v.iter().map(|x| x * phase).collect();
        let b = schmidt_from_matrix(3, 4, &w).unwrap();
        assert!((a.schmidt_number - b.schmidt_number).abs() < 1e-10);
        assert!((a.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_is_error() {
        let v = vec![c(0.0); 4];
        assert!(schmidt_from_matrix(2, 2, &v).is_err());
    }

    #[test]
    fn shape_mismatch_is_error() {
        assert!(matches!(
            schmidt_from_matrix(2, 3, &[c(1.0)]),
            Err(Error::GridMismatch(_))
        ));
    }
}
