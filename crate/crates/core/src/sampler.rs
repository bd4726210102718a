//! Inverse-CDF samplers over discrete bins.

use rand::Rng;

use crate::amplitude::AmplitudeGrid;
use crate::error::{Error, Result};
use crate::grid::Arm;

/// Draws one value from a fixed discrete distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSampler {
    cdf: Vec<f64>,
    last_nonzero: usize,
}

impl DiscreteSampler {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_nonzero = None;
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("weight {w} at bin {i} is negative or non-finite")));
            }
            if w > 0.0 {
                last_nonzero = Some(i);
            }
            acc += w;
            cdf.push(acc);
        }
        let last_nonzero = last_nonzero
            .ok_or_else(|| Error::InsufficientData("sampler needs a positive weight".into()))?;
        Ok(DiscreteSampler { cdf, last_nonzero })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Index for a uniform variate `u ∈ [0, 1)`. Zero-weight bins are never
    /// returned.
    pub fn index_for(&self, u: f64) -> usize {
        let total = self.cdf[self.cdf.len() - 1];
        let x = u * total;
        self.cdf.partition_point(|&c| c <= x).min(self.last_nonzero)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(rng.random::<f64>())
    }
}

/// Source of (signal bin, idler bin) pairs.
pub trait PairSource: Sync {
    fn bins_per_arm(&self) -> usize;
    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32);
}

/// Joint sampler over the 4-D grid with weights |Ψ|².
#[derive(Debug, Clone, PartialEq)]
pub struct PairSampler {
    inner: DiscreteSampler,
    bins_per_arm: usize,
}

impl PairSampler {
    pub fn from_weights(bins_per_arm: usize, weights: &[f64]) -> Result<Self> {
        if weights.len() != bins_per_arm * bins_per_arm {
            return Err(Error::GridMismatch(format!(
                "{} weights for {bins_per_arm} bins per arm",
                weights.len()
            )));
        }
        if bins_per_arm > u32::MAX as usize {
            return Err(Error::GridMismatch("too many bins per arm".into()));
        }
        Ok(PairSampler {
            inner: DiscreteSampler::new(weights)?,
            bins_per_arm,
        })
    }
}

/// Sampler with weights |Ψ|² from an amplitude grid.
pub fn build_pair_sampler(grid: &AmplitudeGrid) -> Result<PairSampler> {
    PairSampler::from_weights(grid.grid.bins_per_arm(), &grid.intensities())
}

impl PairSource for PairSampler {
    fn bins_per_arm(&self) -> usize {
        self.bins_per_arm
    }

    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        let idx = self.inner.sample(rng);
        ((idx / self.bins_per_arm) as u32, (idx % self.bins_per_arm) as u32)
    }
}

/// Signal and idler drawn independently from their marginals: same singles,
/// no pair correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentSampler {
    signal: DiscreteSampler,
    idler: DiscreteSampler,
}

impl IndependentSampler {
    pub fn new(signal: &[f64], idler: &[f64]) -> Result<Self> {
        if signal.len() != idler.len() {
            return Err(Error::GridMismatch("arms differ in bin count".into()));
        }
        Ok(IndependentSampler {
            signal: DiscreteSampler::new(signal)?,
            idler: DiscreteSampler::new(idler)?,
        })
    }

    pub fn from_grid(grid: &AmplitudeGrid) -> Result<Self> {
        Self::new(&grid.marginal(Arm::Signal), &grid.marginal(Arm::Idler))
    }
}

impl PairSource for IndependentSampler {
    fn bins_per_arm(&self) -> usize {
        self.signal.len()
    }

    fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (u32, u32) {
        (self.signal.sample(rng) as u32, self.idler.sample(rng) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_four_bins() {
        let s = DiscreteSampler::new(&[1.0; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            counts[s.sample(&mut rng)] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - 0.25 * n as f64).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn single_nonzero_bin_always_chosen() {
        let s = DiscreteSampler::new(&[0.0, 0.0, 2.5, 0.0]).unwrap();
        for u in [0.0, 0.3, 0.999_999_999, 1.0 - f64::EPSILON] {
            assert_eq!(s.index_for(u), 2);
        }
    }

    #[test]
    fn zero_weight_bins_skipped() {
        let s = DiscreteSampler::new(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.index_for(0.4999), 0);
        assert_eq!(s.index_for(0.5), 2);
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(DiscreteSampler::new(&[1.0, -0.1]).is_err());
        assert!(DiscreteSampler::new(&[f64::NAN]).is_err());
        assert!(DiscreteSampler::new(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn pair_index_split() {
        // only bin (signal 1, idler 2) of a 3-bin arm
        let mut w = vec![0.0; 9];
        w[5] = 1.0;
        let s = PairSampler::from_weights(3, &w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(s.sample_pair(&mut rng), (1, 2));
    }
}
