//! Streaming, exactly mergeable photon-count sums.
//!
//! Memory is dominated by the dense coincidence matrix, `8·B²` bytes for `B`
//! bins per arm (63 MB for 70 × 40 bins).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sim::{CameraFrame, FrameSink};

/// Integer moments of the per-frame arm totals `n_s`, `n_i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmMoments {
    pub s1: u128,
    pub s2: u128,
    pub s3: u128,
    pub s4: u128,
    pub i1: u128,
    pub i2: u128,
    pub i3: u128,
    pub i4: u128,
    /// Σ n_s n_i
    pub si: u128,
    /// Σ n_s² n_i
    pub s2i: u128,
    /// Σ n_s n_i²
    pub si2: u128,
    /// Σ n_s² n_i²
    pub s2i2: u128,
}

impl ArmMoments {
    fn add_frame(&mut self, n_s: u128, n_i: u128) {
        self.s1 += n_s;
        self.s2 += n_s * n_s;
        self.s3 += n_s.pow(3);
        self.s4 += n_s.pow(4);
        self.i1 += n_i;
        self.i2 += n_i * n_i;
        self.i3 += n_i.pow(3);
        self.i4 += n_i.pow(4);
        self.si += n_s * n_i;
        self.s2i += n_s * n_s * n_i;
        self.si2 += n_s * n_i * n_i;
        self.s2i2 += n_s * n_s * n_i * n_i;
    }

    fn merge(&mut self, o: &ArmMoments) {
        self.s1 += o.s1;
        self.s2 += o.s2;
        self.s3 += o.s3;
        self.s4 += o.s4;
        self.i1 += o.i1;
        self.i2 += o.i2;
        self.i3 += o.i3;
        self.i4 += o.i4;
        self.si += o.si;
        self.s2i += o.s2i;
        self.si2 += o.si2;
        self.s2i2 += o.s2i2;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationAccumulator {
    pub grid: GridSpec,
    pub n_frames: u64,
    pub singles_s: Vec<u64>,
    pub singles_i: Vec<u64>,
    /// Row-major `[signal bin][idler bin]`.
    pub coincidences: Vec<u64>,
    pub moments: ArmMoments,
}

impl CorrelationAccumulator {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.bins_per_arm();
        CorrelationAccumulator {
            grid,
            n_frames: 0,
            singles_s: vec![0; n],
            singles_i: vec![0; n],
            coincidences: vec![0; n * n],
            moments: ArmMoments::default(),
        }
    }

    pub fn bins_per_arm(&self) -> usize {
        self.singles_s.len()
    }

    pub fn coincidence(&self, s_bin: usize, i_bin: usize) -> u64 {
        self.coincidences[s_bin * self.bins_per_arm() + i_bin]
    }

    /// Add one frame. The accumulator is left untouched on error.
    pub fn ingest_frame(&mut self, frame: &CameraFrame) -> Result<()> {
        let n = self.bins_per_arm();
        frame.validate(n)?;
        self.n_frames += 1;
        for &s in &frame.signal_events {
            self.singles_s[s as usize] += 1;
        }
        for &i in &frame.idler_events {
            self.singles_i[i as usize] += 1;
        }
        for &s in &frame.signal_events {
            let row = &mut self.coincidences[s as usize * n..(s as usize + 1) * n];
            for &i in &frame.idler_events {
                row[i as usize] += 1;
            }
        }
        self.moments
            .add_frame(frame.signal_events.len() as u128, frame.idler_events.len() as u128);
        Ok(())
    }

    pub fn merge(&mut self, other: &CorrelationAccumulator) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("accumulators built on different grids".into()));
        }
        self.n_frames += other.n_frames;
        add_into(&mut self.singles_s, &other.singles_s);
        add_into(&mut self.singles_i, &other.singles_i);
        add_into(&mut self.coincidences, &other.coincidences);
        self.moments.merge(&other.moments);
        Ok(())
    }

    pub fn merged(mut self, other: &CorrelationAccumulator) -> Result<Self> {
        self.merge(other)?;
        Ok(self)
    }

    fn require_frames(&self) -> Result<f64> {
        if self.n_frames < 2 {
            return Err(Error::InsufficientData(format!(
                "{} frames accumulated, need at least 2",
                self.n_frames
            )));
        }
        Ok(self.n_frames as f64)
    }

    /// `⟨n_s n_i⟩ − ⟨n_s⟩⟨n_i⟩` for one bin pair.
    pub fn covariance(&self, s_bin: usize, i_bin: usize) -> Result<f64> {
        let n = self.require_frames()?;
        let c = self.coincidence(s_bin, i_bin) as f64;
        let (s, i) = (self.singles_s[s_bin] as f64, self.singles_i[i_bin] as f64);
        Ok(c / n - (s / n) * (i / n))
    }

    /// `⟨n_s n_i⟩ / (⟨n_s⟩⟨n_i⟩)`; `None` when either singles count is zero.
    pub fn g2_full(&self, s_bin: usize, i_bin: usize) -> Option<f64> {
        let (s, i) = (self.singles_s[s_bin], self.singles_i[i_bin]);
        if s == 0 || i == 0 || self.n_frames == 0 {
            return None;
        }
        let n = self.n_frames as f64;
        Some(self.coincidence(s_bin, i_bin) as f64 * n / (s as f64 * i as f64))
    }
}

impl FrameSink for CorrelationAccumulator {
    fn consume(&mut self, frame: &CameraFrame) -> Result<()> {
        self.ingest_frame(frame)
    }
}

fn add_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ArmWindow;

    fn grid() -> GridSpec {
        GridSpec {
            n_k: 4,
            n_lambda: 2,
            k_step: 1.0,
            lambda_step: 1.0,
            signal: ArmWindow { k_center: 0.0, lambda_center: 800.0 },
            idler: ArmWindow { k_center: 0.0, lambda_center: 800.0 },
        }
    }

    fn frame(idx: u64, s: &[u32], i: &[u32]) -> CameraFrame {
        CameraFrame {
            frame_index: idx,
            signal_events: s.to_vec(),
            idler_events: i.to_vec(),
        }
    }

    #[test]
    fn empty_frame_counts_only() {
        let mut acc = CorrelationAccumulator::new(grid());
        acc.ingest_frame(&frame(0, &[], &[])).unwrap();
        let mut expected = CorrelationAccumulator::new(grid());
        expected.n_frames = 1;
        assert_eq!(acc, expected);
    }

    #[test]
    fn single_pair() {
        let mut acc = CorrelationAccumulator::new(grid());
        acc.ingest_frame(&frame(0, &[3], &[7])).unwrap();
        assert_eq!(acc.singles_s[3], 1);
        assert_eq!(acc.singles_i[7], 1);
        assert_eq!(acc.coincidence(3, 7), 1);
        assert_eq!(acc.coincidences.iter().sum::<u64>(), 1);
    }

    #[test]
    fn all_pairs_within_frame() {
        let mut acc = CorrelationAccumulator::new(grid());
        acc.ingest_frame(&frame(0, &[1, 2], &[5])).unwrap();
        assert_eq!(acc.coincidence(1, 5), 1);
        assert_eq!(acc.coincidence(2, 5), 1);
        assert_eq!(acc.coincidences.iter().sum::<u64>(), 2);
    }

    #[test]
    fn out_of_range_bin_names_frame() {
        let mut acc = CorrelationAccumulator::new(grid());
        let err = acc.ingest_frame(&frame(11, &[8], &[])).unwrap_err();
        assert!(matches!(err, Error::Frame { frame_index: 11, .. }));
        assert_eq!(acc.n_frames, 0);
    }

    #[test]
    fn perfectly_correlated_half_probability() {
        let mut acc = CorrelationAccumulator::new(grid());
        for k in 0..1000 {
            if k % 2 == 0 {
                acc.ingest_frame(&frame(k, &[0], &[0])).unwrap();
            } else {
                acc.ingest_frame(&frame(k, &[], &[])).unwrap();
            }
        }
        assert!((acc.covariance(0, 0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(acc.g2_full(0, 0), Some(2.0));
    }

    #[test]
    fn covariance_needs_two_frames() {
        let mut acc = CorrelationAccumulator::new(grid());
        acc.ingest_frame(&frame(0, &[0], &[0])).unwrap();
        assert!(acc.covariance(0, 0).is_err());
    }

    #[test]
    fn g2_undefined_without_singles() {
        let mut acc = CorrelationAccumulator::new(grid());
        acc.ingest_frame(&frame(0, &[0], &[])).unwrap();
        assert_eq!(acc.g2_full(0, 0), None);
    }

    #[test]
    fn merge_identity_and_mismatch() {
        let mut a = CorrelationAccumulator::new(grid());
        a.ingest_frame(&frame(0, &[1], &[2, 3])).unwrap();
        let e = CorrelationAccumulator::new(grid());
        assert_eq!(a.clone().merged(&e).unwrap(), a);
        let mut g = grid();
        g.n_k = 5;
        assert!(a.merge(&CorrelationAccumulator::new(g)).is_err());
    }
}
