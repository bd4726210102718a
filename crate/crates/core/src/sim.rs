//! Geiger-mode camera frames from a pair source.
//!
//! Each frame integrates `R` pump pulses. A pulse yields at most one pair,
//! with probability `χ`; each photon of a pair is then detected independently
//! with probability `η`. Dark counts are Poisson per arm and uniform over bins.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sampler::PairSource;

pub const REFERENCE_TEMPORAL_MODES: u32 = 96;
pub const REFERENCE_EFFICIENCY: f64 = 0.04;
pub const REFERENCE_MEAN_PHOTONS: f64 = 0.12;

/// Frames generated per parallel batch before ordered delivery to the sink.
const BATCH: u64 = 8192;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub temporal_modes: u32,
    pub pair_prob: f64,
    pub efficiency: f64,
    /// Mean dark events per arm per frame.
    pub dark_count_rate: f64,
    pub seed: u64,
    pub n_frames: u64,
    pub grid: GridSpec,
    /// Drive each arm from its own pulse train: same singles statistics, no
    /// signal–idler correlation at all.
    #[serde(default)]
    pub independent_arms: bool,
}

impl SimulationConfig {
    /// 96 pulses per frame, η = 4 %, χ set for 0.12 detected photons per frame.
    pub fn reference(grid: GridSpec) -> Self {
        SimulationConfig {
            temporal_modes: REFERENCE_TEMPORAL_MODES,
            pair_prob: calibrated_pair_prob(REFERENCE_MEAN_PHOTONS, REFERENCE_TEMPORAL_MODES, REFERENCE_EFFICIENCY),
            efficiency: REFERENCE_EFFICIENCY,
            dark_count_rate: 0.0,
            seed: 0,
            n_frames: 1_000_000,
            grid,
            independent_arms: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.temporal_modes == 0 {
            return Err(Error::param("simulation.temporal_modes", "must be >= 1"));
        }
        for (name, v) in [
            ("simulation.pair_prob", self.pair_prob),
            ("simulation.efficiency", self.efficiency),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::param(name, format!("{v} not in [0, 1]")));
            }
        }
        if !(self.dark_count_rate >= 0.0 && self.dark_count_rate.is_finite()) {
            return Err(Error::param(
                "simulation.dark_count_rate",
                format!("{} must be finite and >= 0", self.dark_count_rate),
            ));
        }
        self.grid.validate()
    }

    /// Expected detected photons per arm per frame before Geiger saturation.
    pub fn expected_singles_per_arm(&self) -> f64 {
        self.temporal_modes as f64 * self.pair_prob * self.efficiency + self.dark_count_rate
    }
}

/// χ giving `mean_photons` detected photons per frame summed over both arms.
pub fn calibrated_pair_prob(mean_photons: f64, temporal_modes: u32, efficiency: f64) -> f64 {
    mean_photons / (2.0 * temporal_modes as f64 * efficiency)
}

/// One exposure: occupied bins of each arm, sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CameraFrame {
    pub frame_index: u64,
    pub signal_events: Vec<u32>,
    pub idler_events: Vec<u32>,
}

impl CameraFrame {
    pub fn n_events(&self) -> usize {
        self.signal_events.len() + self.idler_events.len()
    }

    pub fn validate(&self, bins_per_arm: usize) -> Result<()> {
        for (arm, ev) in [("signal", &self.signal_events), ("idler", &self.idler_events)] {
            if ev.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Frame {
                    frame_index: self.frame_index,
                    reason: format!("{arm} events not strictly ascending"),
                });
            }
            if let Some(&b) = ev.last().filter(|&&b| b as usize >= bins_per_arm) {
                return Err(Error::Frame {
                    frame_index: self.frame_index,
                    reason: format!("{arm} bin {b} out of range (< {bins_per_arm})"),
                });
            }
        }
        Ok(())
    }
}

pub type FrameRng = ChaCha8Rng;

/// RNG for one frame: a function of `(seed, frame_index)` only.
pub fn frame_rng(seed: u64, frame_index: u64) -> FrameRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    rng
}

/// Seed of the second pulse train used for the idler arm in
/// independent-arms mode.
fn idler_train_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn generate_frame<S: PairSource>(cfg: &SimulationConfig, source: &S, frame_index: u64) -> CameraFrame {
    if cfg.independent_arms {
        let signal = pulse_train(cfg, source, cfg.seed, frame_index).signal_events;
        let idler = pulse_train(cfg, source, idler_train_seed(cfg.seed), frame_index).idler_events;
        return CameraFrame {
            frame_index,
            signal_events: signal,
            idler_events: idler,
        };
    }
    pulse_train(cfg, source, cfg.seed, frame_index)
}

fn pulse_train<S: PairSource>(cfg: &SimulationConfig, source: &S, seed: u64, frame_index: u64) -> CameraFrame {
    let mut rng = frame_rng(seed, frame_index);
    let mut signal = Vec::new();
    let mut idler = Vec::new();
    for _ in 0..cfg.temporal_modes {
        if rng.random::<f64>() < cfg.pair_prob {
            let (s, i) = source.sample_pair(&mut rng);
            if rng.random::<f64>() < cfg.efficiency {
                signal.push(s);
            }
            if rng.random::<f64>() < cfg.efficiency {
                idler.push(i);
            }
        }
    }
    if cfg.dark_count_rate > 0.0 {
        let poisson = Poisson::new(cfg.dark_count_rate).expect("validated dark rate");
        let n = source.bins_per_arm() as u32;
        for arm in [&mut signal, &mut idler] {
            let k = poisson.sample(&mut rng) as u64;
            for _ in 0..k {
                arm.push(rng.random_range(0..n));
            }
        }
    }
    for arm in [&mut signal, &mut idler] {
        arm.sort_unstable();
        arm.dedup();
    }
    CameraFrame {
        frame_index,
        signal_events: signal,
        idler_events: idler,
    }
}

/// Receives frames in ascending `frame_index` order.
pub trait FrameSink {
    fn consume(&mut self, frame: &CameraFrame) -> Result<()>;
}

impl<F: FnMut(&CameraFrame) -> Result<()>> FrameSink for F {
    fn consume(&mut self, frame: &CameraFrame) -> Result<()> {
        self(frame)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationTotals {
    pub frames: u64,
    pub events_signal: u64,
    pub events_idler: u64,
}

/// Generate `cfg.n_frames` frames in parallel batches and deliver them to the
/// sink in order. Output does not depend on the worker count.
pub fn run_simulation<S: PairSource, K: FrameSink + ?Sized>(
    cfg: &SimulationConfig,
    source: &S,
    sink: &mut K,
) -> Result<SimulationTotals> {
    cfg.validate()?;
    if source.bins_per_arm() != cfg.grid.bins_per_arm() {
        return Err(Error::GridMismatch(format!(
            "pair source has {} bins per arm, grid has {}",
            source.bins_per_arm(),
            cfg.grid.bins_per_arm()
        )));
    }
    let mut totals = SimulationTotals::default();
    let mut start = 0;
    while start < cfg.n_frames {
        let end = (start + BATCH).min(cfg.n_frames);
        let frames: Vec<CameraFrame> = (start..end)
            .into_par_iter()
            .map(|idx| generate_frame(cfg, source, idx))
            .collect();
        for frame in &frames {
            sink.consume(frame).map_err(|e| Error::Sink {
                frame_index: frame.frame_index,
                source: Box::new(e),
            })?;
            totals.frames += 1;
            totals.events_signal += frame.signal_events.len() as u64;
            totals.events_idler += frame.idler_events.len() as u64;
        }
        start = end;
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ArmWindow;
    use crate::sampler::PairSampler;

    fn tiny_grid() -> GridSpec {
        GridSpec {
            n_k: 2,
            n_lambda: 1,
            k_step: 1.0,
            lambda_step: 1.0,
            signal: ArmWindow { k_center: 0.0, lambda_center: 800.0 },
            idler: ArmWindow { k_center: 0.0, lambda_center: 800.0 },
        }
    }

    fn diagonal_source() -> PairSampler {
        PairSampler::from_weights(2, &[1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_efficiency_gives_empty_frames() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.efficiency = 0.0;
        for i in 0..100 {
            assert_eq!(generate_frame(&cfg, &diagonal_source(), i).n_events(), 0);
        }
    }

    #[test]
    fn reference_calibration() {
        let chi = calibrated_pair_prob(0.12, 96, 0.04);
        assert!((chi - 0.015625).abs() < 1e-15);
    }

    #[test]
    fn geiger_clamp_collapses_duplicates() {
        // every pulse emits a pair into bin 0 and both photons are detected
        let source = PairSampler::from_weights(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let cfg = SimulationConfig {
            pair_prob: 1.0,
            efficiency: 1.0,
            ..SimulationConfig::reference(tiny_grid())
        };
        let f = generate_frame(&cfg, &source, 7);
        assert_eq!(f.signal_events, vec![0]);
        assert_eq!(f.idler_events, vec![0]);
        f.validate(2).unwrap();
    }

    #[test]
    fn frame_is_pure_function_of_seed_and_index() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.pair_prob = 0.3;
        cfg.dark_count_rate = 0.5;
        let s = diagonal_source();
        assert_eq!(generate_frame(&cfg, &s, 42), generate_frame(&cfg, &s, 42));
        let frames: Vec<_> = (0..50).map(|i| generate_frame(&cfg, &s, i)).collect();
        assert!(frames.windows(2).any(|w| w[0].signal_events != w[1].signal_events));
    }

    #[test]
    fn zero_frames_zero_totals() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.n_frames = 0;
        let mut count = 0;
        let totals = run_simulation(&cfg, &diagonal_source(), &mut |_: &CameraFrame| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(totals, SimulationTotals::default());
        assert_eq!(count, 0);
    }

    #[test]
    fn sink_error_names_frame() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.n_frames = 10;
        let err = run_simulation(&cfg, &diagonal_source(), &mut |f: &CameraFrame| {
            if f.frame_index == 3 {
                Err(Error::InsufficientData("disk full".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Sink { frame_index: 3, .. }));
    }

    #[test]
    fn frames_delivered_in_order() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.n_frames = 20_000;
        let mut next = 0;
        run_simulation(&cfg, &diagonal_source(), &mut |f: &CameraFrame| {
            assert_eq!(f.frame_index, next);
            next += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(next, 20_000);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.grid.n_k = 3;
        let r = run_simulation(&cfg, &diagonal_source(), &mut |_: &CameraFrame| Ok(()));
        assert!(matches!(r, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = SimulationConfig::reference(tiny_grid());
        cfg.efficiency = 1.5;
        assert!(cfg.validate().is_err());
        cfg.efficiency = 0.1;
        cfg.temporal_modes = 0;
        assert!(cfg.validate().is_err());
        cfg.temporal_modes = 1;
        cfg.dark_count_rate = -1.0;
        assert!(cfg.validate().is_err());
    }
}
