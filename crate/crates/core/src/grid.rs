use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel calibration of the camera: transverse wavevector per pixel [rad/mm].
pub const K_PER_PIXEL: f64 = 5.95;
/// Pixel calibration of the camera: wavelength per pixel [nm].
pub const LAMBDA_PER_PIXEL: f64 = 0.127;
pub const REFERENCE_N_K: usize = 70;
pub const REFERENCE_N_LAMBDA: usize = 40;

/// Centre of one arm's observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmWindow {
    pub k_center: f64,
    pub lambda_center: f64,
}

/// Sampling of the signal and idler windows. Both arms share bin counts and
/// bin widths; bins are addressed `k_bin * n_lambda + lambda_bin` within an arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_k: usize,
    pub n_lambda: usize,
    pub k_step: f64,
    pub lambda_step: f64,
    pub signal: ArmWindow,
    pub idler: ArmWindow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Signal,
    Idler,
}

impl GridSpec {
    /// 70 × 40 bins per arm at the camera calibration (416.5 rad/mm × 5.08 nm),
    /// mirror-symmetric windows at `±k_center` around `lambda_center`.
    pub fn reference(k_center: f64, lambda_center: f64) -> Self {
        GridSpec {
            n_k: REFERENCE_N_K,
            n_lambda: REFERENCE_N_LAMBDA,
            k_step: K_PER_PIXEL,
            lambda_step: LAMBDA_PER_PIXEL,
            signal: ArmWindow { k_center, lambda_center },
            idler: ArmWindow { k_center: -k_center, lambda_center },
        }
    }

    /// Same windows sampled `factor` times more finely.
    pub fn refined(&self, factor: usize) -> Self {
        GridSpec {
            n_k: self.n_k * factor,
            n_lambda: self.n_lambda * factor,
            k_step: self.k_step / factor as f64,
            lambda_step: self.lambda_step / factor as f64,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_k == 0 || self.n_lambda == 0 {
            return Err(Error::param("grid", "bin counts must be >= 1"));
        }
        for (name, v) in [("grid.k_step", self.k_step), ("grid.lambda_step", self.lambda_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be finite and > 0")));
            }
        }
        for (arm, w) in [(Arm::Signal, &self.signal), (Arm::Idler, &self.idler)] {
            if !w.k_center.is_finite() || !(w.lambda_center.is_finite()) {
                return Err(Error::param(arm.name(), "window centre must be finite"));
            }
            if self.lambda_min(arm) <= 0.0 {
                return Err(Error::param(arm.name(), "wavelength window reaches <= 0 nm"));
            }
        }
        Ok(())
    }

    pub fn bins_per_arm(&self) -> usize {
        self.n_k * self.n_lambda
    }

    pub fn total_bins(&self) -> usize {
        self.bins_per_arm() * self.bins_per_arm()
    }

    pub fn window(&self, arm: Arm) -> &ArmWindow {
        match arm {
            Arm::Signal => &self.signal,
            Arm::Idler => &self.idler,
        }
    }

    pub fn k_center_of_bin(&self, arm: Arm, k_bin: usize) -> f64 {
        let w = self.window(arm);
        w.k_center + (k_bin as f64 - (self.n_k as f64 - 1.0) / 2.0) * self.k_step
    }

    pub fn lambda_center_of_bin(&self, arm: Arm, lambda_bin: usize) -> f64 {
        let w = self.window(arm);
        w.lambda_center + (lambda_bin as f64 - (self.n_lambda as f64 - 1.0) / 2.0) * self.lambda_step
    }

    pub fn k_axis(&self, arm: Arm) -> Vec<f64> {
        (0..self.n_k).map(|j| self.k_center_of_bin(arm, j)).collect()
    }

    pub fn lambda_axis(&self, arm: Arm) -> Vec<f64> {
        (0..self.n_lambda).map(|j| self.lambda_center_of_bin(arm, j)).collect()
    }

    /// Lower edge of the first wavelength bin.
    pub fn lambda_min(&self, arm: Arm) -> f64 {
        self.window(arm).lambda_center - self.n_lambda as f64 * self.lambda_step / 2.0
    }

    pub fn lambda_max(&self, arm: Arm) -> f64 {
        self.window(arm).lambda_center + self.n_lambda as f64 * self.lambda_step / 2.0
    }

    pub fn k_min(&self, arm: Arm) -> f64 {
        self.window(arm).k_center - self.n_k as f64 * self.k_step / 2.0
    }

    pub fn k_max(&self, arm: Arm) -> f64 {
        self.window(arm).k_center + self.n_k as f64 * self.k_step / 2.0
    }

    pub fn arm_bin(&self, k_bin: usize, lambda_bin: usize) -> usize {
        k_bin * self.n_lambda + lambda_bin
    }

    pub fn split_arm_bin(&self, bin: usize) -> (usize, usize) {
        (bin / self.n_lambda, bin % self.n_lambda)
    }

    /// Number of sum-coordinate bins along k₊ (index `k_s_bin + k_i_bin`).
    pub fn n_k_plus(&self) -> usize {
        2 * self.n_k - 1
    }

    pub fn n_lambda_plus(&self) -> usize {
        2 * self.n_lambda - 1
    }

    /// Physical k₊ = k_s + k_i of sum-coordinate index `idx`.
    pub fn k_plus(&self, idx: usize) -> f64 {
        self.k_center_of_bin(Arm::Signal, 0) + self.k_center_of_bin(Arm::Idler, 0) + idx as f64 * self.k_step
    }

    /// Physical λ₊ = λ_s + λ_i of sum-coordinate index `idx`.
    pub fn lambda_plus(&self, idx: usize) -> f64 {
        self.lambda_center_of_bin(Arm::Signal, 0)
            + self.lambda_center_of_bin(Arm::Idler, 0)
            + idx as f64 * self.lambda_step
    }

    /// Sum-coordinate index whose k₊ is nearest to `k_plus`.
    pub fn nearest_k_plus(&self, k_plus: f64) -> usize {
        nearest(self.n_k_plus(), |i| self.k_plus(i), k_plus)
    }

    pub fn nearest_lambda_plus(&self, lambda_plus: f64) -> usize {
        nearest(self.n_lambda_plus(), |i| self.lambda_plus(i), lambda_plus)
    }
}

fn nearest(n: usize, coord: impl Fn(usize) -> f64, target: f64) -> usize {
    (0..n)
        .min_by(|&a, &b| {
            (coord(a) - target)
                .abs()
                .total_cmp(&(coord(b) - target).abs())
        })
        .unwrap_or(0)
}

impl Arm {
    pub fn name(&self) -> &'static str {
        match self {
            Arm::Signal => "signal",
            Arm::Idler => "idler",
        }
    }
}
