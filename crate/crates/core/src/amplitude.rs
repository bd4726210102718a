//! Biphoton amplitude `Ψ = A_p(k_s + k_i, ω_s + ω_i)·sinc(L·Δk_z/2)` and its
//! sampled 4-D tensor.

use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dispersion::angular_frequency;
use crate::error::{Error, Result};
use crate::grid::{Arm, GridSpec};
use crate::map::{pairwise_sum, Map2};
use crate::params::CrystalPumpParams;
use crate::phase::phase_mismatch;

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Normalized pump envelope, unity at `(0, 0, ω_p)`.
pub fn pump_envelope(kx: f64, ky: f64, omega: f64, params: &CrystalPumpParams) -> Complex64 {
    let w0 = params.pump_waist_um * 1e-3;
    let spatial = -w0 * w0 * (kx * kx + ky * ky) / 4.0;
    let detuning = omega - params.pump_omega();
    let spectral = -detuning * detuning / (2.0 * params.pump_spectral_width.powi(2));
    Complex64::new((spatial + spectral).exp(), 0.0)
}

/// Amplitude for a pair in the `k_y = 0` plane; wavelengths in nm.
pub fn biphoton_amplitude(
    k_s: f64,
    lambda_s: f64,
    k_i: f64,
    lambda_i: f64,
    params: &CrystalPumpParams,
) -> Result<Complex64> {
    let omega_s = angular_frequency(lambda_s);
    let omega_i = angular_frequency(lambda_i);
    let dk = phase_mismatch(k_s, omega_s, k_i, omega_i, params)?;
    let envelope = pump_envelope(k_s + k_i, 0.0, omega_s + omega_i, params);
    Ok(envelope * sinc(params.crystal_length_mm * dk / 2.0))
}

/// Ψ sampled at bin centres, indexed `(k_s, λ_s, k_i, λ_i)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeGrid {
    pub params: CrystalPumpParams,
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    pub norm_applied: bool,
}

impl AmplitudeGrid {
    pub fn index(&self, k_s: usize, lambda_s: usize, k_i: usize, lambda_i: usize) -> usize {
        let g = &self.grid;
        g.arm_bin(k_s, lambda_s) * g.bins_per_arm() + g.arm_bin(k_i, lambda_i)
    }

    pub fn get(&self, k_s: usize, lambda_s: usize, k_i: usize, lambda_i: usize) -> Complex64 {
        self.values[self.index(k_s, lambda_s, k_i, lambda_i)]
    }

    /// |Ψ|² per 4-D bin, in storage order.
    pub fn intensities(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn total_intensity(&self) -> f64 {
        pairwise_sum(&self.intensities())
    }

    /// Scale to unit L2 norm.
    pub fn normalize(&mut self) -> Result<()> {
        let total = self.total_intensity();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::InsufficientData(format!(
                "cannot normalize amplitude grid with total intensity {total}"
            )));
        }
        let scale = 1.0 / total.sqrt();
        self.values.iter_mut().for_each(|v| *v *= scale);
        self.norm_applied = true;
        Ok(())
    }

    /// Marginal |Ψ|² of one arm, indexed by that arm's bin.
    pub fn marginal(&self, arm: Arm) -> Vec<f64> {
        let n = self.grid.bins_per_arm();
        let mut out = vec![0.0; n];
        for (idx, v) in self.values.iter().enumerate() {
            let bin = match arm {
                Arm::Signal => idx / n,
                Arm::Idler => idx % n,
            };
            out[bin] += v.norm_sqr();
        }
        out
    }

    fn check_range(&self, name: &str, r: &Range<usize>, len: usize) -> Result<()> {
        if r.is_empty() {
            return Err(Error::EmptyRegion(format!("{name} range {r:?} is empty")));
        }
        if r.end > len {
            return Err(Error::EmptyRegion(format!("{name} range {r:?} exceeds axis of {len} bins")));
        }
        Ok(())
    }

    /// Σ over `λ_s ∈ lambda_s`, `λ_i ∈ lambda_i` of |Ψ|², as a map over
    /// `(k_s, k_i)`.
    pub fn summed_intensity_kk(
        &self,
        lambda_s: Range<usize>,
        lambda_i: Range<usize>,
    ) -> Result<Map2> {
        let g = self.grid;
        self.check_range("lambda_s", &lambda_s, g.n_lambda)?;
        self.check_range("lambda_i", &lambda_i, g.n_lambda)?;
        let mut out = vec![0.0; g.n_k * g.n_k];
        for a in 0..g.n_k {
            for b in 0..g.n_k {
                let mut acc = 0.0;
                for c in lambda_s.clone() {
                    for d in lambda_i.clone() {
                        acc += self.get(a, c, b, d).norm_sqr();
                    }
                }
                out[a * g.n_k + b] = acc;
            }
        }
        Ok(Map2::from_dense(
            "k_s [rad/mm]",
            g.k_axis(Arm::Signal),
            "k_i [rad/mm]",
            g.k_axis(Arm::Idler),
            out,
        ))
    }

    /// Σ over `k_s ∈ k_s`, `k_i ∈ k_i` of |Ψ|², as a map over `(λ_s, λ_i)`.
    pub fn summed_intensity_ll(&self, k_s: Range<usize>, k_i: Range<usize>) -> Result<Map2> {
        let g = self.grid;
        self.check_range("k_s", &k_s, g.n_k)?;
        self.check_range("k_i", &k_i, g.n_k)?;
        let mut out = vec![0.0; g.n_lambda * g.n_lambda];
        for a in k_s {
            for b in k_i.clone() {
                for c in 0..g.n_lambda {
                    for d in 0..g.n_lambda {
                        out[c * g.n_lambda + d] += self.get(a, c, b, d).norm_sqr();
                    }
                }
            }
        }
        Ok(Map2::from_dense(
            "lambda_s [nm]",
            g.lambda_axis(Arm::Signal),
            "lambda_i [nm]",
            g.lambda_axis(Arm::Idler),
            out,
        ))
    }

    /// |Ψ|² projected onto sum coordinates: index `(k_s + k_i bin, λ_s + λ_i
    /// bin)`, shape `(2n_k − 1) × (2n_λ − 1)`.
    pub fn sum_coordinate_intensity(&self) -> Map2 {
        let g = self.grid;
        let (nkp, nlp) = (g.n_k_plus(), g.n_lambda_plus());
        let mut out = vec![0.0; nkp * nlp];
        for a in 0..g.n_k {
            for c in 0..g.n_lambda {
                for b in 0..g.n_k {
                    let row = (a + b) * nlp;
                    for d in 0..g.n_lambda {
                        out[row + c + d] += self.get(a, c, b, d).norm_sqr();
                    }
                }
            }
        }
        Map2::from_dense(
            "k_plus [rad/mm]",
            (0..nkp).map(|i| g.k_plus(i)).collect(),
            "lambda_plus [nm]",
            (0..nlp).map(|i| g.lambda_plus(i)).collect(),
            out,
        )
    }
}

/// Fill the grid with Ψ at bin centres and normalize to unit L2 norm.
pub fn amplitude_grid(params: &CrystalPumpParams, grid: &GridSpec) -> Result<AmplitudeGrid> {
    params.validate()?;
    grid.validate()?;
    let g = *grid;
    let per_arm = g.bins_per_arm();
    let k_s = g.k_axis(Arm::Signal);
    let l_s = g.lambda_axis(Arm::Signal);
    let k_i = g.k_axis(Arm::Idler);
    let l_i = g.lambda_axis(Arm::Idler);
    let mut values = vec![Complex64::new(0.0, 0.0); g.total_bins()];
    let results: Vec<Result<()>> = values
        .par_chunks_mut(per_arm)
        .enumerate()
        .map(|(s_bin, row)| {
            let (a, c) = g.split_arm_bin(s_bin);
            for (i_bin, slot) in row.iter_mut().enumerate() {
                let (b, d) = g.split_arm_bin(i_bin);
                *slot = biphoton_amplitude(k_s[a], l_s[c], k_i[b], l_i[d], params).map_err(|e| {
                    Error::Bin {
                        k_s: a,
                        lambda_s: c,
                        k_i: b,
                        lambda_i: d,
                        source: Box::new(e),
                    }
                })?;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect::<Result<Vec<()>>>()?;
    let mut out = AmplitudeGrid {
        params: params.clone(),
        grid: g,
        values,
        norm_applied: false,
    };
    out.normalize()?;
    Ok(out)
}
