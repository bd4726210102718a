//! Refractive indices of a negative uniaxial crystal.
//!
//! Indices follow the four-term Sellmeier form
//! `n²(λ) = A + B / (λ² − C) − D·λ²` with `λ` in micrometres.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in nm/fs.
pub const SPEED_OF_LIGHT: f64 = 299.792_458;

/// Angular frequency [rad/fs] of light with vacuum wavelength `lambda_nm`.
pub fn angular_frequency(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda_nm
}

/// Vacuum wavelength [nm] of light with angular frequency `omega` [rad/fs].
pub fn wavelength(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / omega
}

/// Vacuum wavenumber [rad/mm] for angular frequency `omega` [rad/fs].
pub fn vacuum_wavenumber(omega: f64) -> f64 {
    omega / SPEED_OF_LIGHT * 1e6
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sellmeier {
    pub a: f64,
    /// µm²
    pub b: f64,
    /// µm²
    pub c: f64,
    /// µm⁻²
    pub d: f64,
    /// Validity band [nm], inclusive.
    pub band_nm: (f64, f64),
}

/// β-BaB₂O₄ ordinary index (Eimerl et al. 1987, J. Appl. Phys. 62, 1968; the
/// set tabulated in most nonlinear-optics handbooks, valid 220–1060 nm).
pub const BBO_ORDINARY: Sellmeier = Sellmeier {
    a: 2.7359,
    b: 0.01878,
    c: 0.01822,
    d: 0.01354,
    band_nm: (220.0, 1060.0),
};

/// β-BaB₂O₄ extraordinary index, same source as [`BBO_ORDINARY`].
pub const BBO_EXTRAORDINARY: Sellmeier = Sellmeier {
    a: 2.3753,
    b: 0.01224,
    c: 0.01667,
    d: 0.01516,
    band_nm: (220.0, 1060.0),
};

impl Sellmeier {
    pub fn index(&self, lambda_nm: f64) -> Result<f64> {
        let (lo, hi) = self.band_nm;
        if !(lambda_nm >= lo && lambda_nm <= hi) {
            return Err(Error::Domain(format!(
                "wavelength {lambda_nm} nm outside Sellmeier band [{lo}, {hi}] nm"
            )));
        }
        Ok(self.index_unchecked(lambda_nm))
    }

    fn index_unchecked(&self, lambda_nm: f64) -> f64 {
        let l2 = (lambda_nm * 1e-3).powi(2);
        (self.a + self.b / (l2 - self.c) - self.d * l2).sqrt()
    }

    /// Group index `n − λ dn/dλ`.
    pub fn group_index(&self, lambda_nm: f64) -> Result<f64> {
        let n = self.index(lambda_nm)?;
        let l = lambda_nm * 1e-3;
        let l2 = l * l;
        // d(n²)/dλ in µm⁻¹
        let dn2 = -2.0 * self.b * l / (l2 - self.c).powi(2) - 2.0 * self.d * l;
        Ok(n - l * dn2 / (2.0 * n))
    }

    /// Checks that the index exceeds one across `band` (sampled every nanometre).
    pub fn validate(&self, name: &str, band: (f64, f64)) -> Result<()> {
        let (lo, hi) = self.band_nm;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::param(name, "validity band must satisfy 0 < lo < hi"));
        }
        let from = band.0.max(lo);
        let to = band.1.min(hi);
        let mut lambda = from;
        while lambda <= to {
            let n = self.index_unchecked(lambda);
            if !(n > 1.0) {
                return Err(Error::param(
                    name,
                    format!("index {n} at {lambda} nm is not > 1"),
                ));
            }
            lambda += 1.0;
        }
        Ok(())
    }
}

pub fn index_ordinary(lambda_nm: f64, ordinary: &Sellmeier) -> Result<f64> {
    ordinary.index(lambda_nm)
}

/// Index seen by an extraordinary wave travelling at angle `theta` [rad] to the
/// optic axis: `1/n² = cos²θ/n_o² + sin²θ/n_e²`.
pub fn index_extraordinary_effective(
    lambda_nm: f64,
    theta: f64,
    ordinary: &Sellmeier,
    extraordinary: &Sellmeier,
) -> Result<f64> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::Domain(format!(
            "angle to optic axis {theta} rad outside [0, pi/2]"
        )));
    }
    let n_o = ordinary.index(lambda_nm)?;
    let n_e = extraordinary.index(lambda_nm)?;
    if theta == 0.0 {
        return Ok(n_o);
    }
    if theta == std::f64::consts::FRAC_PI_2 {
        return Ok(n_e);
    }
    let (s, c) = theta.sin_cos();
    Ok(1.0 / ((c * c) / (n_o * n_o) + (s * s) / (n_e * n_e)).sqrt())
}
