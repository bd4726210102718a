use serde::{Deserialize, Serialize};

use crate::dispersion::{
    angular_frequency, index_extraordinary_effective, Sellmeier, BBO_EXTRAORDINARY, BBO_ORDINARY,
    SPEED_OF_LIGHT,
};
use crate::error::{Error, Result};

/// Band in which the Sellmeier sets must produce physical indices.
pub const WORKING_BAND_NM: (f64, f64) = (350.0, 900.0);

/// Physical description of the down-conversion source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrystalPumpParams {
    pub crystal_length_mm: f64,
    /// Angle between the optic axis and the pump axis `z`, in radians. The
    /// axis is tilted within the x–z plane.
    pub axis_angle_rad: f64,
    pub pump_center_wavelength_nm: f64,
    /// Field 1/e radius (intensity 1/e² radius) of the pump at focus.
    pub pump_waist_um: f64,
    /// Standard deviation of the Gaussian pump spectral amplitude [rad/fs].
    pub pump_spectral_width: f64,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
}

impl CrystalPumpParams {
    /// 2 mm BBO at 31.95°, 400 nm pump focused to 70 µm, pumped by the second
    /// harmonic of 70 fs pulses generated in a 0.5 mm BBO.
    pub fn reference() -> Self {
        let sigma = shg_pump_bandwidth(70.0, 800.0, 0.5, &BBO_ORDINARY, &BBO_EXTRAORDINARY)
            .expect("reference SHG parameters are in band");
        CrystalPumpParams {
            crystal_length_mm: 2.0,
            axis_angle_rad: 31.95_f64.to_radians(),
            pump_center_wavelength_nm: 400.0,
            pump_waist_um: 70.0,
            pump_spectral_width: sigma,
            sellmeier_o: BBO_ORDINARY,
            sellmeier_e: BBO_EXTRAORDINARY,
        }
    }

    pub fn pump_omega(&self) -> f64 {
        angular_frequency(self.pump_center_wavelength_nm)
    }

    /// Wavelength of each photon of a frequency-degenerate pair.
    pub fn degenerate_wavelength_nm(&self) -> f64 {
        2.0 * self.pump_center_wavelength_nm
    }

    pub fn validate(&self) -> Result<()> {
        positive("crystal_length_mm", self.crystal_length_mm)?;
        if !(self.axis_angle_rad > 0.0 && self.axis_angle_rad < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param(
                "axis_angle",
                format!("{} rad not in (0, pi/2)", self.axis_angle_rad),
            ));
        }
        positive("pump_center_wavelength_nm", self.pump_center_wavelength_nm)?;
        positive("pump_waist_um", self.pump_waist_um)?;
        positive("pump_spectral_width", self.pump_spectral_width)?;
        self.sellmeier_o.validate("sellmeier_o", WORKING_BAND_NM)?;
        self.sellmeier_e.validate("sellmeier_e", WORKING_BAND_NM)?;
        Ok(())
    }
}

impl Default for CrystalPumpParams {
    fn default() -> Self {
        Self::reference()
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("{v} must be finite and > 0")))
    }
}

/// Type-I collinear phase-matching angle for doubling `fundamental_nm`.
pub fn shg_phase_matching_angle(
    fundamental_nm: f64,
    ordinary: &Sellmeier,
    extraordinary: &Sellmeier,
) -> Result<f64> {
    let n_f = ordinary.index(fundamental_nm)?;
    let n_o = ordinary.index(fundamental_nm / 2.0)?;
    let n_e = extraordinary.index(fundamental_nm / 2.0)?;
    let s2 = (n_f.powi(-2) - n_o.powi(-2)) / (n_e.powi(-2) - n_o.powi(-2));
    if !(0.0..=1.0).contains(&s2) {
        return Err(Error::Domain(format!(
            "no type-I phase matching for {fundamental_nm} nm"
        )));
    }
    Ok(s2.sqrt().asin())
}

/// Spectral amplitude width [rad/fs] of the second harmonic of a
/// transform-limited Gaussian pulse.
///
/// The doubled field `E²(t)` is √2 broader in frequency than the fundamental;
/// the doubling crystal additionally filters the spectrum through its
/// group-velocity mismatch `sinc(GVM·L·δω/2)`, approximated here by the
/// Gaussian with the same curvature at the origin. The two widths add
/// harmonically.
pub fn shg_pump_bandwidth(
    fundamental_fwhm_fs: f64,
    fundamental_nm: f64,
    shg_length_mm: f64,
    ordinary: &Sellmeier,
    extraordinary: &Sellmeier,
) -> Result<f64> {
    positive("fundamental_fwhm_fs", fundamental_fwhm_fs)?;
    let tau = fundamental_fwhm_fs / (2.0 * 2f64.ln().sqrt());
    let sigma_doubled = 2f64.sqrt() / tau;
    if shg_length_mm <= 0.0 {
        return Ok(sigma_doubled);
    }
    let theta = shg_phase_matching_angle(fundamental_nm, ordinary, extraordinary)?;
    let sh = fundamental_nm / 2.0;
    let h = 1e-3;
    let n_e = |l: f64| index_extraordinary_effective(l, theta, ordinary, extraordinary);
    let ng_e = n_e(sh)? - sh * (n_e(sh + h)? - n_e(sh - h)?) / (2.0 * h);
    let ng_o = ordinary.group_index(fundamental_nm)?;
    let gvm_fs_per_mm = (ng_e - ng_o) / SPEED_OF_LIGHT * 1e6;
    let delay = gvm_fs_per_mm.abs() * shg_length_mm;
    let sigma_filter = 12f64.sqrt() / delay;
    Ok((sigma_doubled.powi(-2) + sigma_filter.powi(-2)).powf(-0.5))
}
