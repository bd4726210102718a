//! Affine camera calibration: columns follow the transverse wavevector, rows
//! follow wavelength through the grating.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Arm, GridSpec, K_PER_PIXEL, LAMBDA_PER_PIXEL};

pub const GRATING_LINES: f64 = 1200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pixel {
    pub row: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMap {
    pub k_per_px: f64,
    pub lambda_per_px: f64,
    pub grating_lines: f64,
    pub pump_wavelength_nm: f64,
    /// Sensor pixel of each arm's window origin (lowest k, lowest λ).
    pub signal_origin: Pixel,
    pub idler_origin: Pixel,
    pub grid: GridSpec,
}

impl CalibrationMap {
    /// Signal and idler regions side by side on the sensor.
    pub fn new(grid: GridSpec, pump_wavelength_nm: f64) -> Result<Self> {
        let cal = CalibrationMap {
            k_per_px: K_PER_PIXEL,
            lambda_per_px: LAMBDA_PER_PIXEL,
            grating_lines: GRATING_LINES,
            pump_wavelength_nm,
            signal_origin: Pixel { row: 0, col: 0 },
            idler_origin: Pixel { row: 0, col: grid.n_k as u32 },
            grid,
        };
        cal.validate()?;
        Ok(cal)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("calibration.k_per_px", self.k_per_px),
            ("calibration.lambda_per_px", self.lambda_per_px),
            ("calibration.grating_lines", self.grating_lines),
            ("calibration.pump_wavelength_nm", self.pump_wavelength_nm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("{v} must be finite and > 0")));
            }
        }
        self.grid.validate()
    }

    /// Spectral resolution of the grating, `2λ_p / N`.
    pub fn grating_resolution_nm(&self) -> f64 {
        2.0 * self.pump_wavelength_nm / self.grating_lines
    }

    pub fn origin(&self, arm: Arm) -> Pixel {
        match arm {
            Arm::Signal => self.signal_origin,
            Arm::Idler => self.idler_origin,
        }
    }

    fn extent(&self) -> (f64, f64) {
        (
            self.grid.n_k as f64 * self.grid.k_step / self.k_per_px,
            self.grid.n_lambda as f64 * self.grid.lambda_step / self.lambda_per_px,
        )
    }

    pub fn physical_to_pixel(&self, k: f64, lambda_nm: f64, arm: Arm) -> Result<Pixel> {
        let col = (k - self.grid.k_min(arm)) / self.k_per_px;
        let row = (lambda_nm - self.grid.lambda_min(arm)) / self.lambda_per_px;
        let (cols, rows) = self.extent();
        // Tolerate rounding at the upper edge of the window.
        let eps = 1e-9;
        if !(col >= -eps && col < cols && row >= -eps && row < rows) {
            return Err(Error::Domain(format!(
                "({k} rad/mm, {lambda_nm} nm) lies outside the {} window",
                arm.name()
            )));
        }
        let o = self.origin(arm);
        Ok(Pixel {
            row: o.row + (row.max(0.0) + eps).floor() as u32,
            col: o.col + (col.max(0.0) + eps).floor() as u32,
        })
    }

    /// Physical coordinates of a pixel centre.
    pub fn pixel_to_physical(&self, pixel: Pixel, arm: Arm) -> Result<(f64, f64)> {
        let o = self.origin(arm);
        let (cols, rows) = self.extent();
        let (dc, dr) = (pixel.col as i64 - o.col as i64, pixel.row as i64 - o.row as i64);
        if dc < 0 || dr < 0 || dc as f64 >= cols || dr as f64 >= rows {
            return Err(Error::Domain(format!(
                "pixel ({}, {}) lies outside the {} region",
                pixel.row,
                pixel.col,
                arm.name()
            )));
        }
        Ok((
            self.grid.k_min(arm) + (dc as f64 + 0.5) * self.k_per_px,
            self.grid.lambda_min(arm) + (dr as f64 + 0.5) * self.lambda_per_px,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cal() -> CalibrationMap {
        CalibrationMap::new(GridSpec::reference(1068.75, 800.0), 400.0).unwrap()
    }

    #[test]
    fn grating_resolution() {
        let c = cal();
        assert!((c.grating_resolution_nm() - 800.0 / 1200.0).abs() < 1e-9);
    }

    #[test]
    fn origin_maps_to_origin_pixel() {
        let c = cal();
        for arm in [Arm::Signal, Arm::Idler] {
            let px = c.physical_to_pixel(c.grid.k_min(arm), c.grid.lambda_min(arm), arm).unwrap();
            assert_eq!(px, c.origin(arm));
        }
    }

    #[test]
    fn unit_steps_move_one_pixel() {
        let c = cal();
        let (k, l) = (c.grid.k_center_of_bin(Arm::Signal, 10), c.grid.lambda_center_of_bin(Arm::Signal, 5));
        let p = c.physical_to_pixel(k, l, Arm::Signal).unwrap();
        let pk = c.physical_to_pixel(k + 5.95, l, Arm::Signal).unwrap();
        let pl = c.physical_to_pixel(k, l + 0.127, Arm::Signal).unwrap();
        assert_eq!((pk.row, pk.col), (p.row, p.col + 1));
        assert_eq!((pl.row, pl.col), (p.row + 1, p.col));
    }

    #[test]
    fn round_trip_within_half_pixel() {
        let c = cal();
        for (k, l) in [(900.0, 798.0), (1200.0, 802.4), (1068.75, 800.0)] {
            let px = c.physical_to_pixel(k, l, Arm::Signal).unwrap();
            let (k2, l2) = c.pixel_to_physical(px, Arm::Signal).unwrap();
            assert!((k - k2).abs() <= 0.5 * c.k_per_px + 1e-9);
            assert!((l - l2).abs() <= 0.5 * c.lambda_per_px + 1e-9);
        }
    }

    #[test]
    fn out_of_window_rejected() {
        let c = cal();
        assert!(c.physical_to_pixel(0.0, 800.0, Arm::Signal).is_err());
        assert!(c.physical_to_pixel(1068.75, 810.0, Arm::Idler).is_err());
        assert!(c.pixel_to_physical(Pixel { row: 0, col: 0 }, Arm::Idler).is_err());
    }
}
