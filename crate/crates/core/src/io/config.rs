//! JSON run configuration.
//!
//! Every key is optional; an empty object selects the reference setup. Unknown
//! keys are rejected. Angles are given in degrees, waists in µm, wavelengths in
//! nm, wavevectors in rad/mm and spectral widths in rad/fs. The full schema is
//! in `docs/config.schema.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dispersion::{Sellmeier, BBO_EXTRAORDINARY, BBO_ORDINARY};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, K_PER_PIXEL, LAMBDA_PER_PIXEL, REFERENCE_N_K, REFERENCE_N_LAMBDA};
use crate::params::{shg_pump_bandwidth, CrystalPumpParams};
use crate::phase::ring_radius;
use crate::sim::{calibrated_pair_prob, SimulationConfig, REFERENCE_EFFICIENCY, REFERENCE_MEAN_PHOTONS, REFERENCE_TEMPORAL_MODES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalSection {
    pub length_mm: f64,
    pub axis_angle_deg: f64,
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
}

impl Default for CrystalSection {
    fn default() -> Self {
        CrystalSection {
            length_mm: 2.0,
            axis_angle_deg: 31.95,
            sellmeier_o: BBO_ORDINARY,
            sellmeier_e: BBO_EXTRAORDINARY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpSection {
    pub center_wavelength_nm: f64,
    pub waist_um: f64,
    /// Overrides the width derived from the doubling stage below.
    pub spectral_width: Option<f64>,
    pub pulse_fwhm_fs: f64,
    pub shg_length_mm: f64,
}

impl Default for PumpSection {
    fn default() -> Self {
        PumpSection {
            center_wavelength_nm: 400.0,
            waist_um: 70.0,
            spectral_width: None,
            pulse_fwhm_fs: 70.0,
            shg_length_mm: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub n_k: usize,
    pub n_lambda: usize,
    pub k_step: f64,
    pub lambda_step: f64,
    /// Signal window centre; the idler window is mirrored. Defaults to the
    /// degenerate ring radius.
    pub k_center: Option<f64>,
    /// Defaults to twice the pump wavelength.
    pub lambda_center: Option<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            n_k: REFERENCE_N_K,
            n_lambda: REFERENCE_N_LAMBDA,
            k_step: K_PER_PIXEL,
            lambda_step: LAMBDA_PER_PIXEL,
            k_center: None,
            lambda_center: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub temporal_modes: u32,
    /// Overrides the value calibrated from `mean_photons_per_frame`.
    pub pair_prob: Option<f64>,
    pub mean_photons_per_frame: f64,
    pub efficiency: f64,
    pub dark_count_rate: f64,
    pub seed: u64,
    pub n_frames: u64,
    /// Draw signal and idler from their marginals independently.
    pub independent_arms: bool,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            temporal_modes: REFERENCE_TEMPORAL_MODES,
            pair_prob: None,
            mean_photons_per_frame: REFERENCE_MEAN_PHOTONS,
            efficiency: REFERENCE_EFFICIENCY,
            dark_count_rate: 0.0,
            seed: 0,
            n_frames: 1_000_000,
            independent_arms: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSettings {
    /// Equal sub-regions per arm along each axis.
    pub subregions: usize,
    /// Half width, in sum-coordinate bins, of the band summed for a cross-section.
    pub band_half_width: usize,
    pub agreement_threshold: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            subregions: 4,
            band_half_width: 2,
            agreement_threshold: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSettings {
    /// Pump bandwidth multipliers at which to repeat the Schmidt
    /// decomposition. Empty disables the scan.
    pub bandwidth_trend: Vec<f64>,
}

impl Default for ModelSettings {
    fn default() -> Self {
        ModelSettings { bandwidth_trend: Vec::new() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigDocument {
    pub crystal: CrystalSection,
    pub pump: PumpSection,
    pub grid: GridSection,
    pub simulation: SimulationSection,
    pub analysis: AnalysisSettings,
    pub model: ModelSettings,
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: CrystalPumpParams,
    pub grid: GridSpec,
    pub simulation: SimulationConfig,
    pub analysis: AnalysisSettings,
    pub model: ModelSettings,
}

fn cfg_err(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Set `dotted.key=value` in a JSON document. The value is parsed as JSON and
/// falls back to a plain string.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| cfg_err(assignment, "override must have the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(cfg_err(key, "empty key segment"));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = doc;
    let mut parts = key.split('.').peekable();
    while let Some(part) = parts.next() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| cfg_err(key, format!("`{part}` is below a non-object value")))?;
        if parts.peek().is_none() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

pub fn parse_document(doc: Value) -> Result<ConfigDocument> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        cfg_err(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())
    })
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(path, format!("{v} must be finite and > 0")))
    }
}

impl ConfigDocument {
    pub fn resolve(&self) -> Result<RunConfig> {
        let c = &self.crystal;
        positive("crystal.length_mm", c.length_mm)?;
        if !(c.axis_angle_deg > 0.0 && c.axis_angle_deg < 90.0) {
            return Err(cfg_err("crystal.axis_angle_deg", format!("{} not in (0, 90)", c.axis_angle_deg)));
        }
        let p = &self.pump;
        positive("pump.center_wavelength_nm", p.center_wavelength_nm)?;
        positive("pump.waist_um", p.waist_um)?;
        let sigma = match p.spectral_width {
            Some(s) => {
                positive("pump.spectral_width", s)?;
                s
            }
            None => {
                positive("pump.pulse_fwhm_fs", p.pulse_fwhm_fs)?;
                if !(p.shg_length_mm >= 0.0 && p.shg_length_mm.is_finite()) {
                    return Err(cfg_err("pump.shg_length_mm", "must be finite and >= 0"));
                }
                shg_pump_bandwidth(
                    p.pulse_fwhm_fs,
                    2.0 * p.center_wavelength_nm,
                    p.shg_length_mm,
                    &c.sellmeier_o,
                    &c.sellmeier_e,
                )
                .map_err(|e| cfg_err("pump", e.to_string()))?
            }
        };
        let params = CrystalPumpParams {
            crystal_length_mm: c.length_mm,
            axis_angle_rad: c.axis_angle_deg.to_radians(),
            pump_center_wavelength_nm: p.center_wavelength_nm,
            pump_waist_um: p.waist_um,
            pump_spectral_width: sigma,
            sellmeier_o: c.sellmeier_o,
            sellmeier_e: c.sellmeier_e,
        };
        params.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => cfg_err(&field, reason),
            other => cfg_err("crystal", other.to_string()),
        })?;

        let g = &self.grid;
        let k_center = match g.k_center {
            Some(k) => k,
            None => ring_radius(&params)
                .map_err(|e| cfg_err("grid.k_center", e.to_string()))?
                .ok_or_else(|| cfg_err("grid.k_center", "no degenerate ring for this crystal; set it explicitly"))?,
        };
        let lambda_center = g.lambda_center.unwrap_or(params.degenerate_wavelength_nm());
        let mut grid = GridSpec::reference(k_center, lambda_center);
        grid.n_k = g.n_k;
        grid.n_lambda = g.n_lambda;
        grid.k_step = g.k_step;
        grid.lambda_step = g.lambda_step;
        grid.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => cfg_err(&format!("grid.{field}"), reason),
            other => cfg_err("grid", other.to_string()),
        })?;

        let s = &self.simulation;
        let pair_prob = match s.pair_prob {
            Some(x) => x,
            None => {
                if s.temporal_modes == 0 || s.efficiency <= 0.0 {
                    return Err(cfg_err(
                        "simulation.pair_prob",
                        "cannot calibrate with zero temporal modes or efficiency; set it explicitly",
                    ));
                }
                positive("simulation.mean_photons_per_frame", s.mean_photons_per_frame)?;
                calibrated_pair_prob(s.mean_photons_per_frame, s.temporal_modes, s.efficiency)
            }
        };
        let simulation = SimulationConfig {
            temporal_modes: s.temporal_modes,
            pair_prob,
            efficiency: s.efficiency,
            dark_count_rate: s.dark_count_rate,
            seed: s.seed,
            n_frames: s.n_frames,
            grid,
            independent_arms: s.independent_arms,
        };
        simulation.validate().map_err(|e| match e {
            Error::InvalidParameter { field, reason } => cfg_err(&field, reason),
            other => cfg_err("simulation", other.to_string()),
        })?;

        let a = self.analysis;
        if a.subregions == 0 || a.subregions > g.n_k.min(g.n_lambda) {
            return Err(cfg_err(
                "analysis.subregions",
                format!("{} must be in 1..={}", a.subregions, g.n_k.min(g.n_lambda)),
            ));
        }
        if !(a.agreement_threshold >= -1.0 && a.agreement_threshold <= 1.0) {
            return Err(cfg_err("analysis.agreement_threshold", "must be in [-1, 1]"));
        }
        for (j, f) in self.model.bandwidth_trend.iter().enumerate() {
            positive(&format!("model.bandwidth_trend[{j}]"), *f)?;
        }
        Ok(RunConfig {
            params,
            grid,
            simulation,
            analysis: a,
            model: self.model.clone(),
        })
    }
}

/// Parse, apply overrides and validate.
pub fn config_from_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| cfg_err("<root>", e.to_string()))?;
    if !doc.is_object() {
        return Err(cfg_err("<root>", "top level must be a JSON object"));
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    parse_document(doc)?.resolve()
}

pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| cfg_err(&path.display().to_string(), format!("cannot read config: {e}")))?;
    config_from_str(&text, overrides)
}

/// Configuration used when no file is given.
pub fn default_config(overrides: &[String]) -> Result<RunConfig> {
    config_from_str("{}", overrides)
}
