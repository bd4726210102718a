//! JSON report documents. Every report carries an `errors` array so a partial
//! run still produces a well-formed document.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{Estimate, ModeSizes};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::params::CrystalPumpParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Peak {
    pub value: f64,
    pub error: f64,
    /// `(g² − 2)/error`
    pub sigmas_above_2: f64,
    pub k_plus: f64,
    pub lambda_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub kind: String,
    pub signal_region: usize,
    pub idler_region: usize,
    pub file: String,
    pub sum: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub frames: u64,
    pub mean_photons_signal: Option<f64>,
    pub mean_photons_idler: Option<f64>,
    pub mean_photons_total: Option<f64>,
    pub mode_sizes: Option<ModeSizes>,
    pub efficiency: Option<Estimate>,
    pub g2_peak: Option<G2Peak>,
    pub autocorrelation_signal: Option<Estimate>,
    pub autocorrelation_idler: Option<Estimate>,
    /// Both arm autocorrelations within `2 + 5σ`.
    pub classical_bound_respected: Option<bool>,
    pub panels: Vec<PanelSummary>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub bandwidth_factor: f64,
    pub pump_spectral_width: f64,
    pub schmidt_number: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub params: CrystalPumpParams,
    pub grid: GridSpec,
    pub schmidt_number: Option<f64>,
    /// Largest Schmidt probabilities, at most 32.
    pub leading_coefficients: Vec<f64>,
    pub theory_mode_sizes: Option<ModeSizes>,
    pub bandwidth_trend: Vec<TrendPoint>,
    /// Whether M falls monotonically as the pump bandwidth grows.
    pub trend_towards_separable: Option<bool>,
    pub elapsed_seconds: f64,
    pub errors: Vec<String>,
}

impl ModelReport {
    pub fn new(params: CrystalPumpParams, grid: GridSpec) -> Self {
        ModelReport {
            params,
            grid,
            schmidt_number: None,
            leading_coefficients: Vec::new(),
            theory_mode_sizes: None,
            bandwidth_trend: Vec::new(),
            trend_towards_separable: None,
            elapsed_seconds: 0.0,
            errors: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelComparison {
    pub name: String,
    pub correlation: Option<f64>,
    /// Whether this panel counts towards `all_pass`.
    pub gating: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub threshold: f64,
    pub panels: Vec<PanelComparison>,
    pub all_pass: bool,
    pub errors: Vec<String>,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_report_is_valid_json() {
        let mut r = AnalysisReport { frames: 3, ..Default::default() };
        r.efficiency = Some(Estimate { value: f64::NAN, error: 0.1 });
        r.errors.push("fit failed".into());
        let text = serde_json::to_string(&r).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["errors"][0], "fit failed");
        assert!(v["efficiency"]["value"].is_null());
    }
}
