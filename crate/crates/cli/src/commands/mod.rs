pub mod analyze;
pub mod model;
pub mod report;
pub mod ring;
pub mod schmidt;
pub mod simulate;

use biphoton::analysis::Panel;
use biphoton::io::config::RunConfig;

use crate::artifacts::Artifacts;
use crate::error::CliResult;

/// How a command ended once all its artifacts were written.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    /// Some outputs could not be computed; the report lists why.
    Partial(Vec<String>),
    /// Everything was computed but a validation check did not pass.
    Rejected(String),
}

pub fn panel_name(kind: &str, p: &Panel) -> String {
    format!("panel_{kind}_s{}_i{}", p.signal_region, p.idler_region)
}

/// CSV of the raw panel plus a heatmap normalized to a unit maximum.
pub fn write_panels(out: &mut Artifacts, kind: &str, panels: &[Panel]) -> CliResult<()> {
    for p in panels {
        let name = panel_name(kind, p);
        out.csv(&format!("{name}.csv"), &p.map)?;
        out.pgm(&format!("{name}.pgm"), &p.map.normalized_to_unit_max())?;
    }
    Ok(())
}

pub fn degenerate_wavelength(cfg: &RunConfig) -> f64 {
    cfg.params.degenerate_wavelength_nm()
}
