use biphoton::io::config::RunConfig;
use biphoton::phase::ring_radius;
use biphoton::ring::{radial_profile, ring_map, symmetric_axis};
use biphoton::Map2;
use serde::Serialize;

use super::Outcome;
use crate::artifacts::Artifacts;
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct RingReport {
    lambda_nm: f64,
    points: usize,
    k_max: f64,
    /// Degenerate phase-matching root, if any.
    ring_radius: Option<f64>,
    /// Radius of the maximum of the azimuthal average.
    profile_peak_radius: Option<f64>,
}

pub fn run(cfg: &RunConfig, points: usize, k_max: Option<f64>, lambda: Option<f64>, out: &mut Artifacts) -> CliResult<Outcome> {
    if points < 2 {
        return Err(CliError::Usage("--points must be at least 2".into()));
    }
    let root = ring_radius(&cfg.params)?;
    let k_max = k_max.unwrap_or(1.4 * root.unwrap_or(cfg.grid.signal.k_center.abs()));
    let lambda_nm = lambda.unwrap_or(cfg.params.degenerate_wavelength_nm());
    let axis = symmetric_axis(points, k_max);
    let map = ring_map(&cfg.params, &axis, &axis, lambda_nm)?;
    let dr = axis[1] - axis[0];
    let profile = radial_profile(&map, dr);
    let peak = profile.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0);
    out.csv("ring.csv", &map)?;
    out.pgm("ring.pgm", &map.normalized_to_unit_max())?;
    let prof = Map2::from_dense(
        "radius [rad/mm]",
        profile.iter().map(|p| p.0).collect(),
        "intensity",
        vec![0.0],
        profile.iter().map(|p| p.1).collect(),
    );
    out.csv("ring_profile.csv", &prof)?;
    if let (Some(r), Some(p)) = (root, peak) {
        println!("ring radius {r:.2} rad/mm, profile peak at {p:.2} rad/mm");
    }
    out.json(
        "ring_report.json",
        &RingReport { lambda_nm, points, k_max, ring_radius: root, profile_peak_radius: peak },
    )?;
    Ok(Outcome::Success)
}
