use std::path::Path;

use biphoton::analysis::{
    arm_autocorrelation, covariance_panels, efficiency_estimate, g2_sum_coordinates, mode_sizes, PanelKind,
    SubRegions,
};
use biphoton::grid::Arm;
use biphoton::io::config::RunConfig;
use biphoton::io::frames::FrameReader;
use biphoton::io::report::{AnalysisReport, G2Peak, PanelSummary};
use biphoton::CorrelationAccumulator;

use super::{degenerate_wavelength, panel_name, write_panels, Outcome};
use crate::artifacts::Artifacts;
use crate::error::CliResult;

/// Classical bound on the arm autocorrelation and on g².
const CLASSICAL_BOUND: f64 = 2.0;
const BOUND_SIGMAS: f64 = 5.0;

pub fn accumulate(cfg: &RunConfig, frames: &Path) -> CliResult<CorrelationAccumulator> {
    let reader = FrameReader::open(frames)?;
    reader.header.check_grid(&cfg.grid)?;
    let mut acc = CorrelationAccumulator::new(cfg.grid);
    for frame in reader {
        acc.ingest_frame(&frame?)?;
    }
    Ok(acc)
}

pub fn run(cfg: &RunConfig, frames: &Path, out: &mut Artifacts) -> CliResult<Outcome> {
    let acc = accumulate(cfg, frames)?;
    let n = acc.n_frames as f64;
    let mut report = AnalysisReport { frames: acc.n_frames, ..Default::default() };
    if acc.n_frames > 0 {
        let (s, i) = (acc.moments.s1 as f64 / n, acc.moments.i1 as f64 / n);
        report.mean_photons_signal = Some(s);
        report.mean_photons_idler = Some(i);
        report.mean_photons_total = Some(s + i);
    }
    println!("{} frames", acc.n_frames);

    let regions = SubRegions::equal(&cfg.grid, cfg.analysis.subregions)?;
    for kind in [PanelKind::Kk, PanelKind::LambdaLambda] {
        match covariance_panels(&acc, &regions, kind) {
            Ok(panels) => {
                write_panels(out, kind.tag(), &panels)?;
                report.panels.extend(panels.iter().map(|p| PanelSummary {
                    kind: kind.tag().to_string(),
                    signal_region: p.signal_region,
                    idler_region: p.idler_region,
                    file: format!("{}.csv", panel_name(kind.tag(), p)),
                    sum: p.map.sum(),
                }));
            }
            Err(e) => report.errors.push(format!("{} panels: {e}", kind.tag())),
        }
    }

    match efficiency_estimate(&acc) {
        Ok(e) => {
            println!("efficiency {:.5} +- {:.5}", e.value, e.error);
            report.efficiency = Some(e);
        }
        Err(e) => report.errors.push(format!("efficiency: {e}")),
    }
    let auto_s = arm_autocorrelation(&acc, Arm::Signal);
    let auto_i = arm_autocorrelation(&acc, Arm::Idler);
    match (&auto_s, &auto_i) {
        (Ok(a), Ok(b)) => {
            report.classical_bound_respected = Some(
                [a, b]
                    .iter()
                    .all(|e| e.value <= CLASSICAL_BOUND + BOUND_SIGMAS * e.error),
            );
        }
        _ => {
            for (arm, r) in [("signal", &auto_s), ("idler", &auto_i)] {
                if let Err(e) = r {
                    report.errors.push(format!("{arm} autocorrelation: {e}"));
                }
            }
        }
    }
    report.autocorrelation_signal = auto_s.ok();
    report.autocorrelation_idler = auto_i.ok();

    match g2_sum_coordinates(&acc) {
        Ok(g2) => {
            out.csv("g2_sum.csv", &g2.map)?;
            out.pgm("g2_sum.pgm", &g2.map)?;
            let (kc, lc) = g2.centre_cell(degenerate_wavelength(cfg));
            match g2.estimate(kc, lc) {
                Some(e) => {
                    println!("g2 peak {:.4} +- {:.4}", e.value, e.error);
                    report.g2_peak = Some(G2Peak {
                        value: e.value,
                        error: e.error,
                        sigmas_above_2: e.sigmas_above(CLASSICAL_BOUND),
                        k_plus: g2.map.row_coords[kc],
                        lambda_plus: g2.map.col_coords[lc],
                    });
                }
                None => report.errors.push("g2 peak: no accidentals at the centre cell".into()),
            }
            match mode_sizes(&g2, degenerate_wavelength(cfg), cfg.analysis.band_half_width) {
                Ok(m) => {
                    println!(
                        "mode sizes: sigma_k = {:.3} +- {:.3} rad/mm, sigma_lambda = {:.3} +- {:.3} nm",
                        m.k.mode.value, m.k.mode.error, m.lambda.mode.value, m.lambda.mode.error
                    );
                    report.mode_sizes = Some(m);
                }
                Err(e) => report.errors.push(format!("mode sizes: {e}")),
            }
        }
        Err(e) => report.errors.push(format!("g2: {e}")),
    }

    out.json("analysis_report.json", &report)?;
    Ok(if report.errors.is_empty() { Outcome::Success } else { Outcome::Partial(report.errors) })
}
