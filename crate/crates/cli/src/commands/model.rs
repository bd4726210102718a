use std::time::Instant;

use biphoton::analysis::{theory_mode_sizes, theory_panels, PanelKind, SubRegions};
use biphoton::io::config::RunConfig;
use biphoton::io::report::{ModelReport, TrendPoint};
use biphoton::io::tensor::save_grid;
use biphoton::{amplitude_grid, schmidt_spectrum};

use super::{write_panels, Outcome};
use crate::artifacts::Artifacts;
use crate::error::CliResult;

const LEADING: usize = 32;

pub fn run(cfg: &RunConfig, out: &mut Artifacts, write_grid: bool) -> CliResult<Outcome> {
    let start = Instant::now();
    let mut report = ModelReport::new(cfg.params.clone(), cfg.grid);
    let amp = amplitude_grid(&cfg.params, &cfg.grid)?;
    if write_grid {
        save_grid(&amp, &out.path("amplitude.bpag")?)?;
    }
    let regions = SubRegions::equal(&cfg.grid, cfg.analysis.subregions)?;
    for kind in [PanelKind::Kk, PanelKind::LambdaLambda] {
        write_panels(out, kind.tag(), &theory_panels(&amp, &regions, kind)?)?;
    }
    let plus = amp.sum_coordinate_intensity();
    out.csv("sum_coordinates.csv", &plus)?;
    out.pgm("sum_coordinates.pgm", &plus.normalized_to_unit_max())?;

    match schmidt_spectrum(&amp) {
        Ok(s) => {
            println!("Schmidt number M = {:.4}", s.schmidt_number);
            report.schmidt_number = Some(s.schmidt_number);
            report.leading_coefficients = s.coefficients.iter().take(LEADING).copied().collect();
        }
        Err(e) => report.errors.push(format!("schmidt: {e}")),
    }
    match theory_mode_sizes(&amp) {
        Ok(m) => {
            println!(
                "theory mode sizes: sigma_k = {:.3} rad/mm, sigma_lambda = {:.3} nm",
                m.k.mode.value, m.lambda.mode.value
            );
            report.theory_mode_sizes = Some(m);
        }
        Err(e) => report.errors.push(format!("theory mode sizes: {e}")),
    }
    drop(amp);

    let mut factors = cfg.model.bandwidth_trend.clone();
    factors.sort_by(f64::total_cmp);
    for f in factors {
        let mut p = cfg.params.clone();
        p.pump_spectral_width *= f;
        match amplitude_grid(&p, &cfg.grid).and_then(|a| schmidt_spectrum(&a)) {
            Ok(s) => {
                println!("bandwidth x{f}: M = {:.4}", s.schmidt_number);
                report.bandwidth_trend.push(TrendPoint {
                    bandwidth_factor: f,
                    pump_spectral_width: p.pump_spectral_width,
                    schmidt_number: s.schmidt_number,
                });
            }
            Err(e) => report.errors.push(format!("bandwidth x{f}: {e}")),
        }
    }
    if report.bandwidth_trend.len() >= 2 {
        let decreasing = report
            .bandwidth_trend
            .windows(2)
            .all(|w| w[1].schmidt_number < w[0].schmidt_number);
        report.trend_towards_separable = Some(decreasing);
    }

    report.elapsed_seconds = start.elapsed().as_secs_f64();
    out.json("model_report.json", &report)?;
    Ok(if report.errors.is_empty() { Outcome::Success } else { Outcome::Partial(report.errors) })
}
