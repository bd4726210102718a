//! Panel-by-panel agreement between theory and measured covariance maps.
//!
//! Only k–k panels on matched spectral sub-regions decide the verdict; λ–λ
//! panels are summed over wide k windows, carry little structure and are
//! reported for information.

use std::collections::BTreeSet;
use std::path::Path;

use biphoton::analysis::{PanelKind, SubRegions};
use biphoton::io::config::RunConfig;
use biphoton::io::csv::load_map_csv;
use biphoton::io::report::{ComparisonReport, PanelComparison};

use super::Outcome;
use crate::artifacts::Artifacts;
use crate::error::{CliError, CliResult};

/// `(kind, signal region, idler region)` parsed from `panel_<kind>_s<j>_i<k>.csv`.
fn parse_panel(name: &str) -> Option<(String, usize, usize)> {
    let rest = name.strip_prefix("panel_")?.strip_suffix(".csv")?;
    let mut parts = rest.split('_');
    let kind = parts.next()?.to_string();
    let j = parts.next()?.strip_prefix('s')?.parse().ok()?;
    let k = parts.next()?.strip_prefix('i')?.parse().ok()?;
    parts.next().is_none().then_some((kind, j, k))
}

fn panel_files(dir: &Path) -> CliResult<BTreeSet<String>> {
    let mut names = BTreeSet::new();
    for entry in std::fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if parse_panel(&name).is_some() {
            names.insert(name);
        }
    }
    Ok(names)
}

pub fn run(cfg: &RunConfig, theory: &Path, experiment: &Path, out: &mut Artifacts) -> CliResult<Outcome> {
    let threshold = cfg.analysis.agreement_threshold;
    let t = panel_files(theory)?;
    let e = panel_files(experiment)?;
    let common: Vec<&String> = t.intersection(&e).collect();
    if common.is_empty() {
        return Err(CliError::Usage(format!(
            "no panel_*.csv files shared by {} and {}",
            theory.display(),
            experiment.display()
        )));
    }
    let parts = common
        .iter()
        .filter_map(|n| parse_panel(n))
        .map(|(_, j, k)| j.max(k) + 1)
        .max()
        .unwrap_or(1);
    let matched = SubRegions::matched_pairs(parts);

    let mut report = ComparisonReport { threshold, ..Default::default() };
    let mut all_pass = true;
    for name in common {
        let (kind, j, k) = parse_panel(name).expect("filtered above");
        let gating = kind == PanelKind::Kk.tag() && matched.contains(&(j, k));
        let a = load_map_csv(&theory.join(name))?;
        let b = load_map_csv(&experiment.join(name))?;
        let corr = match a.correlation(&b) {
            Ok(c) => Some(c),
            Err(err @ biphoton::Error::GridMismatch(_)) => return Err(err.into()),
            Err(err) => {
                report.errors.push(format!("{name}: {err}"));
                None
            }
        };
        let pass = corr.is_some_and(|c| c >= threshold);
        if matched.contains(&(j, k)) {
            all_pass &= pass || !gating;
            println!(
                "{name}: r = {}",
                corr.map_or("undefined".to_string(), |c| format!("{c:.4}"))
            );
        }
        report.panels.push(PanelComparison {
            name: name.trim_end_matches(".csv").to_string(),
            correlation: corr,
            gating,
            pass,
        });
    }
    report.all_pass = all_pass && report.errors.is_empty();
    out.json("comparison_report.json", &report)?;
    if !report.errors.is_empty() {
        return Ok(Outcome::Partial(report.errors));
    }
    Ok(if report.all_pass {
        Outcome::Success
    } else {
        Outcome::Rejected(format!("a matched panel correlates below {threshold}"))
    })
}
