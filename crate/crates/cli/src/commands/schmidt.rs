use std::path::Path;

use biphoton::io::config::RunConfig;
use biphoton::io::tensor::load_grid;
use biphoton::{amplitude_grid, schmidt_spectrum};

use super::Outcome;
use crate::artifacts::Artifacts;
use crate::error::CliResult;

pub fn run(cfg: &RunConfig, grid: Option<&Path>, out: &mut Artifacts) -> CliResult<Outcome> {
    let amp = match grid {
        Some(p) => load_grid(p)?,
        None => amplitude_grid(&cfg.params, &cfg.grid)?,
    };
    let s = schmidt_spectrum(&amp)?;
    println!("Schmidt number M = {:.4} ({} coefficients)", s.schmidt_number, s.coefficients.len());
    out.json("schmidt.json", &s)?;
    Ok(Outcome::Success)
}
