//! 8-bit binary PGM heatmaps with a text sidecar recording the scaling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::map::Map2;

/// Linear scaling used for a heatmap: gray `= round(255·(v − min)/(max − min))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

/// Gray levels, row-major, first map row on top. Undefined cells are black.
pub fn to_gray(map: &Map2) -> Result<(Vec<u8>, PgmScale)> {
    let (min, max) = match (map.min(), map.max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InsufficientData("map has no defined cells".into())),
    };
    let span = max - min;
    let gray = map
        .values
        .iter()
        .map(|v| match v {
            Some(v) if span > 0.0 => (255.0 * (v - min) / span).round() as u8,
            _ => 0,
        })
        .collect();
    Ok((gray, PgmScale { min, max }))
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

/// Write `path` and its `<path>.txt` sidecar.
pub fn write_pgm(map: &Map2, path: &Path) -> Result<PgmScale> {
    let (gray, scale) = to_gray(map)?;
    let mut out = BufWriter::new(File::create(path)?);
    write!(out, "P5\n{} {}\n255\n", map.cols, map.rows)?;
    out.write_all(&gray)?;
    out.flush()?;
    let undefined = map.values.iter().filter(|v| v.is_none()).count();
    let mut side = BufWriter::new(File::create(sidecar_path(path))?);
    writeln!(side, "scaling linear")?;
    writeln!(side, "min {:?}", scale.min)?;
    writeln!(side, "max {:?}", scale.max)?;
    writeln!(side, "rows {} {}", map.rows, map.row_label)?;
    writeln!(side, "cols {} {}", map.cols, map.col_label)?;
    writeln!(side, "undefined_cells {undefined}")?;
    side.flush()?;
    Ok(scale)
}
