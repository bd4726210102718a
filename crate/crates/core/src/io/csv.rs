//! 2-D maps as CSV. The first row carries the column coordinates, the first
//! column the row coordinates. Undefined cells are empty. Numbers use the
//! shortest representation that parses back to the same double.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::map::Map2;

pub fn write_map_csv<W: Write>(map: &Map2, mut out: W) -> Result<()> {
    write!(out, "{} \\ {}", map.row_label.replace(',', ";"), map.col_label.replace(',', ";"))?;
    for c in &map.col_coords {
        write!(out, ",{c:?}")?;
    }
    writeln!(out)?;
    for (r, y) in map.row_coords.iter().enumerate() {
        write!(out, "{y:?}")?;
        for c in 0..map.cols {
            match map.get(r, c) {
                Some(v) => write!(out, ",{v:?}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_map_csv<R: BufRead>(input: R) -> Result<Map2> {
    let mut lines = input.lines();
    let bad = |line: usize, reason: String| Error::Format { offset: line as u64, reason: format!("csv line {line}: {reason}") };
    let header = lines.next().ok_or_else(|| bad(1, "empty file".into()))??;
    let mut fields = header.split(',');
    let labels = fields.next().unwrap_or_default();
    let (row_label, col_label) = labels.split_once(" \\ ").unwrap_or((labels, ""));
    let parse = |s: &str, line: usize| s.trim().parse::<f64>().map_err(|e| bad(line, format!("{s:?}: {e}")));
    let col_coords: Vec<f64> = fields.map(|f| parse(f, 1)).collect::<Result<_>>()?;
    let mut row_coords = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        if line.is_empty() {
            continue;
        }
        let mut f = line.split(',');
        row_coords.push(parse(f.next().unwrap_or_default(), n)?);
        let row: Vec<Option<f64>> = f
            .map(|v| if v.trim().is_empty() { Ok(None) } else { parse(v, n).map(Some) })
            .collect::<Result<_>>()?;
        if row.len() != col_coords.len() {
            return Err(bad(n, format!("{} cells, expected {}", row.len(), col_coords.len())));
        }
        values.extend(row);
    }
    Ok(Map2::new(row_label, row_coords, col_label, col_coords, values))
}

pub fn save_map_csv(map: &Map2, path: &Path) -> Result<()> {
    write_map_csv(map, BufWriter::new(File::create(path)?))
}

pub fn load_map_csv(path: &Path) -> Result<Map2> {
    read_map_csv(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_undefined_cells() {
        let m = Map2::new(
            "k_s [rad/mm]",
            vec![-1.5, 0.1 + 0.2],
            "k_i [rad/mm]",
            vec![1e-7, 2.0, 3.25e300],
            vec![Some(1.0 / 3.0), None, Some(-0.0), Some(5e-324), Some(42.0), None],
        );
        let mut buf = Vec::new();
        write_map_csv(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(!text.contains("NaN"));
        let back = read_map_csv(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn ragged_row_rejected() {
        let text = "r \\ c,1.0,2.0\n0.0,1.0\n";
        assert!(read_map_csv(text.as_bytes()).is_err());
    }
}
