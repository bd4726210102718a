//! `BPAG` amplitude tensors.
//!
//! ```text
//! "BPAG" u16 version=1, u16 flags (bit 0: normalized)
//! 4 × axis (k_s, λ_s, k_i, λ_i): u32 n, f64 first bin centre, f64 step
//! u32 length, parameter JSON (UTF-8)
//! n_k²·n_λ² × (f64 re, f64 im), row-major over (k_s, λ_s, k_i, λ_i)
//! u32 CRC-32 of every byte after the version field
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::amplitude::AmplitudeGrid;
use crate::error::{Error, Result};
use crate::grid::{Arm, ArmWindow, GridSpec};
use crate::io::{check_magic, OffsetReader};
use crate::params::CrystalPumpParams;

pub const MAGIC: &[u8; 4] = b"BPAG";
pub const VERSION: u16 = 1;
const FLAG_NORMALIZED: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Axis {
    n: u32,
    first: f64,
    step: f64,
}

pub fn write_grid<W: Write>(grid: &AmplitudeGrid, mut out: W) -> Result<()> {
    let g = &grid.grid;
    let mut body = Vec::new();
    let flags = if grid.norm_applied { FLAG_NORMALIZED } else { 0 };
    body.extend_from_slice(&flags.to_le_bytes());
    let axes = [
        (g.n_k, g.k_center_of_bin(Arm::Signal, 0), g.k_step),
        (g.n_lambda, g.lambda_center_of_bin(Arm::Signal, 0), g.lambda_step),
        (g.n_k, g.k_center_of_bin(Arm::Idler, 0), g.k_step),
        (g.n_lambda, g.lambda_center_of_bin(Arm::Idler, 0), g.lambda_step),
    ];
    for (n, first, step) in axes {
        let n = u32::try_from(n).map_err(|_| Error::GridMismatch("axis longer than u32".into()))?;
        body.extend_from_slice(&n.to_le_bytes());
        body.extend_from_slice(&first.to_le_bytes());
        body.extend_from_slice(&step.to_le_bytes());
    }
    let json = serde_json::to_vec(&grid.params)?;
    body.extend_from_slice(&(json.len() as u32).to_le_bytes());
    body.extend_from_slice(&json);
    let mut crc = crc32fast::Hasher::new();
    crc.update(&body);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&body)?;
    let mut chunk = Vec::with_capacity(16 * 4096);
    for block in grid.values.chunks(4096) {
        chunk.clear();
        for v in block {
            chunk.extend_from_slice(&v.re.to_le_bytes());
            chunk.extend_from_slice(&v.im.to_le_bytes());
        }
        crc.update(&chunk);
        out.write_all(&chunk)?;
    }
    out.write_all(&crc.finalize().to_le_bytes())?;
    out.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(input: R) -> Result<AmplitudeGrid> {
    let mut r = OffsetReader::new(input);
    let hdr = || "grid header".to_string();
    check_magic(r.array::<4>(hdr)?, MAGIC)?;
    let version = u16::from_le_bytes(r.array(hdr)?);
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            reason: format!("unsupported grid format version {version} (this build reads {VERSION})"),
        });
    }
    let mut crc = crc32fast::Hasher::new();
    let flags_b: [u8; 2] = r.array(hdr)?;
    crc.update(&flags_b);
    let flags = u16::from_le_bytes(flags_b);
    let mut axes = Vec::with_capacity(4);
    for _ in 0..4 {
        let b: [u8; 20] = r.array(hdr)?;
        crc.update(&b);
        axes.push(Axis {
            n: u32::from_le_bytes(b[..4].try_into().expect("4 bytes")),
            first: f64::from_le_bytes(b[4..12].try_into().expect("8 bytes")),
            step: f64::from_le_bytes(b[12..20].try_into().expect("8 bytes")),
        });
    }
    let len_b: [u8; 4] = r.array(hdr)?;
    crc.update(&len_b);
    let mut json = vec![0u8; u32::from_le_bytes(len_b) as usize];
    r.read_exact_or(&mut json, || "parameter block".into())?;
    crc.update(&json);
    let params: CrystalPumpParams = serde_json::from_slice(&json).map_err(|e| Error::Format {
        offset: r.offset,
        reason: format!("parameter block: {e}"),
    })?;

    let (ks, ls, ki, li) = (axes[0], axes[1], axes[2], axes[3]);
    if ks.n != ki.n || ls.n != li.n || ks.step != ki.step || ls.step != li.step {
        return Err(Error::GridMismatch(format!(
            "signal axes {}x{} and idler axes {}x{} differ",
            ks.n, ls.n, ki.n, li.n
        )));
    }
    let centre = |a: Axis| a.first + (a.n as f64 - 1.0) / 2.0 * a.step;
    let grid = GridSpec {
        n_k: ks.n as usize,
        n_lambda: ls.n as usize,
        k_step: ks.step,
        lambda_step: ls.step,
        signal: ArmWindow { k_center: centre(ks), lambda_center: centre(ls) },
        idler: ArmWindow { k_center: centre(ki), lambda_center: centre(li) },
    };
    grid.validate()?;
    let total = grid.total_bins();
    let mut values = Vec::with_capacity(total);
    let mut chunk = vec![0u8; 16 * 4096];
    while values.len() < total {
        let take = (total - values.len()).min(4096);
        let buf = &mut chunk[..16 * take];
        let done = values.len();
        r.read_exact_or(buf, || format!("data ends after {done} of {total} values"))?;
        crc.update(buf);
        values.extend(buf.chunks_exact(16).map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        }));
    }
    let offset = r.offset;
    let stored = u32::from_le_bytes(r.array(|| "missing checksum trailer".into())?);
    let computed = crc.finalize();
    if stored != computed {
        return Err(Error::Format {
            offset,
            reason: format!("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"),
        });
    }
    if !r.at_eof()? {
        return Err(Error::GridMismatch(format!(
            "data longer than the {total} values declared in the header"
        )));
    }
    Ok(AmplitudeGrid {
        params,
        grid,
        values,
        norm_applied: flags & FLAG_NORMALIZED != 0,
    })
}

pub fn save_grid(grid: &AmplitudeGrid, path: &Path) -> Result<()> {
    write_grid(grid, BufWriter::new(File::create(path)?))
}

pub fn load_grid(path: &Path) -> Result<AmplitudeGrid> {
    read_grid(BufReader::new(File::open(path)?))
}
