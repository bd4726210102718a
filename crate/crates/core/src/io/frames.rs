//! `BPFR` frame streams.
//!
//! ```text
//! header   "BPFR" u16 version=1, u32 n_k, u32 n_lambda, u64 n_frames, u64 seed
//! frame    u64 frame_index, u16 n_signal, u16 n_idler,
//!          u32 signal bins (ascending), u32 idler bins (ascending)
//! trailer  u32 CRC-32 of all frame bytes
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::io::{check_magic, OffsetReader};
use crate::sim::{CameraFrame, FrameSink};

pub const MAGIC: &[u8; 4] = b"BPFR";
pub const VERSION: u16 = 1;
const N_FRAMES_OFFSET: u64 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub n_k: u32,
    pub n_lambda: u32,
    pub n_frames: u64,
    pub seed: u64,
}

impl FrameHeader {
    pub fn bins_per_arm(&self) -> usize {
        self.n_k as usize * self.n_lambda as usize
    }

    /// Check the header against the grid used for analysis.
    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.n_k as usize != grid.n_k || self.n_lambda as usize != grid.n_lambda {
            return Err(Error::GridMismatch(format!(
                "frame file is {}x{} bins per arm, grid is {}x{}",
                self.n_k, self.n_lambda, grid.n_k, grid.n_lambda
            )));
        }
        Ok(())
    }
}

/// Streaming writer. The frame count in the header is patched by [`finish`].
///
/// [`finish`]: FrameWriter::finish
pub struct FrameWriter<W: Write + Seek> {
    inner: W,
    bins_per_arm: usize,
    count: u64,
    crc: crc32fast::Hasher,
}

impl FrameWriter<BufWriter<File>> {
    pub fn create(path: &Path, n_k: u32, n_lambda: u32, seed: u64) -> Result<Self> {
        FrameWriter::new(BufWriter::new(File::create(path)?), n_k, n_lambda, seed)
    }
}

impl<W: Write + Seek> FrameWriter<W> {
    pub fn new(mut inner: W, n_k: u32, n_lambda: u32, seed: u64) -> Result<Self> {
        inner.write_all(MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(&n_k.to_le_bytes())?;
        inner.write_all(&n_lambda.to_le_bytes())?;
        inner.write_all(&0u64.to_le_bytes())?;
        inner.write_all(&seed.to_le_bytes())?;
        Ok(FrameWriter {
            inner,
            bins_per_arm: n_k as usize * n_lambda as usize,
            count: 0,
            crc: crc32fast::Hasher::new(),
        })
    }

    pub fn write_frame(&mut self, frame: &CameraFrame) -> Result<()> {
        frame.validate(self.bins_per_arm)?;
        let too_many = |n: usize| n > u16::MAX as usize;
        if too_many(frame.signal_events.len()) || too_many(frame.idler_events.len()) {
            return Err(Error::Frame {
                frame_index: frame.frame_index,
                reason: "more than 65535 events in one arm".into(),
            });
        }
        let mut buf = Vec::with_capacity(12 + 4 * frame.n_events());
        buf.extend_from_slice(&frame.frame_index.to_le_bytes());
        buf.extend_from_slice(&(frame.signal_events.len() as u16).to_le_bytes());
        buf.extend_from_slice(&(frame.idler_events.len() as u16).to_le_bytes());
        for b in frame.signal_events.iter().chain(&frame.idler_events) {
            buf.extend_from_slice(&b.to_le_bytes());
        }
        self.crc.update(&buf);
        self.inner.write_all(&buf)?;
        self.count += 1;
        Ok(())
    }

    /// Write the trailer, patch the frame count and return the inner writer.
    pub fn finish(mut self) -> Result<(W, u64)> {
        let crc = self.crc.clone().finalize();
        self.inner.write_all(&crc.to_le_bytes())?;
        let end = self.inner.stream_position()?;
        self.inner.seek(SeekFrom::Start(N_FRAMES_OFFSET))?;
        self.inner.write_all(&self.count.to_le_bytes())?;
        self.inner.seek(SeekFrom::Start(end))?;
        self.inner.flush()?;
        Ok((self.inner, self.count))
    }
}

impl<W: Write + Seek> FrameSink for FrameWriter<W> {
    fn consume(&mut self, frame: &CameraFrame) -> Result<()> {
        self.write_frame(frame)
    }
}

/// Streaming reader; memory use does not grow with the frame count. The
/// checksum is verified after the last frame.
pub struct FrameReader<R: Read> {
    inner: OffsetReader<R>,
    pub header: FrameHeader,
    next: u64,
    crc: crc32fast::Hasher,
    done: bool,
}

impl FrameReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        FrameReader::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> FrameReader<R> {
    pub fn new(inner: R) -> Result<Self> {
        let mut r = OffsetReader::new(inner);
        let hdr = || "file header".to_string();
        check_magic(r.array::<4>(hdr)?, MAGIC)?;
        let version = u16::from_le_bytes(r.array(hdr)?);
        if version != VERSION {
            return Err(Error::Format {
                offset: 4,
                reason: format!("unsupported frame format version {version} (this build reads {VERSION})"),
            });
        }
        let header = FrameHeader {
            n_k: u32::from_le_bytes(r.array(hdr)?),
            n_lambda: u32::from_le_bytes(r.array(hdr)?),
            n_frames: u64::from_le_bytes(r.array(hdr)?),
            seed: u64::from_le_bytes(r.array(hdr)?),
        };
        Ok(FrameReader {
            inner: r,
            header,
            next: 0,
            crc: crc32fast::Hasher::new(),
            done: false,
        })
    }

    fn read_frame(&mut self) -> Result<CameraFrame> {
        let k = self.next;
        let ctx = move || format!("frame {k} truncated");
        let head: [u8; 12] = self.inner.array(ctx)?;
        self.crc.update(&head);
        let frame_index = u64::from_le_bytes(head[..8].try_into().expect("8 bytes"));
        let n_s = u16::from_le_bytes([head[8], head[9]]) as usize;
        let n_i = u16::from_le_bytes([head[10], head[11]]) as usize;
        let mut body = vec![0u8; 4 * (n_s + n_i)];
        self.inner.read_exact_or(&mut body, ctx)?;
        self.crc.update(&body);
        let bins: Vec<u32> = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let frame = CameraFrame {
            frame_index,
            signal_events: bins[..n_s].to_vec(),
            idler_events: bins[n_s..].to_vec(),
        };
        frame.validate(self.header.bins_per_arm())?;
        Ok(frame)
    }

    fn verify_trailer(&mut self) -> Result<()> {
        let offset = self.inner.offset;
        let stored = u32::from_le_bytes(self.inner.array(|| "missing checksum trailer".into())?);
        let computed = self.crc.clone().finalize();
        if stored != computed {
            return Err(Error::Format {
                offset,
                reason: format!("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"),
            });
        }
        if !self.inner.at_eof()? {
            return Err(Error::Format {
                offset: self.inner.offset,
                reason: "trailing bytes after checksum".into(),
            });
        }
        Ok(())
    }
}

impl<R: Read> Iterator for FrameReader<R> {
    type Item = Result<CameraFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.next == self.header.n_frames {
            self.done = true;
            return self.verify_trailer().err().map(Err);
        }
        let r = self.read_frame();
        if r.is_err() {
            self.done = true;
        }
        self.next += 1;
        Some(r)
    }
}

/// Write every frame of `frames` to `path`; returns the count.
pub fn write_frames<'a>(
    path: &Path,
    n_k: u32,
    n_lambda: u32,
    seed: u64,
    frames: impl IntoIterator<Item = &'a CameraFrame>,
) -> Result<u64> {
    let mut w = FrameWriter::create(path, n_k, n_lambda, seed)?;
    for f in frames {
        w.write_frame(f)?;
    }
    Ok(w.finish()?.1)
}

pub fn read_frames(path: &Path) -> Result<FrameReader<BufReader<File>>> {
    FrameReader::open(path)
}
