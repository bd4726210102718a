//! On-disk formats. All binary integers and floats are little-endian.

pub mod config;
pub mod csv;
pub mod frames;
pub mod pgm;
pub mod report;
pub mod tensor;

use std::io::{self, Read};

use crate::error::{Error, Result};

/// Reader that tracks its byte offset for error messages.
pub(crate) struct OffsetReader<R> {
    inner: R,
    pub offset: u64,
}

impl<R: Read> OffsetReader<R> {
    pub fn new(inner: R) -> Self {
        OffsetReader { inner, offset: 0 }
    }

    /// Fill `buf` completely; a short read is reported with `context`.
    pub fn read_exact_or(&mut self, buf: &mut [u8], context: impl FnOnce() -> String) -> Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            match self.inner.read(&mut buf[filled..]) {
                Ok(0) => {
                    return Err(Error::Format {
                        offset: self.offset + filled as u64,
                        reason: format!("unexpected end of file: {}", context()),
                    })
                }
                Ok(n) => filled += n,
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        self.offset += buf.len() as u64;
        Ok(())
    }

    pub fn array<const N: usize>(&mut self, context: impl FnOnce() -> String) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.read_exact_or(&mut b, context)?;
        Ok(b)
    }

    /// True when no bytes remain.
    pub fn at_eof(&mut self) -> Result<bool> {
        let mut b = [0u8; 1];
        loop {
            match self.inner.read(&mut b) {
                Ok(0) => return Ok(true),
                Ok(_) => return Ok(false),
                Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
}

pub(crate) fn check_magic(got: [u8; 4], want: &[u8; 4]) -> Result<()> {
    if &got != want {
        return Err(Error::Format {
            offset: 0,
            reason: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&got),
                String::from_utf8_lossy(want)
            ),
        });
    }
    Ok(())
}
