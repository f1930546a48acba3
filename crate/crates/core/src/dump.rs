//! Raw waveform dump: little-endian `"UWBW"`, version, sample rate, count, samples.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::waveform::Waveform;

pub const MAGIC: [u8; 4] = *b"UWBW";
pub const VERSION: u32 = 1;

/// Writes samples as f64 whatever the in-memory scalar. The start time is
/// not part of the format.
pub fn write_waveform<T: Scalar, W: Write>(out: &mut W, w: &Waveform<T>) -> Result<()> {
    out.write_all(&MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&w.sample_rate().to_le_bytes())?;
    out.write_all(&(w.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(w.len() * 8);
    for v in w.samples() {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_waveform<R: Read>(inp: &mut R) -> Result<Waveform<f64>> {
    let mut magic = [0u8; 4];
    inp.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    inp.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut b8 = [0u8; 8];
    inp.read_exact(&mut b8)?;
    let fs = f64::from_le_bytes(b8);
    inp.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut raw = Vec::new();
    inp.read_to_end(&mut raw)?;
    if raw.len() != n * 8 {
        return Err(Error::Format(format!(
            "header announces {n} samples, payload holds {} bytes",
            raw.len()
        )));
    }
    let samples = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Waveform::new(samples, fs, 0.0)
}
