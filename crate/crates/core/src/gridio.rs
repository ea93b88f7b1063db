//! `JAGRID1` binary grid files.
//!
//! Layout (little-endian): magic `b"JAGRID1\0"`; `u32 n_s, u32 n_i`;
//! `f64 step_s, step_i, origin_s, origin_i`; `u8` domain flag (0 time, 1 frequency,
//! 2 one-dimensional time series with `n_i = 1`); 7 padding bytes; then
//! `n_s * n_i` complex samples, signal-major, each as `(re, im)` f64.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::amplitude::JointAmplitude;
use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};
use crate::pump::PumpField;

pub const MAGIC: &[u8; 8] = b"JAGRID1\0";
const HEADER_LEN: usize = 8 + 4 + 4 + 4 * 8 + 1 + 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Time = 0,
    Frequency = 1,
    Series = 2,
}

/// Raw contents of a grid file.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFile {
    pub signal: Axis,
    pub idler: Axis,
    pub kind: GridKind,
    pub data: Vec<Complex64>,
}

impl GridFile {
    pub fn from_amplitude(a: &JointAmplitude) -> Self {
        GridFile {
            signal: a.signal,
            idler: a.idler,
            kind: match a.domain {
                Domain::Time => GridKind::Time,
                Domain::Frequency => GridKind::Frequency,
            },
            data: a.data().to_vec(),
        }
    }

    pub fn from_pump(p: &PumpField) -> Self {
        GridFile {
            signal: p.axis(),
            idler: Axis {
                n: 1,
                step: 0.0,
                origin: 0.0,
            },
            kind: GridKind::Series,
            data: p.samples().to_vec(),
        }
    }

    /// Rows of `data` are `signal.n` modes over an axis of `idler.n` points.
    pub fn from_modes(modes: &[Vec<Complex64>], axis: Axis, domain: Domain) -> Self {
        GridFile {
            signal: Axis {
                n: modes.len(),
                step: 1.0,
                origin: 0.0,
            },
            idler: axis,
            kind: match domain {
                Domain::Time => GridKind::Time,
                Domain::Frequency => GridKind::Frequency,
            },
            data: modes.iter().flatten().copied().collect(),
        }
    }

    pub fn into_amplitude(self) -> Result<JointAmplitude> {
        let domain = match self.kind {
            GridKind::Time => Domain::Time,
            GridKind::Frequency => Domain::Frequency,
            GridKind::Series => return Err(Error::Format("file holds a 1D series".into())),
        };
        JointAmplitude::new(self.signal, self.idler, domain, self.data)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(HEADER_LEN + 16 * self.data.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.signal.n as u32).to_le_bytes());
        buf.extend_from_slice(&(self.idler.n as u32).to_le_bytes());
        for v in [self.signal.step, self.idler.step, self.signal.origin, self.idler.origin] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.push(self.kind as u8);
        buf.extend_from_slice(&[0u8; 7]);
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut head = [0u8; HEADER_LEN];
        r.read_exact(&mut head)
            .map_err(|e| Error::Format(format!("short header: {e}")))?;
        if &head[..8] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap()) as usize;
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let (ns, ni) = (u32_at(8), u32_at(12));
        let (ds, di, os, oi) = (f64_at(16), f64_at(24), f64_at(32), f64_at(40));
        let kind = match head[48] {
            0 => GridKind::Time,
            1 => GridKind::Frequency,
            2 => GridKind::Series,
            k => return Err(Error::Format(format!("unknown domain flag {k}"))),
        };
        let bytes = ns
            .checked_mul(ni)
            .and_then(|c| c.checked_mul(16))
            .ok_or_else(|| Error::Format("grid dimensions overflow".into()))?;
        // grow with the stream instead of trusting the header for the allocation
        let mut payload = Vec::new();
        r.take(bytes as u64).read_to_end(&mut payload)?;
        if payload.len() != bytes {
            return Err(Error::Format(format!(
                "truncated payload: {} of {bytes} bytes",
                payload.len()
            )));
        }
        let data = payload
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Ok(GridFile {
            signal: Axis {
                n: ns,
                step: ds,
                origin: os,
            },
            idler: Axis {
                n: ni,
                step: di,
                origin: oi,
            },
            kind,
            data,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        GridFile::read_from(&mut f)
    }
}

pub fn write_amplitude(path: impl AsRef<Path>, a: &JointAmplitude) -> Result<()> {
    GridFile::from_amplitude(a).save(path)
}

pub fn read_amplitude(path: impl AsRef<Path>) -> Result<JointAmplitude> {
    GridFile::load(path)?.into_amplitude()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let ax = Axis::centered(4, 0.5).unwrap();
        let a = JointAmplitude::from_fn(ax, ax, Domain::Frequency, Complex64::new).unwrap();
        let mut buf = Vec::new();
        GridFile::from_amplitude(&a).write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 56 + 16 * 16);
        assert_eq!(&buf[..8], b"JAGRID1\0");
        assert_eq!(u32::from_le_bytes(buf[8..12].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 0.5);
        assert_eq!(f64::from_le_bytes(buf[32..40].try_into().unwrap()), -1.0);
        assert_eq!(buf[48], 1);
        assert_eq!(&buf[49..56], &[0u8; 7]);
        // element (1, 2) -> s = -0.5, i = 0.0
        let off = 56 + 16 * 6;
        assert_eq!(f64::from_le_bytes(buf[off..off + 8].try_into().unwrap()), -0.5);
        let back = GridFile::read_from(&mut buf.as_slice()).unwrap().into_amplitude().unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn rejects_garbage() {
        let mut bad = b"JAGRID2\0".to_vec();
        bad.extend_from_slice(&[0u8; 48]);
        assert!(GridFile::read_from(&mut bad.as_slice()).is_err());
        let ax = Axis::centered(2, 1.0).unwrap();
        let a = JointAmplitude::zeros(ax, ax, Domain::Time).unwrap();
        let mut buf = Vec::new();
        GridFile::from_amplitude(&a).write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(GridFile::read_from(&mut buf.as_slice()).is_err());
    }
}
