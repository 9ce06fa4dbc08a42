//! Binary snapshot format (all integers and floats little-endian):
//!
//! | bytes   | content                                              |
//! |---------|------------------------------------------------------|
//! | 8       | magic `IONFSNAP`                                     |
//! | 4       | format version (u32)                                 |
//! | 4       | grid size n (u32)                                    |
//! | 1       | model tag: 0 = NPD, 1 = NPE                          |
//! | 8       | time (f64)                                           |
//! | 4       | species count s (u32)                                |
//! | 16·s    | per species: valence z, diffusivity D (f64 each)     |
//! | 16·n²·f | coefficient blocks, f = s (+1 for ω in NPE)          |
//! | 4       | CRC-32 of every preceding byte                       |
//!
//! Each block holds the n² coefficients in storage order (row = k₂,
//! column = k₁, FFT ordering) as interleaved `re, im` pairs.

use std::path::{Path, PathBuf};

use ionflow::{Fluid, IonSpecies, Model, SimState, SpectralField, SpectralGrid};
use num_complex::Complex64;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"IONFSNAP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 1 + 8 + 4;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: not a snapshot (bad magic)")]
    BadMagic { path: PathBuf },

    #[error("{path}: unsupported snapshot version {found} (expected {VERSION})")]
    VersionMismatch { path: PathBuf, found: u32 },

    #[error("{path}: truncated snapshot: {found} bytes, expected {expected}")]
    Truncated { path: PathBuf, expected: usize, found: usize },

    #[error("{path}: checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { path: PathBuf, stored: u32, computed: u32 },

    #[error("{path}: malformed snapshot: {detail}")]
    Malformed { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn model_tag(model: Model) -> u8 {
    match model {
        Model::Npd => 0,
        Model::Npe => 1,
    }
}

/// Serializes a state into the snapshot byte layout.
pub fn encode(state: &SimState) -> Vec<u8> {
    let n = state.grid().n();
    let species = state.species();
    let fields = species.len() + usize::from(state.vorticity().is_some());
    let mut buf = Vec::with_capacity(HEADER_LEN + 16 * species.len() + 16 * n * n * fields + 4);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    buf.push(model_tag(state.model()));
    buf.extend_from_slice(&state.time().to_le_bytes());
    buf.extend_from_slice(&(species.len() as u32).to_le_bytes());
    for s in species {
        buf.extend_from_slice(&s.valence.to_le_bytes());
        buf.extend_from_slice(&s.diffusivity.to_le_bytes());
    }
    let mut block = |f: &SpectralField| {
        for c in f.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    };
    for s in species {
        block(&s.concentration);
    }
    if let Some(w) = state.vorticity() {
        block(w);
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.bytes[self.pos..self.pos + N].try_into().expect("length checked");
        self.pos += N;
        out
    }
    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }
    fn f64(&mut self) -> f64 {
        f64::from_le_bytes(self.take())
    }
}

/// Parses snapshot bytes; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<SimState, SnapshotError> {
    let path_buf = || path.to_path_buf();
    let truncated = |expected: usize| SnapshotError::Truncated {
        path: path_buf(),
        expected,
        found: bytes.len(),
    };
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(SnapshotError::BadMagic { path: path_buf() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(truncated(HEADER_LEN));
    }
    let mut r = Reader { bytes, pos: MAGIC.len() };
    let version = r.u32();
    if version != VERSION {
        return Err(SnapshotError::VersionMismatch {
            path: path_buf(),
            found: version,
        });
    }
    let n = r.u32() as usize;
    let [tag] = r.take::<1>();
    let time = r.f64();
    let count = r.u32() as usize;
    let malformed = |detail: String| SnapshotError::Malformed {
        path: path_buf(),
        detail,
    };
    let model = match tag {
        0 => Model::Npd,
        1 => Model::Npe,
        t => return Err(malformed(format!("unknown model tag {t}"))),
    };
    if n == 0 || n > 1 << 14 || count == 0 || count > 1 << 16 {
        return Err(malformed(format!("implausible header: n = {n}, species = {count}")));
    }
    let fields = count + usize::from(model == Model::Npe);
    let expected = HEADER_LEN + 16 * count + 16 * n * n * fields + 4;
    if bytes.len() < expected {
        return Err(truncated(expected));
    }
    if bytes.len() > expected {
        return Err(malformed(format!("{} trailing bytes", bytes.len() - expected)));
    }
    let body = &bytes[..expected - 4];
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(SnapshotError::Checksum {
            path: path_buf(),
            stored,
            computed,
        });
    }
    let grid = SpectralGrid::new(n).map_err(|e| malformed(e.to_string()))?;
    let params: Vec<(f64, f64)> = (0..count).map(|_| (r.f64(), r.f64())).collect();
    let block = |r: &mut Reader| -> Result<SpectralField, SnapshotError> {
        let coeffs = (0..n * n).map(|_| Complex64::new(r.f64(), r.f64())).collect();
        SpectralField::from_coeffs(&grid, coeffs).map_err(|e| malformed(e.to_string()))
    };
    let mut species = Vec::with_capacity(count);
    for (z, d) in params {
        let c = block(&mut r)?;
        species.push(IonSpecies::new(z, d, c).map_err(|e| malformed(e.to_string()))?);
    }
    let fluid = match model {
        Model::Npd => Fluid::Darcy,
        Model::Npe => Fluid::Euler {
            vorticity: block(&mut r)?,
        },
    };
    SimState::new(species, fluid, time).map_err(|e| malformed(e.to_string()))
}

pub fn write_snapshot(state: &SimState, path: &Path) -> Result<(), SnapshotError> {
    std::fs::write(path, encode(state)).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_snapshot(path: &Path) -> Result<SimState, SnapshotError> {
    let bytes = std::fs::read(path).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes, path)
}

/// File name for the snapshot taken after `step` steps.
pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:08}.bin")
}

/// Snapshot files in `dir`, sorted by name (and hence by step).
pub fn list_snapshots(dir: &Path) -> Result<Vec<PathBuf>, SnapshotError> {
    let io = |source| SnapshotError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "bin") {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(model: Model) -> SimState {
        let g = SpectralGrid::new(8).unwrap();
        let c = SpectralField::from_fn(&g, |x, y| 1.0 + 0.3 * (x - y).cos());
        let sp = vec![IonSpecies::new(1.0, 0.5, c).unwrap()];
        match model {
            Model::Npd => SimState::npd(sp).unwrap(),
            Model::Npe => SimState::npe(sp, SpectralField::from_fn(&g, |x, _| x.sin())).unwrap(),
        }
    }

    #[test]
    fn round_trip_is_identity() {
        for model in [Model::Npd, Model::Npe] {
            let s = state(model);
            let back = decode(&encode(&s), Path::new("mem")).unwrap();
            assert_eq!(back, s);
            assert_eq!(encode(&back), encode(&s));
        }
    }

    #[test]
    fn corrupted_inputs_are_named() {
        let bytes = encode(&state(Model::Npe));
        let p = Path::new("mem");
        assert!(matches!(decode(&bytes[..bytes.len() - 8], p), Err(SnapshotError::Truncated { .. })));
        assert!(matches!(decode(&bytes[..10], p), Err(SnapshotError::Truncated { .. })));
        let mut flipped = bytes.clone();
        flipped[100] ^= 1;
        assert!(matches!(decode(&flipped, p), Err(SnapshotError::Checksum { .. })));
        let mut version = bytes.clone();
        version[8] = 9;
        assert!(matches!(decode(&version, p), Err(SnapshotError::VersionMismatch { found: 9, .. })));
        assert!(matches!(decode(b"NOTASNAPSHOT", p), Err(SnapshotError::BadMagic { .. })));
    }
}
