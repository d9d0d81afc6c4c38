//! Binary state snapshots.
//!
//! Layout, all numbers little-endian:
//!
//! | bytes            | content                                  |
//! |------------------|------------------------------------------|
//! | 4                | magic `TGS1` (the digit is the version)  |
//! | 4                | `u32` dimension                          |
//! | 4                | `u32` cells per axis                     |
//! | 8                | `f64` half width of the box              |
//! | 8                | `f64` pressure exponent gamma            |
//! | 8                | `f64` time                               |
//! | 8 · cells        | `f64` total density, row-major           |
//! | 8 · cells        | `f64` species-1 fraction, row-major      |
//! | 8                | `u64` checksum                           |
//!
//! The checksum is 64-bit FNV-1a (offset basis `0xcbf29ce484222325`, prime
//! `0x100000001b3`) over every byte between the magic and the checksum.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::field::{Field, Grid, GridError};
use crate::scheme::State;

pub const MAGIC: [u8; 4] = *b"TGS1";
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not a snapshot file (bad magic bytes)")]
    BadMagic,
    #[error("snapshot format version {found} is not supported (expected 1)")]
    FormatVersionMismatch { found: u8 },
    #[error("snapshot checksum mismatch: file is truncated or corrupt")]
    ChecksumMismatch,
    #[error("snapshot header describes {expected} payload bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },
    #[error("snapshot is {found}D but the configuration is {expected}D")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("snapshot grid ({found_cells} cells, half width {found_width}) differs from the configured grid ({cells} cells, half width {width})")]
    GridMismatch {
        cells: usize,
        width: f64,
        found_cells: usize,
        found_width: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// A state together with the pressure exponent it was computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: State,
    pub gamma: f64,
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn encode(snap: &Snapshot) -> Vec<u8> {
    let grid = snap.state.grid();
    let cells = grid.len();
    let mut out = Vec::with_capacity(4 + HEADER_LEN + 16 * cells + 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.cells_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&grid.half_width().to_le_bytes());
    out.extend_from_slice(&snap.gamma.to_le_bytes());
    out.extend_from_slice(&snap.state.t.to_le_bytes());
    for v in snap.state.n.values().iter().chain(snap.state.c1.values()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let sum = fnv1a64(&out[4..]);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

/// Decodes a snapshot; nothing is returned unless the checksum matches.
pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    if bytes.len() < 4 || &bytes[..3] != b"TGS" {
        return Err(SnapshotError::BadMagic);
    }
    if bytes[3] != MAGIC[3] {
        return Err(SnapshotError::FormatVersionMismatch {
            found: bytes[3].wrapping_sub(b'0'),
        });
    }
    if bytes.len() < 4 + HEADER_LEN + 8 {
        return Err(SnapshotError::ChecksumMismatch);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().expect("8 bytes"));
    let payload = &body[4..];
    if fnv1a64(payload) != stored {
        return Err(SnapshotError::ChecksumMismatch);
    }
    let dim = u32_at(payload, 0) as usize;
    let cells_per_axis = u32_at(payload, 4) as usize;
    let half_width = f64_at(payload, 8);
    let gamma = f64_at(payload, 16);
    let t = f64_at(payload, 24);
    let grid = Grid::new(dim, half_width, cells_per_axis)?;
    let cells = grid.len();
    let expected = HEADER_LEN + 16 * cells;
    if payload.len() != expected {
        return Err(SnapshotError::PayloadLength {
            expected,
            found: payload.len(),
        });
    }
    let read = |start: usize| -> Vec<f64> {
        (0..cells)
            .map(|i| f64_at(payload, start + 8 * i))
            .collect()
    };
    let n = Field::from_values(grid, read(HEADER_LEN))?;
    let c1 = Field::from_values(grid, read(HEADER_LEN + 8 * cells))?;
    Ok(Snapshot {
        state: State { n, c1, t },
        gamma,
    })
}

pub fn write_snapshot(snap: &Snapshot, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, encode(snap)).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let bytes = fs::read(path).map_err(|source| SnapshotError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode(&bytes)
}

/// Reads a snapshot and checks that it lives on `grid`.
pub fn read_snapshot_for(path: &Path, grid: &Grid) -> Result<Snapshot, SnapshotError> {
    let snap = read_snapshot(path)?;
    let found = snap.state.grid();
    if found.dim() != grid.dim() {
        return Err(SnapshotError::DimensionMismatch {
            expected: grid.dim(),
            found: found.dim(),
        });
    }
    if found != grid {
        return Err(SnapshotError::GridMismatch {
            cells: grid.cells_per_axis(),
            width: grid.half_width(),
            found_cells: found.cells_per_axis(),
            found_width: found.half_width(),
        });
    }
    Ok(snap)
}
