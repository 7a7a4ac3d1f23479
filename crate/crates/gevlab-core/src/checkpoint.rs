//! Binary state checkpoints.
//!
//! Layout (all little-endian): magic "GVNS", version u32, n u32, then
//! L, t, nu, mu as f64, then n^2 coefficients as interleaved (re, im)
//! f64 pairs in row-major wave-index order (j1 slow, j2 fast, each axis
//! in FFT order 0..n/2-1, -n/2..-1). Decode of encode is bit-exact.

use alloc::vec::Vec;

use crate::field::SpectralField;
use crate::grid::{GridError, GridSpec};
use crate::solver::{PhysParams, State};

pub const MAGIC: [u8; 4] = *b"GVNS";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub version: u32,
    pub n: usize,
    pub length: f64,
    pub t: f64,
    pub nu: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointError {
    BadMagic,
    UnsupportedVersion(u32),
    Truncated { expected: usize, got: usize },
    Grid(GridError),
    GridMismatch { found_n: usize, expected_n: usize },
    LengthMismatch { found: f64, expected: f64 },
}

impl core::fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CheckpointError::BadMagic => write!(f, "not a checkpoint file (bad magic)"),
            CheckpointError::UnsupportedVersion(v) => write!(f, "unsupported checkpoint version {v}"),
            CheckpointError::Truncated { expected, got } => {
                write!(f, "checkpoint truncated: need {expected} bytes, have {got}")
            }
            CheckpointError::Grid(e) => write!(f, "checkpoint carries an invalid grid: {e:?}"),
            CheckpointError::GridMismatch { found_n, expected_n } => {
                write!(f, "checkpoint grid n={found_n} does not match run grid n={expected_n}")
            }
            CheckpointError::LengthMismatch { found, expected } => {
                write!(f, "checkpoint domain length {found} does not match run length {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CheckpointError {}

pub fn encode(state: &State, params: PhysParams) -> Vec<u8> {
    let grid = state.omega.grid();
    let n = grid.n();
    let mut out = Vec::with_capacity(4 + 4 + 4 + 4 * 8 + n * n * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&state.t.to_le_bytes());
    out.extend_from_slice(&params.nu.to_le_bytes());
    out.extend_from_slice(&params.mu.to_le_bytes());
    let (re, im) = state.omega.planes();
    for i in 0..n * n {
        out.extend_from_slice(&re[i].to_le_bytes());
        out.extend_from_slice(&im[i].to_le_bytes());
    }
    out
}

fn read_f64(bytes: &[u8], off: usize) -> f64 {
    let mut b = [0u8; 8];
    b.copy_from_slice(&bytes[off..off + 8]);
    f64::from_le_bytes(b)
}

fn read_u32(bytes: &[u8], off: usize) -> u32 {
    let mut b = [0u8; 4];
    b.copy_from_slice(&bytes[off..off + 4]);
    u32::from_le_bytes(b)
}

const HEADER_LEN: usize = 4 + 4 + 4 + 4 * 8;

pub fn decode(bytes: &[u8]) -> Result<(State, CheckpointHeader), CheckpointError> {
    if bytes.len() < HEADER_LEN {
        return Err(CheckpointError::Truncated { expected: HEADER_LEN, got: bytes.len() });
    }
    if bytes[0..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let n = read_u32(bytes, 8) as usize;
    let length = read_f64(bytes, 12);
    let t = read_f64(bytes, 20);
    let nu = read_f64(bytes, 28);
    let mu = read_f64(bytes, 36);
    let grid = GridSpec::new(n, length).map_err(CheckpointError::Grid)?;
    let total = HEADER_LEN + n * n * 16;
    if bytes.len() < total {
        return Err(CheckpointError::Truncated { expected: total, got: bytes.len() });
    }
    let mut omega = SpectralField::zeros(grid);
    {
        let (re, im) = omega.planes_mut();
        for i in 0..n * n {
            let off = HEADER_LEN + 16 * i;
            re[i] = read_f64(bytes, off);
            im[i] = read_f64(bytes, off + 8);
        }
    }
    let header = CheckpointHeader { version, n, length, t, nu, mu };
    Ok((State { t, omega }, header))
}

/// Decode and insist the stored grid matches the running one.
pub fn decode_expecting(
    bytes: &[u8],
    grid: GridSpec,
) -> Result<(State, CheckpointHeader), CheckpointError> {
    let (state, header) = decode(bytes)?;
    if header.n != grid.n() {
        return Err(CheckpointError::GridMismatch { found_n: header.n, expected_n: grid.n() });
    }
    if header.length != grid.length() {
        return Err(CheckpointError::LengthMismatch {
            found: header.length,
            expected: grid.length(),
        });
    }
    Ok((state, header))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{build_initial, Initial};

    fn sample_state(n: usize) -> (State, PhysParams) {
        let grid = GridSpec::two_pi(n).unwrap();
        let omega = build_initial(&Initial::Random { seed: 12, slope: 1.5 }, grid).unwrap();
        (State { t: 3.25, omega }, PhysParams::new(5e-3, 0.1).unwrap())
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (state, params) = sample_state(16);
        let bytes = encode(&state, params);
        let (back, header) = decode(&bytes).unwrap();
        assert_eq!(header.version, VERSION);
        assert_eq!(header.n, 16);
        assert_eq!(header.t.to_bits(), state.t.to_bits());
        assert_eq!(header.nu, 5e-3);
        assert_eq!(header.mu, 0.1);
        assert!(back.omega.bit_eq(&state.omega));
        assert_eq!(back.t.to_bits(), state.t.to_bits());
    }

    #[test]
    fn truncation_and_corruption_are_distinct_errors() {
        let (state, params) = sample_state(16);
        let bytes = encode(&state, params);
        assert!(matches!(
            decode(&bytes[..bytes.len() - 7]),
            Err(CheckpointError::Truncated { .. })
        ));
        assert!(matches!(decode(&bytes[..10]), Err(CheckpointError::Truncated { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(CheckpointError::BadMagic)));
        let mut wrong_version = bytes.clone();
        wrong_version[4] = 9;
        assert!(matches!(
            decode(&wrong_version),
            Err(CheckpointError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let (state, params) = sample_state(16);
        let bytes = encode(&state, params);
        let other = GridSpec::two_pi(32).unwrap();
        assert!(matches!(
            decode_expecting(&bytes, other),
            Err(CheckpointError::GridMismatch { found_n: 16, expected_n: 32 })
        ));
        let same = GridSpec::two_pi(16).unwrap();
        assert!(decode_expecting(&bytes, same).is_ok());
    }
}
