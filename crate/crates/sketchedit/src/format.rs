//! On-disk formats: sequence text files, binary and text tSDF grids, and
//! atomic file replacement.
//!
//! Binary tSDF layout, little-endian throughout:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `TSDF` |
//! | 1     | version, currently 1 |
//! | 2     | resolution `r` as u16 |
//! | 4     | τ as f32 |
//! | 4·r³  | values as f32, x fastest |
//!
//! The `.grid` text form has a header line `grid <r> <tau>` followed by the
//! r³ values separated by whitespace, one x-row per line.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use sketchedit_core::{parse_sequence, serialize_sequence, ConstructionSequence, GridSpec, ParseError, TsdfGrid};
use tempfile::NamedTempFile;
use thiserror::Error;

pub const TSDF_MAGIC: &[u8; 4] = b"TSDF";
pub const TSDF_VERSION: u8 = 1;
const HEADER_LEN: usize = 4 + 1 + 2 + 4;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("bad tSDF data: {0}")]
    BadGrid(String),
}

impl FormatError {
    fn io(path: &Path, source: io::Error) -> Self {
        FormatError::Io { path: path.display().to_string(), source }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| FormatError::io(path, e))?;
    tmp.write_all(bytes).and_then(|_| tmp.as_file().sync_all()).map_err(|e| FormatError::io(path, e))?;
    tmp.persist(path).map_err(|e| FormatError::io(path, e.error))?;
    Ok(())
}

pub fn read_sequence(path: &Path) -> Result<ConstructionSequence, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_sequence(&text).map_err(|source| FormatError::Parse { path: path.display().to_string(), source })
}

/// Sequence files hold the canonical token text plus a trailing newline.
pub fn write_sequence(path: &Path, seq: &ConstructionSequence) -> Result<(), FormatError> {
    let mut text = serialize_sequence(seq);
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// τ is stored as f32; reading it back through its shortest decimal form
/// turns a stored `0.2f32` into `0.2f64` rather than `0.2000000029…`.
fn widen(tau: f32) -> f64 {
    tau.to_string().parse().unwrap_or(f64::from(tau))
}

pub fn encode_tsdf(grid: &TsdfGrid) -> Result<Vec<u8>, FormatError> {
    let spec = grid.spec();
    let res = u16::try_from(spec.resolution)
        .map_err(|_| FormatError::BadGrid(format!("resolution {} does not fit in u16", spec.resolution)))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * grid.values().len());
    out.extend_from_slice(TSDF_MAGIC);
    out.push(TSDF_VERSION);
    out.extend_from_slice(&res.to_le_bytes());
    out.extend_from_slice(&(spec.tau as f32).to_le_bytes());
    for v in grid.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tsdf(bytes: &[u8]) -> Result<TsdfGrid, FormatError> {
    let bad = |m: String| FormatError::BadGrid(m);
    if bytes.len() < HEADER_LEN || &bytes[..4] != TSDF_MAGIC {
        return Err(bad("missing TSDF header".into()));
    }
    if bytes[4] != TSDF_VERSION {
        return Err(bad(format!("unsupported version {}", bytes[4])));
    }
    let res = usize::from(u16::from_le_bytes([bytes[5], bytes[6]]));
    let tau = f32::from_le_bytes(bytes[7..11].try_into().expect("4 bytes"));
    let spec = GridSpec::new(res, widen(tau)).map_err(|e| bad(e.to_string()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * spec.voxel_count() {
        return Err(bad(format!("expected {} values, found {} bytes", spec.voxel_count(), body.len())));
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    TsdfGrid::from_values(spec, values).map_err(|e| bad(e.to_string()))
}

pub fn encode_grid_text(grid: &TsdfGrid) -> String {
    let spec = grid.spec();
    let mut out = format!("grid {} {}\n", spec.resolution, spec.tau as f32);
    for row in grid.values().chunks(spec.resolution) {
        let line: Vec<String> = row.iter().map(f32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn decode_grid_text(text: &str) -> Result<TsdfGrid, FormatError> {
    let bad = |m: &str| FormatError::BadGrid(m.to_string());
    let mut fields = text.split_whitespace();
    if fields.next() != Some("grid") {
        return Err(bad("missing `grid` header"));
    }
    let res: usize = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad resolution"))?;
    let tau: f32 = fields.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad tau"))?;
    let spec = GridSpec::new(res, widen(tau)).map_err(|e| FormatError::BadGrid(e.to_string()))?;
    let values: Vec<f32> = fields.map(str::parse).collect::<Result<_, _>>().map_err(|_| bad("bad value"))?;
    if values.len() != spec.voxel_count() {
        return Err(FormatError::BadGrid(format!("expected {} values, found {}", spec.voxel_count(), values.len())));
    }
    TsdfGrid::from_values(spec, values).map_err(|e| FormatError::BadGrid(e.to_string()))
}

fn is_text_grid(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "grid")
}

/// Reads a grid; `.grid` files use the text form, everything else binary.
pub fn read_grid(path: &Path) -> Result<TsdfGrid, FormatError> {
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    if is_text_grid(path) {
        let text = String::from_utf8(bytes).map_err(|_| FormatError::BadGrid("not UTF-8".into()))?;
        decode_grid_text(&text)
    } else {
        decode_tsdf(&bytes)
    }
}

pub fn write_grid(path: &Path, grid: &TsdfGrid) -> Result<(), FormatError> {
    if is_text_grid(path) {
        write_atomic(path, encode_grid_text(grid).as_bytes())
    } else {
        write_atomic(path, &encode_tsdf(grid)?)
    }
}

/// True when the file starts with the binary tSDF magic or has the `.grid`
/// extension.
pub fn looks_like_grid(path: &Path) -> bool {
    if is_text_grid(path) {
        return true;
    }
    let mut head = [0u8; 4];
    fs::File::open(path).and_then(|mut f| io::Read::read_exact(&mut f, &mut head)).is_ok() && &head == TSDF_MAGIC
}
