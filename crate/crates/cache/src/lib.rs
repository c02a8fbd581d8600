//! Activation-cache persistence: AZAC binary files holding one (checkpoint,
//! layer, corpus) activation matrix in 32-bit floats plus the FEN manifest
//! that aligns matrix rows with positions. Writes are atomic
//! (write-temp-then-rename); reads validate the header and exact byte counts.
//!
//! File layout, all integers little-endian: magic "AZAC", version u32 = 1,
//! checkpoint step u64, layer u16, N u64, d u32, layout tag u8, then N
//! length-prefixed (u32) UTF-8 FENs, then N*d payload f32s.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use chesscore::{parse_fen, FenError};
use encoding::{encode_input, EncodingError};
use network::{forward, Checkpoint, NetworkError};
use probes::ActivationMatrix;
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"AZAC";
pub const VERSION: u32 = 1;
/// Layout tag: plane-major `[channel][row][col]` rows, matching the encoding
/// and network activation contract.
pub const LAYOUT_PLANE_MAJOR: u8 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("bad magic, not an activation cache file")]
    BadMagic,
    #[error("unsupported cache version {0}")]
    BadVersion(u32),
    #[error("truncated cache file: expected {expected} bytes, got {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("inconsistent cache: {0}")]
    Inconsistent(String),
    #[error("layer {layer} out of range, network has layers 1..={layers}")]
    BadLayer { layer: usize, layers: usize },
    #[error(transparent)]
    Fen(#[from] FenError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheHeader {
    pub step: u64,
    pub layer: u16,
    pub rows: u64,
    pub cols: u32,
    pub layout: u8,
}

/// 64-bit FNV-1a of the concatenated manifest FENs.
pub fn corpus_hash(fens: &[String]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for fen in fens {
        for &b in fen.as_bytes() {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    hash
}

/// Canonical cache file name for a (checkpoint, layer, corpus) triple.
pub fn cache_file_name(step: u64, layer: usize, corpus_hash: u64) -> String {
    format!("acts_t{step}_l{layer}_{corpus_hash:016x}.azac")
}

/// Runs the forward pass over `fens` and writes the layer's activation
/// matrix. The write goes to a sibling temp file first and is renamed into
/// place, so a crash leaves either no file or a complete one; rewriting with
/// the same inputs produces a byte-identical file.
pub fn write_cache(
    path: &Path,
    ck: &Checkpoint,
    layer: usize,
    fens: &[String],
) -> Result<(), CacheError> {
    if layer == 0 || layer > ck.config.blocks {
        return Err(CacheError::BadLayer {
            layer,
            layers: ck.config.blocks,
        });
    }
    let tmp = path.with_extension("azac.tmp");
    let result = write_cache_inner(&tmp, ck, layer, fens);
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
        return result;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn write_cache_inner(
    tmp: &Path,
    ck: &Checkpoint,
    layer: usize,
    fens: &[String],
) -> Result<(), CacheError> {
    let cols = ck.config.channels * 64;
    let mut w = BufWriter::new(File::create(tmp)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&ck.step.to_le_bytes())?;
    w.write_all(&(layer as u16).to_le_bytes())?;
    w.write_all(&(fens.len() as u64).to_le_bytes())?;
    w.write_all(&(cols as u32).to_le_bytes())?;
    w.write_all(&[LAYOUT_PLANE_MAJOR])?;
    for fen in fens {
        w.write_all(&(fen.len() as u32).to_le_bytes())?;
        w.write_all(fen.as_bytes())?;
    }
    for fen in fens {
        let pos = parse_fen(fen)?;
        let x = encode_input(std::slice::from_ref(&pos), ck.config.h)?;
        let (_, acts) = forward(ck, &x)?;
        for &v in acts.layer(layer) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fills `buf` or reports truncation with the minimum byte count the file
/// needed to satisfy this read.
fn read_exact_or_truncated(
    r: &mut impl Read,
    buf: &mut [u8],
    read_so_far: &mut u64,
) -> Result<(), CacheError> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            return Err(CacheError::Truncated {
                expected: *read_so_far + buf.len() as u64,
                actual: *read_so_far + filled as u64,
            });
        }
        filled += n;
    }
    *read_so_far += buf.len() as u64;
    Ok(())
}

/// Reads a cache file back as a probe-ready activation matrix (f32 payload
/// widened to f64) plus its header; the manifest FENs ride in the matrix.
pub fn read_cache(path: &Path) -> Result<(CacheHeader, ActivationMatrix), CacheError> {
    let file_len = std::fs::metadata(path)?.len();
    let mut r = BufReader::new(File::open(path)?);
    let mut pos = 0u64;

    let mut magic = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut magic, &mut pos)?;
    if &magic != MAGIC {
        return Err(CacheError::BadMagic);
    }
    let mut u4 = [0u8; 4];
    let mut u8b = [0u8; 8];
    let mut u2 = [0u8; 2];
    let mut u1 = [0u8; 1];
    read_exact_or_truncated(&mut r, &mut u4, &mut pos)?;
    let version = u32::from_le_bytes(u4);
    if version != VERSION {
        return Err(CacheError::BadVersion(version));
    }
    read_exact_or_truncated(&mut r, &mut u8b, &mut pos)?;
    let step = u64::from_le_bytes(u8b);
    read_exact_or_truncated(&mut r, &mut u2, &mut pos)?;
    let layer = u16::from_le_bytes(u2);
    read_exact_or_truncated(&mut r, &mut u8b, &mut pos)?;
    let rows = u64::from_le_bytes(u8b);
    read_exact_or_truncated(&mut r, &mut u4, &mut pos)?;
    let cols = u32::from_le_bytes(u4);
    read_exact_or_truncated(&mut r, &mut u1, &mut pos)?;
    let layout = u1[0];
    if layout != LAYOUT_PLANE_MAJOR {
        return Err(CacheError::Inconsistent(format!("unknown layout tag {layout}")));
    }

    let mut fens = Vec::with_capacity(rows as usize);
    let mut manifest_bytes = 0u64;
    for _ in 0..rows {
        read_exact_or_truncated(&mut r, &mut u4, &mut pos)?;
        let len = u32::from_le_bytes(u4) as usize;
        let mut fen = vec![0u8; len];
        read_exact_or_truncated(&mut r, &mut fen, &mut pos)?;
        manifest_bytes += 4 + len as u64;
        fens.push(String::from_utf8(fen).map_err(|_| {
            CacheError::Inconsistent("manifest FEN is not valid UTF-8".to_string())
        })?);
    }

    let expected = 31 + manifest_bytes + rows * cols as u64 * 4;
    if file_len != expected {
        return Err(CacheError::Truncated {
            expected,
            actual: file_len,
        });
    }
    let mut matrix_rows = Vec::with_capacity(rows as usize);
    let mut row_buf = vec![0u8; cols as usize * 4];
    for _ in 0..rows {
        read_exact_or_truncated(&mut r, &mut row_buf, &mut pos)?;
        matrix_rows.push(
            row_buf
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
                .collect::<Vec<f64>>(),
        );
    }
    let header = CacheHeader {
        step,
        layer,
        rows,
        cols,
        layout,
    };
    Ok((
        header,
        ActivationMatrix::from_rows(layer.to_string(), step, fens, matrix_rows),
    ))
}
