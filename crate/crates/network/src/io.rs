//! Checkpoint file format (magic "AZPW", version 1, little endian):
//!
//! ```text
//! magic       4 bytes  "AZPW"
//! version     u32      1
//! blocks      u32
//! channels    u32
//! h           u32
//! clip_max    f32
//! halfmove_divisor  f32   (must match the encoding module)
//! fullmove_divisor  f32   (must match the encoding module)
//! value_hidden u32        (256)
//! step        u64
//! tensors     f32...      conv_in (weight, scale, bias); per residual block
//!                         conv1 then conv2 (weight, scale, bias each);
//!                         policy conv (weight, bias); value conv (weight,
//!                         bias); dense1 (weight, bias); dense2 (weight, bias)
//! ```
//!
//! Conv weights are `[out][in][ky][kx]` row-major, dense weights `[out][in]`;
//! spatial data elsewhere follows the plane-major layout of the encoding
//! crate.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::{
    Checkpoint, ConvLayer, DenseLayer, NetworkConfig, NetworkError, ResidualBlock, VALUE_HIDDEN,
};
use encoding::{HALFMOVE_CLOCK_DIVISOR, POLICY_PLANES, TOTAL_MOVE_DIVISOR};

const MAGIC: &[u8; 4] = b"AZPW";
const VERSION: u32 = 1;

struct Writer<W: Write> {
    out: W,
}

impl<W: Write> Writer<W> {
    fn u32(&mut self, v: u32) -> Result<(), NetworkError> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<(), NetworkError> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn f32s(&mut self, vs: &[f32]) -> Result<(), NetworkError> {
        for v in vs {
            self.out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
    fn conv(&mut self, c: &ConvLayer, with_scale: bool) -> Result<(), NetworkError> {
        self.f32s(&c.weight)?;
        if with_scale {
            self.f32s(&c.scale)?;
        }
        self.f32s(&c.bias)
    }
}

pub fn save_checkpoint(ck: &Checkpoint, path: &Path) -> Result<(), NetworkError> {
    check_shapes(ck)?;
    let mut w = Writer {
        out: BufWriter::new(File::create(path)?),
    };
    w.out.write_all(MAGIC)?;
    w.u32(VERSION)?;
    w.u32(ck.config.blocks as u32)?;
    w.u32(ck.config.channels as u32)?;
    w.u32(ck.config.h as u32)?;
    w.f32s(&[ck.config.clip_max, HALFMOVE_CLOCK_DIVISOR, TOTAL_MOVE_DIVISOR])?;
    w.u32(VALUE_HIDDEN as u32)?;
    w.u64(ck.step)?;
    w.conv(&ck.conv_in, true)?;
    for block in &ck.residual {
        w.conv(&block.conv1, true)?;
        w.conv(&block.conv2, true)?;
    }
    w.conv(&ck.policy_conv, false)?;
    w.conv(&ck.value_conv, false)?;
    w.f32s(&ck.value_dense1.weight)?;
    w.f32s(&ck.value_dense1.bias)?;
    w.f32s(&ck.value_dense2.weight)?;
    w.f32s(&ck.value_dense2.bias)?;
    w.out.flush()?;
    Ok(())
}

struct Reader<R: Read> {
    inp: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], NetworkError> {
        let mut buf = [0u8; N];
        self.inp
            .read_exact(&mut buf)
            .map_err(|_| NetworkError::Truncated)?;
        Ok(buf)
    }
    fn u32(&mut self) -> Result<u32, NetworkError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, NetworkError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f32(&mut self) -> Result<f32, NetworkError> {
        Ok(f32::from_le_bytes(self.bytes()?))
    }
    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, NetworkError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let v = self.f32()?;
            if !v.is_finite() {
                return Err(NetworkError::Inconsistent("non-finite weight".into()));
            }
            out.push(v);
        }
        Ok(out)
    }
    fn conv(
        &mut self,
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        with_scale: bool,
    ) -> Result<ConvLayer, NetworkError> {
        let weight = self.f32s(out_channels * in_channels * kernel * kernel)?;
        let scale = if with_scale {
            self.f32s(out_channels)?
        } else {
            vec![1.0; out_channels]
        };
        let bias = self.f32s(out_channels)?;
        Ok(ConvLayer {
            in_channels,
            out_channels,
            kernel,
            weight,
            scale,
            bias,
        })
    }
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NetworkError> {
    let mut r = Reader {
        inp: BufReader::new(File::open(path)?),
    };
    let magic: [u8; 4] = r.bytes()?;
    if &magic != MAGIC {
        return Err(NetworkError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(NetworkError::BadVersion(version));
    }
    let blocks = r.u32()? as usize;
    let channels = r.u32()? as usize;
    let h = r.u32()? as usize;
    let clip_max = r.f32()?;
    let halfmove = r.f32()?;
    let fullmove = r.f32()?;
    if blocks < 1 || channels < 1 || h < 1 {
        return Err(NetworkError::Inconsistent(format!(
            "bad config blocks={blocks} channels={channels} h={h}"
        )));
    }
    if halfmove != HALFMOVE_CLOCK_DIVISOR || fullmove != TOTAL_MOVE_DIVISOR {
        return Err(NetworkError::Inconsistent(format!(
            "counter divisors {halfmove}/{fullmove} do not match the encoder"
        )));
    }
    let hidden = r.u32()? as usize;
    if hidden != VALUE_HIDDEN {
        return Err(NetworkError::Inconsistent(format!(
            "value hidden width {hidden}, expected {VALUE_HIDDEN}"
        )));
    }
    let step = r.u64()?;
    let config = NetworkConfig {
        blocks,
        channels,
        h,
        clip_max,
    };
    let conv_in = r.conv(config.input_planes(), channels, 3, true)?;
    let mut residual = Vec::with_capacity(blocks - 1);
    for _ in 1..blocks {
        residual.push(ResidualBlock {
            conv1: r.conv(channels, channels, 3, true)?,
            conv2: r.conv(channels, channels, 3, true)?,
        });
    }
    let policy_conv = r.conv(channels, POLICY_PLANES, 1, false)?;
    let value_conv = r.conv(channels, 1, 1, false)?;
    let value_dense1 = DenseLayer {
        in_features: 64,
        out_features: VALUE_HIDDEN,
        weight: r.f32s(VALUE_HIDDEN * 64)?,
        bias: r.f32s(VALUE_HIDDEN)?,
    };
    let value_dense2 = DenseLayer {
        in_features: VALUE_HIDDEN,
        out_features: 1,
        weight: r.f32s(VALUE_HIDDEN)?,
        bias: r.f32s(1)?,
    };
    let mut trailing = [0u8; 1];
    if r.inp.read(&mut trailing)? != 0 {
        return Err(NetworkError::Inconsistent("trailing bytes".into()));
    }
    Ok(Checkpoint {
        config,
        step,
        conv_in,
        residual,
        policy_conv,
        value_conv,
        value_dense1,
        value_dense2,
    })
}

fn check_shapes(ck: &Checkpoint) -> Result<(), NetworkError> {
    let cfg = &ck.config;
    let c = cfg.channels;
    let ok = ck.residual.len() == cfg.blocks - 1
        && ck.conv_in.in_channels == cfg.input_planes()
        && ck.conv_in.out_channels == c
        && ck.policy_conv.out_channels == POLICY_PLANES
        && ck.value_conv.out_channels == 1
        && ck.value_dense1.in_features == 64
        && ck.value_dense1.out_features == VALUE_HIDDEN
        && ck.value_dense2.in_features == VALUE_HIDDEN
        && ck.value_dense2.out_features == 1;
    let finite = ck.conv_in.weight.iter().all(|w| w.is_finite());
    if !ok || !finite {
        return Err(NetworkError::Inconsistent(
            "checkpoint shapes do not match config".into(),
        ));
    }
    Ok(())
}

/// Expected file size in bytes for a given config; used by tests and by the
/// cache tooling for sanity checks.
pub fn checkpoint_file_size(config: &NetworkConfig) -> usize {
    let c = config.channels;
    let conv3 = |i: usize, o: usize| (i * o * 9 + 2 * o) * 4;
    let header = 4 + 4 + 3 * 4 + 3 * 4 + 4 + 8;
    header
        + conv3(config.input_planes(), c)
        + (config.blocks - 1) * 2 * conv3(c, c)
        + (c * POLICY_PLANES + POLICY_PLANES) * 4
        + (c + 1) * 4
        + (VALUE_HIDDEN * 64 + VALUE_HIDDEN) * 4
        + (VALUE_HIDDEN + 1) * 4
}
