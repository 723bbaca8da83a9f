//! The `CVRAST01` raster container and PGM export.
//!
//! Layout, all integers little-endian:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 8    | magic `CVRAST01`                       |
//! | 8      | 1    | dtype: 1 = u8, 2 = u16, 3 = f32        |
//! | 9      | 1    | channels: 1 or 2                       |
//! | 10     | 2    | reserved, zero                         |
//! | 12     | 4    | height (u32)                           |
//! | 16     | 4    | width (u32)                            |
//! | 20     | ...  | payload, row-major, channel-planar     |
//!
//! `(dtype, channels)` selects the value type: u8/1 binary mask (nonzero is
//! true), u16/1 label map, f32/1 scalar field, f32/2 vector field (dx plane
//! then dy plane). Values are held as `f64` in memory and stored as `f32`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{BinaryMask, LabelMap, RasterShape, ScalarField, VectorField};

pub const MAGIC: &[u8; 8] = b"CVRAST01";
pub const HEADER_LEN: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum DType {
    U8 = 1,
    U16 = 2,
    F32 = 3,
}

impl DType {
    fn size(self) -> usize {
        match self {
            DType::U8 => 1,
            DType::U16 => 2,
            DType::F32 => 4,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            1 => Ok(DType::U8),
            2 => Ok(DType::U16),
            3 => Ok(DType::F32),
            other => Err(Error::UnsupportedHeader(format!("dtype code {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RasterValue {
    Mask(BinaryMask),
    Labels(LabelMap),
    Scalar(ScalarField),
    Vector(VectorField),
}

impl RasterValue {
    pub fn kind(&self) -> &'static str {
        match self {
            RasterValue::Mask(_) => "binary mask (u8x1)",
            RasterValue::Labels(_) => "label map (u16x1)",
            RasterValue::Scalar(_) => "scalar field (f32x1)",
            RasterValue::Vector(_) => "vector field (f32x2)",
        }
    }

    pub fn shape(&self) -> RasterShape {
        match self {
            RasterValue::Mask(m) => m.shape(),
            RasterValue::Labels(m) => m.shape(),
            RasterValue::Scalar(m) => m.shape(),
            RasterValue::Vector(m) => m.shape(),
        }
    }

    fn mismatch(&self, expected: &str) -> Error {
        Error::TypeMismatch {
            expected: expected.into(),
            found: self.kind().into(),
        }
    }

    pub fn into_labels(self) -> Result<LabelMap> {
        match self {
            RasterValue::Labels(m) => Ok(m),
            other => Err(other.mismatch("label map (u16x1)")),
        }
    }

    pub fn into_mask(self) -> Result<BinaryMask> {
        match self {
            RasterValue::Mask(m) => Ok(m),
            other => Err(other.mismatch("binary mask (u8x1)")),
        }
    }

    pub fn into_vectors(self) -> Result<VectorField> {
        match self {
            RasterValue::Vector(m) => Ok(m),
            other => Err(other.mismatch("vector field (f32x2)")),
        }
    }

    /// Probability field from either a scalar field or a binary mask (0/1).
    pub fn into_probability(self) -> Result<ScalarField> {
        match self {
            RasterValue::Scalar(m) => Ok(m),
            RasterValue::Mask(m) => Ok(m.map(|&b| if b { 1.0 } else { 0.0 })),
            other => Err(other.mismatch("scalar field (f32x1) or binary mask (u8x1)")),
        }
    }
}

fn header(dtype: DType, channels: u8, shape: RasterShape) -> Result<Vec<u8>> {
    let h = u32::try_from(shape.height()).map_err(|_| Error::UnsupportedHeader("height exceeds u32".into()))?;
    let w = u32::try_from(shape.width()).map_err(|_| Error::UnsupportedHeader("width exceeds u32".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + shape.len() * channels as usize * dtype.size());
    out.extend_from_slice(MAGIC);
    out.push(dtype as u8);
    out.push(channels);
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&h.to_le_bytes());
    out.extend_from_slice(&w.to_le_bytes());
    Ok(out)
}

fn push_f32(out: &mut Vec<u8>, values: &[f64]) -> Result<()> {
    for &v in values {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::NonFinite(format!("value {v} does not fit f32")));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(())
}

pub fn to_bytes(value: &RasterValue) -> Result<Vec<u8>> {
    match value {
        RasterValue::Mask(m) => {
            let mut out = header(DType::U8, 1, m.shape())?;
            out.extend(m.data().iter().map(|&b| b as u8));
            Ok(out)
        }
        RasterValue::Labels(m) => {
            let mut out = header(DType::U16, 1, m.shape())?;
            for &l in m.data() {
                let v = u16::try_from(l).map_err(|_| Error::LabelOverflow(l))?;
                out.extend_from_slice(&v.to_le_bytes());
            }
            Ok(out)
        }
        RasterValue::Scalar(m) => {
            let mut out = header(DType::F32, 1, m.shape())?;
            push_f32(&mut out, m.data())?;
            Ok(out)
        }
        RasterValue::Vector(v) => {
            let mut out = header(DType::F32, 2, v.shape())?;
            push_f32(&mut out, v.dx())?;
            push_f32(&mut out, v.dy())?;
            Ok(out)
        }
    }
}

fn read_f32s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect()
}

pub fn from_bytes(bytes: &[u8]) -> Result<RasterValue> {
    if bytes.len() < 8 {
        return Err(if MAGIC.starts_with(bytes) {
            Error::Truncated { expected: HEADER_LEN, found: bytes.len() }
        } else {
            Error::BadMagic
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN, found: bytes.len() });
    }
    let dtype = DType::from_code(bytes[8])?;
    let channels = bytes[9];
    let height = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as usize;
    let shape = RasterShape::new(height, width)?;
    let payload_len = shape.len() * channels as usize * dtype.size();
    let expected = HEADER_LEN + payload_len;
    if bytes.len() < expected {
        return Err(Error::Truncated { expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(Error::UnsupportedHeader(format!(
            "{} trailing bytes after payload",
            bytes.len() - expected
        )));
    }
    let payload = &bytes[HEADER_LEN..];
    match (dtype, channels) {
        (DType::U8, 1) => Ok(RasterValue::Mask(BinaryMask::from_vec(
            shape,
            payload.iter().map(|&b| b != 0).collect(),
        )?)),
        (DType::U16, 1) => Ok(RasterValue::Labels(LabelMap::from_vec(
            shape,
            payload
                .chunks_exact(2)
                .map(|b| u16::from_le_bytes([b[0], b[1]]) as u32)
                .collect(),
        )?)),
        (DType::F32, 1) => {
            let field = ScalarField::from_vec(shape, read_f32s(payload))?;
            field.check_finite()?;
            Ok(RasterValue::Scalar(field))
        }
        (DType::F32, 2) => {
            let (dx, dy) = payload.split_at(payload_len / 2);
            Ok(RasterValue::Vector(VectorField::from_channels(
                shape,
                read_f32s(dx),
                read_f32s(dy),
            )?))
        }
        (d, c) => Err(Error::UnsupportedHeader(format!("dtype {d:?} with {c} channels"))),
    }
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<RasterValue> {
    from_bytes(&fs::read(path)?)
}

pub fn write_raster(value: &RasterValue, path: impl AsRef<Path>) -> Result<()> {
    let bytes = to_bytes(value)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    read_raster(path)?.into_labels()
}

/// Binary PGM (`P5`) with 16-bit big-endian samples; maxval is
/// `max(max_label, 256)` so the file is always 16-bit.
pub fn pgm_bytes(labels: &LabelMap) -> Result<Vec<u8>> {
    let max = labels.max_label();
    let maxval = u16::try_from(max.max(256)).map_err(|_| Error::LabelOverflow(max))?;
    let mut out = Vec::new();
    write!(out, "P5\n{} {}\n{}\n", labels.width(), labels.height(), maxval)?;
    for &l in labels.data() {
        out.extend_from_slice(&(l as u16).to_be_bytes());
    }
    Ok(out)
}

pub fn write_pgm(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, pgm_bytes(labels)?)?;
    Ok(())
}
