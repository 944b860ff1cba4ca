//! The BIOREG1 raster container.
//!
//! A file is a UTF-8 header followed by raw pixel data. The header is a
//! sequence of `key: value` lines terminated by one blank line (`\n\n`); the
//! first line must be `magic: BIOREG1`. Nine keys are required:
//!
//! ```text
//! magic: BIOREG1
//! kind: image | field | mask
//! width: <pixels>
//! height: <pixels>
//! channels: <count>
//! spacing_x_mm: <f64>
//! spacing_y_mm: <f64>
//! dtype: f32 | u8
//! byte_order: little
//! ```
//!
//! The payload holds exactly `width * height * channels` elements,
//! channel-interleaved, row-major, little-endian. Serialization is
//! canonical (fixed key order, shortest float formatting), so
//! `parse(serialize(x)) == x` bit-exactly; the parser additionally accepts
//! any key order after `magic`.
//!
//! Conventions used by the tool: images are single-channel `f32`;
//! displacement fields are two-channel `f32` in mm (channel 0 = horizontal
//! `u1`, channel 1 = vertical `u2`); mask sets are `u8` with one channel
//! per structure and values restricted to 0/1. Structures are named
//! positionally `structure_0`, `structure_1`, … by channel index.

use std::fmt::Write as _;

use bioreg_core::{
    BinaryMask2D, DisplacementField2D, Grid2D, ScalarImage2D, SegMaskSet, SegStructure,
};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RasterKind {
    Image,
    Field,
    Mask,
}

impl RasterKind {
    fn as_str(self) -> &'static str {
        match self {
            RasterKind::Image => "image",
            RasterKind::Field => "field",
            RasterKind::Mask => "mask",
        }
    }
}

/// Payload storage; the dtype is implied by the variant.
#[derive(Clone, Debug, PartialEq)]
pub enum RasterData {
    F32(Vec<f32>),
    U8(Vec<u8>),
}

impl RasterData {
    pub fn len(&self) -> usize {
        match self {
            RasterData::F32(v) => v.len(),
            RasterData::U8(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dtype_str(&self) -> &'static str {
        match self {
            RasterData::F32(_) => "f32",
            RasterData::U8(_) => "u8",
        }
    }
}

/// An in-memory BIOREG1 file.
#[derive(Clone, Debug, PartialEq)]
pub struct RasterFile {
    pub kind: RasterKind,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub spacing: (f64, f64),
    pub data: RasterData,
}

fn parse_error(detail: impl Into<String>) -> CliError {
    CliError::Format {
        detail: detail.into(),
    }
}

impl RasterFile {
    /// Validates the element count and basic geometry.
    pub fn new(
        kind: RasterKind,
        width: usize,
        height: usize,
        channels: usize,
        spacing: (f64, f64),
        data: RasterData,
    ) -> Result<Self, CliError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(parse_error("width, height, and channels must be positive"));
        }
        if !(spacing.0.is_finite() && spacing.0 > 0.0 && spacing.1.is_finite() && spacing.1 > 0.0)
        {
            return Err(parse_error("spacing must be finite and positive"));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| parse_error("raster dimensions overflow"))?;
        if data.len() != expected {
            return Err(parse_error(format!(
                "payload holds {} elements, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            kind,
            width,
            height,
            channels,
            spacing,
            data,
        })
    }

    /// Canonical byte serialization (header + little-endian payload).
    pub fn serialize(&self) -> Vec<u8> {
        let mut header = String::new();
        // Writing to a String cannot fail.
        let _ = write!(
            header,
            "magic: BIOREG1\nkind: {}\nwidth: {}\nheight: {}\nchannels: {}\nspacing_x_mm: {}\nspacing_y_mm: {}\ndtype: {}\nbyte_order: little\n\n",
            self.kind.as_str(),
            self.width,
            self.height,
            self.channels,
            self.spacing.0,
            self.spacing.1,
            self.data.dtype_str(),
        );
        let mut bytes = header.into_bytes();
        match &self.data {
            RasterData::F32(values) => {
                bytes.reserve(values.len() * 4);
                for v in values {
                    bytes.extend_from_slice(&v.to_le_bytes());
                }
            }
            RasterData::U8(values) => bytes.extend_from_slice(values),
        }
        bytes
    }

    /// Parses a BIOREG1 byte stream.
    pub fn parse(bytes: &[u8]) -> Result<Self, CliError> {
        // Locate the header terminator: the first blank line.
        let boundary = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| parse_error("missing blank line after header"))?;
        let header = std::str::from_utf8(&bytes[..boundary + 1])
            .map_err(|_| parse_error("header is not valid UTF-8"))?;
        let payload = &bytes[boundary + 2..];

        let mut kind = None;
        let mut width = None;
        let mut height = None;
        let mut channels = None;
        let mut spacing_x = None;
        let mut spacing_y = None;
        let mut dtype = None;
        let mut byte_order = None;
        let mut saw_magic = false;

        for (index, line) in header.lines().enumerate() {
            let (key, value) = line
                .split_once(": ")
                .ok_or_else(|| parse_error(format!("malformed header line {:?}", line)))?;
            if index == 0 && key != "magic" {
                return Err(parse_error("first header line must be the magic"));
            }
            let duplicate = |k: &str| parse_error(format!("duplicate header key {k:?}"));
            match key {
                "magic" => {
                    if saw_magic {
                        return Err(duplicate(key));
                    }
                    if value != "BIOREG1" {
                        return Err(parse_error(format!("unsupported magic {value:?}")));
                    }
                    saw_magic = true;
                }
                "kind" => {
                    if kind.is_some() {
                        return Err(duplicate(key));
                    }
                    kind = Some(match value {
                        "image" => RasterKind::Image,
                        "field" => RasterKind::Field,
                        "mask" => RasterKind::Mask,
                        other => return Err(parse_error(format!("unknown kind {other:?}"))),
                    });
                }
                "width" | "height" | "channels" => {
                    let slot = match key {
                        "width" => &mut width,
                        "height" => &mut height,
                        _ => &mut channels,
                    };
                    if slot.is_some() {
                        return Err(duplicate(key));
                    }
                    *slot = Some(value.parse::<usize>().map_err(|_| {
                        parse_error(format!("{key} must be a non-negative integer, got {value:?}"))
                    })?);
                }
                "spacing_x_mm" | "spacing_y_mm" => {
                    let slot = if key == "spacing_x_mm" {
                        &mut spacing_x
                    } else {
                        &mut spacing_y
                    };
                    if slot.is_some() {
                        return Err(duplicate(key));
                    }
                    *slot = Some(value.parse::<f64>().map_err(|_| {
                        parse_error(format!("{key} must be a number, got {value:?}"))
                    })?);
                }
                "dtype" => {
                    if dtype.is_some() {
                        return Err(duplicate(key));
                    }
                    dtype = Some(match value {
                        "f32" => "f32",
                        "u8" => "u8",
                        other => return Err(parse_error(format!("unknown dtype {other:?}"))),
                    });
                }
                "byte_order" => {
                    if byte_order.is_some() {
                        return Err(duplicate(key));
                    }
                    if value != "little" {
                        return Err(parse_error(format!(
                            "unsupported byte order {value:?}"
                        )));
                    }
                    byte_order = Some(());
                }
                other => return Err(parse_error(format!("unknown header key {other:?}"))),
            }
        }

        if !saw_magic {
            return Err(parse_error("missing magic line"));
        }
        let missing = |k: &str| parse_error(format!("missing header key {k:?}"));
        let kind = kind.ok_or_else(|| missing("kind"))?;
        let width = width.ok_or_else(|| missing("width"))?;
        let height = height.ok_or_else(|| missing("height"))?;
        let channels = channels.ok_or_else(|| missing("channels"))?;
        let spacing_x = spacing_x.ok_or_else(|| missing("spacing_x_mm"))?;
        let spacing_y = spacing_y.ok_or_else(|| missing("spacing_y_mm"))?;
        let dtype = dtype.ok_or_else(|| missing("dtype"))?;
        byte_order.ok_or_else(|| missing("byte_order"))?;

        let count = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels))
            .ok_or_else(|| parse_error("raster dimensions overflow"))?;
        let data = match dtype {
            "f32" => {
                if payload.len() != count * 4 {
                    return Err(parse_error(format!(
                        "payload is {} bytes, expected {} (f32 x {count})",
                        payload.len(),
                        count * 4
                    )));
                }
                RasterData::F32(
                    payload
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                        .collect(),
                )
            }
            _ => {
                if payload.len() != count {
                    return Err(parse_error(format!(
                        "payload is {} bytes, expected {count} (u8)",
                        payload.len()
                    )));
                }
                RasterData::U8(payload.to_vec())
            }
        };
        RasterFile::new(kind, width, height, channels, (spacing_x, spacing_y), data)
    }

    fn grid(&self) -> Result<Grid2D, CliError> {
        Ok(Grid2D::new(self.width, self.height, self.spacing)?)
    }

    fn f32_payload(&self) -> Result<&[f32], CliError> {
        match &self.data {
            RasterData::F32(v) => Ok(v),
            RasterData::U8(_) => Err(parse_error("expected f32 payload")),
        }
    }

    /// Interprets a single-channel `image` as a scalar image.
    pub fn to_scalar_image(&self) -> Result<ScalarImage2D, CliError> {
        if self.kind != RasterKind::Image || self.channels != 1 {
            return Err(parse_error(format!(
                "expected a single-channel image, found {} with {} channels",
                self.kind.as_str(),
                self.channels
            )));
        }
        let data = self.f32_payload()?.iter().map(|&v| v as f64).collect();
        Ok(ScalarImage2D::new(self.grid()?, data)?)
    }

    /// Interprets a two-channel `field` as a displacement field (mm).
    pub fn to_field(&self) -> Result<DisplacementField2D, CliError> {
        if self.kind != RasterKind::Field || self.channels != 2 {
            return Err(parse_error(format!(
                "expected a two-channel field, found {} with {} channels",
                self.kind.as_str(),
                self.channels
            )));
        }
        let values = self.f32_payload()?;
        let n = self.width * self.height;
        let mut u1 = Vec::with_capacity(n);
        let mut u2 = Vec::with_capacity(n);
        for pair in values.chunks_exact(2) {
            u1.push(pair[0] as f64);
            u2.push(pair[1] as f64);
        }
        Ok(DisplacementField2D::new(self.grid()?, u1, u2)?)
    }

    /// Interprets a `mask` raster as a structure set; channel `i` becomes
    /// the structure labeled `structure_i`.
    pub fn to_mask_set(&self) -> Result<SegMaskSet, CliError> {
        if self.kind != RasterKind::Mask {
            return Err(parse_error(format!(
                "expected a mask, found {}",
                self.kind.as_str()
            )));
        }
        let values = match &self.data {
            RasterData::U8(v) => v,
            RasterData::F32(_) => return Err(parse_error("masks must use the u8 dtype")),
        };
        let grid = self.grid()?;
        let n = self.width * self.height;
        let mut structures = Vec::with_capacity(self.channels);
        for ch in 0..self.channels {
            let mut data = Vec::with_capacity(n);
            for px in 0..n {
                data.push(values[px * self.channels + ch]);
            }
            structures.push(SegStructure {
                label: format!("structure_{ch}"),
                mask: BinaryMask2D::new(grid, data)?,
            });
        }
        Ok(SegMaskSet::new(structures)?)
    }

    pub fn from_scalar_image(image: &ScalarImage2D) -> Self {
        let g = image.grid();
        Self {
            kind: RasterKind::Image,
            width: g.width,
            height: g.height,
            channels: 1,
            spacing: g.spacing,
            data: RasterData::F32(image.data().iter().map(|&v| v as f32).collect()),
        }
    }

    pub fn from_field(field: &DisplacementField2D) -> Self {
        let g = field.grid();
        let mut values = Vec::with_capacity(2 * g.len());
        for i in 0..g.len() {
            values.push(field.u1()[i] as f32);
            values.push(field.u2()[i] as f32);
        }
        Self {
            kind: RasterKind::Field,
            width: g.width,
            height: g.height,
            channels: 2,
            spacing: g.spacing,
            data: RasterData::F32(values),
        }
    }

    /// Stores the masks channel-interleaved in structure order; labels are
    /// not written (they are positional).
    pub fn from_mask_set(set: &SegMaskSet) -> Self {
        let g = set.grid();
        let channels = set.structures().len();
        let mut values = vec![0u8; g.len() * channels];
        for (ch, s) in set.structures().iter().enumerate() {
            for px in 0..g.len() {
                values[px * channels + ch] = s.mask.data()[px];
            }
        }
        Self {
            kind: RasterKind::Mask,
            width: g.width,
            height: g.height,
            channels,
            spacing: g.spacing,
            data: RasterData::U8(values),
        }
    }

    pub fn from_single_mask(mask: &BinaryMask2D) -> Self {
        let g = mask.grid();
        Self {
            kind: RasterKind::Mask,
            width: g.width,
            height: g.height,
            channels: 1,
            spacing: g.spacing,
            data: RasterData::U8(mask.data().to_vec()),
        }
    }

    /// Interprets a single-channel mask as one binary mask.
    pub fn to_single_mask(&self) -> Result<BinaryMask2D, CliError> {
        let set = self.to_mask_set()?;
        if set.structures().len() != 1 {
            return Err(parse_error(format!(
                "expected a single-channel mask, found {} channels",
                self.channels
            )));
        }
        Ok(set.structures()[0].mask.clone())
    }
}
