//! Grayscale covers, binary watermarks and their netpbm/PNG file forms.
//!
//! Pixels are row-major with a top-left origin. Covers are read from binary
//! PGM (`P5`, maxval 255) or 8-bit grayscale PNG and always written as `P5`.
//! Watermarks are read from `P4` PBM or from a grayscale file thresholded at
//! 128, and written as `P4`.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Threshold for turning grayscale pixels into watermark bits (`>=` is white).
pub const WATERMARK_THRESHOLD: u8 = 128;

/// How pixel intensities are stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// Integers in `0..=255`.
    Byte,
    /// Reals in `[0, 1]`.
    Real,
}

impl Encoding {
    /// Maximum representable intensity, the `range` of the PSNR formula.
    pub fn range(self) -> f64 {
        match self {
            Encoding::Byte => 255.0,
            Encoding::Real => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Byte => "byte",
            Encoding::Real => "real",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Pixels {
    Byte(Vec<u8>),
    Real(Vec<f64>),
}

/// A grayscale raster in either byte or real encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Pixels,
}

impl GrayImage {
    pub fn from_bytes(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        Ok(Self { width, height, pixels: Pixels::Byte(pixels) })
    }

    pub fn from_reals(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_len(width, height, pixels.len())?;
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidParameter(format!("real pixel {bad} outside [0, 1]")));
        }
        Ok(Self { width, height, pixels: Pixels::Real(pixels) })
    }

    /// A byte image with every pixel set to `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self { width, height, pixels: Pixels::Byte(vec![value; width * height]) }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encoding(&self) -> Encoding {
        match self.pixels {
            Pixels::Byte(_) => Encoding::Byte,
            Pixels::Real(_) => Encoding::Real,
        }
    }

    /// Raw bytes of a byte-encoded image.
    pub fn bytes(&self) -> Option<&[u8]> {
        match &self.pixels {
            Pixels::Byte(b) => Some(b),
            Pixels::Real(_) => None,
        }
    }

    pub fn reals(&self) -> Option<&[f64]> {
        match &self.pixels {
            Pixels::Real(r) => Some(r),
            Pixels::Byte(_) => None,
        }
    }

    /// Pixel at column `x`, row `y`, in the image's own scale.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        let i = y * self.width + x;
        match &self.pixels {
            Pixels::Byte(b) => f64::from(b[i]),
            Pixels::Real(r) => r[i],
        }
    }

    /// All pixels as reals in the image's own scale (0..255 or 0..1).
    pub fn to_f64(&self) -> Vec<f64> {
        match &self.pixels {
            Pixels::Byte(b) => b.iter().map(|&p| f64::from(p)).collect(),
            Pixels::Real(r) => r.clone(),
        }
    }

    /// Rebuilds an image of the given encoding from reals in that encoding's
    /// scale, quantizing byte values with [`quantize_byte`].
    pub fn from_f64(width: usize, height: usize, encoding: Encoding, values: &[f64]) -> Result<Self> {
        match encoding {
            Encoding::Byte => Self::from_bytes(width, height, values.iter().map(|&v| quantize_byte(v)).collect()),
            Encoding::Real => Self::from_reals(width, height, values.iter().map(|&v| v.clamp(0.0, 1.0)).collect()),
        }
    }

    pub(crate) fn bytes_mut(&mut self) -> Option<&mut [u8]> {
        match &mut self.pixels {
            Pixels::Byte(b) => Some(b),
            Pixels::Real(_) => None,
        }
    }

    pub(crate) fn reals_mut(&mut self) -> Option<&mut [f64]> {
        match &mut self.pixels {
            Pixels::Real(r) => Some(r),
            Pixels::Byte(_) => None,
        }
    }
}

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    if width * height != len {
        return Err(Error::Dimension(format!("{width}x{height} image needs {} pixels, got {len}", width * height)));
    }
    Ok(())
}

/// Rounds half away from zero and clamps to `0..=255`.
pub fn quantize_byte(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// Converts between byte and real encodings.
///
/// Byte to real divides by 255. Real to byte multiplies by 255, rounds half
/// away from zero and clamps, so byte -> real -> byte is the identity.
pub fn convert_encoding(img: &GrayImage, target: Encoding) -> GrayImage {
    let pixels = match (&img.pixels, target) {
        (Pixels::Byte(_), Encoding::Byte) | (Pixels::Real(_), Encoding::Real) => img.pixels.clone(),
        (Pixels::Byte(b), Encoding::Real) => Pixels::Real(b.iter().map(|&p| f64::from(p) / 255.0).collect()),
        (Pixels::Real(r), Encoding::Byte) => Pixels::Byte(r.iter().map(|&p| quantize_byte(p * 255.0)).collect()),
    };
    GrayImage { width: img.width, height: img.height, pixels }
}

/// A square binary watermark, `0` black and `1` white.
///
/// A watermark may be all black or all white (an extraction can produce one),
/// but the correlation measure and the GA reject those.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryWatermark {
    side: usize,
    bits: Vec<u8>,
    white_count: usize,
}

impl BinaryWatermark {
    pub fn new(side: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != side * side {
            return Err(Error::Dimension(format!(
                "{side}x{side} watermark needs {} bits, got {}",
                side * side,
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter("watermark bits must be 0 or 1".into()));
        }
        let white_count = bits.iter().filter(|&&b| b == 1).count();
        Ok(Self { side, bits, white_count })
    }

    /// Side `m` of the `m x m` mark.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Total number of pixels, `m^2`.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn white_count(&self) -> usize {
        self.white_count
    }

    pub fn black_count(&self) -> usize {
        self.bits.len() - self.white_count
    }

    /// Flat indices of the white pixels, ascending.
    pub fn white_positions(&self) -> Vec<u32> {
        positions_of(&self.bits, 1)
    }

    pub fn black_positions(&self) -> Vec<u32> {
        positions_of(&self.bits, 0)
    }

    /// Renders the mark as a byte image (white 255, black 0).
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.side,
            height: self.side,
            pixels: Pixels::Byte(self.bits.iter().map(|&b| b * 255).collect()),
        }
    }

    /// Thresholds a grayscale image into a watermark.
    pub fn from_gray(img: &GrayImage) -> Result<Self> {
        if img.width != img.height {
            return Err(Error::NonSquareWatermark { width: img.width, height: img.height });
        }
        let cut = f64::from(WATERMARK_THRESHOLD) / 255.0 * img.encoding().range();
        let bits = img.to_f64().iter().map(|&p| u8::from(p >= cut)).collect();
        Self::new(img.width, bits)
    }
}

fn positions_of(bits: &[u8], value: u8) -> Vec<u32> {
    bits.iter().enumerate().filter(|(_, &b)| b == value).map(|(i, _)| i as u32).collect()
}

struct PnmHeader {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: Option<usize>,
    data_offset: usize,
}

/// Parses the ASCII header of a binary netpbm file (P4 or P5).
fn parse_pnm_header(data: &[u8]) -> Result<PnmHeader> {
    if data.len() < 2 || data[0] != b'P' {
        return Err(Error::Format("missing netpbm magic".into()));
    }
    let magic = [data[0], data[1]];
    let fields = match magic[1] {
        b'4' => 2,
        b'5' => 3,
        other => return Err(Error::Format(format!("unsupported netpbm variant P{}", other as char))),
    };

    let mut pos = 2;
    let mut values = Vec::with_capacity(fields);
    while values.len() < fields {
        // whitespace and comments
        loop {
            match data.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while data.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::Format("truncated header".into())),
            }
        }
        let start = pos;
        while data.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("expected a number in header".into()));
        }
        let text = std::str::from_utf8(&data[start..pos]).expect("ascii digits");
        let value = text.parse::<usize>().map_err(|e| Error::Format(format!("bad header number {text}: {e}")))?;
        values.push(value);
    }
    // exactly one whitespace byte separates the header from the raster
    if !data.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(Error::Format("missing whitespace after header".into()));
    }
    pos += 1;

    Ok(PnmHeader { magic, width: values[0], height: values[1], maxval: values.get(2).copied(), data_offset: pos })
}

fn decode_pgm(data: &[u8]) -> Result<GrayImage> {
    let header = parse_pnm_header(data)?;
    if header.magic != *b"P5" {
        return Err(Error::Format("expected a P5 graymap".into()));
    }
    match header.maxval {
        Some(255) => {}
        Some(other) => return Err(Error::UnsupportedDepth(format!("maxval {other}, expected 255"))),
        None => unreachable!("P5 header has a maxval"),
    }
    let len = header.width * header.height;
    let raster = data
        .get(header.data_offset..header.data_offset + len)
        .ok_or_else(|| Error::Format(format!("raster shorter than {len} bytes")))?;
    GrayImage::from_bytes(header.width, header.height, raster.to_vec())
}

fn decode_pbm(data: &[u8]) -> Result<BinaryWatermark> {
    let header = parse_pnm_header(data)?;
    let (w, h) = (header.width, header.height);
    if w != h {
        return Err(Error::NonSquareWatermark { width: w, height: h });
    }
    let stride = w.div_ceil(8);
    let raster = data
        .get(header.data_offset..header.data_offset + stride * h)
        .ok_or_else(|| Error::Format("PBM raster truncated".into()))?;
    let mut bits = Vec::with_capacity(w * h);
    for row in raster.chunks_exact(stride) {
        for x in 0..w {
            let ink = (row[x / 8] >> (7 - x % 8)) & 1;
            // PBM marks black pixels with 1
            bits.push(1 - ink);
        }
    }
    BinaryWatermark::new(w, bits)
}

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

fn decode_png(data: &[u8]) -> Result<GrayImage> {
    use ::image::{ColorType, ImageFormat};

    let img = ::image::load_from_memory_with_format(data, ImageFormat::Png)
        .map_err(|e| Error::Format(format!("png: {e}")))?;
    match img.color() {
        ColorType::L8 => {}
        ColorType::L16 => return Err(Error::UnsupportedDepth("16-bit grayscale PNG".into())),
        other => return Err(Error::Format(format!("non-grayscale PNG ({other:?})"))),
    }
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::from_bytes(w as usize, h as usize, luma.into_raw())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Decodes a P5 graymap or 8-bit grayscale PNG from memory.
pub fn decode_gray(data: &[u8]) -> Result<GrayImage> {
    if data.starts_with(PNG_SIGNATURE) {
        decode_png(data)
    } else {
        decode_pgm(data)
    }
}

/// Reads a byte-encoded grayscale image from a P5 PGM or 8-bit PNG file.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_gray(&read(path.as_ref())?)
}

/// Serializes a byte image as a binary P5 graymap.
pub fn encode_pgm(img: &GrayImage) -> Result<Vec<u8>> {
    let bytes = img.bytes().ok_or(Error::EncodingMismatch { expected: "byte", actual: "real" })?;
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(bytes);
    Ok(out)
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let data = encode_pgm(img)?;
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Decodes a watermark from P4 PBM, or from P5/PNG thresholded at 128.
pub fn decode_watermark(data: &[u8]) -> Result<BinaryWatermark> {
    if data.starts_with(b"P4") {
        decode_pbm(data)
    } else {
        BinaryWatermark::from_gray(&decode_gray(data)?)
    }
}

pub fn load_watermark(path: impl AsRef<Path>) -> Result<BinaryWatermark> {
    decode_watermark(&read(path.as_ref())?)
}

/// Serializes a watermark as a P4 bitmap (PBM ink = black = bit 0).
pub fn encode_pbm(wm: &BinaryWatermark) -> Vec<u8> {
    let side = wm.side;
    let stride = side.div_ceil(8);
    let mut out = format!("P4\n{side} {side}\n").into_bytes();
    for row in wm.bits.chunks_exact(side.max(1)).take(side) {
        let mut packed = vec![0u8; stride];
        for (x, &bit) in row.iter().enumerate() {
            if bit == 0 {
                packed[x / 8] |= 1 << (7 - x % 8);
            }
        }
        out.extend_from_slice(&packed);
    }
    out
}

pub fn save_watermark(wm: &BinaryWatermark, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pbm(wm)).map_err(|e| Error::io(path, e))
}
