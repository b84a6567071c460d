//! Block embedding and blind extraction.
//!
//! The cover is cut into `m x m` blocks of side `floor(n/m)`. The `4t x 4t`
//! sub-block anchored at each block's top-left corner is transformed, and the
//! order of two coefficients `b1 = B(ra, ca)`, `b2 = B(rb, cb)` carries one
//! bit: `b2 > b1` means 0, anything else means 1. Embedding pushes the pair
//! apart to `mid -+ b` only when the current order disagrees with the bit.
//!
//! With a Sylvester matrix of order `4t`, each pixel of an updated sub-block
//! moves by `0` or `±(d + b)/2t` before rounding. That is why `b` around `t`
//! is the threshold for byte images.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::permutation::{apply_permutation, Permutation};
use crate::hadamard::{select_order, sylvester, Block, HadamardMatrix};
use crate::image::{quantize_byte, BinaryWatermark, Encoding, GrayImage};
use crate::par;

/// Coefficient pair and margin used for every block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmbedParams {
    /// Margin: an updated pair ends exactly `2b` apart.
    pub b: f64,
    /// 1-based `(row, col)` of `b1`.
    pub coeff_a: (usize, usize),
    /// 1-based `(row, col)` of `b2`.
    pub coeff_b: (usize, usize),
    /// Hadamard order `4t`.
    pub order: usize,
    /// Also widen pairs that already encode the bit but sit closer than
    /// `2b`. Off by default.
    pub strict_margin: bool,
}

impl EmbedParams {
    pub const DEFAULT_COEFF_A: (usize, usize) = (3, 3);
    pub const DEFAULT_COEFF_B: (usize, usize) = (3, 5);

    /// Default pair `(3,3)`/`(3,5)` with the byte-image default margin.
    pub fn new(order: usize) -> Self {
        Self {
            b: default_b(order, Encoding::Byte),
            coeff_a: Self::DEFAULT_COEFF_A,
            coeff_b: Self::DEFAULT_COEFF_B,
            order,
            strict_margin: false,
        }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!("margin b = {} must be finite and >= 0", self.b)));
        }
        if self.coeff_a == self.coeff_b {
            return Err(Error::InvalidParameter("coefficient positions must differ".into()));
        }
        for (r, c) in [self.coeff_a, self.coeff_b] {
            if r == 0 || c == 0 || r > self.order || c > self.order {
                return Err(Error::InvalidParameter(format!("coefficient ({r},{c}) outside 1..={}", self.order)));
            }
            if (r, c) == (1, 1) {
                return Err(Error::InvalidParameter("coefficient (1,1) carries the block mean".into()));
            }
        }
        Ok(())
    }

    fn index_a(&self) -> (usize, usize) {
        (self.coeff_a.0 - 1, self.coeff_a.1 - 1)
    }

    fn index_b(&self) -> (usize, usize) {
        (self.coeff_b.0 - 1, self.coeff_b.1 - 1)
    }
}

/// Default margin: `t + 0.01` for byte images (just above the rounding
/// threshold), `0.01` for real ones.
pub fn default_b(order: usize, encoding: Encoding) -> f64 {
    match encoding {
        Encoding::Byte => order as f64 / 4.0 + 0.01,
        Encoding::Real => 0.01,
    }
}

/// Everything blind extraction needs.
#[derive(Clone, Debug, PartialEq)]
pub struct WatermarkKey {
    pub m: usize,
    pub n: usize,
    pub block_side: usize,
    pub params: EmbedParams,
    /// Permutation applied to the watermark before embedding; `None` is the
    /// identity.
    pub perm: Option<Permutation>,
    pub rng_seed: Option<u64>,
}

impl WatermarkKey {
    /// Key for an `n x n` cover and `m x m` mark with the largest Sylvester
    /// order fitting `floor(n/m)` and the default parameters.
    pub fn for_sizes(n: usize, m: usize) -> Result<Self> {
        if m == 0 || n < m {
            return Err(Error::Dimension(format!("{m}x{m} watermark does not fit a {n}x{n} cover")));
        }
        let order = select_order(n / m)?;
        Self::new(m, n, EmbedParams::new(order))
    }

    pub fn new(m: usize, n: usize, params: EmbedParams) -> Result<Self> {
        let key = Self { m, n, block_side: n.checked_div(m).unwrap_or(0), params, perm: None, rng_seed: None };
        key.validate()?;
        Ok(key)
    }

    pub fn with_perm(mut self, perm: Permutation, rng_seed: Option<u64>) -> Result<Self> {
        self.perm = Some(perm);
        self.rng_seed = rng_seed;
        self.validate()?;
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.params.order
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.m == 0 || self.block_side == 0 || self.m * self.block_side > self.n {
            return Err(Error::Dimension(format!(
                "{} blocks of side {} do not fit a cover of side {}",
                self.m, self.block_side, self.n
            )));
        }
        if self.params.order > self.block_side {
            return Err(Error::Dimension(format!(
                "Hadamard order {} exceeds block side {}",
                self.params.order, self.block_side
            )));
        }
        if let Some(perm) = &self.perm {
            if perm.len() != self.m * self.m {
                return Err(Error::InvalidPermutation(format!(
                    "permutation of length {} for a {}x{} watermark",
                    perm.len(),
                    self.m,
                    self.m
                )));
            }
        }
        Ok(())
    }

    pub fn hadamard(&self) -> Result<HadamardMatrix> {
        sylvester(self.params.order)
    }

    fn check_image(&self, img: &GrayImage) -> Result<()> {
        if img.width() != self.n || img.height() != self.n {
            return Err(Error::Dimension(format!(
                "key expects a {0}x{0} image, got {1}x{2}",
                self.n,
                img.width(),
                img.height()
            )));
        }
        Ok(())
    }
}

/// Embeds one bit into a sub-block and returns the modified sub-block (in
/// real values, before any quantization).
pub fn embed_block(block: &Block, bit: u8, params: &EmbedParams, h: &HadamardMatrix) -> Result<Block> {
    let coeffs = h.forward(block)?;
    let (ia, ib) = (params.index_a(), params.index_b());
    let (b1, b2) = (coeffs.get(ia.0, ia.1), coeffs.get(ib.0, ib.1));
    let d = (b1 - b2).abs() / 2.0;
    let b = params.b;

    let target = match bit {
        0 if b2 <= b1 => Some((b1 - d - b, b2 + d + b)),
        1 if b2 >= b1 => Some((b1 + d + b, b2 - d - b)),
        0 | 1 if params.strict_margin && (b2 - b1).abs() < 2.0 * b => {
            let mid = (b1 + b2) / 2.0;
            Some(if bit == 0 { (mid - b, mid + b) } else { (mid + b, mid - b) })
        }
        0 | 1 => None,
        other => return Err(Error::InvalidParameter(format!("bit must be 0 or 1, got {other}"))),
    };
    let Some((new_b1, new_b2)) = target else {
        return Ok(block.clone());
    };

    // Add the inverse of the two-coefficient change instead of inverting the
    // whole block: the delta is exact in binary for the usual margins.
    let mut delta = Block::zeros(h.order());
    delta.set(ia.0, ia.1, new_b1 - b1);
    delta.set(ib.0, ib.1, new_b2 - b2);
    let change = h.inverse(&delta)?;
    Ok(Block::from_fn(h.order(), |r, c| block.get(r, c) + change.get(r, c)))
}

/// Reads the bit of one sub-block: 0 iff `b2 > b1`.
pub fn extract_block(block: &Block, params: &EmbedParams, h: &HadamardMatrix) -> Result<u8> {
    let coeffs = h.forward(block)?;
    let (ia, ib) = (params.index_a(), params.index_b());
    Ok(if coeffs.get(ib.0, ib.1) > coeffs.get(ia.0, ia.1) { 0 } else { 1 })
}

/// Pixel storage the codec can rewrite in place.
trait Pixel: Copy + Send + Sync {
    fn value(self) -> f64;
    fn store(v: f64) -> Self;
}

impl Pixel for u8 {
    fn value(self) -> f64 {
        f64::from(self)
    }

    fn store(v: f64) -> Self {
        quantize_byte(v)
    }
}

impl Pixel for f64 {
    fn value(self) -> f64 {
        self
    }

    fn store(v: f64) -> Self {
        v.clamp(0.0, 1.0)
    }
}

fn read_sub_block<P: Pixel>(rows: &[P], stride: usize, x0: usize, order: usize) -> Block {
    Block::from_fn(order, |r, c| rows[r * stride + x0 + c].value())
}

fn embed_pixels<P: Pixel>(pixels: &mut [P], bits: &[u8], key: &WatermarkKey, h: &HadamardMatrix) -> Result<()> {
    let (n, m, side, order) = (key.n, key.m, key.block_side, key.order());
    let band = side * n;
    let failure = std::sync::Mutex::new(None);
    par::for_each_chunk_mut(&mut pixels[..m * band], band, |by, rows| {
        for bx in 0..m {
            let x0 = bx * side;
            let block = read_sub_block(rows, n, x0, order);
            match embed_block(&block, bits[by * m + bx], &key.params, h) {
                Ok(marked) => {
                    for r in 0..order {
                        for c in 0..order {
                            rows[r * n + x0 + c] = P::store(marked.get(r, c));
                        }
                    }
                }
                Err(e) => {
                    failure.lock().unwrap().get_or_insert(e);
                    return;
                }
            }
        }
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Embeds `wm` into `cover`, one bit per block in row-major order.
///
/// `wm` is embedded as given: when the key carries a permutation the caller
/// passes the already-permuted mark (see [`embed_with_key_perm`]). Byte
/// results are rounded half away from zero and clamped; pixels outside the
/// sub-blocks are left untouched.
pub fn embed(cover: &GrayImage, wm: &BinaryWatermark, key: &WatermarkKey) -> Result<GrayImage> {
    key.validate()?;
    key.check_image(cover)?;
    if wm.side() != key.m {
        return Err(Error::Dimension(format!("key expects a {0}x{0} watermark, got {1}x{1}", key.m, wm.side())));
    }
    let h = key.hadamard()?;
    let mut out = cover.clone();
    match cover.encoding() {
        Encoding::Byte => embed_pixels(out.bytes_mut().unwrap(), wm.bits(), key, &h)?,
        Encoding::Real => embed_pixels(out.reals_mut().unwrap(), wm.bits(), key, &h)?,
    }
    Ok(out)
}

/// Applies the key's permutation (if any) to the original mark, then embeds.
pub fn embed_with_key_perm(cover: &GrayImage, original: &BinaryWatermark, key: &WatermarkKey) -> Result<GrayImage> {
    match &key.perm {
        Some(perm) => embed(cover, &apply_permutation(original, perm)?, key),
        None => embed(cover, original, key),
    }
}

/// Blind extraction: reads the block bits without the cover, then undoes the
/// key's permutation.
pub fn extract(img: &GrayImage, key: &WatermarkKey) -> Result<BinaryWatermark> {
    let raw = extract_raw(img, key)?;
    match &key.perm {
        Some(perm) if !perm.is_identity() => apply_permutation(&raw, &perm.inverse()),
        _ => Ok(raw),
    }
}

/// Block bits in embedding order, without undoing any permutation.
pub fn extract_raw(img: &GrayImage, key: &WatermarkKey) -> Result<BinaryWatermark> {
    key.validate()?;
    key.check_image(img)?;
    let h = key.hadamard()?;
    let (n, m, side, order) = (key.n, key.m, key.block_side, key.order());
    let values = img.to_f64();
    let bits = par::map_indices(m * m, |i| {
        let (by, bx) = (i / m, i % m);
        let rows = &values[by * side * n..];
        let block = read_sub_block(rows, n, bx * side, order);
        extract_block(&block, &key.params, &h)
    })
    .into_iter()
    .collect::<Result<Vec<u8>>>()?;
    BinaryWatermark::new(m, bits)
}

pub const KEY_VERSION: u64 = 1;

/// On-disk key layout; field order is the serialization order.
#[derive(Serialize, Deserialize)]
struct KeyFile {
    version: u64,
    m: usize,
    n: usize,
    order: usize,
    block_side: usize,
    b: f64,
    coeff_a: [usize; 2],
    coeff_b: [usize; 2],
    #[serde(default)]
    perm: Option<Vec<u64>>,
    #[serde(default)]
    rng_seed: Option<u64>,
}

impl WatermarkKey {
    /// Single-line JSON; the permutation is stored 1-based.
    pub fn to_json(&self) -> String {
        let file = KeyFile {
            version: KEY_VERSION,
            m: self.m,
            n: self.n,
            order: self.params.order,
            block_side: self.block_side,
            b: self.params.b,
            coeff_a: [self.params.coeff_a.0, self.params.coeff_a.1],
            coeff_b: [self.params.coeff_b.0, self.params.coeff_b.1],
            perm: self.perm.as_ref().map(Permutation::to_one_based),
            rng_seed: self.rng_seed,
        };
        let mut json = serde_json::to_string(&file).expect("key serializes");
        json.push('\n');
        json
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KeyFile = serde_json::from_str(text).map_err(|e| Error::Key(e.to_string()))?;
        if file.version != KEY_VERSION {
            return Err(Error::KeyVersion(file.version));
        }
        let perm = file.perm.as_deref().map(Permutation::from_one_based).transpose()?;
        let key = Self {
            m: file.m,
            n: file.n,
            block_side: file.block_side,
            params: EmbedParams {
                b: file.b,
                coeff_a: (file.coeff_a[0], file.coeff_a[1]),
                coeff_b: (file.coeff_b[0], file.coeff_b[1]),
                order: file.order,
                strict_margin: false,
            },
            perm,
            rng_seed: file.rng_seed,
        };
        key.validate()?;
        Ok(key)
    }
}

pub fn save_key(key: &WatermarkKey, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, key.to_json()).map_err(|e| Error::io(path, e))
}

pub fn load_key(path: impl AsRef<Path>) -> Result<WatermarkKey> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    WatermarkKey::from_json(&text)
}
