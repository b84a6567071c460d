use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::BinaryWatermark;

/// A bijection on the flat pixel indices `0..m^2` of a watermark.
///
/// Applying it moves the bit at index `i` to index `perm[i]`. The text form
/// and the key file use 1-based images.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Self((0..len as u32).collect())
    }

    /// Validates a 0-based image vector.
    pub fn new(images: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &v in &images {
            let slot = seen.get_mut(v as usize).ok_or_else(|| {
                Error::InvalidPermutation(format!("image {v} out of range for length {}", images.len()))
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::InvalidPermutation(format!("image {v} repeated")));
            }
        }
        Ok(Self(images))
    }

    pub fn from_one_based(images: &[u64]) -> Result<Self> {
        let zero = images
            .iter()
            .map(|&v| {
                v.checked_sub(1)
                    .and_then(|z| u32::try_from(z).ok())
                    .ok_or_else(|| Error::InvalidPermutation(format!("image {v} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero)
    }

    pub fn to_one_based(&self) -> Vec<u64> {
        self.0.iter().map(|&v| u64::from(v) + 1).collect()
    }

    pub(crate) fn from_vec_unchecked(images: Vec<u32>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Self(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Self(inv)
    }

    /// Text export: `m` on the first line, then the `m^2` 1-based images.
    pub fn to_text(&self, side: usize) -> String {
        let mut out = format!("{side}\n");
        for (i, v) in self.to_one_based().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
        out
    }

    /// Parses [`Permutation::to_text`] output, returning `(m, perm)`.
    pub fn from_text(text: &str) -> Result<(usize, Self)> {
        let mut lines = text.lines();
        let side = lines
            .next()
            .and_then(|l| l.trim().parse::<usize>().ok())
            .ok_or_else(|| Error::InvalidPermutation("first line must hold m".into()))?;
        let images = lines
            .flat_map(str::split_whitespace)
            .map(|t| t.parse::<u64>().map_err(|e| Error::InvalidPermutation(format!("bad image {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if images.len() != side * side {
            return Err(Error::InvalidPermutation(format!(
                "expected {} images for m = {side}, got {}",
                side * side,
                images.len()
            )));
        }
        Ok((side, Self::from_one_based(&images)?))
    }

    pub fn save(&self, side: usize, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text(side)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(usize, Self)> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// Moves the bit at flat index `i` to index `perm[i]`.
pub fn apply_permutation(w: &BinaryWatermark, perm: &Permutation) -> Result<BinaryWatermark> {
    if perm.len() != w.len() {
        return Err(Error::InvalidPermutation(format!(
            "permutation of length {} for a watermark of {} pixels",
            perm.len(),
            w.len()
        )));
    }
    let mut bits = vec![0u8; w.len()];
    for (&bit, &to) in w.bits().iter().zip(perm.as_slice()) {
        bits[to as usize] = bit;
    }
    BinaryWatermark::new(w.side(), bits)
}
