//! Robustness attacks: JPEG recompression, additive Gaussian noise and
//! salt-and-pepper noise.

use std::fmt::Write as _;
use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ExtendedColorType, ImageFormat};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::codec::{embed_with_key_perm, extract, WatermarkKey};
use crate::error::{Error, Result};
use crate::image::{quantize_byte, BinaryWatermark, Encoding, GrayImage};
use crate::metrics::{nc, psnr};
use crate::rng::stream_rng;

/// How a Gaussian variance is read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseScale {
    /// Variance in grey levels squared.
    #[default]
    Pixel,
    /// Variance on the `[0, 1]` intensity scale: `sigma = 255 * sqrt(var)`.
    Normalized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttackSpec {
    /// Identity; gives the no-attack reference row.
    None,
    Jpeg {
        quality: u8,
    },
    Gaussian {
        mean: f64,
        variance: f64,
        scale: NoiseScale,
        seed: u64,
    },
    SaltPepper {
        density: f64,
        seed: u64,
    },
}

impl AttackSpec {
    pub fn jpeg(quality: u8) -> Self {
        Self::Jpeg { quality }
    }

    pub fn gaussian(mean: f64, variance: f64, seed: u64) -> Self {
        Self::Gaussian { mean, variance, scale: NoiseScale::Pixel, seed }
    }

    pub fn salt_pepper(density: f64, seed: u64) -> Self {
        Self::SaltPepper { density, seed }
    }

    /// Kind name used in the `attack` CSV column.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Jpeg { .. } => "jpeg",
            Self::Gaussian { .. } => "gaussian",
            Self::SaltPepper { .. } => "salt_pepper",
        }
    }

    /// Short row label: `jpg90`, `gauss`, `sp`, `none`.
    pub fn label(&self) -> String {
        match self {
            Self::None => "none".into(),
            Self::Jpeg { quality } => format!("jpg{quality}"),
            Self::Gaussian { .. } => "gauss".into(),
            Self::SaltPepper { .. } => "sp".into(),
        }
    }

    /// The defining parameter: quality, variance or density.
    pub fn param(&self) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::Jpeg { quality } => f64::from(quality),
            Self::Gaussian { variance, .. } => variance,
            Self::SaltPepper { density, .. } => density,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::None => Ok(()),
            Self::Jpeg { quality } if (1..=100).contains(&quality) => Ok(()),
            Self::Jpeg { quality } => Err(Error::InvalidParameter(format!("JPEG quality {quality} outside 1..=100"))),
            Self::Gaussian { mean, variance, .. } if mean.is_finite() && variance >= 0.0 && variance.is_finite() => {
                Ok(())
            }
            Self::Gaussian { mean, variance, .. } => {
                Err(Error::InvalidParameter(format!("Gaussian mean {mean} / variance {variance} invalid")))
            }
            Self::SaltPepper { density, .. } if (0.0..=1.0).contains(&density) => Ok(()),
            Self::SaltPepper { density, .. } => {
                Err(Error::InvalidParameter(format!("salt-and-pepper density {density} outside [0, 1]")))
            }
        }
    }
}

/// Applies one attack to a byte image. Randomized attacks draw from
/// `stream_rng(seed, 0)`, so the result depends only on the inputs.
pub fn attack(img: &GrayImage, spec: &AttackSpec) -> Result<GrayImage> {
    spec.validate()?;
    let pixels = img
        .bytes()
        .ok_or(Error::EncodingMismatch { expected: Encoding::Byte.name(), actual: img.encoding().name() })?;
    let (w, h) = (img.width(), img.height());
    match *spec {
        AttackSpec::None => Ok(img.clone()),
        AttackSpec::Jpeg { quality } => jpeg_round_trip(img, quality),
        AttackSpec::Gaussian { mean, variance, scale, seed } => {
            let sigma = match scale {
                NoiseScale::Pixel => variance.sqrt(),
                NoiseScale::Normalized => 255.0 * variance.sqrt(),
            };
            let mean = match scale {
                NoiseScale::Pixel => mean,
                NoiseScale::Normalized => 255.0 * mean,
            };
            let normal = Normal::new(mean, sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let mut rng = stream_rng(seed, 0);
            let out = pixels.iter().map(|&p| quantize_byte(f64::from(p) + normal.sample(&mut rng))).collect();
            GrayImage::from_bytes(w, h, out)
        }
        AttackSpec::SaltPepper { density, seed } => {
            let total = pixels.len();
            let count = (density * total as f64).floor() as usize;
            let mut rng = stream_rng(seed, 0);
            let mut out = pixels.to_vec();
            for i in index::sample(&mut rng, total, count.min(total)) {
                out[i] = if rng.random_bool(0.5) { 255 } else { 0 };
            }
            GrayImage::from_bytes(w, h, out)
        }
    }
}

fn jpeg_round_trip(img: &GrayImage, quality: u8) -> Result<GrayImage> {
    let mut encoded = Vec::new();
    JpegEncoder::new_with_quality(&mut encoded, quality)
        .encode(img.bytes().expect("byte image"), img.width() as u32, img.height() as u32, ExtendedColorType::L8)
        .map_err(|e| Error::Jpeg(e.to_string()))?;
    let decoded =
        image::load(Cursor::new(encoded), ImageFormat::Jpeg).map_err(|e| Error::Jpeg(e.to_string()))?.into_luma8();
    let (w, h) = decoded.dimensions();
    GrayImage::from_bytes(w as usize, h as usize, decoded.into_raw())
}

pub const CSV_HEADER: &str = "attack,param,psnr,nc";

/// One attack outcome: PSNR of the attacked image against the cover and NC
/// of the extracted mark against the original.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessRow {
    pub attack: AttackSpec,
    pub psnr: f64,
    pub nc: f64,
}

impl RobustnessRow {
    pub fn csv_line(&self) -> String {
        format!("{},{},{},{}", self.attack.kind(), self.attack.param(), self.psnr, self.nc)
    }
}

/// Embeds `wm` (through the key's permutation, if any), then runs every
/// attack on the watermarked image.
pub fn robustness_report(
    cover: &GrayImage,
    wm: &BinaryWatermark,
    key: &WatermarkKey,
    specs: &[AttackSpec],
) -> Result<Vec<RobustnessRow>> {
    let marked = embed_with_key_perm(cover, wm, key)?;
    specs
        .iter()
        .map(|spec| {
            let attacked = attack(&marked, spec)?;
            let recovered: BinaryWatermark = extract(&attacked, key)?;
            Ok(RobustnessRow { attack: *spec, psnr: psnr(cover, &attacked)?, nc: nc(wm, &recovered)? })
        })
        .collect()
}

pub fn robustness_csv(rows: &[RobustnessRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(out, "{}", row.csv_line()).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(side: usize) -> GrayImage {
        let px = (0..side * side).map(|i| ((i * 7 + i / side * 3) % 200 + 20) as u8).collect();
        GrayImage::from_bytes(side, side, px).unwrap()
    }

    #[test]
    fn zero_variance_is_identity() {
        let img = ramp(64);
        for scale in [NoiseScale::Pixel, NoiseScale::Normalized] {
            let spec = AttackSpec::Gaussian { mean: 0.0, variance: 0.0, scale, seed: 1 };
            assert_eq!(attack(&img, &spec).unwrap(), img);
        }
    }

    #[test]
    fn normalized_scale_sigma() {
        let img = GrayImage::filled(256, 256, 128);
        let spec = AttackSpec::Gaussian { mean: 0.0, variance: 0.001, scale: NoiseScale::Normalized, seed: 3 };
        let out = attack(&img, &spec).unwrap();
        let vals: Vec<f64> = out.bytes().unwrap().iter().map(|&p| f64::from(p) - 128.0).collect();
        let var = vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64;
        // sigma = 255 * sqrt(0.001) = 8.06, plus 1/12 from rounding
        let expected = 255.0 * 255.0 * 0.001 + 1.0 / 12.0;
        assert!((var - expected).abs() < 0.05 * expected, "{var}");
    }

    #[test]
    fn salt_pepper_touches_exact_count() {
        let img = GrayImage::filled(512, 512, 128);
        let out = attack(&img, &AttackSpec::salt_pepper(0.01, 7)).unwrap();
        let changed: Vec<u8> = out.bytes().unwrap().iter().copied().filter(|&p| p != 128).collect();
        assert_eq!(changed.len(), 2621);
        assert!(changed.iter().all(|&p| p == 0 || p == 255));
        let salt = changed.iter().filter(|&&p| p == 255).count();
        assert!((1150..1470).contains(&salt), "{salt}");
    }

    #[test]
    fn seeded_attacks_repeat() {
        let img = ramp(64);
        for spec in [AttackSpec::gaussian(0.0, 4.0, 5), AttackSpec::salt_pepper(0.05, 5), AttackSpec::jpeg(75)] {
            assert_eq!(attack(&img, &spec).unwrap(), attack(&img, &spec).unwrap());
        }
        assert_ne!(
            attack(&img, &AttackSpec::salt_pepper(0.05, 5)).unwrap(),
            attack(&img, &AttackSpec::salt_pepper(0.05, 6)).unwrap()
        );
    }

    #[test]
    fn jpeg_keeps_size_and_gets_worse_with_lower_quality() {
        let img = ramp(64);
        let q90 = attack(&img, &AttackSpec::jpeg(90)).unwrap();
        let q20 = attack(&img, &AttackSpec::jpeg(20)).unwrap();
        assert_eq!((q90.width(), q90.height()), (64, 64));
        assert!(psnr(&img, &q90).unwrap() > psnr(&img, &q20).unwrap());
    }

    #[test]
    fn invalid_specs_rejected() {
        let img = ramp(16);
        assert!(attack(&img, &AttackSpec::jpeg(0)).is_err());
        assert!(attack(&img, &AttackSpec::gaussian(0.0, -1.0, 0)).is_err());
        assert!(attack(&img, &AttackSpec::salt_pepper(1.5, 0)).is_err());
        let real = GrayImage::from_reals(2, 2, vec![0.5; 4]).unwrap();
        assert!(matches!(attack(&real, &AttackSpec::None), Err(Error::EncodingMismatch { .. })));
    }

    #[test]
    fn labels() {
        assert_eq!(AttackSpec::jpeg(80).label(), "jpg80");
        assert_eq!(AttackSpec::salt_pepper(0.01, 0).kind(), "salt_pepper");
        let row = RobustnessRow { attack: AttackSpec::jpeg(90), psnr: 40.5, nc: 1.0 };
        assert_eq!(row.csv_line(), "jpeg,90,40.5,1");
    }
}
