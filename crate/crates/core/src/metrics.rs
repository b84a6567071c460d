//! Image fidelity (MSE/PSNR) and watermark similarity (normalized correlation).

use crate::error::{Error, Result};
use crate::image::{BinaryWatermark, GrayImage};

/// Fidelity of a test image against a reference, plus watermark similarity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    /// `+inf` exactly when `mse == 0`.
    pub psnr: f64,
    pub nc: f64,
}

fn check_pair(a: &GrayImage, b: &GrayImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::Dimension(format!("{}x{} vs {}x{}", a.width(), a.height(), b.width(), b.height())));
    }
    if a.encoding() != b.encoding() {
        return Err(Error::EncodingMismatch { expected: a.encoding().name(), actual: b.encoding().name() });
    }
    Ok(())
}

/// Mean squared pixel difference.
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_pair(a, b)?;
    if a.is_empty() {
        return Err(Error::Dimension("empty images".into()));
    }
    let sum: f64 = match (a.bytes(), b.bytes()) {
        (Some(x), Some(y)) => x
            .iter()
            .zip(y)
            .map(|(&p, &q)| {
                let d = i64::from(p) - i64::from(q);
                (d * d) as f64
            })
            .sum(),
        _ => {
            let (x, y) = (a.reals().unwrap(), b.reals().unwrap());
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
        }
    };
    Ok(sum / a.len() as f64)
}

/// PSNR from a precomputed MSE and peak `range`.
pub fn psnr_from_mse(mse: f64, range: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (range * range / mse).log10()
    }
}

/// Peak signal-to-noise ratio in dB; the peak is 255 for byte images and 1
/// for real ones. Identical images give `+inf`.
pub fn psnr(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, a.encoding().range()))
}

/// Normalized correlation `sum(w ew) / (sqrt(sum w^2) sqrt(sum ew^2))` over
/// arbitrary nonnegative samples.
pub fn nc_values(w: &[f64], ew: &[f64]) -> Result<f64> {
    if w.len() != ew.len() {
        return Err(Error::Dimension(format!("{} vs {} samples", w.len(), ew.len())));
    }
    let (mut cross, mut ww, mut ee) = (0.0, 0.0, 0.0);
    for (&a, &b) in w.iter().zip(ew) {
        cross += a * b;
        ww += a * a;
        ee += b * b;
    }
    if ww == 0.0 || ee == 0.0 {
        return Err(Error::UndefinedNc);
    }
    Ok(cross / (ww * ee).sqrt())
}

/// Normalized correlation of two binary marks: white overlap divided by the
/// geometric mean of the white counts.
pub fn nc(w: &BinaryWatermark, ew: &BinaryWatermark) -> Result<f64> {
    if w.side() != ew.side() {
        return Err(Error::Dimension(format!("watermarks of side {} and {}", w.side(), ew.side())));
    }
    if w.white_count() == 0 || ew.white_count() == 0 {
        return Err(Error::UndefinedNc);
    }
    let overlap = w.bits().iter().zip(ew.bits()).filter(|(&a, &b)| a & b == 1).count();
    // one square root of the exact integer product, so equal counts give
    // exactly overlap / k
    let denom = ((w.white_count() as u64 * ew.white_count() as u64) as f64).sqrt();
    Ok(overlap as f64 / denom)
}

/// NC between two grayscale images, treating pixels as the samples.
pub fn nc_images(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    check_pair(a, b)?;
    nc_values(&a.to_f64(), &b.to_f64())
}

/// MSE, PSNR and pixel NC of `test` against `reference`.
pub fn report(reference: &GrayImage, test: &GrayImage) -> Result<QualityReport> {
    let mse = mse(reference, test)?;
    Ok(QualityReport { mse, psnr: psnr_from_mse(mse, reference.encoding().range()), nc: nc_images(reference, test)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bytes(w: usize, h: usize, px: &[u8]) -> GrayImage {
        GrayImage::from_bytes(w, h, px.to_vec()).unwrap()
    }

    fn wm(side: usize, bits: &[u8]) -> BinaryWatermark {
        BinaryWatermark::new(side, bits.to_vec()).unwrap()
    }

    #[test]
    fn mse_examples() {
        let a = bytes(1, 2, &[0, 10]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &bytes(1, 2, &[3, 14])).unwrap(), 12.5);
        let off = bytes(1, 2, &[1, 11]);
        assert_eq!(mse(&a, &off).unwrap(), 1.0);
    }

    #[test]
    fn psnr_examples() {
        let a = bytes(2, 2, &[5, 6, 7, 8]);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = bytes(2, 2, &[6, 5, 8, 7]);
        let expected = 10.0 * (255.0f64 * 255.0).log10();
        assert!((psnr(&a, &b).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 48.1308).abs() < 1e-4);
        let black = GrayImage::filled(3, 3, 0);
        let white = GrayImage::filled(3, 3, 255);
        assert_eq!(psnr(&black, &white).unwrap(), 0.0);
    }

    #[test]
    fn psnr_real_range_is_one() {
        let a = GrayImage::from_reals(1, 1, vec![0.5]).unwrap();
        let b = GrayImage::from_reals(1, 1, vec![0.6]).unwrap();
        assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);
    }

    #[test]
    fn mismatches_rejected() {
        let a = bytes(1, 2, &[0, 0]);
        assert!(matches!(mse(&a, &bytes(2, 1, &[0, 0])), Err(Error::Dimension(_))));
        let r = GrayImage::from_reals(1, 2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(psnr(&a, &r), Err(Error::EncodingMismatch { .. })));
    }

    #[test]
    fn nc_examples() {
        let ones = wm(2, &[1, 1, 1, 1]);
        assert_eq!(nc(&ones, &ones).unwrap(), 1.0);
        let three = wm(2, &[1, 1, 0, 1]);
        let v = nc(&ones, &three).unwrap();
        assert!((v - 3.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
        assert!((v - 0.8660).abs() < 1e-4);
        assert_eq!(nc(&wm(2, &[1, 0, 0, 0]), &wm(2, &[0, 1, 1, 0])).unwrap(), 0.0);
    }

    #[test]
    fn nc_all_zero_is_undefined() {
        let zero = wm(2, &[0; 4]);
        assert!(matches!(nc(&zero, &wm(2, &[1, 0, 0, 0])), Err(Error::UndefinedNc)));
        assert!(matches!(nc(&wm(2, &[1, 0, 0, 0]), &zero), Err(Error::UndefinedNc)));
    }

    #[test]
    fn nc_images_identical_is_one() {
        let a = bytes(2, 1, &[30, 90]);
        let r = report(&a, &a).unwrap();
        assert_eq!(r.psnr, f64::INFINITY);
        assert!((r.nc - 1.0).abs() < 1e-15);
    }
}
