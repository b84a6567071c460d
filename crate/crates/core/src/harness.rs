//! Experiment tables: the operator grid, the margin sweep, the attack table
//! and the permuted-watermark pipeline. Every builder returns rows plus a
//! CSV rendering with shortest round-trip numbers.

use std::fmt::Write as _;

use rand::seq::index;

use crate::attacks::{attack, AttackSpec};
use crate::codec::{embed, embed_with_key_perm, extract, extract_raw, WatermarkKey};
use crate::error::{Error, Result};
use crate::ga::crossover::CrossoverKind;
use crate::ga::evolve::GaConfig;
use crate::ga::experiment::{run_cell, run_experiment, ExperimentRow, CSV_HEADER as GA_HEADER};
use crate::ga::mutation::MutationKind;
use crate::image::{BinaryWatermark, GrayImage};
use crate::metrics::{nc, psnr};
use crate::rng::stream_rng;

/// A named input, as listed in the table's first columns.
pub type Named<T> = (String, T);

/// Margins swept by the margin table.
pub const B_SWEEP: [f64; 3] = [2.01, 2.0, 1.99];

/// Random `side x side` mark with exactly `round(density * side^2)` white
/// pixels at uniformly chosen positions.
pub fn synthetic_watermark(side: usize, density: f64, seed: u64) -> Result<BinaryWatermark> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("density {density} outside [0, 1]")));
    }
    let len = side * side;
    let k = (density * len as f64).round() as usize;
    let mut bits = vec![0u8; len];
    let mut rng = stream_rng(seed, 0);
    for i in index::sample(&mut rng, len, k) {
        bits[i] = 1;
    }
    BinaryWatermark::new(side, bits)
}

fn csv(header: &str, lines: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for line in lines {
        writeln!(out, "{line}").unwrap();
    }
    out
}

/// Operator grid: all crossover/mutation pairs, `runs` runs each.
pub fn table2(
    watermarks: &[Named<BinaryWatermark>],
    runs: usize,
    cfg: &GaConfig,
) -> Result<Vec<Named<Vec<ExperimentRow>>>> {
    watermarks
        .iter()
        .map(|(name, wm)| {
            let rows = run_experiment(wm, &CrossoverKind::ALL, &MutationKind::ALL, runs, cfg)?;
            Ok((name.clone(), rows))
        })
        .collect()
}

/// Plain grid header for one watermark; a leading `watermark` column for
/// several.
pub fn table2_csv(results: &[Named<Vec<ExperimentRow>>]) -> String {
    if let [(_, rows)] = results {
        return csv(GA_HEADER, rows.iter().map(ExperimentRow::csv_line));
    }
    csv(
        &format!("watermark,{GA_HEADER}"),
        results.iter().flat_map(|(name, rows)| rows.iter().map(move |r| format!("{name},{}", r.csv_line()))),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarginRow {
    pub cover: String,
    pub watermark: String,
    pub b: f64,
    pub psnr: f64,
    pub nc: f64,
}

/// Margin sweep: PSNR(cover, watermarked) and NC of the blind extraction
/// for each `b`.
pub fn table4(
    covers: &[Named<GrayImage>],
    watermarks: &[Named<BinaryWatermark>],
    margins: &[f64],
) -> Result<Vec<MarginRow>> {
    let mut rows = Vec::new();
    for (cover_name, cover) in covers {
        for (wm_name, wm) in watermarks {
            let base = WatermarkKey::for_sizes(cover.width(), wm.side())?;
            for &b in margins {
                let key = WatermarkKey::new(base.m, base.n, base.params.with_b(b))?;
                let marked = embed(cover, wm, &key)?;
                rows.push(MarginRow {
                    cover: cover_name.clone(),
                    watermark: wm_name.clone(),
                    b,
                    psnr: psnr(cover, &marked)?,
                    nc: nc(wm, &extract(&marked, &key)?)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn table4_csv(rows: &[MarginRow]) -> String {
    csv(
        "cover,watermark,b,psnr,nc",
        rows.iter().map(|r| format!("{},{},{},{},{}", r.cover, r.watermark, r.b, r.psnr, r.nc)),
    )
}

/// The four attacks of the robustness table, seeded from `seed`.
pub fn table5_attacks(seed: u64) -> [AttackSpec; 4] {
    [
        AttackSpec::jpeg(90),
        AttackSpec::jpeg(80),
        AttackSpec::gaussian(0.0, 0.001, seed),
        AttackSpec::salt_pepper(0.01, seed),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttackRow {
    pub cover: String,
    pub watermark: String,
    pub attack: AttackSpec,
    /// PSNR of the attacked image against the cover.
    pub psnr: f64,
    pub nc: f64,
}

/// Robustness table at the default margin.
pub fn table5(
    covers: &[Named<GrayImage>],
    watermarks: &[Named<BinaryWatermark>],
    attacks: &[AttackSpec],
) -> Result<Vec<AttackRow>> {
    let mut rows = Vec::new();
    for (cover_name, cover) in covers {
        for (wm_name, wm) in watermarks {
            let key = WatermarkKey::for_sizes(cover.width(), wm.side())?;
            let marked = embed(cover, wm, &key)?;
            for spec in attacks {
                let attacked = attack(&marked, spec)?;
                rows.push(AttackRow {
                    cover: cover_name.clone(),
                    watermark: wm_name.clone(),
                    attack: *spec,
                    psnr: psnr(cover, &attacked)?,
                    nc: nc(wm, &extract(&attacked, &key)?)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn table5_csv(rows: &[AttackRow]) -> String {
    csv(
        "cover,watermark,attack,param,psnr,nc",
        rows.iter().map(|r| {
            format!("{},{},{},{},{},{}", r.cover, r.watermark, r.attack.label(), r.attack.param(), r.psnr, r.nc)
        }),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct PermutedRow {
    pub cover: String,
    pub watermark: String,
    /// Best NC the GA reached between the permuted and original mark.
    pub ga_nc: f64,
    pub psnr: f64,
    /// Extraction with the key's inverse permutation.
    pub nc: f64,
    /// Extraction without undoing the permutation.
    pub nc_unkeyed: f64,
}

/// Permuted-watermark pipeline: the GA (`runs` runs of `cfg`, best kept)
/// scrambles each mark, which is then embedded and extracted with and
/// without the key. Also returns each watermark's key for the first cover.
pub fn table6(
    covers: &[Named<GrayImage>],
    watermarks: &[Named<BinaryWatermark>],
    runs: usize,
    cfg: &GaConfig,
) -> Result<(Vec<PermutedRow>, Vec<Named<WatermarkKey>>)> {
    let mut rows = Vec::new();
    let mut keys = Vec::new();
    for (cell, (wm_name, wm)) in watermarks.iter().enumerate() {
        let ga = run_cell(wm, cfg, runs, cell)?;
        for (i, (cover_name, cover)) in covers.iter().enumerate() {
            let key = WatermarkKey::for_sizes(cover.width(), wm.side())?
                .with_perm(ga.best.perm().clone(), Some(cfg.rng_seed))?;
            let marked = embed_with_key_perm(cover, wm, &key)?;
            rows.push(PermutedRow {
                cover: cover_name.clone(),
                watermark: wm_name.clone(),
                ga_nc: ga.nc_final,
                psnr: psnr(cover, &marked)?,
                nc: nc(wm, &extract(&marked, &key)?)?,
                nc_unkeyed: nc(wm, &extract_raw(&marked, &key)?)?,
            });
            if i == 0 {
                keys.push((wm_name.clone(), key));
            }
        }
    }
    Ok((rows, keys))
}

pub fn table6_csv(rows: &[PermutedRow]) -> String {
    csv(
        "cover,watermark,ga_nc,psnr,nc,nc_unkeyed",
        rows.iter().map(|r| format!("{},{},{},{},{},{}", r.cover, r.watermark, r.ga_nc, r.psnr, r.nc, r.nc_unkeyed)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(side: usize) -> GrayImage {
        let px = (0..side * side).map(|i| (60 + (i % side) / 2 + (i / side) / 3) as u8).collect();
        GrayImage::from_bytes(side, side, px).unwrap()
    }

    #[test]
    fn synthetic_density_is_exact() {
        let w = synthetic_watermark(64, 0.18, 3).unwrap();
        assert_eq!(w.white_count(), 737);
        assert_eq!(synthetic_watermark(64, 0.8, 3).unwrap().white_count(), 3277);
        assert_eq!(w, synthetic_watermark(64, 0.18, 3).unwrap());
        assert_ne!(w, synthetic_watermark(64, 0.18, 4).unwrap());
        assert!(synthetic_watermark(4, 1.2, 0).is_err());
    }

    #[test]
    fn margin_table_has_three_rows_per_pair() {
        let covers = vec![("c".to_string(), cover(128))];
        let wms = vec![("w".to_string(), synthetic_watermark(16, 0.5, 1).unwrap())];
        let rows = table4(&covers, &wms, &B_SWEEP).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows[0].psnr <= rows[1].psnr && rows[1].psnr <= rows[2].psnr);
        assert_eq!(rows[0].nc, 1.0);
        let text = table4_csv(&rows);
        assert!(text.starts_with("cover,watermark,b,psnr,nc\nc,w,2.01,"));
    }

    #[test]
    fn attack_table_rows() {
        let covers = vec![("c".to_string(), cover(128))];
        let wms = vec![("w".to_string(), synthetic_watermark(16, 0.8, 1).unwrap())];
        let rows = table5(&covers, &wms, &table5_attacks(0)).unwrap();
        let labels: Vec<String> = rows.iter().map(|r| r.attack.label()).collect();
        assert_eq!(labels, ["jpg90", "jpg80", "gauss", "sp"]);
    }

    #[test]
    fn permuted_pipeline_recovers_with_key() {
        let covers = vec![("c".to_string(), cover(128))];
        let wms = vec![("w".to_string(), synthetic_watermark(16, 0.3, 2).unwrap())];
        let cfg = GaConfig { generations: 10, ..GaConfig::default() };
        let (rows, keys) = table6(&covers, &wms, 2, &cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(keys.len(), 1);
        assert_eq!(rows[0].nc, 1.0);
        assert!((rows[0].nc_unkeyed - rows[0].ga_nc).abs() < 1e-12);
    }

    #[test]
    fn grid_csv_header_depends_on_watermark_count() {
        let cfg = GaConfig { generations: 2, ..GaConfig::default() };
        let one = vec![("a".to_string(), synthetic_watermark(8, 0.5, 1).unwrap())];
        let single = table2(&one, 1, &cfg).unwrap();
        assert!(table2_csv(&single).starts_with(&format!("{GA_HEADER}\n")));
        let two = vec![one[0].clone(), ("b".to_string(), synthetic_watermark(8, 0.3, 1).unwrap())];
        let text = table2_csv(&table2(&two, 1, &cfg).unwrap());
        assert!(text.starts_with(&format!("watermark,{GA_HEADER}\n")));
        assert_eq!(text.lines().count(), 41);
    }
}
