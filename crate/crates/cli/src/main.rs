//! `hwmark` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hwmark::attacks::{attack, AttackSpec, NoiseScale};
use hwmark::codec::{embed_with_key_perm, extract, load_key, save_key, EmbedParams, WatermarkKey};
use hwmark::ga::experiment::{experiment_csv, run_cell};
use hwmark::harness::{
    synthetic_watermark, table2, table2_csv, table4, table4_csv, table5, table5_attacks, table5_csv, table6,
    table6_csv, Named, B_SWEEP,
};
use hwmark::image::{decode_gray, decode_watermark, load_gray, load_watermark, save_gray, save_watermark};
use hwmark::metrics::{nc, nc_images, psnr};
use hwmark::{select_order, BinaryWatermark, CrossoverKind, GaConfig, GrayImage, MutationKind, Result};

#[derive(Parser)]
#[command(name = "hwmark", version, about = "Blind Hadamard-domain watermarking with GA permutation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a low-correlation permutation of a watermark and store it in a key.
    Ga(GaArgs),
    /// Embed a watermark into a cover image.
    Embed(EmbedArgs),
    /// Blindly extract a watermark with a key.
    Extract(ExtractArgs),
    /// Apply a JPEG, Gaussian or salt-and-pepper attack.
    Attack(AttackArgs),
    /// Print PSNR and NC between two files.
    Metrics(MetricsArgs),
    /// Reproduce one of the experiment tables as CSV.
    Experiment(ExperimentArgs),
    /// Write a random watermark with a given white density.
    SynthWatermark(SynthArgs),
}

#[derive(Args)]
struct GaOptions {
    #[arg(long, default_value = "X")]
    crossover: CrossoverKind,
    #[arg(long, default_value = "InvM")]
    mutation: MutationKind,
    /// Population size.
    #[arg(long, default_value_t = 20)]
    pop: usize,
    /// Generations per run.
    #[arg(long, default_value_t = 50)]
    gens: usize,
    /// Linear ranking selection pressure.
    #[arg(long, default_value_t = 1.5)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GaOptions {
    fn config(&self) -> GaConfig {
        GaConfig {
            pop_size: self.pop,
            generations: self.gens,
            selection_pressure: self.s,
            crossover: self.crossover,
            mutation: self.mutation,
            rng_seed: self.seed,
        }
    }
}

#[derive(Args)]
struct GaArgs {
    #[arg(long)]
    watermark: PathBuf,
    #[command(flatten)]
    ga: GaOptions,
    /// Independent runs; the best permutation over all runs is kept.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Side of the cover the key is meant for.
    #[arg(long, default_value_t = 512)]
    cover_size: usize,
    #[arg(long)]
    out_key: PathBuf,
    /// Also write the permutation as text (1-based images).
    #[arg(long)]
    out_perm: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    cover: PathBuf,
    #[arg(long)]
    watermark: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Existing key (may carry a permutation). Without it a default key is built.
    #[arg(long, conflicts_with_all = ["b", "order"])]
    key: Option<PathBuf>,
    /// Where to write the key used.
    #[arg(long)]
    out_key: Option<PathBuf>,
    /// Margin; defaults to order/4 + 0.01.
    #[arg(long)]
    b: Option<f64>,
    /// Hadamard order; defaults to the largest fitting the block.
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Original watermark; when given, the NC is printed.
    #[arg(long)]
    reference: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    Jpeg,
    Gaussian,
    SaltPepper,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Pixel,
    Normalized,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    kind: AttackKind,
    #[arg(long, default_value_t = 90)]
    quality: u8,
    #[arg(long, default_value_t = 0.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.001)]
    variance: f64,
    #[arg(long, value_enum, default_value = "pixel")]
    scale: ScaleArg,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct MetricsArgs {
    reference: PathBuf,
    test: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = ["2", "4", "5", "6"])]
    table: String,
    /// Cover images (repeatable); rows are named by file stem.
    #[arg(long = "cover")]
    covers: Vec<PathBuf>,
    /// Watermark files (repeatable).
    #[arg(long = "watermark")]
    watermarks: Vec<PathBuf>,
    /// Synthetic watermarks of this white density (repeatable).
    #[arg(long = "synthetic-density")]
    densities: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    synthetic_side: usize,
    #[command(flatten)]
    ga: GaOptions,
    /// Runs per GA cell (tables 2 and 6).
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for the table 6 keys.
    #[arg(long)]
    key_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 64)]
    side: usize,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ga(a) => cmd_ga(a),
        Command::Embed(a) => cmd_embed(a),
        Command::Extract(a) => cmd_extract(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::SynthWatermark(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| hwmark::Error::Io { path: path.to_path_buf(), source: e })
}

fn cmd_ga(a: GaArgs) -> Result<()> {
    let wm = load_watermark(&a.watermark)?;
    let cfg = a.ga.config();
    let row = run_cell(&wm, &cfg, a.runs, 0)?;
    let key =
        WatermarkKey::for_sizes(a.cover_size, wm.side())?.with_perm(row.best.perm().clone(), Some(cfg.rng_seed))?;
    save_key(&key, &a.out_key)?;
    if let Some(path) = &a.out_perm {
        row.best.perm().save(wm.side(), path)?;
    }
    if a.runs == 1 {
        let stats = &row.runs[0];
        println!("nc0={} nc_final={} found_at={}", stats.nc0, stats.nc_final, stats.found_at);
    } else {
        print!("{}", experiment_csv(std::slice::from_ref(&row)));
    }
    Ok(())
}

fn cmd_embed(a: EmbedArgs) -> Result<()> {
    let cover = load_gray(&a.cover)?;
    let wm = load_watermark(&a.watermark)?;
    let key = match &a.key {
        Some(path) => load_key(path)?,
        None => {
            let side = cover.width() / wm.side().max(1);
            let order = match a.order {
                Some(order) => order,
                None => select_order(side)?,
            };
            let mut params = EmbedParams::new(order);
            if let Some(b) = a.b {
                params = params.with_b(b);
            }
            WatermarkKey::new(wm.side(), cover.width(), params)?
        }
    };
    let marked = embed_with_key_perm(&cover, &wm, &key)?;
    save_gray(&marked, &a.out)?;
    if let Some(path) = &a.out_key {
        save_key(&key, path)?;
    }
    println!("psnr={}", psnr(&cover, &marked)?);
    Ok(())
}

fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let img = load_gray(&a.image)?;
    let key = load_key(&a.key)?;
    let wm = extract(&img, &key)?;
    save_watermark(&wm, &a.out)?;
    if let Some(path) = &a.reference {
        println!("nc={}", nc(&load_watermark(path)?, &wm)?);
    }
    Ok(())
}

fn cmd_attack(a: AttackArgs) -> Result<()> {
    let spec = match a.kind {
        AttackKind::Jpeg => AttackSpec::jpeg(a.quality),
        AttackKind::Gaussian => AttackSpec::Gaussian {
            mean: a.mean,
            variance: a.variance,
            scale: match a.scale {
                ScaleArg::Pixel => NoiseScale::Pixel,
                ScaleArg::Normalized => NoiseScale::Normalized,
            },
            seed: a.seed,
        },
        AttackKind::SaltPepper => AttackSpec::salt_pepper(a.density, a.seed),
    };
    let img = load_gray(&a.input)?;
    let attacked = attack(&img, &spec)?;
    save_gray(&attacked, &a.out)?;
    println!("psnr={}", psnr(&img, &attacked)?);
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| hwmark::Error::Io { path: path.to_path_buf(), source: e })
}

fn is_bitmap(data: &[u8]) -> bool {
    data.starts_with(b"P4") || data.starts_with(b"P1")
}

/// Bitmaps are compared as watermarks, anything else as grey images.
fn cmd_metrics(a: MetricsArgs) -> Result<()> {
    let (ra, rb) = (read(&a.reference)?, read(&a.test)?);
    let (p, n) = if is_bitmap(&ra) && is_bitmap(&rb) {
        let (wa, wb) = (decode_watermark(&ra)?, decode_watermark(&rb)?);
        (psnr(&wa.to_gray(), &wb.to_gray())?, nc(&wa, &wb)?)
    } else {
        let (ga, gb) = (decode_gray(&ra)?, decode_gray(&rb)?);
        (psnr(&ga, &gb)?, nc_images(&ga, &gb)?)
    };
    println!("psnr={p} nc={n}");
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn watermarks(a: &ExperimentArgs) -> Result<Vec<Named<BinaryWatermark>>> {
    let mut out: Vec<Named<BinaryWatermark>> = Vec::new();
    for path in &a.watermarks {
        out.push((stem(path), load_watermark(path)?));
    }
    for &density in &a.densities {
        out.push((format!("synthetic{density}"), synthetic_watermark(a.synthetic_side, density, a.ga.seed)?));
    }
    if out.is_empty() {
        return Err(hwmark::Error::InvalidParameter("give at least one --watermark or --synthetic-density".into()));
    }
    Ok(out)
}

fn covers(a: &ExperimentArgs) -> Result<Vec<Named<GrayImage>>> {
    if a.covers.is_empty() {
        return Err(hwmark::Error::InvalidParameter("give at least one --cover".into()));
    }
    a.covers.iter().map(|p| Ok((stem(p), load_gray(p)?))).collect()
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let cfg = a.ga.config();
    let wms = watermarks(&a)?;
    let csv = match a.table.as_str() {
        "2" => table2_csv(&table2(&wms, a.runs, &cfg)?),
        "4" => table4_csv(&table4(&covers(&a)?, &wms, &B_SWEEP)?),
        "5" => table5_csv(&table5(&covers(&a)?, &wms, &table5_attacks(a.ga.seed))?),
        _ => {
            let (rows, keys) = table6(&covers(&a)?, &wms, a.runs, &cfg)?;
            if let Some(dir) = &a.key_dir {
                fs::create_dir_all(dir).map_err(|e| hwmark::Error::Io { path: dir.clone(), source: e })?;
                for (name, key) in &keys {
                    save_key(key, dir.join(format!("{name}.key.json")))?;
                }
            }
            table6_csv(&rows)
        }
    };
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let wm = synthetic_watermark(a.side, a.density, a.seed)?;
    save_watermark(&wm, &a.out)?;
    println!("white={} of {}", wm.white_count(), wm.len());
    Ok(())
}
