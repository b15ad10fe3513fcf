//! End-to-end denoising experiment and timing benchmark.
//!
//! For every image and seed, `N` corrupted copies are drawn, stacked as the
//! columns of a `D x N` data matrix and fitted with each requested kernel.
//! One copy (or the best one) is reconstructed and scored against the clean
//! image. Results are ordered by (image, method, seed) so the CSV does not
//! depend on execution order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::covariance::{covariance, multiplication_count, DataMatrix};
use crate::eigen::{lanczos_top_k, LanczosOptions};
use crate::error::{Error, Result};
use crate::imaging::metrics::{capped, mse, psnr_from_mse};
use crate::imaging::noise::{rng_from_seed, NoiseModel, NoiseSpec};
use crate::imaging::{pgm, GrayImage};
use crate::kernel_ops::KernelKind;
use crate::memory;
use crate::pca::{fit_with, Centering, FitOptions, MeanMode};

pub const CSV_HEADER: [&str; 11] = [
    "image",
    "method",
    "noise",
    "seed",
    "mean_mode",
    "index",
    "psnr_noisy_db",
    "psnr_reconstructed_db",
    "cov_eigen_seconds",
    "total_seconds",
    "mul_count",
];

pub const TIMING_HEADER: [&str; 8] = [
    "size",
    "method",
    "cov_seconds",
    "eigen_seconds",
    "cov_eigen_seconds",
    "total_seconds",
    "mul_count",
    "runs",
];

/// Which noisy copy is reconstructed and scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexPolicy {
    /// Zero-based column index.
    Index(usize),
    /// The copy whose reconstruction scores highest; earlier copies win ties.
    Best,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub images: Vec<PathBuf>,
    /// Number of corrupted copies `N`.
    pub copies: usize,
    /// Number of principal components `K`.
    pub components: usize,
    /// Noise model; its `seed` field is replaced by each entry of `seeds`.
    pub noise: NoiseSpec,
    /// Derive the tile size from the image so the grid has `tiles_total`
    /// tiles (needs a square tile count and a square image). When false the
    /// tile size is kept and `tiles_total` follows from the image size.
    pub fit_tile_grid: bool,
    pub methods: Vec<KernelKind>,
    pub mean_mode: MeanMode,
    pub seeds: Vec<u64>,
    pub index: IndexPolicy,
    /// Clamp reconstructions to `[0, 1]` before scoring.
    pub clamp: bool,
    /// Downscale inputs so neither side exceeds this.
    pub max_dim: Option<usize>,
    pub fit: FitOptions,
    /// Directory for reconstructed images; nothing is written when `None`.
    pub out_dir: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Repetitions per timing cell (at least 3 are always run).
    pub timing_runs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            images: Vec::new(),
            copies: 10,
            components: 2,
            noise: NoiseSpec::occlusion(),
            fit_tile_grid: true,
            methods: KernelKind::ALL.to_vec(),
            mean_mode: MeanMode::BestOfThree,
            seeds: (0..10).collect(),
            index: IndexPolicy::Index(0),
            clamp: false,
            max_dim: None,
            fit: FitOptions::default(),
            out_dir: None,
            csv: None,
            timing_runs: 3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::invalid("no input images"));
        }
        if self.components == 0 || self.components > self.copies {
            return Err(Error::invalid(format!(
                "need N >= K >= 1, got N = {} and K = {}",
                self.copies, self.components
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods selected"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("no seeds given"));
        }
        if let IndexPolicy::Index(i) = self.index {
            if i >= self.copies {
                return Err(Error::invalid(format!(
                    "index {} out of range for {} copies",
                    i + 1,
                    self.copies
                )));
            }
        }
        if self.max_dim == Some(0) {
            return Err(Error::invalid("max dimension must be positive"));
        }
        if !(0.0..=1.0).contains(&self.noise.density) {
            return Err(Error::invalid(format!(
                "density {} outside [0, 1]",
                self.noise.density
            )));
        }
        Ok(())
    }

    /// Noise spec for an image of the given size and a seed.
    pub fn noise_for(&self, height: usize, width: usize, seed: u64) -> Result<NoiseSpec> {
        let mut spec = self.noise.with_seed(seed);
        if spec.model == NoiseModel::TileOcclusion {
            let ts = spec.tile_size;
            if self.fit_tile_grid {
                let g = (spec.tiles_total as f64).sqrt().round() as usize;
                if g > 0 && g * g == spec.tiles_total && height == width && height.is_multiple_of(g) {
                    spec.tile_size = height / g;
                }
            } else if ts > 0 && height.is_multiple_of(ts) && width.is_multiple_of(ts) {
                spec.tiles_total = (height / ts) * (width / ts);
            }
        }
        spec.validate_for(height, width)?;
        Ok(spec)
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub image: String,
    pub method: KernelKind,
    pub noise: NoiseModel,
    pub seed: u64,
    pub mean_mode: Centering,
    /// Zero-based; written one-based.
    pub index: usize,
    pub psnr_noisy_db: f64,
    pub psnr_reconstructed_db: f64,
    pub cov_eigen_seconds: f64,
    pub total_seconds: f64,
    pub mul_count: u64,
    /// Reconstructed PGM, when an output directory was given.
    pub output: Option<PathBuf>,
}

/// Loads a PGM (or PNG with the `png` feature), applying `max_dim`.
pub fn load_image(path: &Path, max_dim: Option<usize>) -> Result<GrayImage> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let image = match ext.as_deref() {
        Some("png") => read_png(path),
        _ => pgm::read_pgm(path),
    }
    .map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    match max_dim {
        Some(m) => image.limit_size(m),
        None => Ok(image),
    }
}

#[cfg(feature = "png")]
fn read_png(path: &Path) -> Result<GrayImage> {
    crate::imaging::png::read_png(path)
}

#[cfg(not(feature = "png"))]
fn read_png(path: &Path) -> Result<GrayImage> {
    Err(Error::Format(format!(
        "{}: PNG support needs the `png` feature",
        path.display()
    )))
}

fn image_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Draws the `N` corrupted copies for one seed, in order, from one stream.
pub fn corrupt_copies(image: &GrayImage, spec: &NoiseSpec, copies: usize) -> Result<Vec<GrayImage>> {
    let mut rng = rng_from_seed(spec.seed);
    (0..copies).map(|_| spec.apply(image, &mut rng)).collect()
}

fn psnr_db(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?, 1.0))
}

/// Column-major vector to row-major pixel order.
fn row_major(v: &[f64], height: usize, width: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for c in 0..width {
        for r in 0..height {
            out[r * width + c] = v[c * height + r];
        }
    }
    out
}

struct Cell {
    centering: Centering,
    index: usize,
    psnr: f64,
    reconstruction: Vec<f64>,
    fit_seconds: f64,
}

/// Fits every candidate centering and scores every candidate index, keeping
/// the first strict maximum.
fn best_cell(
    data: &DataMatrix<f64>,
    reference: &[f64],
    kind: KernelKind,
    config: &ExperimentConfig,
) -> Result<Cell> {
    let centerings: Vec<Centering> = match config.mean_mode.concrete() {
        Some(c) => vec![c],
        None => vec![Centering::SampleMean, Centering::Half, Centering::Zero],
    };
    let indices: Vec<usize> = match config.index {
        IndexPolicy::Index(i) => vec![i],
        IndexPolicy::Best => (0..data.samples()).collect(),
    };
    let mut fit_seconds = 0.0;
    let mut best: Option<Cell> = None;
    for centering in centerings {
        let start = Instant::now();
        let model = fit_with(data, config.components, kind, centering, &config.fit)?;
        fit_seconds += start.elapsed().as_secs_f64();
        for &index in &indices {
            let mut rec = model.reconstruct(data.column(index))?;
            if config.clamp {
                crate::imaging::clamp_unit(&mut rec);
            }
            let psnr = psnr_db(&rec, reference)?;
            if best.as_ref().is_none_or(|b| psnr > b.psnr) {
                best = Some(Cell {
                    centering,
                    index,
                    psnr,
                    reconstruction: rec,
                    fit_seconds: 0.0,
                });
            }
        }
    }
    let mut cell = best.expect("at least one candidate");
    cell.fit_seconds = fit_seconds;
    Ok(cell)
}

/// Runs the denoising experiment and, if configured, writes the CSV and the
/// reconstructed images.
pub fn run_reconstruction(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    if let Some(dir) = &config.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut rows = Vec::with_capacity(config.images.len() * config.methods.len() * config.seeds.len());
    for path in &config.images {
        let clean = load_image(path, config.max_dim)?;
        let name = image_name(path);
        let (h, w) = (clean.height(), clean.width());
        let reference = clean.vec();
        for &seed in &config.seeds {
            let noise_start = Instant::now();
            let spec = config.noise_for(h, w, seed)?;
            let noisy = corrupt_copies(&clean, &spec, config.copies)?;
            let columns: Vec<Vec<f64>> = noisy.iter().map(GrayImage::vec).collect();
            let data = DataMatrix::from_columns(&columns)?;
            let noise_seconds = noise_start.elapsed().as_secs_f64();
            for &kind in &config.methods {
                let start = Instant::now();
                let cell = best_cell(&data, &reference, kind, config)?;
                let psnr_noisy = psnr_db(data.column(cell.index), &reference)?;
                let output = match &config.out_dir {
                    Some(dir) => {
                        let file = dir.join(format!(
                            "{name}_{}_{}_s{seed}_i{}.pgm",
                            kind.as_str(),
                            spec.model.as_str(),
                            cell.index + 1
                        ));
                        let bytes = pgm::encode_raw(h, w, &row_major(&cell.reconstruction, h, w))?;
                        fs::write(&file, bytes)?;
                        Some(file)
                    }
                    None => None,
                };
                rows.push(ResultRow {
                    image: name.clone(),
                    method: kind,
                    noise: spec.model,
                    seed,
                    mean_mode: cell.centering,
                    index: cell.index,
                    psnr_noisy_db: psnr_noisy,
                    psnr_reconstructed_db: cell.psnr,
                    cov_eigen_seconds: cell.fit_seconds,
                    total_seconds: noise_seconds + start.elapsed().as_secs_f64(),
                    mul_count: multiplication_count((h * w) as u64, config.copies as u64, kind),
                    output,
                });
            }
        }
    }
    sort_rows(&mut rows, config);
    if let Some(csv) = &config.csv {
        write_csv(csv, &rows)?;
    }
    Ok(rows)
}

/// Orders rows by (image, method, seed) in configuration order.
fn sort_rows(rows: &mut [ResultRow], config: &ExperimentConfig) {
    let image_pos = |name: &str| {
        config
            .images
            .iter()
            .position(|p| image_name(p) == name)
            .unwrap_or(usize::MAX)
    };
    let method_pos = |k: KernelKind| config.methods.iter().position(|&m| m == k);
    let seed_pos = |s: u64| config.seeds.iter().position(|&x| x == s);
    rows.sort_by_key(|r| (image_pos(&r.image), method_pos(r.method), seed_pos(r.seed)));
}

fn format_psnr(db: f64) -> String {
    format!("{:.6}", capped(db))
}

pub fn write_csv_to<W: std::io::Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.image.clone(),
            r.method.as_str().to_string(),
            r.noise.as_str().to_string(),
            r.seed.to_string(),
            r.mean_mode.as_str().to_string(),
            (r.index + 1).to_string(),
            format_psnr(r.psnr_noisy_db),
            format_psnr(r.psnr_reconstructed_db),
            format!("{:.6}", r.cov_eigen_seconds),
            format!("{:.6}", r.total_seconds),
            r.mul_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_csv_to(fs::File::create(path)?, rows)
}

/// Mean PSNRs of one (image, method) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub image: String,
    pub method: KernelKind,
    pub runs: usize,
    pub mean_psnr_noisy_db: f64,
    pub mean_psnr_reconstructed_db: f64,
}

/// Averages rows over seeds, keeping first-appearance order.
pub fn summarize(rows: &[ResultRow]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    for r in rows {
        let pos = out
            .iter()
            .position(|s| s.image == r.image && s.method == r.method);
        let s = match pos {
            Some(p) => &mut out[p],
            None => {
                out.push(Summary {
                    image: r.image.clone(),
                    method: r.method,
                    runs: 0,
                    mean_psnr_noisy_db: 0.0,
                    mean_psnr_reconstructed_db: 0.0,
                });
                out.last_mut().expect("just pushed")
            }
        };
        s.runs += 1;
        s.mean_psnr_noisy_db += capped(r.psnr_noisy_db);
        s.mean_psnr_reconstructed_db += capped(r.psnr_reconstructed_db);
    }
    for s in &mut out {
        s.mean_psnr_noisy_db /= s.runs as f64;
        s.mean_psnr_reconstructed_db /= s.runs as f64;
    }
    out
}

/// Median timings of one (size, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub size: usize,
    pub method: KernelKind,
    pub cov_seconds: f64,
    pub eigen_seconds: f64,
    pub cov_eigen_seconds: f64,
    pub total_seconds: f64,
    pub mul_count: u64,
    pub runs: usize,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Times the dense pipeline on the top-left `s x s` crop of the first image
/// for every size and method.
///
/// Every method builds the full `D x D` covariance in `f32` and extracts `K`
/// eigenpairs with the same dense Lanczos solver, so the columns compare the
/// kernels rather than the eigen paths.
pub fn run_timing(config: &ExperimentConfig, sizes: &[usize]) -> Result<Vec<TimingRow>> {
    config.validate()?;
    if sizes.is_empty() {
        return Err(Error::invalid("no timing sizes given"));
    }
    let image = load_image(&config.images[0], config.max_dim)?;
    let seed = config.seeds[0];
    let runs = config.timing_runs.max(3);
    let centering = config.mean_mode.concrete().unwrap_or(Centering::SampleMean);
    let lanczos = LanczosOptions {
        order: config.fit.order,
        ..config.fit.lanczos
    };
    let mut rows = Vec::new();
    for &s in sizes {
        if s == 0 || s > image.height() || s > image.width() {
            return Err(Error::invalid(format!(
                "timing size {s} does not fit a {}x{} image",
                image.height(),
                image.width()
            )));
        }
        let d = s * s;
        memory::check_dense_budget(d, std::mem::size_of::<f32>())?;
        let crop = image.crop(0, 0, s, s)?;
        let spec = config.noise_for(s, s, seed)?;
        for &kind in &config.methods {
            let (mut cov_t, mut eig_t, mut tot_t) = (Vec::new(), Vec::new(), Vec::new());
            for _ in 0..runs {
                let start = Instant::now();
                let noisy = corrupt_copies(&crop, &spec, config.copies)?;
                let columns: Vec<Vec<f32>> = noisy
                    .iter()
                    .map(|im| im.vec().into_iter().map(|v| v as f32).collect())
                    .collect();
                let data = DataMatrix::from_columns(&columns)?;
                let mean = centering.vector(&data);
                let centered = data.centered(&mean)?;
                let t0 = Instant::now();
                let cov = covariance(&centered, kind).into_entries();
                let t1 = Instant::now();
                let top = lanczos_top_k::<f32>(&cov, config.components, &lanczos)?;
                let t2 = Instant::now();
                drop(cov);
                // reconstruct one copy so the total covers the whole pipeline
                let w = &top.eigenvectors;
                let v = data.column(0);
                let mut rec: Vec<f64> = mean.iter().map(|&m| m as f64).collect();
                for c in 0..w.cols() {
                    let coef: f64 = w
                        .col(c)
                        .iter()
                        .zip(v.iter().zip(&mean))
                        .map(|(&a, (&x, &m))| a as f64 * (x as f64 - m as f64))
                        .sum();
                    rec.iter_mut()
                        .zip(w.col(c))
                        .for_each(|(r, &a)| *r += coef * a as f64);
                }
                std::hint::black_box(&rec);
                cov_t.push((t1 - t0).as_secs_f64());
                eig_t.push((t2 - t1).as_secs_f64());
                tot_t.push(start.elapsed().as_secs_f64());
            }
            let both: Vec<f64> = cov_t.iter().zip(&eig_t).map(|(a, b)| a + b).collect();
            rows.push(TimingRow {
                size: s,
                method: kind,
                cov_seconds: median(cov_t),
                eigen_seconds: median(eig_t),
                cov_eigen_seconds: median(both),
                total_seconds: median(tot_t),
                mul_count: multiplication_count(d as u64, config.copies as u64, kind),
                runs,
            });
        }
    }
    Ok(rows)
}

pub fn write_timing_csv_to<W: std::io::Write>(out: W, rows: &[TimingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMING_HEADER)?;
    for r in rows {
        w.write_record([
            r.size.to_string(),
            r.method.as_str().to_string(),
            format!("{:.6}", r.cov_seconds),
            format!("{:.6}", r.eigen_seconds),
            format!("{:.6}", r.cov_eigen_seconds),
            format!("{:.6}", r.total_seconds),
            r.mul_count.to_string(),
            r.runs.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv(path: &Path, rows: &[TimingRow]) -> Result<()> {
    write_timing_csv_to(fs::File::create(path)?, rows)
}
