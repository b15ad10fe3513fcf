use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mfpca::experiment::{
    run_reconstruction, run_timing, summarize, write_csv_to, write_timing_csv, write_timing_csv_to,
    ExperimentConfig, IndexPolicy,
};
use mfpca::imaging::noise::{NoiseModel, NoiseSpec};
use mfpca::{EigenOrder, Error, FitOptions, KernelKind, MeanMode, Solver};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_MEMORY: u8 = 4;

/// Denoise images with PCA on multiplication-free covariances.
///
/// Each seed draws N corrupted copies of every input, fits K components per
/// method and scores the reconstruction of one copy against the clean image.
/// Results go to --csv (or stdout); per-method means are printed to stderr.
#[derive(Debug, Parser)]
#[command(name = "mfpca", version)]
struct Args {
    /// Clean input image (PGM, or PNG with the `png` feature); repeatable.
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,

    /// Comma-separated kernels: l2, mf, min1, min2.
    #[arg(long, value_delimiter = ',', default_value = "l2,mf,min1,min2")]
    methods: Vec<String>,

    /// Noise model: occlusion or saltpepper.
    #[arg(long, default_value = "occlusion")]
    noise: String,

    /// Salt-and-pepper density.
    #[arg(long, default_value_t = 0.1)]
    density: f64,

    /// Number of occluded tiles per copy.
    #[arg(long, default_value_t = 3)]
    tiles: usize,

    /// Tile side in pixels; by default the image is split into a 4x4 grid.
    #[arg(long = "tile-size")]
    tile_size: Option<usize>,

    /// Number of corrupted copies.
    #[arg(long = "n", default_value_t = 10)]
    copies: usize,

    /// Number of principal components.
    #[arg(long = "k", default_value_t = 2)]
    components: usize,

    /// Centering: zero, half, sample or best.
    #[arg(long, default_value = "best")]
    mean: String,

    /// Copy to reconstruct (1-based) or `best`.
    #[arg(long, default_value = "1")]
    index: String,

    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8,9")]
    seeds: Vec<u64>,

    /// Directory for reconstructed PGM files. Files are quantized to 8 bits;
    /// the PSNR columns are computed before quantization.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,

    /// CSV output path; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Downscale inputs so neither side exceeds this many pixels.
    #[arg(long = "max-dim")]
    max_dim: Option<usize>,

    /// Run the timing benchmark at these square sizes instead.
    #[arg(long, value_delimiter = ',')]
    timing: Option<Vec<usize>>,

    /// Repetitions per timing cell (minimum 3).
    #[arg(long = "timing-runs", default_value_t = 3)]
    timing_runs: usize,

    /// Eigen path: auto, dense, gram or structured.
    #[arg(long, default_value = "auto")]
    solver: String,

    /// Eigenvalue order for selecting components: algebraic or magnitude.
    #[arg(long, default_value = "algebraic")]
    order: String,

    /// Clamp reconstructions to [0, 1] before scoring.
    #[arg(long)]
    clamp: bool,
}

fn config_from(args: &Args) -> Result<ExperimentConfig, Error> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<Vec<KernelKind>, _>>()?;
    let model: NoiseModel = args.noise.parse()?;
    let noise = NoiseSpec {
        model,
        tiles_corrupted: args.tiles,
        tile_size: args.tile_size.unwrap_or(NoiseSpec::default().tile_size),
        density: args.density,
        ..NoiseSpec::default()
    };
    let index = match args.index.as_str() {
        "best" => IndexPolicy::Best,
        s => match s.parse::<usize>() {
            Ok(i) if i >= 1 => IndexPolicy::Index(i - 1),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "index must be a positive integer or `best`, got '{s}'"
                )))
            }
        },
    };
    let mean_mode: MeanMode = args.mean.parse()?;
    let solver: Solver = args.solver.parse()?;
    let order: EigenOrder = args.order.parse()?;
    let config = ExperimentConfig {
        images: args.inputs.clone(),
        copies: args.copies,
        components: args.components,
        noise,
        fit_tile_grid: args.tile_size.is_none(),
        methods,
        mean_mode,
        seeds: args.seeds.clone(),
        index,
        clamp: args.clamp,
        max_dim: args.max_dim,
        fit: FitOptions {
            solver,
            order,
            ..FitOptions::default()
        },
        out_dir: args.out_dir.clone(),
        csv: args.csv.clone(),
        timing_runs: args.timing_runs,
    };
    config.validate()?;
    Ok(config)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::Format(_) => EXIT_IO,
        Error::MemoryGuard { .. } => EXIT_MEMORY,
        _ => EXIT_CONFIG,
    }
}

fn run(args: &Args) -> Result<(), Error> {
    let config = config_from(args)?;
    if let Some(sizes) = &args.timing {
        let rows = run_timing(&config, sizes)?;
        match &config.csv {
            Some(path) => write_timing_csv(path, &rows)?,
            None => write_timing_csv_to(io::stdout().lock(), &rows)?,
        }
        return Ok(());
    }
    let rows = run_reconstruction(&config)?;
    if config.csv.is_none() {
        write_csv_to(io::stdout().lock(), &rows)?;
    }
    let mut err = io::stderr().lock();
    if config.seeds.len() > 1 {
        writeln!(err, "means over {} noise seeds", config.seeds.len())?;
    }
    writeln!(
        err,
        "{:<16} {:<6} {:>10} {:>10}",
        "image", "method", "noisy", "recon"
    )?;
    for s in summarize(&rows) {
        writeln!(
            err,
            "{:<16} {:<6} {:>10.4} {:>10.4}",
            s.image,
            s.method.as_str(),
            s.mean_psnr_noisy_db,
            s.mean_psnr_reconstructed_db
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
