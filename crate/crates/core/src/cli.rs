//! Command-line front end: `design`, `evaluate` and `reconstruct`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::dataset::{
    parse_idx_images, parse_idx_labels, read_idx_file, to_dictionary, ImageDictionary,
};
use crate::eigen::{center, design_basis, EigenBasis};
use crate::error::{Error, Result};
use crate::patterns::{
    fourier_pattern, fourier_pattern_filename, non_redundant_count, normalize_patterns,
    pca_pattern_filename, zigzag_order, DisplayPatternSet, FourierPlan, Phase,
};
use crate::pgm::{read_pgm, write_pgm};
use crate::recon::{
    evaluate, format_db, psnr, reconstruct_fourier, reconstruct_pca,
    reconstruct_pca_mean_augmented, EvalOptions, ReconstructionResult,
};
use crate::sim::{measure_fourier, measure_pca, Method, NoiseConfig};

pub const BASIS_FILE: &str = "basis.bin";
pub const REPORT_FILE: &str = "eval.csv";

#[derive(Debug, Parser)]
#[command(
    name = "spipca",
    version,
    about = "PCA illumination patterns for single-pixel imaging"
)]
pub struct Cli {
    /// Run file (key = value).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out` in the run file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run seed; overrides `seed` in the run file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the numeric kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the basis from the training images and export pattern PGMs.
    Design {
        /// Number of PCA display patterns to export.
        #[arg(long, default_value_t = 10)]
        patterns: usize,
        /// Number of Fourier frequencies to export (four phases each).
        #[arg(long, default_value_t = 0)]
        fourier: usize,
    },
    /// Score both methods over the test images and write a CSV report.
    Evaluate {
        /// Comma-separated counts; overrides `k_list` in the run file.
        #[arg(long)]
        k_list: Option<String>,
        /// Rebuild the basis even if one is already saved.
        #[arg(long)]
        rebuild: bool,
        /// Also write reconstructions of the first N test images.
        #[arg(long, default_value_t = 0)]
        export: usize,
    },
    /// Reconstruct one image and write it with a metadata sidecar.
    Reconstruct {
        /// Object to image (binary or ASCII PGM).
        #[arg(long, conflicts_with = "test_index")]
        image: Option<PathBuf>,
        /// Index into the configured test split.
        #[arg(long)]
        test_index: Option<usize>,
        #[arg(long, default_value = "pca")]
        method: Method,
        /// Coefficient count (K for PCA, C for Fourier).
        #[arg(short = 'k', long)]
        k: usize,
        /// Output PGM; defaults to `recon_<method>_k<K>.pgm` in the output directory.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Parses the process arguments, runs the command and maps errors to exit codes
/// (2 for usage errors, 1 otherwise).
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("cannot configure thread pool: {e}")))?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Usage("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }

    match cli.command {
        Command::Design { patterns, fourier } => cmd_design(&cfg, patterns, fourier),
        Command::Evaluate {
            k_list,
            rebuild,
            export,
        } => {
            if let Some(list) = k_list {
                cfg.k_list = parse_counts(&list)?;
            }
            cmd_evaluate(&cfg, rebuild, export)
        }
        Command::Reconstruct {
            image,
            test_index,
            method,
            k,
            output,
        } => {
            let source = match (image, test_index) {
                (Some(p), None) => ObjectSource::Image(p),
                (None, Some(i)) => ObjectSource::TestIndex(i),
                _ => {
                    return Err(Error::Usage(
                        "give exactly one of --image or --test-index".into(),
                    ))
                }
            };
            cmd_reconstruct(&cfg, source, method, k, output)
        }
    }
}

fn parse_counts(list: &str) -> Result<Vec<usize>> {
    let counts = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::Usage(format!("bad count {s:?} in --k-list")))
        })
        .collect::<Result<Vec<usize>>>()?;
    if counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("--k-list must be strictly ascending".into()));
    }
    Ok(counts)
}

/// Training and testing dictionaries described by the run file.
pub fn load_split(cfg: &RunConfig) -> Result<(ImageDictionary, ImageDictionary)> {
    let raw = parse_idx_images(&read_idx_file(&cfg.images)?)?;
    let labels = match &cfg.labels {
        Some(p) => Some(parse_idx_labels(&read_idx_file(p)?)?),
        None => None,
    };
    to_dictionary(&raw, labels.as_deref(), &cfg.split)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))
}

fn build_basis(cfg: &RunConfig, train: &ImageDictionary) -> Result<EigenBasis> {
    let basis = design_basis(train, cfg.route, cfg.solver)?;
    create_dir(&cfg.out)?;
    basis.save(&cfg.out.join(BASIS_FILE))?;
    Ok(basis)
}

/// Reuses the saved basis when it was built from `train`; otherwise rebuilds and saves it.
fn obtain_basis(cfg: &RunConfig, train: &ImageDictionary, rebuild: bool) -> Result<EigenBasis> {
    let path = cfg.out.join(BASIS_FILE);
    if !rebuild && path.is_file() {
        let basis = EigenBasis::load(&path)?;
        if built_from(&basis, train) {
            return Ok(basis);
        }
        eprintln!(
            "note: {} does not match the configured training set; rebuilding",
            path.display()
        );
    }
    build_basis(cfg, train)
}

fn built_from(basis: &EigenBasis, train: &ImageDictionary) -> bool {
    (basis.width, basis.height) == (train.width(), train.height())
        && basis.len() <= train.len().min(train.pixels())
        && basis.mean == center(train).mean
}

fn cmd_design(cfg: &RunConfig, patterns: usize, fourier: usize) -> Result<()> {
    let (train, _) = load_split(cfg)?;
    let basis = build_basis(cfg, &train)?;
    println!(
        "{}: {} components from {} training images ({}x{}) -> {}",
        cfg.category,
        basis.len(),
        train.len(),
        basis.width,
        basis.height,
        cfg.out.join(BASIS_FILE).display()
    );

    let dir = cfg.out.join("patterns");
    create_dir(&dir)?;
    let count = patterns.min(basis.len());
    if count > 0 {
        let set = normalize_patterns(&basis, count)?;
        for k in 0..count {
            write_pgm(
                &dir.join(pca_pattern_filename(k)),
                set.width,
                set.height,
                set.pattern(k),
            )?;
        }
    }
    if fourier > 0 {
        let plan = zigzag_order(basis.width, basis.height, fourier)?;
        for (i, &(u, v)) in plan.order.iter().enumerate() {
            for phase in Phase::ALL {
                let p = fourier_pattern(u, v, phase, plan.width, plan.height);
                write_pgm(
                    &dir.join(fourier_pattern_filename(i, u, v, phase)),
                    plan.width,
                    plan.height,
                    &p,
                )?;
            }
        }
    }
    println!(
        "wrote {count} PCA and {} Fourier patterns to {}",
        4 * fourier,
        dir.display()
    );
    Ok(())
}

fn full_plan(width: usize, height: usize) -> Result<FourierPlan> {
    zigzag_order(width, height, non_redundant_count(width, height))
}

fn cmd_evaluate(cfg: &RunConfig, rebuild: bool, export: usize) -> Result<()> {
    if cfg.k_list.is_empty() {
        return Err(Error::Usage("k_list is empty; nothing to evaluate".into()));
    }
    let (train, test) = load_split(cfg)?;
    let basis = obtain_basis(cfg, &train, rebuild)?;
    let plan = full_plan(basis.width, basis.height)?;
    let options = EvalOptions {
        category: cfg.category.clone(),
        truncation: cfg.truncation,
        mean_augmented: cfg.mean_augmented,
    };
    let report = evaluate(&test, &basis, &plan, &cfg.k_list, &cfg.noise, &options)?;
    let csv = report.to_csv();
    let path = cfg.out.join(REPORT_FILE);
    fs::write(&path, &csv).map_err(|e| Error::file(&path, e))?;
    print!("{csv}");

    if export > 0 {
        let dir = cfg.out.join("recon");
        create_dir(&dir)?;
        for i in 0..export.min(test.len()) {
            for &k in &cfg.k_list {
                for method in [Method::Pca, Method::Fourier] {
                    let rec =
                        reconstruct_one(cfg, &basis, &plan, test.image(i), method, k, i as u64)?;
                    let name = format!("{method}_k{k:03}_img{i:03}.pgm");
                    write_pgm(&dir.join(name), basis.width, basis.height, &rec.image)?;
                }
            }
        }
    }
    Ok(())
}

fn reconstruct_one(
    cfg: &RunConfig,
    basis: &EigenBasis,
    plan: &FourierPlan,
    object: &[f64],
    method: Method,
    k: usize,
    realization: u64,
) -> Result<ReconstructionResult> {
    let noise: NoiseConfig = cfg.noise.for_realization(realization);
    match method {
        Method::Pca => {
            if k > basis.len() {
                return Err(Error::KOutOfRange {
                    requested: k,
                    available: basis.len(),
                });
            }
            let set = if k == 0 {
                DisplayPatternSet::empty(basis)
            } else {
                normalize_patterns(basis, k)?
            };
            let meas = measure_pca(&set, object, &noise)?;
            if cfg.mean_augmented {
                reconstruct_pca_mean_augmented(&meas, basis, cfg.truncation)
            } else {
                reconstruct_pca(&meas, basis, cfg.truncation)
            }
        }
        Method::Fourier => {
            if k > plan.len() {
                return Err(Error::COutOfRange {
                    requested: k,
                    available: plan.len(),
                });
            }
            let meas = measure_fourier(&plan.prefix(k), object, &noise)?;
            reconstruct_fourier(&meas, plan, cfg.truncation)
        }
    }
}

enum ObjectSource {
    Image(PathBuf),
    TestIndex(usize),
}

fn cmd_reconstruct(
    cfg: &RunConfig,
    source: ObjectSource,
    method: Method,
    k: usize,
    output: Option<PathBuf>,
) -> Result<()> {
    let (train, test) = load_split(cfg)?;
    let basis = obtain_basis(cfg, &train, false)?;
    let (object, realization, label) = match source {
        ObjectSource::Image(path) => {
            let img = read_pgm(&path)?;
            if (img.width, img.height) != (basis.width, basis.height) {
                return Err(Error::DimensionMismatch {
                    expected: basis.pixels(),
                    actual: img.width * img.height,
                });
            }
            (img.pixels, 0, path.display().to_string())
        }
        ObjectSource::TestIndex(i) => {
            if i >= test.len() {
                return Err(Error::Usage(format!(
                    "test index {i} out of range 0..{}",
                    test.len()
                )));
            }
            (test.image(i).to_vec(), i as u64, format!("test[{i}]"))
        }
    };
    let plan = full_plan(basis.width, basis.height)?;
    let rec = reconstruct_one(cfg, &basis, &plan, &object, method, k, realization)?;
    let quality = psnr(&object, &rec.image)?;

    let path = output.unwrap_or_else(|| cfg.out.join(format!("recon_{method}_k{k}.pgm")));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_pgm(&path, basis.width, basis.height, &rec.image)?;
    let sidecar = path.with_extension("txt");
    let meta = format!(
        "source={label}\nmethod={method}\ncoefficients={}\nprojections={}\ntruncation={}\npsnr_db={}\n",
        rec.coefficients_used,
        rec.projections_used,
        cfg.truncation,
        format_db(quality)
    );
    fs::write(&sidecar, meta).map_err(|e| Error::file(&sidecar, e))?;
    println!(
        "{} {method} k={k} psnr_db={}",
        path.display(),
        format_db(quality)
    );
    Ok(())
}
