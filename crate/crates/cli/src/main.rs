use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use despeckle::bench::{run_benchmark, BenchmarkConfig};
use despeckle::config::{ConfigFile, WnnmOverrides};
use despeckle::metrics::{psnr, ssim, Reducer, SsimParams};
use despeckle::pairs::{gen_pairs, PairOptions};
use despeckle::{add_speckle, load_image, save_image, wnnm_denoise, GrayImage, Intensity, Method, NoiseSpec};

/// Speckle synthesis, low-rank denoising and evaluation for grayscale images.
#[derive(Debug, Parser)]
#[command(name = "despeckle", version)]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// TOML file with [wnnm] and [benchmark] overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoise one image.
    Denoise(DenoiseArgs),
    /// Add synthetic multiplicative speckle to an image.
    AddNoise(AddNoiseArgs),
    /// Score denoisers on a directory of ground-truth images.
    Benchmark(BenchmarkArgs),
    /// Export (raw, denoised) pairs for surrogate training.
    GenPairs(GenPairsArgs),
    /// Print PSNR and SSIM between two images.
    Metrics(MetricsArgs),
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be a non-negative number, got {s}"))
    }
}

fn method(s: &str) -> Result<Method, String> {
    s.trim().parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
struct WnnmFlags {
    #[arg(long, default_value = "tuned-wnnm", value_parser = method)]
    method: Method,

    #[arg(long, default_value = "mid", value_parser = |s: &str| s.parse::<Intensity>().map_err(|e| e.to_string()))]
    intensity: Intensity,

    /// Explicit noise level on the [0, 255] scale; overrides --intensity.
    #[arg(long, value_parser = non_negative)]
    nsig: Option<f64>,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    wnnm: WnnmFlags,
}

#[derive(Debug, Args)]
struct AddNoiseArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    output: PathBuf,
    /// Speckle intensity (variance of the multiplicative field).
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    sigma: f64,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Directory of ground-truth PGM/PNG images.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Comma-separated speckle intensities.
    #[arg(long, value_parser = |s: &str| non_negative(s.trim()), value_delimiter = ',', allow_negative_numbers = true)]
    sigmas: Option<Vec<f64>>,
    /// Comma-separated methods: wnnm, tuned-wnnm.
    #[arg(long, value_parser = method, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, value_parser = |s: &str| s.parse::<Reducer>().map_err(|e| e.to_string()))]
    aggregate: Option<Reducer>,
    /// Centre-crop images to at most N x N.
    #[arg(long)]
    crop: Option<usize>,
    #[arg(long)]
    max_images: Option<usize>,
    /// Explicit noise level for every run instead of the per-image estimate.
    #[arg(long, value_parser = non_negative)]
    nsig: Option<f64>,
    /// Small profile: 6 images, 128 x 128 crops, sigma 0.2 and 0.3.
    #[arg(long)]
    quick: bool,
    /// Write 0 in the wall-time column so reports are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct GenPairsArgs {
    #[arg(long)]
    input_dir: PathBuf,
    #[arg(long)]
    output_dir: PathBuf,
    #[command(flatten)]
    wnnm: WnnmFlags,
    /// Add speckle of this intensity to each input to form the raw image.
    #[arg(long, value_parser = non_negative, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long)]
    force: bool,
    #[arg(long, conflicts_with = "force")]
    resume: bool,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
}

/// A failure that should exit with the usage status.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        return Err(UsageError(format!("{}: no such file", path.display())).into());
    }
    Ok(())
}

fn require_dir(path: &Path) -> anyhow::Result<()> {
    if !path.is_dir() {
        return Err(UsageError(format!("{}: no such directory", path.display())).into());
    }
    Ok(())
}

fn load_config(cli: &Cli) -> anyhow::Result<ConfigFile> {
    match &cli.config {
        Some(p) => {
            require_file(p)?;
            Ok(ConfigFile::load(p)?)
        }
        None => Ok(ConfigFile::default()),
    }
}

fn wnnm_overrides(file: &ConfigFile, flags: &WnnmFlags) -> WnnmOverrides {
    let cli = WnnmOverrides {
        nsig: flags.nsig,
        ..Default::default()
    };
    // intensity sets nsig unless the config file or --nsig does
    let base = WnnmOverrides {
        nsig: Some(flags.intensity.nsig()),
        ..Default::default()
    };
    base.merged(&file.wnnm).merged(&cli)
}

fn cmd_denoise(cli: &Cli, args: &DenoiseArgs) -> anyhow::Result<()> {
    require_file(&args.input)?;
    let file = load_config(cli)?;
    let params = wnnm_overrides(&file, &args.wnnm).apply(args.wnnm.method.preset());
    params.validate()?;
    let img: GrayImage = load_image(&args.input)?;
    let start = Instant::now();
    let out = wnnm_denoise(&img, &params)?;
    let elapsed = start.elapsed();
    save_image(&out, &args.output)?;
    println!(
        "denoised {} -> {} ({}x{}) in {:.3}s",
        args.input.display(),
        args.output.display(),
        img.height(),
        img.width(),
        elapsed.as_secs_f64()
    );
    println!("method={} intensity={} seed={}", args.wnnm.method, args.wnnm.intensity, cli.seed.unwrap_or(0));
    println!("params={params:?}");
    Ok(())
}

fn cmd_add_noise(cli: &Cli, args: &AddNoiseArgs) -> anyhow::Result<()> {
    require_file(&args.input)?;
    let img: GrayImage = load_image(&args.input)?;
    let spec = NoiseSpec::new(args.sigma, cli.seed.unwrap_or(0))?;
    save_image(&add_speckle(&img, spec)?, &args.output)?;
    Ok(())
}

fn cmd_benchmark(cli: &Cli, args: &BenchmarkArgs) -> anyhow::Result<()> {
    let file = load_config(cli)?;
    let mut cfg = BenchmarkConfig::new("", "report.csv");
    cfg.apply(&file.benchmark);
    cfg.wnnm = file.wnnm.clone();
    if args.quick {
        cfg.max_images = Some(6);
        cfg.crop = Some(128);
        cfg.sigmas = vec![0.2, 0.3];
    }
    if let Some(d) = &args.dataset {
        cfg.dataset_dir = d.clone();
    }
    if let Some(r) = &args.report {
        cfg.report_path = r.clone();
    }
    if let Some(s) = &args.sigmas {
        cfg.sigmas = s.clone();
    }
    if let Some(m) = &args.methods {
        cfg.methods = m.clone();
    }
    cfg.aggregate = args.aggregate.unwrap_or(cfg.aggregate);
    cfg.crop = args.crop.or(cfg.crop);
    cfg.max_images = args.max_images.or(cfg.max_images);
    cfg.seed = cli.seed.unwrap_or(cfg.seed);
    cfg.threads = cli.threads.unwrap_or(cfg.threads);
    if args.nsig.is_some() {
        cfg.wnnm.nsig = args.nsig;
    }
    cfg.record_timing = !args.no_timing;
    if cfg.dataset_dir.as_os_str().is_empty() {
        return Err(UsageError("benchmark needs --dataset or benchmark.dataset_dir in --config".into()).into());
    }
    require_dir(&cfg.dataset_dir)?;
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;

    let report = run_benchmark(&cfg)?;
    report
        .write_csv(&cfg.report_path)
        .with_context(|| format!("writing {}", cfg.report_path.display()))?;
    for a in &report.aggregates {
        println!(
            "{:<10} sigma={:<5} psnr={} ssim={}",
            a.method,
            a.sigma,
            despeckle::bench::format_metric(a.psnr_db),
            despeckle::bench::format_metric(a.ssim)
        );
    }
    if args.quick {
        for &sigma in &cfg.sigmas {
            let (b, t) = (
                report.aggregate_for(Method::Wnnm, sigma),
                report.aggregate_for(Method::TunedWnnm, sigma),
            );
            if let (Some(b), Some(t)) = (b, t) {
                let verdict = if t.psnr_db >= b.psnr_db { "PASS" } else { "FAIL" };
                println!("{verdict} sigma={sigma}: tuned {:.4} >= baseline {:.4}", t.psnr_db, b.psnr_db);
            }
        }
    }
    println!("report written to {}", cfg.report_path.display());
    Ok(())
}

fn cmd_gen_pairs(cli: &Cli, args: &GenPairsArgs) -> anyhow::Result<()> {
    require_dir(&args.input_dir)?;
    let file = load_config(cli)?;
    let mut opts = PairOptions::new(&args.input_dir, &args.output_dir);
    opts.method = args.wnnm.method;
    opts.intensity = args.wnnm.intensity;
    opts.noise_sigma = args.sigma;
    opts.seed = cli.seed.unwrap_or(0);
    opts.overrides = WnnmOverrides {
        nsig: args.wnnm.nsig,
        ..Default::default()
    };
    opts.overrides = file.wnnm.merged(&opts.overrides);
    opts.force = args.force;
    opts.resume = args.resume;
    let rows = gen_pairs(&opts)?;
    println!("{} pairs written to {}", rows.len(), args.output_dir.display());
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs) -> anyhow::Result<()> {
    require_file(&args.reference)?;
    require_file(&args.test)?;
    let a: GrayImage = load_image(&args.reference)?;
    let b: GrayImage = load_image(&args.test)?;
    let p = psnr(&a, &b)?;
    let s = ssim(&a, &b, &SsimParams::default())?;
    println!(
        "psnr={} ssim={}",
        despeckle::bench::format_metric(p),
        despeckle::bench::format_metric(s)
    );
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads.filter(|n| *n > 0) {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Denoise(a) => cmd_denoise(cli, a),
        Command::AddNoise(a) => cmd_add_noise(cli, a),
        Command::Benchmark(a) => cmd_benchmark(cli, a),
        Command::GenPairs(a) => cmd_gen_pairs(cli, a),
        Command::Metrics(a) => cmd_metrics(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else if let Some(despeckle::Error::NegativeSigma(_)) = e.downcast_ref::<despeckle::Error>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
