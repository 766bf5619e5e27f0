//! Dataset benchmark: speckle every ground-truth image at each noise level,
//! denoise with each method and score the result against the original.
//!
//! Report CSV columns:
//!
//! ```text
//! image_id,method,sigma,psnr_db,ssim,wall_time_s,status
//! ```
//!
//! Metrics use four decimals and `inf` for the PSNR of a perfect match.
//! Per-image rows come first (images in file-name order, then sigma, then
//! method), followed by one `aggregate` row per (method, sigma) whose
//! `image_id` names the reducer, e.g. `<mean>`. Aggregates are computed from
//! the rounded per-image values so they can be recomputed from the file.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BenchmarkOverrides, WnnmOverrides};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::io::{is_supported_extension, load_image};
use crate::metrics::{psnr, ssim, Reducer, SsimParams};
use crate::noise::{add_speckle, NoiseSpec};
use crate::wnnm::{speckle_nsig, wnnm_denoise, Method};

pub const CSV_HEADER: [&str; 7] = ["image_id", "method", "sigma", "psnr_db", "ssim", "wall_time_s", "status"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub dataset_dir: PathBuf,
    pub sigmas: Vec<f64>,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub threads: usize,
    pub report_path: PathBuf,
    pub aggregate: Reducer,
    /// Centre-crop every image to at most `crop x crop`.
    pub crop: Option<usize>,
    /// Use only the first `max_images` files in name order.
    pub max_images: Option<usize>,
    /// Applied on top of each method's preset. Without an explicit `nsig`
    /// the noise level is derived from the speckle intensity of each input.
    pub wnnm: WnnmOverrides,
    /// Record wall-clock time per run; when false the column holds `0.0000`.
    pub record_timing: bool,
}

impl BenchmarkConfig {
    pub fn new(dataset_dir: impl Into<PathBuf>, report_path: impl Into<PathBuf>) -> Self {
        Self {
            dataset_dir: dataset_dir.into(),
            sigmas: vec![0.05, 0.1, 0.2, 0.3],
            methods: vec![Method::Wnnm, Method::TunedWnnm],
            seed: 0,
            threads: 0,
            report_path: report_path.into(),
            aggregate: Reducer::Mean,
            crop: None,
            max_images: None,
            wnnm: WnnmOverrides::default(),
            record_timing: true,
        }
    }

    pub fn apply(&mut self, o: &BenchmarkOverrides) {
        if let Some(v) = &o.dataset_dir {
            self.dataset_dir = v.clone();
        }
        if let Some(v) = &o.sigmas {
            self.sigmas = v.clone();
        }
        if let Some(v) = &o.methods {
            self.methods = v.clone();
        }
        self.seed = o.seed.unwrap_or(self.seed);
        self.threads = o.threads.unwrap_or(self.threads);
        if let Some(v) = &o.report_path {
            self.report_path = v.clone();
        }
        self.aggregate = o.aggregate.unwrap_or(self.aggregate);
        self.crop = o.crop.or(self.crop);
        self.max_images = o.max_images.or(self.max_images);
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.sigmas.iter().find(|s| s.is_nan() || **s < 0.0 || s.is_infinite()) {
            return Err(Error::NegativeSigma(*s));
        }
        if self.sigmas.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParams("benchmark needs at least one sigma and one method".into()));
        }
        if self.crop == Some(0) || self.max_images == Some(0) {
            return Err(Error::InvalidParams("crop and max_images must be positive".into()));
        }
        for m in &self.methods {
            self.wnnm.apply(m.preset()).validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Skipped(String),
    Aggregate,
}

impl RowStatus {
    fn render(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::Skipped(why) => format!("skipped: {why}"),
            RowStatus::Aggregate => "aggregate".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub image_id: String,
    pub method: Method,
    pub sigma: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub wall_time_s: f64,
    pub status: RowStatus,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    pub aggregates: Vec<MetricRow>,
}

/// Fixed-point rendering used in the CSV.
pub fn format_metric(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        let s = format!("{v:.4}");
        // avoid "-0.0000"
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    }
}

fn round4(v: f64) -> f64 {
    format_metric(v).parse().unwrap_or(v)
}

impl MetricReport {
    /// Recomputes the aggregate rows from the per-image rows.
    pub fn with_aggregates(rows: Vec<MetricRow>, methods: &[Method], sigmas: &[f64], reducer: Reducer) -> Self {
        let mut aggregates = Vec::new();
        for &sigma in sigmas {
            for &method in methods {
                let ok: Vec<&MetricRow> = rows
                    .iter()
                    .filter(|r| r.method == method && r.sigma == sigma && r.status == RowStatus::Ok)
                    .collect();
                let col = |f: fn(&MetricRow) -> f64| -> Vec<f64> { ok.iter().map(|r| round4(f(r))).collect() };
                aggregates.push(MetricRow {
                    image_id: format!("<{reducer}>"),
                    method,
                    sigma,
                    psnr_db: reducer.apply(&col(|r| r.psnr_db)),
                    ssim: reducer.apply(&col(|r| r.ssim)),
                    wall_time_s: reducer.apply(&col(|r| r.wall_time_s)),
                    status: RowStatus::Aggregate,
                });
            }
        }
        Self { rows, aggregates }
    }

    pub fn aggregate_for(&self, method: Method, sigma: f64) -> Option<&MetricRow> {
        self.aggregates.iter().find(|r| r.method == method && r.sigma == sigma)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Other(format!("csv: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for r in self.rows.iter().chain(&self.aggregates) {
            w.write_record([
                r.image_id.clone(),
                r.method.to_string(),
                r.sigma.to_string(),
                format_metric(r.psnr_db),
                format_metric(r.ssim),
                format_metric(r.wall_time_s),
                r.status.render(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Other(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

/// Mixes a 64-bit value (SplitMix64 finalizer).
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise seed for one (image, sigma) cell of the benchmark grid.
pub fn noise_seed(base: u64, image_index: usize, sigma_index: usize) -> u64 {
    mix64(base ^ mix64(image_index as u64 + 1) ^ mix64(((sigma_index as u64) + 1) << 32))
}

/// Supported image files of `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_supported_extension(p))
        .collect();
    files.sort();
    Ok(files)
}

/// Centre crop to at most `side x side`.
pub fn centre_crop(img: &Image<f32>, side: usize) -> Result<Image<f32>> {
    let (h, w) = img.dims();
    let (ch, cw) = (h.min(side), w.min(side));
    img.sub_image((h - ch) / 2, (w - cw) / 2, ch, cw)
}

fn image_id(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run_image(cfg: &BenchmarkConfig, index: usize, path: &Path) -> Vec<MetricRow> {
    let id = image_id(path);
    let skipped = |why: String| -> Vec<MetricRow> {
        log::warn!("skipping {}: {why}", path.display());
        cfg.sigmas
            .iter()
            .flat_map(|&sigma| {
                let why = why.clone();
                let id = id.clone();
                cfg.methods.iter().map(move |&method| MetricRow {
                    image_id: id.clone(),
                    method,
                    sigma,
                    psnr_db: f64::NAN,
                    ssim: f64::NAN,
                    wall_time_s: f64::NAN,
                    status: RowStatus::Skipped(why.clone()),
                })
            })
            .collect()
    };
    let clean = match load_image::<f32>(path).and_then(|img| match cfg.crop {
        Some(side) => centre_crop(&img, side),
        None => Ok(img),
    }) {
        Ok(img) => img,
        Err(e) => return skipped(e.to_string()),
    };

    let mut rows = Vec::new();
    for (si, &sigma) in cfg.sigmas.iter().enumerate() {
        let spec = NoiseSpec {
            sigma,
            seed: noise_seed(cfg.seed, index, si),
        };
        let noisy = match add_speckle(&clean, spec) {
            Ok(n) => n,
            Err(e) => return skipped(e.to_string()),
        };
        for &method in &cfg.methods {
            let mut params = cfg.wnnm.apply(method.preset());
            if cfg.wnnm.nsig.is_none() {
                params.nsig = speckle_nsig(&noisy, sigma);
            }
            let start = Instant::now();
            let result = wnnm_denoise(&noisy, &params).and_then(|out| {
                let elapsed = start.elapsed().as_secs_f64();
                Ok((psnr(&clean, &out)?, ssim(&clean, &out, &SsimParams::default())?, elapsed))
            });
            rows.push(match result {
                Ok((p, s, t)) => MetricRow {
                    image_id: id.clone(),
                    method,
                    sigma,
                    psnr_db: p,
                    ssim: s,
                    wall_time_s: if cfg.record_timing { t } else { 0.0 },
                    status: RowStatus::Ok,
                },
                Err(e) => MetricRow {
                    image_id: id.clone(),
                    method,
                    sigma,
                    psnr_db: f64::NAN,
                    ssim: f64::NAN,
                    wall_time_s: f64::NAN,
                    status: RowStatus::Skipped(e.to_string()),
                },
            });
            log::info!("{id} sigma={sigma} {method}: {:?}", rows.last().map(|r| r.psnr_db));
        }
    }
    rows
}

/// Runs the benchmark grid. The report is not written; see
/// [`MetricReport::write_csv`].
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<MetricReport> {
    cfg.validate()?;
    let mut files = list_images(&cfg.dataset_dir)?;
    if let Some(n) = cfg.max_images {
        files.truncate(n);
    }
    if files.is_empty() {
        return Err(Error::Other(format!(
            "{}: no PGM or PNG images found",
            cfg.dataset_dir.display()
        )));
    }
    let work = || -> Vec<MetricRow> {
        files
            .par_iter()
            .enumerate()
            .map(|(i, f)| run_image(cfg, i, f))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let rows = if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| Error::Other(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    Ok(MetricReport::with_aggregates(rows, &cfg.methods, &cfg.sigmas, cfg.aggregate))
}
