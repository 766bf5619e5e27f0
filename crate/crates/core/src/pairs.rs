//! Export of (raw, denoised) image pairs for training a learned surrogate.
//!
//! Output layout:
//!
//! ```text
//! <out>/raw/<name>       input image (byte copy, or speckled when a sigma is set)
//! <out>/target/<name>    denoised raw image, same file format
//! <out>/manifest.csv     one row per pair
//! ```
//!
//! Manifest columns: `name,raw,target,height,width,method,intensity,nsig,
//! noise_sigma,seed,raw_sha256,target_sha256`. Paths are relative to `<out>`.
//! `noise_sigma` is empty when inputs are copied verbatim.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{list_images, mix64};
use crate::config::WnnmOverrides;
use crate::error::{Error, Result};
use crate::io::{load_image, save_image};
use crate::noise::{add_speckle, NoiseSpec};
use crate::wnnm::{wnnm_denoise, Intensity, Method};

pub const MANIFEST: &str = "manifest.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub name: String,
    pub raw: String,
    pub target: String,
    pub height: usize,
    pub width: usize,
    pub method: Method,
    pub intensity: Intensity,
    pub nsig: f64,
    pub noise_sigma: Option<f64>,
    pub seed: u64,
    pub raw_sha256: String,
    pub target_sha256: String,
}

#[derive(Clone, Debug)]
pub struct PairOptions {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    pub method: Method,
    pub intensity: Intensity,
    /// Speckle added to each input before denoising; `None` copies inputs.
    pub noise_sigma: Option<f64>,
    pub seed: u64,
    pub overrides: WnnmOverrides,
    /// Overwrite existing outputs.
    pub force: bool,
    /// Keep pairs whose manifest checksums still verify.
    pub resume: bool,
}

impl PairOptions {
    pub fn new(input_dir: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            input_dir: input_dir.into(),
            output_dir: output_dir.into(),
            method: Method::TunedWnnm,
            intensity: Intensity::Mid,
            noise_sigma: None,
            seed: 0,
            overrides: WnnmOverrides::default(),
            force: false,
            resume: false,
        }
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Other(format!("{}: {e}", path.display())))?;
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Other(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<()> {
    let err = |e: csv::Error| Error::Other(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn verifies(out: &Path, row: &ManifestRow) -> bool {
    let check = |rel: &str, sum: &str| sha256_file(&out.join(rel)).is_ok_and(|s| s == sum);
    check(&row.raw, &row.raw_sha256) && check(&row.target, &row.target_sha256)
}

/// Generates the pair directory. Returns the manifest rows in input order.
pub fn gen_pairs(opts: &PairOptions) -> Result<Vec<ManifestRow>> {
    if let Some(s) = opts.noise_sigma {
        NoiseSpec { sigma: s, seed: 0 }.validate()?;
    }
    let inputs = list_images(&opts.input_dir)?;
    if inputs.is_empty() {
        return Err(Error::Other(format!(
            "{}: no PGM or PNG images found",
            opts.input_dir.display()
        )));
    }
    let out = &opts.output_dir;
    let raw_dir = out.join("raw");
    let target_dir = out.join("target");
    let manifest_path = out.join(MANIFEST);

    let previous: HashMap<String, ManifestRow> = if opts.resume && manifest_path.exists() {
        read_manifest(&manifest_path)?
            .into_iter()
            .map(|r| (r.name.clone(), r))
            .collect()
    } else {
        HashMap::new()
    };

    if !opts.force && !opts.resume {
        let mut clashes = vec![manifest_path.clone()];
        for f in &inputs {
            let name = f.file_name().expect("listed files have names");
            clashes.push(raw_dir.join(name));
            clashes.push(target_dir.join(name));
        }
        if let Some(c) = clashes.iter().find(|p| p.exists()) {
            return Err(Error::Other(format!(
                "{} already exists; pass --force to overwrite or --resume to continue",
                c.display()
            )));
        }
    }
    for d in [&raw_dir, &target_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }

    let params = opts.overrides.apply(opts.method.preset().with_nsig(opts.intensity.nsig()));
    params.validate()?;

    let mut rows = Vec::with_capacity(inputs.len());
    for (i, input) in inputs.iter().enumerate() {
        let name = input
            .file_name()
            .expect("listed files have names")
            .to_string_lossy()
            .into_owned();
        let seed = mix64(opts.seed ^ mix64(i as u64 + 1));
        if let Some(prev) = previous.get(&name) {
            let same_setup = prev.method == opts.method
                && prev.intensity == opts.intensity
                && prev.nsig == params.nsig
                && prev.noise_sigma == opts.noise_sigma
                && prev.seed == seed;
            if same_setup && verifies(out, prev) {
                log::info!("{name}: verified, skipping");
                rows.push(prev.clone());
                continue;
            }
        }

        let raw_path = raw_dir.join(&name);
        let target_path = target_dir.join(&name);
        match opts.noise_sigma {
            None => {
                fs::copy(input, &raw_path).map_err(|e| Error::io(&raw_path, e))?;
            }
            Some(sigma) => {
                let clean = load_image::<f32>(input)?;
                save_image(&add_speckle(&clean, NoiseSpec { sigma, seed })?, &raw_path)?;
            }
        }
        // Denoise exactly what was written so the pair is self-consistent.
        let raw = load_image::<f32>(&raw_path)?;
        let target = wnnm_denoise(&raw, &params)?;
        save_image(&target, &target_path)?;

        rows.push(ManifestRow {
            name: name.clone(),
            raw: format!("raw/{name}"),
            target: format!("target/{name}"),
            height: raw.height(),
            width: raw.width(),
            method: opts.method,
            intensity: opts.intensity,
            nsig: params.nsig,
            noise_sigma: opts.noise_sigma,
            seed,
            raw_sha256: sha256_file(&raw_path)?,
            target_sha256: sha256_file(&target_path)?,
        });
        // keep the manifest current so an interrupted run can resume
        write_manifest(&manifest_path, &rows)?;
    }
    write_manifest(&manifest_path, &rows)?;
    Ok(rows)
}
