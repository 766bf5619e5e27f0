//! TOML configuration: partial overrides for the denoiser and the benchmark.
//!
//! ```toml
//! [wnnm]
//! window = 36
//! nsig = 25.0
//!
//! [benchmark]
//! dataset_dir = "data/sipi"
//! sigmas = [0.05, 0.1, 0.2, 0.3]
//! methods = ["wnnm", "tuned-wnnm"]
//! ```
//!
//! Every field is optional; absent fields keep the preset or command-line
//! value. Unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Reducer;
use crate::wnnm::{Method, WnnmParams};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WnnmOverrides {
    pub patch_size: Option<usize>,
    pub step: Option<usize>,
    pub window: Option<usize>,
    pub stack_size: Option<usize>,
    pub iterations: Option<usize>,
    pub delta: Option<f64>,
    pub c: Option<f64>,
    pub eps: Option<f64>,
    pub nsig: Option<f64>,
    pub gamma: Option<f64>,
    pub match_every: Option<usize>,
}

impl WnnmOverrides {
    pub fn apply(&self, mut p: WnnmParams) -> WnnmParams {
        let g = &mut p.geometry;
        g.patch_size = self.patch_size.unwrap_or(g.patch_size);
        g.step = self.step.unwrap_or(g.step);
        g.window = self.window.unwrap_or(g.window);
        g.stack_size = self.stack_size.unwrap_or(g.stack_size);
        p.iterations = self.iterations.unwrap_or(p.iterations);
        p.delta = self.delta.unwrap_or(p.delta);
        p.c = self.c.unwrap_or(p.c);
        p.eps = self.eps.unwrap_or(p.eps);
        p.nsig = self.nsig.unwrap_or(p.nsig);
        p.gamma = self.gamma.unwrap_or(p.gamma);
        p.match_every = self.match_every.unwrap_or(p.match_every);
        p
    }

    /// Later values win field by field.
    pub fn merged(&self, later: &WnnmOverrides) -> WnnmOverrides {
        WnnmOverrides {
            patch_size: later.patch_size.or(self.patch_size),
            step: later.step.or(self.step),
            window: later.window.or(self.window),
            stack_size: later.stack_size.or(self.stack_size),
            iterations: later.iterations.or(self.iterations),
            delta: later.delta.or(self.delta),
            c: later.c.or(self.c),
            eps: later.eps.or(self.eps),
            nsig: later.nsig.or(self.nsig),
            gamma: later.gamma.or(self.gamma),
            match_every: later.match_every.or(self.match_every),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkOverrides {
    pub dataset_dir: Option<PathBuf>,
    pub sigmas: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub report_path: Option<PathBuf>,
    pub aggregate: Option<Reducer>,
    pub crop: Option<usize>,
    pub max_images: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub wnnm: WnnmOverrides,
    pub benchmark: BenchmarkOverrides,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
