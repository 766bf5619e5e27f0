use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block_match::PatchGeometry;
use crate::error::{Error, Result};

/// Every knob of the low-rank denoiser.
///
/// Intensity-valued fields are expressed on the `[0, 255]` scale (`nsig`) or
/// are dimensionless; the image itself stays in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WnnmParams {
    pub geometry: PatchGeometry,
    pub iterations: usize,
    /// Fraction of the noisy input re-injected into the working image.
    pub delta: f64,
    /// Weight constant of the singular-value shrinkage.
    pub c: f64,
    pub eps: f64,
    /// Assumed noise standard deviation on the `[0, 255]` scale.
    pub nsig: f64,
    /// Damping applied to the re-estimated noise level.
    pub gamma: f64,
    /// Block matching runs on iterations `k` with `(k - 1) % match_every == 0`.
    pub match_every: usize,
}

impl WnnmParams {
    pub fn baseline() -> Self {
        Self {
            geometry: PatchGeometry::BASELINE,
            iterations: 8,
            delta: 0.1,
            c: 2.0 * std::f64::consts::SQRT_2,
            eps: 1e-16,
            nsig: Intensity::Mid.nsig(),
            gamma: 0.7,
            match_every: 2,
        }
    }

    pub fn tuned() -> Self {
        Self {
            geometry: PatchGeometry::TUNED,
            iterations: 10,
            match_every: 1,
            ..Self::baseline()
        }
    }

    pub fn with_nsig(self, nsig: f64) -> Self {
        Self { nsig, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if self.iterations < 1 {
            return bad("iterations must be >= 1");
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return bad("delta must lie in [0, 1]");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad("eps must be positive");
        }
        if !(self.nsig >= 0.0 && self.nsig.is_finite()) {
            return bad("nsig must be non-negative");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if self.match_every < 1 {
            return bad("match_every must be >= 1");
        }
        Ok(())
    }
}

impl Default for WnnmParams {
    fn default() -> Self {
        Self::baseline()
    }
}

/// Denoising intensity levels exposed to users.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Intensity {
    Low,
    Mid,
    High,
}

impl Intensity {
    pub fn nsig(self) -> f64 {
        match self {
            Intensity::Low => 15.0,
            Intensity::Mid => 30.0,
            Intensity::High => 50.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Intensity::Low => "low",
            Intensity::Mid => "mid",
            Intensity::High => "high",
        }
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Intensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Intensity::Low),
            "mid" | "medium" => Ok(Intensity::Mid),
            "high" => Ok(Intensity::High),
            other => Err(Error::InvalidParams(format!("unknown intensity {other:?}"))),
        }
    }
}

/// Tuned preset at the given intensity; `Mid` is the recommended default.
pub fn denoising_intensity_preset(level: Intensity) -> WnnmParams {
    WnnmParams::tuned().with_nsig(level.nsig())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "wnnm")]
    Wnnm,
    #[serde(rename = "tuned-wnnm")]
    TunedWnnm,
}

impl Method {
    pub fn preset(self) -> WnnmParams {
        match self {
            Method::Wnnm => WnnmParams::baseline(),
            Method::TunedWnnm => WnnmParams::tuned(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Wnnm => "wnnm",
            Method::TunedWnnm => "tuned-wnnm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wnnm" => Ok(Method::Wnnm),
            "tuned-wnnm" | "tuned" => Ok(Method::TunedWnnm),
            other => Err(Error::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}
