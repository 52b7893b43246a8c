//! Strict run-configuration parsing.
//!
//! One TOML file drives every subcommand. Parsing is strict: unknown keys
//! anywhere are rejected before any computation starts, and every value is
//! range-checked while resolving into the typed configs of the library
//! modules. Units are the library's consistent-but-unspecified absolute
//! units; only ratios like x/√D matter.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, TimeGrid};
use crate::error::{Error, Result};
use crate::laplace::{InversionConfig, InversionMethod};
use crate::simulate::{BitSource, LinkConfig, Threshold, WalkConfig};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub channel: ChannelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub shaping: ShapingSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub walk: WalkSection,
    #[serde(default)]
    pub inversion: InversionSection,
}

fn default_output_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub x: f64,
    pub diffusivity: f64,
}

/// Omitted fields fall back to a grid derived from the response peak:
/// dt = t_max/50 over 102·t_max.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dt: Option<f64>,
    pub n_bins: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ShapingSection {
    #[serde(default = "default_method")]
    pub method: String,
    pub poison_start: Option<f64>,
    pub poison_horizon: Option<f64>,
}

fn default_method() -> String {
    "a".into()
}

impl Default for ShapingSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            poison_start: None,
            poison_horizon: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    /// Defaults to 2·t_max.
    pub symbol_period: Option<f64>,
    pub n_symbols: usize,
    pub samples_per_symbol: usize,
    /// One row pair per sigma in the output ladder.
    pub noise_sigmas: Vec<f64>,
    /// "auto" or a fixed mass threshold.
    #[serde(default)]
    pub threshold: ThresholdSpec,
    pub seed: u64,
    /// Explicit bit pattern (0/1); omitted means seeded fair coin flips.
    pub bits: Option<Vec<u8>>,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            symbol_period: None,
            n_symbols: 10_000,
            samples_per_symbol: 8,
            noise_sigmas: vec![0.01],
            threshold: ThresholdSpec::default(),
            seed: 42,
            bits: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ThresholdSpec {
    Named(String),
    Fixed(f64),
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec::Named("auto".into())
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    pub n_walkers: usize,
    pub dt_walk: f64,
    /// Defaults to 20·t_max.
    pub t_end: Option<f64>,
    pub seed: u64,
}

impl Default for WalkSection {
    fn default() -> Self {
        Self {
            n_walkers: 100_000,
            dt_walk: 1e-4,
            t_end: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSection {
    #[serde(default = "default_inversion_method")]
    pub method: String,
    #[serde(default = "default_talbot_m")]
    pub talbot_m: usize,
    #[serde(default = "default_stehfest_n")]
    pub stehfest_n: usize,
}

fn default_inversion_method() -> String {
    "fixed-talbot".into()
}
fn default_talbot_m() -> usize {
    32
}
fn default_stehfest_n() -> usize {
    14
}

impl Default for InversionSection {
    fn default() -> Self {
        Self {
            method: default_inversion_method(),
            talbot_m: default_talbot_m(),
            stehfest_n: default_stehfest_n(),
        }
    }
}

/// Which transmit pulse the shaping and link commands use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapingMethod {
    Raw,
    MethodA,
    MethodB,
}

/// Fully validated configuration with typed sub-configs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub channel: ChannelParams,
    pub grid: TimeGrid,
    pub method: ShapingMethod,
    pub poison_start: Option<f64>,
    pub poison_horizon: Option<f64>,
    pub link: LinkConfig,
    pub noise_sigmas: Vec<f64>,
    pub walk: WalkConfig,
    pub inversion: InversionConfig,
    pub output_dir: String,
}

impl RunConfig {
    /// Parses and validates a TOML document. Unknown keys and out-of-range
    /// values fail here, before any computation.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config parse: {e}")))?;
        Self::resolve(raw)
    }

    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let channel = ChannelParams::new(raw.channel.x, raw.channel.diffusivity)?;
        let tm = channel.peak_time();

        let dt = raw.grid.dt.unwrap_or(tm / 50.0);
        let n_bins = raw.grid.n_bins.unwrap_or(50 * 102);
        let grid = TimeGrid::new(dt, n_bins)?;

        let method = match raw.shaping.method.as_str() {
            "raw" => ShapingMethod::Raw,
            "a" | "A" => ShapingMethod::MethodA,
            "b" | "B" => ShapingMethod::MethodB,
            other => {
                return Err(Error::config(format!(
                    "shaping.method must be one of raw|a|b, got {other:?}"
                )))
            }
        };
        if let (Some(s), Some(h)) = (raw.shaping.poison_start, raw.shaping.poison_horizon) {
            if !(s > 0.0 && s < h) {
                return Err(Error::config(format!(
                    "need 0 < poison_start < poison_horizon, got [{s}, {h}]"
                )));
            }
        }

        let threshold = match &raw.link.threshold {
            ThresholdSpec::Named(s) if s == "auto" => Threshold::Auto,
            ThresholdSpec::Named(s) => {
                return Err(Error::config(format!(
                    "link.threshold must be \"auto\" or a number, got {s:?}"
                )))
            }
            ThresholdSpec::Fixed(v) => Threshold::Fixed(*v),
        };
        let bits = match &raw.link.bits {
            Some(v) => {
                let bools: Result<Vec<bool>> = v
                    .iter()
                    .map(|&b| match b {
                        0 => Ok(false),
                        1 => Ok(true),
                        other => Err(Error::config(format!("bits must be 0/1, got {other}"))),
                    })
                    .collect();
                BitSource::Explicit(bools?)
            }
            None => BitSource::Seeded,
        };
        let link = LinkConfig {
            symbol_period: raw.link.symbol_period.unwrap_or(2.0 * tm),
            n_symbols: raw.link.n_symbols,
            bits,
            noise_sigma: 0.0, // per-row value comes from the ladder
            threshold,
            samples_per_symbol: raw.link.samples_per_symbol,
            seed: raw.link.seed,
        };
        link.validate()?;
        if raw.link.noise_sigmas.is_empty() {
            return Err(Error::config("link.noise_sigmas must not be empty"));
        }
        for &s in &raw.link.noise_sigmas {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config(format!("noise sigma must be >= 0, got {s}")));
            }
        }

        let walk = WalkConfig {
            n_walkers: raw.walk.n_walkers,
            dt_walk: raw.walk.dt_walk,
            t_end: raw.walk.t_end.unwrap_or(20.0 * tm),
            seed: raw.walk.seed,
        };
        walk.validate()?;

        let inversion = InversionConfig {
            method: match raw.inversion.method.as_str() {
                "fixed-talbot" => InversionMethod::FixedTalbot,
                "gaver-stehfest" => InversionMethod::GaverStehfest,
                other => {
                    return Err(Error::config(format!(
                        "inversion.method must be fixed-talbot|gaver-stehfest, got {other:?}"
                    )))
                }
            },
            talbot_m: raw.inversion.talbot_m,
            stehfest_n: raw.inversion.stehfest_n,
        };
        inversion.validate()?;

        let noise_sigmas = raw.link.noise_sigmas.clone();
        let output_dir = raw.output_dir.clone();
        let poison_start = raw.shaping.poison_start;
        let poison_horizon = raw.shaping.poison_horizon;
        Ok(Self {
            raw,
            channel,
            grid,
            method,
            poison_start,
            poison_horizon,
            link,
            noise_sigmas,
            walk,
            inversion,
            output_dir,
        })
    }

    /// Applies the `--seed` override to both stochastic sections.
    pub fn override_seed(&mut self, seed: u64) {
        self.walk.seed = seed;
        self.link.seed = seed;
        self.raw.walk.seed = seed;
        self.raw.link.seed = seed;
    }
}
