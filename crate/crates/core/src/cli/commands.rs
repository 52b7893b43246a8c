//! Subcommand implementations. Each writes its CSV outputs plus a
//! `run_manifest.json` into the output directory and returns the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::laplace::{invert, QuadratureConfig};
use crate::shaping::{
    invert_channel_pulse, poison_transmit_laplace, realize_emission, shaped_response,
    validity_warning, window_poison_response, windowed_composite, CompositePulse,
};
use crate::simulate::{first_passage_sample, ks_against_capture_law, simulate_link, PulseKind};

use super::config::{RunConfig, ShapingMethod};
use super::output::{fmt_f64, CheckOutcome, CsvFile, RunManifest};

/// Shared invocation context resolved from the command line.
pub struct RunContext {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub deterministic: bool,
}

impl RunContext {
    pub fn new(config: RunConfig, out_dir: Option<PathBuf>, deterministic: bool) -> Self {
        let out_dir = out_dir.unwrap_or_else(|| PathBuf::from(&config.output_dir));
        Self {
            config,
            out_dir,
            deterministic,
        }
    }

    fn prepare_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))
    }

    fn finish(
        &self,
        command: &str,
        started: Instant,
        files: &[CsvFile],
        checks: Vec<CheckOutcome>,
    ) -> Result<RunManifest> {
        let mut manifest = RunManifest::new(command, self.config.raw.clone(), self.deterministic);
        for f in files {
            f.write_to(&self.out_dir)?;
            manifest.record_csv(f);
        }
        manifest.checks = checks;
        if !self.deterministic {
            manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
        }
        manifest.write_to(&self.out_dir)?;
        Ok(manifest)
    }

    /// The configured shaped pulse, with any poison-window override.
    fn shaped_pulse(&self) -> Result<Option<CompositePulse>> {
        let pulse = match self.config.method {
            ShapingMethod::Raw => return Ok(None),
            ShapingMethod::MethodA => invert_channel_pulse(&self.config.channel),
            ShapingMethod::MethodB => windowed_composite(&self.config.channel),
        };
        let pulse = match (self.config.poison_start, self.config.poison_horizon) {
            (None, None) => pulse,
            (start, horizon) => pulse.with_poison_window(
                start.unwrap_or(pulse.poison_start()),
                horizon.unwrap_or(pulse.poison_horizon()),
            )?,
        };
        Ok(Some(pulse))
    }
}

/// `response`: dumps φ_h, φ_c, h over the time grid and H over a log-spaced
/// s grid spanning s·t_max in [1e-2, 1e2].
pub fn cmd_response(ctx: &RunContext) -> Result<RunManifest> {
    let started = Instant::now();
    ctx.prepare_dir()?;
    let p = &ctx.config.channel;
    let grid = &ctx.config.grid;

    let mut channel_csv = CsvFile::new("channel.csv", &["t", "phi_h", "phi_c", "h"]);
    channel_csv.comment(format!(
        "x={} diffusivity={} peak_time={}",
        fmt_f64(p.distance()),
        fmt_f64(p.diffusivity()),
        fmt_f64(p.peak_time())
    ));
    let mut monotone = true;
    let mut prev = 0.0;
    for k in 0..grid.n_bins() {
        let t = grid.midpoint(k);
        let cdf = p.capture_cdf(t)?;
        if cdf < prev {
            monotone = false;
        }
        prev = cdf;
        channel_csv.row(vec![
            fmt_f64(t),
            fmt_f64(p.hitting_concentration(t)?),
            fmt_f64(cdf),
            fmt_f64(p.impulse_response(t)?),
        ]);
    }

    let mut transfer_csv = CsvFile::new("transfer.csv", &["s", "H"]);
    let tm = p.peak_time();
    let n_s = 64;
    for k in 0..n_s {
        let s = 1e-2 / tm * 1e4f64.powf(k as f64 / (n_s - 1) as f64);
        transfer_csv.row(vec![fmt_f64(s), fmt_f64(p.transfer_function(s)?)]);
    }

    let checks = vec![CheckOutcome::new(
        "capture_cdf_monotone",
        monotone,
        "phi_c nondecreasing across the dumped grid",
    )];
    ctx.finish("response", started, &[channel_csv, transfer_csv], checks)
}

/// `shape`: dumps the realized two-compound emission and the received
/// responses (raw channel vs shaped pulse) on the configured grid.
pub fn cmd_shape(ctx: &RunContext) -> Result<RunManifest> {
    let started = Instant::now();
    ctx.prepare_dir()?;
    let p = &ctx.config.channel;
    let grid = &ctx.config.grid;
    let pulse = ctx.shaped_pulse()?;

    let mut pulse_csv = CsvFile::new("pulse.csv", &["bin_start", "compound_a", "compound_b"]);
    match &pulse {
        Some(cp) => {
            pulse_csv.comment(format!(
                "scale Xi={} poison_coefficient={} poison_start={} poison_horizon={}",
                fmt_f64(cp.scale()),
                fmt_f64(cp.poison_coefficient()),
                fmt_f64(cp.poison_start()),
                fmt_f64(cp.poison_horizon())
            ));
            if let Some(w) = validity_warning(p) {
                pulse_csv.comment(format!("warning: {w}"));
            }
            let emission = realize_emission(cp, grid);
            for k in 0..grid.n_bins() {
                pulse_csv.row(vec![
                    fmt_f64(grid.edge(k)),
                    fmt_f64(emission.compound_a()[k]),
                    fmt_f64(emission.compound_b()[k]),
                ]);
            }
        }
        None => {
            pulse_csv.comment("scale Xi=1 (raw pulse: unit mass in bin 0, no poison)");
            for k in 0..grid.n_bins() {
                let a = if k == 0 { 1.0 } else { 0.0 };
                pulse_csv.row(vec![fmt_f64(grid.edge(k)), fmt_f64(a), "0".into()]);
            }
        }
    }

    let raw = p.binned_response(grid);
    let shaped = match &pulse {
        Some(cp) => shaped_response(cp, p, grid),
        None => raw.clone(),
    };
    let mut resp_csv = CsvFile::new("shaped_response.csv", &["t", "y_raw", "y_shaped"]);
    for k in 0..grid.n_bins() {
        resp_csv.row(vec![
            fmt_f64(grid.midpoint(k)),
            fmt_f64(raw[k]),
            fmt_f64(shaped[k]),
        ]);
    }

    let checks = vec![CheckOutcome::new(
        "emission_nonnegative",
        pulse
            .as_ref()
            .map(|cp| {
                let e = realize_emission(cp, grid);
                e.compound_a().iter().chain(e.compound_b()).all(|&v| v >= 0.0)
            })
            .unwrap_or(true),
        "both compound schedules are nonnegative",
    )];
    ctx.finish("shape", started, &[pulse_csv, resp_csv], checks)
}

/// `simulate`: runs the raw pulse and (unless method = raw) the configured
/// shaped pulse over the noise ladder with shared seeds; one CSV row per
/// (pulse, sigma).
pub fn cmd_simulate(ctx: &RunContext) -> Result<RunManifest> {
    let started = Instant::now();
    ctx.prepare_dir()?;
    let p = &ctx.config.channel;

    let kinds: Vec<PulseKind> = match ctx.config.method {
        ShapingMethod::Raw => vec![PulseKind::Raw],
        ShapingMethod::MethodA => vec![PulseKind::Raw, PulseKind::MethodA],
        ShapingMethod::MethodB => vec![PulseKind::Raw, PulseKind::MethodB],
    };

    let mut ber_csv = CsvFile::new(
        "ber.csv",
        &[
            "pulse",
            "noise_sigma",
            "n_symbols",
            "n_errors",
            "ber",
            "threshold",
            "tail_energy_ratio",
        ],
    );
    ber_csv.comment(format!("seed={}", ctx.config.link.seed));

    let mut checks = Vec::new();
    for &sigma in &ctx.config.noise_sigmas {
        let mut cfg = ctx.config.link.clone();
        cfg.noise_sigma = sigma;
        let mut raw_ber = None;
        for &kind in &kinds {
            let rep = simulate_link(p, &cfg, kind)?;
            ber_csv.row(vec![
                rep.pulse.label().into(),
                fmt_f64(sigma),
                rep.n_symbols.to_string(),
                rep.n_errors.to_string(),
                fmt_f64(rep.ber),
                fmt_f64(rep.threshold),
                fmt_f64(rep.tail_energy_ratio),
            ]);
            match kind {
                PulseKind::Raw => raw_ber = Some(rep.ber),
                _ => {
                    if let Some(r) = raw_ber {
                        checks.push(CheckOutcome::new(
                            format!("shaped_not_worse_sigma_{}", fmt_f64(sigma)),
                            rep.ber <= r,
                            format!("shaped ber {} vs raw {}", fmt_f64(rep.ber), fmt_f64(r)),
                        ));
                    }
                }
            }
        }
    }
    ctx.finish("simulate", started, &[ber_csv], checks)
}

/// `mc-validate`: first-passage Monte Carlo against the capture law,
/// reporting Kolmogorov-Smirnov distance and the absorbed fraction.
pub fn cmd_mc_validate(ctx: &RunContext) -> Result<RunManifest> {
    let started = Instant::now();
    ctx.prepare_dir()?;
    let p = &ctx.config.channel;
    let cfg = &ctx.config.walk;

    let sample = first_passage_sample(p, cfg)?;
    let expected = p.capture_cdf(cfg.t_end)?;
    let sigma3 = 3.0 * (expected * (1.0 - expected) / cfg.n_walkers as f64).sqrt();
    let fraction = sample.absorbed_fraction();
    let fraction_pass = (fraction - expected).abs() <= sigma3;

    // Too few hits and the asymptotic KS critical value is meaningless;
    // flag instead of failing.
    const MIN_HITS: usize = 50;
    let insufficient = sample.hit_times.len() < MIN_HITS;
    let ks = ks_against_capture_law(p, &sample, cfg.t_end);

    let mut csv = CsvFile::new(
        "ks_report.csv",
        &[
            "n_walkers",
            "n_hits",
            "n_censored",
            "ks_distance",
            "ks_critical",
            "ks_pass",
            "absorbed_fraction",
            "expected_fraction",
            "binomial_3sigma",
            "fraction_pass",
            "flag",
        ],
    );
    csv.comment(format!(
        "seed={} dt_walk={} t_end={}",
        cfg.seed,
        fmt_f64(cfg.dt_walk),
        fmt_f64(cfg.t_end)
    ));
    let (kd, kc, kp) = match (&ks, insufficient) {
        (Some(r), false) => (fmt_f64(r.distance), fmt_f64(r.critical), r.pass.to_string()),
        (Some(r), true) => (fmt_f64(r.distance), fmt_f64(r.critical), "skipped".into()),
        (None, _) => ("nan".into(), "nan".into(), "skipped".into()),
    };
    csv.row(vec![
        cfg.n_walkers.to_string(),
        sample.hit_times.len().to_string(),
        sample.n_censored.to_string(),
        kd,
        kc,
        kp,
        fmt_f64(fraction),
        fmt_f64(expected),
        fmt_f64(sigma3),
        fraction_pass.to_string(),
        if insufficient {
            "insufficient_sample".into()
        } else {
            "ok".to_string()
        },
    ]);

    let mut checks = vec![CheckOutcome::new(
        "absorbed_fraction_within_3sigma",
        fraction_pass || insufficient,
        format!(
            "fraction {} vs expected {} (3sigma {})",
            fmt_f64(fraction),
            fmt_f64(expected),
            fmt_f64(sigma3)
        ),
    )];
    if insufficient {
        checks.push(CheckOutcome::new(
            "sample_size",
            true,
            format!(
                "only {} hits; KS comparison skipped (needs {MIN_HITS})",
                sample.hit_times.len()
            ),
        ));
    } else if let Some(r) = ks {
        checks.push(CheckOutcome::new(
            "ks_within_critical",
            r.pass,
            format!("D = {} vs critical {}", fmt_f64(r.distance), fmt_f64(r.critical)),
        ));
    }
    ctx.finish("mc-validate", started, &[csv], checks)
}

/// Named transforms `invert-laplace` understands.
pub const TRANSFORM_NAMES: &[&str] = &["channel_H", "poison_Pd"];

/// `invert-laplace`: numerical checks of the Laplace machinery against
/// the analytic references.
///
/// * `channel_H`: inverts H(s) at log-spaced times and compares with the
///   closed-form impulse response (domain column holds t).
/// * `poison_Pd`: evaluates the deconvolved poison transform by quadrature
///   at an s grid and compares with the closed form (domain column holds s).
/// * `sqrt_s` is refused: √s has no classical original (its formal inverse
///   diverges at t = 0), so there is nothing meaningful to invert.
pub fn cmd_invert_laplace(ctx: &RunContext, transform: &str) -> Result<RunManifest> {
    let started = Instant::now();
    let p = &ctx.config.channel;
    let tm = p.peak_time();
    let inv = &ctx.config.inversion;

    let mut csv = CsvFile::new("invert.csv", &["point", "numeric", "reference", "rel_error"]);
    let mut worst = 0.0f64;
    match transform {
        "channel_H" => {
            csv.comment("transform=channel_H domain=t numeric=inverse-laplace reference=closed-form h(t)");
            let n = 64;
            for k in 0..n {
                let t = 0.1 * tm * (200.0f64).powf(k as f64 / (n - 1) as f64);
                let num = invert(|s: Complex64| p.transfer_function_complex(s), t, inv)?;
                let reference = p.impulse_response(t)?;
                let rel = ((num - reference) / reference).abs();
                worst = worst.max(rel);
                csv.row(vec![
                    fmt_f64(t),
                    fmt_f64(num),
                    fmt_f64(reference),
                    fmt_f64(rel),
                ]);
            }
        }
        "poison_Pd" => {
            csv.comment("transform=poison_Pd domain=s numeric=quadrature L[p_r]/H reference=closed form");
            let t_start = 1.5 * tm;
            let tail = window_poison_response(p, t_start)?;
            let qcfg = QuadratureConfig {
                rel_tol: 1e-11,
                ..QuadratureConfig::default()
            }
            .with_truncation(100.0 * tm);
            let n = 26;
            for k in 0..n {
                let q = 0.5 * k as f64 / (n - 1) as f64;
                let s = (2.0 * q / p.ratio()) * (2.0 * q / p.ratio());
                let numeric = tail.laplace(s, &qcfg)? / p.transfer_function(s)?;
                let reference = poison_transmit_laplace(p, s, t_start)?;
                let rel = ((numeric - reference) / reference).abs();
                worst = worst.max(rel);
                csv.row(vec![
                    fmt_f64(s),
                    fmt_f64(numeric),
                    fmt_f64(reference),
                    fmt_f64(rel),
                ]);
            }
        }
        "sqrt_s" => {
            return Err(Error::config(
                "refusing to invert sqrt_s: no classical time-domain original exists \
                 (the formal inverse -t^(-3/2)/(2*sqrt(pi)) diverges at t = 0); \
                 it enters the pulse designs only symbolically"
                    .to_string(),
            ));
        }
        other => {
            return Err(Error::config(format!(
                "unknown transform {other:?}; valid names: {}",
                TRANSFORM_NAMES.join(", ")
            )));
        }
    }
    ctx.prepare_dir()?;
    let checks = vec![CheckOutcome::new(
        "max_relative_error_1e-6",
        worst <= 1e-6,
        format!("worst relative error {}", fmt_f64(worst)),
    )];
    ctx.finish("invert-laplace", started, &[csv], checks)
}

/// Convenience wrapper used by tests: load a config file from disk.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml(&text)
}
