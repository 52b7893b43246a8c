//! Transmit pulse shaping for the diffusion channel.
//!
//! The channel's impulse response has a t^(-3/2) tail that never ends,
//! which is what makes a train of chemical pulses interfere. Both design
//! routes below arrive at the same composite transmit signal
//!
//! ```text
//! x_d(t) = Ξ · [ A·δ(t) - c·t^(-3/2)·1(ε ≤ t ≤ horizon) ]
//! ```
//!
//! with c = x/(2√(πD)): an impulsive information signal (compound A) plus
//! a continuously emitted cancellation compound (compound B, the "poison")
//! whose received concentration subtracts the channel tail.
//!
//! * Channel inversion: the target response Y(s) = 1 needs
//!   X(s) = 1/H(s) = exp(x√(s/D)); for x ≪ √D, exp(u) ≈ 1 + u and the
//!   formal inverse of √s (-t^(-3/2)/(2√π), valid distributionally) gives
//!   the two-term pulse above with Ξ = 1.
//! * Window design: choose the poison's *received* response first as the
//!   impulse-response tail h(t)·u(t-T), deconvolve by H to get its transmit
//!   transform P_d(s), and expand for small s. The result is the same
//!   two-term pulse scaled by Ξ = erfc(1) when T = (3/2)·t_max.
//!
//! The t^(-3/2) term cannot be emitted down to t = 0 (infinite mass), so
//! the realized pulse starts the poison at ε > 0 and truncates it at a
//! horizon. The distributional identity behind the design has zero net
//! low-frequency weight in the poison term; a physical realization keeps
//! that balance by letting the impulsive bin carry the poison's total mass
//! on top of the information mass (see [`realize_emission`]). Without the
//! balance the truncated poison's DC mass (2c/√ε, several times the
//! information mass for small ε) re-enters through the channel and buries
//! the cancellation it was meant to provide.

use crate::channel::{ChannelParams, TimeGrid};
use crate::conv::convolve_prefix;
use crate::error::{Error, Result};
use crate::laplace::{forward_numeric, QuadratureConfig};
use crate::special::{erf, erfc, erfcx};

/// Ratio x/√D above which the first-order expansion behind both designs
/// starts to degrade; constructors emit a warning through
/// [`validity_warning`] rather than failing.
pub const NARROWBAND_RATIO: f64 = 0.1;

/// Default poison start as a fraction of the response peak time.
const DEFAULT_EPSILON_FACTOR: f64 = 1e-2;
/// Default poison horizon in units of the response peak time. Far beyond
/// the 100·t_max analysis window on purpose: the truncation edge perturbs
/// the response for roughly a decade below the horizon, and the extra
/// emission mass it costs is tiny (the remaining tail mass falls off as
/// horizon^(-1/2)).
const DEFAULT_HORIZON_FACTOR: f64 = 1e3;

/// The analytic composite transmit pulse
/// Ξ·[A·δ(t) - c·t^(-3/2)·1(ε ≤ t ≤ horizon)].
///
/// Value object; both construction routes produce it in closed form, so
/// comparing pulses across methods is exact field arithmetic, never a
/// numerical inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositePulse {
    info_amplitude: f64,
    poison_coefficient: f64,
    poison_start: f64,
    poison_horizon: f64,
    scale: f64,
}

impl CompositePulse {
    pub fn new(
        info_amplitude: f64,
        poison_coefficient: f64,
        poison_start: f64,
        poison_horizon: f64,
        scale: f64,
    ) -> Result<Self> {
        if !(info_amplitude > 0.0 && info_amplitude.is_finite()) {
            return Err(Error::config(format!(
                "info_amplitude must be positive, got {info_amplitude}"
            )));
        }
        if !(poison_coefficient >= 0.0 && poison_coefficient.is_finite()) {
            return Err(Error::config(format!(
                "poison_coefficient must be nonnegative, got {poison_coefficient}"
            )));
        }
        if !(poison_start > 0.0 && poison_start < poison_horizon) {
            return Err(Error::config(format!(
                "need 0 < poison_start < poison_horizon, got [{poison_start}, {poison_horizon}]"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::config(format!("scale must be positive, got {scale}")));
        }
        Ok(Self {
            info_amplitude,
            poison_coefficient,
            poison_start,
            poison_horizon,
            scale,
        })
    }

    /// Weight of the impulsive information term (before the overall scale).
    pub fn info_amplitude(&self) -> f64 {
        self.info_amplitude
    }

    /// Coefficient c of the t^(-3/2) poison term (time^(1/2) units).
    pub fn poison_coefficient(&self) -> f64 {
        self.poison_coefficient
    }

    /// Time at which poison emission begins.
    pub fn poison_start(&self) -> f64 {
        self.poison_start
    }

    /// Time at which poison emission is truncated.
    pub fn poison_horizon(&self) -> f64 {
        self.poison_horizon
    }

    /// Overall scale Ξ (1 for channel inversion, erfc(1) for the window
    /// design).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Same pulse with the poison window moved.
    pub fn with_poison_window(mut self, start: f64, horizon: f64) -> Result<Self> {
        if !(start > 0.0 && start < horizon && horizon.is_finite()) {
            return Err(Error::config(format!(
                "need 0 < start < horizon finite, got [{start}, {horizon}]"
            )));
        }
        self.poison_start = start;
        self.poison_horizon = horizon;
        Ok(self)
    }

    /// Exact poison mass emitted in [t0, t1] (clipped to the active
    /// window), from the antiderivative ∫ t^(-3/2) dt = -2·t^(-1/2).
    /// Includes the overall scale.
    pub fn poison_mass_between(&self, t0: f64, t1: f64) -> f64 {
        let lo = t0.max(self.poison_start);
        let hi = t1.min(self.poison_horizon);
        if hi <= lo {
            return 0.0;
        }
        self.scale * self.poison_coefficient * 2.0 * (lo.powf(-0.5) - hi.powf(-0.5))
    }

    /// Total poison mass over the whole active window, including scale.
    pub fn poison_total_mass(&self) -> f64 {
        self.poison_mass_between(self.poison_start, self.poison_horizon)
    }
}

/// Warns when the channel sits outside the x ≪ √D regime both designs
/// assume; `None` means the first-order expansion is trustworthy.
pub fn validity_warning(p: &ChannelParams) -> Option<String> {
    (p.ratio() > NARROWBAND_RATIO).then(|| {
        format!(
            "x/sqrt(D) = {:.3} is outside the x << sqrt(D) design regime (threshold {}); \
             the first-order pulse only approximately inverts the channel",
            p.ratio(),
            NARROWBAND_RATIO
        )
    })
}

/// Channel inversion: X(s) = 1/H(s) expanded to first order in x√(s/D).
///
/// Produces Ξ = 1, unit information amplitude and c = x/(2√(πD)), with the
/// default poison window [t_max/100, 1000·t_max].
pub fn invert_channel_pulse(p: &ChannelParams) -> CompositePulse {
    if let Some(w) = validity_warning(p) {
        log::warn!("{w}");
    }
    let tm = p.peak_time();
    CompositePulse {
        info_amplitude: 1.0,
        poison_coefficient: p.ratio() / (2.0 * std::f64::consts::PI.sqrt()),
        poison_start: DEFAULT_EPSILON_FACTOR * tm,
        poison_horizon: DEFAULT_HORIZON_FACTOR * tm,
        scale: 1.0,
    }
}

/// Window design: identical pulse scaled by Ξ = erfc(1).
///
/// Expanding the deconvolved window transform for small s gives
/// P_d(s) ≈ erf(1) - (x/√D)·erfc(1)·√s, and
/// δ(t) - L⁻¹[P_d] = erfc(1)·[δ(t) - (x/(2√(πD)))·t^(-3/2)]
/// via the distributional pair L⁻¹[√s] = -t^(-3/2)/(2√π). Constructed from
/// the channel-inversion pulse so the cross-method relation is exact.
pub fn windowed_composite(p: &ChannelParams) -> CompositePulse {
    let mut pulse = invert_channel_pulse(p);
    pulse.scale = erfc(1.0);
    pulse
}

/// The designed received response of the poison compound: the channel
/// impulse response windowed to t ≥ start.
#[derive(Debug, Clone, Copy)]
pub struct WindowedTail {
    params: ChannelParams,
    start: f64,
}

/// Builds h(t)·u(t - T). Requires T beyond the response peak; a window
/// opening before the peak would ask the poison to cancel the information
/// pulse itself.
pub fn window_poison_response(p: &ChannelParams, t_start: f64) -> Result<WindowedTail> {
    if t_start.is_nan() || t_start <= p.peak_time() {
        return Err(Error::domain(format!(
            "window start {t_start} must exceed the response peak {}",
            p.peak_time()
        )));
    }
    Ok(WindowedTail {
        params: *p,
        start: t_start,
    })
}

impl WindowedTail {
    pub fn start(&self) -> f64 {
        self.start
    }

    /// p_r(t): zero before the window opens, h(t) after.
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.start {
            0.0
        } else {
            self.params
                .impulse_response(t)
                .expect("t >= start > 0")
        }
    }

    /// L[p_r](s) by quadrature, in the shifted form
    /// e^(-sT)·∫₀^∞ h(T+v)·e^(-sv) dv. Shifting moves the window edge to
    /// the integration origin, so the integrand the quadrature sees is
    /// smooth; integrating the windowed function directly would put a jump
    /// mid-domain and cost the error estimator its reliability.
    pub fn laplace(&self, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
        let shifted = forward_numeric(
            |v| {
                self.params
                    .impulse_response(self.start + v)
                    .expect("start + v > 0")
            },
            s,
            cfg,
        )?;
        Ok((-s * self.start).exp() * shifted)
    }
}

/// Poison transmit transform P_d(s) = L[p_r](s) / H(s).
///
/// At the canonical window start T = (3/2)·t_max = x²/(4D) the transform
/// has the closed form (q = x√s/(2√D))
///
/// ```text
/// P_d(s) = ½·[1 + erf(1-q) - exp(2x√s/√D)·erfc(1+q)]
///        = ½·[1 + erf(1-q) - exp(-(1-q)²)·erfcx(1+q)]
/// ```
///
/// where the second form trades the overflowing exp·erfc product for the
/// scaled complement (the exponents combine to -(1-q)², never positive).
/// For any other T the function falls back to the quadrature definition.
pub fn poison_transmit_laplace(p: &ChannelParams, s: f64, t_start: f64) -> Result<f64> {
    if s.is_nan() || s < 0.0 {
        return Err(Error::domain(format!("P_d needs s >= 0, got {s}")));
    }
    let canonical = 1.5 * p.peak_time();
    if (t_start - canonical).abs() <= 1e-12 * canonical {
        let q = p.ratio() * s.sqrt() / 2.0;
        let om = 1.0 - q;
        return Ok(0.5 * (1.0 + erf(om) - (-om * om).exp() * erfcx(1.0 + q)));
    }
    // General window start: numerical L[p_r](s) / H(s).
    let tail = window_poison_response(p, t_start)?;
    let cfg = QuadratureConfig::default().with_truncation((100.0 * p.peak_time()).max(2.0 * t_start));
    Ok(tail.laplace(s, &cfg)? / p.transfer_function(s)?)
}

/// Physically realizable two-compound emission schedule on a grid.
///
/// Both schedules are nonnegative per-bin masses; the signed design pulse
/// is recovered as `compound_a - compound_b` under ideal cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapedEmission {
    grid: TimeGrid,
    compound_a: Vec<f64>,
    compound_b: Vec<f64>,
}

impl ShapedEmission {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Information-compound masses (concentrated in bin 0).
    pub fn compound_a(&self) -> &[f64] {
        &self.compound_a
    }

    /// Poison-compound masses.
    pub fn compound_b(&self) -> &[f64] {
        &self.compound_b
    }

    /// Net signed emission per bin, a - b.
    pub fn net(&self) -> Vec<f64> {
        self.compound_a
            .iter()
            .zip(&self.compound_b)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Discretizes a [`CompositePulse`] onto `grid`.
///
/// Poison bins use the exact antiderivative of t^(-3/2) over each bin
/// clipped to the active window, so refining the grid only splits masses
/// and never re-estimates them. The whole information mass sits in bin 0,
/// topped up by the poison's total mass: the net emission then integrates
/// to Ξ·info_amplitude, matching the zero net DC weight of the ideal
/// (untruncated) poison term. Emitting the impulse without that balance
/// sends an uncancelled -2c/√ε of slow mass through the channel, which
/// swamps the tail suppression.
pub fn realize_emission(cp: &CompositePulse, grid: &TimeGrid) -> ShapedEmission {
    let n = grid.n_bins();
    let mut compound_a = vec![0.0; n];
    let mut compound_b = vec![0.0; n];
    for (k, b) in compound_b.iter_mut().enumerate() {
        *b = cp.poison_mass_between(grid.edge(k), grid.edge(k + 1));
    }
    compound_a[0] = cp.scale() * cp.info_amplitude() + cp.poison_total_mass();
    ShapedEmission {
        grid: *grid,
        compound_a,
        compound_b,
    }
}

/// Net received mass per bin: the discrete convolution of the realized
/// net emission with the channel's per-bin capture fractions.
pub fn shaped_response(cp: &CompositePulse, p: &ChannelParams, grid: &TimeGrid) -> Vec<f64> {
    let emission = realize_emission(cp, grid);
    let hbin = p.binned_response(grid);
    convolve_prefix(&emission.net(), &hbin)
}

/// Least-squares slope of ln|y| against ln t; points with y = 0 are
/// skipped. Used to characterize response tails.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> f64 {
    assert_eq!(t.len(), y.len());
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, y)| **y != 0.0)
        .map(|(t, y)| (t.ln(), y.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
