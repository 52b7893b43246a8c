//! C ABI over the molpulse core: opaque handles, status codes, and
//! caller-allocated output buffers, so other languages can bind without
//! knowing anything about Rust.
//!
//! Conventions:
//! * Every fallible call returns [`MpStatus`] and writes results through
//!   out pointers; outputs are untouched on failure.
//! * `mp_*_new` constructors hand out opaque heap handles that must be
//!   released with the matching `mp_*_free` (which tolerates NULL).
//! * Panics never unwind across the boundary; they surface as
//!   `MP_STATUS_INTERNAL_PANIC`.

use std::panic::{catch_unwind, AssertUnwindSafe};

use molpulse::channel::{ChannelParams, TimeGrid};
use molpulse::laplace::{invert, InversionConfig, InversionMethod};
use molpulse::shaping::{invert_channel_pulse, realize_emission, shaped_response, windowed_composite, CompositePulse};
use molpulse::simulate::{simulate_link, BitSource, LinkConfig, PulseKind, Threshold};
use molpulse::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An argument was outside its domain or violated a config invariant.
    InvalidArgument = 2,
    /// A numerical method failed to reach its tolerance.
    NumericalFailure = 3,
    /// An internal panic was caught at the boundary.
    InternalPanic = 4,
}

/// Inverse Laplace algorithm selector for [`mp_channel_invert_transfer`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpInversionMethod {
    /// Fixed-Talbot contour; `param` is the node count (>= 8, 0 = default 32).
    FixedTalbot = 0,
    /// Gaver-Stehfest; `param` is the even term count in [4, 20]
    /// (0 = default 14).
    GaverStehfest = 1,
}

/// Transmit pulse selector for the link simulator.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpPulseKind {
    /// Unit mass in the symbol's first bin.
    Raw = 0,
    /// Channel-inversion composite pulse.
    ChannelInversion = 1,
    /// Window-design composite pulse (erfc(1)-scaled).
    WindowDesign = 2,
}

/// On-off-keyed link parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpLinkConfig {
    pub symbol_period: f64,
    pub n_symbols: u64,
    pub samples_per_symbol: u64,
    /// Standard deviation of the per-bin additive Gaussian noise.
    pub noise_sigma: f64,
    /// Ignored when `threshold_auto` is true.
    pub threshold: f64,
    pub threshold_auto: bool,
    /// Seeds both the pseudo-random bit pattern and the noise stream.
    pub seed: u64,
}

/// Link-simulation summary.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MpBerReport {
    pub n_symbols: u64,
    pub n_errors: u64,
    pub ber: f64,
    pub threshold: f64,
    /// Single-pulse response mass beyond one symbol period / total mass.
    pub tail_energy_ratio: f64,
}

/// Opaque diffusion-channel handle.
pub struct MpChannel(ChannelParams);

/// Opaque composite-pulse handle.
pub struct MpPulse(CompositePulse);

fn status_of(e: &Error) -> MpStatus {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Io { .. } => MpStatus::InvalidArgument,
        Error::Numerical { .. } | Error::AtIndex { .. } => MpStatus::NumericalFailure,
    }
}

fn guarded(f: impl FnOnce() -> MpStatus) -> MpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(MpStatus::InternalPanic)
}

/// Writes a scalar produced by `f` through `out`.
unsafe fn scalar_out(out: *mut f64, f: impl FnOnce() -> Result<f64, Error>) -> MpStatus {
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| match f() {
        Ok(v) => {
            unsafe { *out = v };
            MpStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn mp_status_message(status: MpStatus) -> *const std::os::raw::c_char {
    let msg: &'static [u8] = match status {
        MpStatus::Ok => b"ok\0",
        MpStatus::NullArgument => b"required pointer argument was NULL\0",
        MpStatus::InvalidArgument => b"argument outside its domain or invalid configuration\0",
        MpStatus::NumericalFailure => b"numerical method failed to reach its tolerance\0",
        MpStatus::InternalPanic => b"internal panic caught at the ABI boundary\0",
    };
    msg.as_ptr() as *const _
}

/// Creates a channel handle for receiver distance `x` and diffusivity `d`;
/// both must be positive and finite.
///
/// # Safety
/// `out` must be a valid pointer. The returned handle must be released
/// with [`mp_channel_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_channel_new(x: f64, d: f64, out: *mut *mut MpChannel) -> MpStatus {
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| match ChannelParams::new(x, d) {
        Ok(p) => {
            unsafe { *out = Box::into_raw(Box::new(MpChannel(p))) };
            MpStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Releases a channel handle; NULL is a no-op.
///
/// # Safety
/// `ch` must have come from [`mp_channel_new`] and not been freed before.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_free(ch: *mut MpChannel) {
    if !ch.is_null() {
        drop(unsafe { Box::from_raw(ch) });
    }
}

macro_rules! chan {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(c) => &c.0,
            None => return MpStatus::NullArgument,
        }
    };
}

macro_rules! pulse {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(p) => &p.0,
            None => return MpStatus::NullArgument,
        }
    };
}

/// Response peak time x²/(6D).
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_peak_time(ch: *const MpChannel, out: *mut f64) -> MpStatus {
    let p = chan!(ch);
    unsafe { scalar_out(out, || Ok(p.peak_time())) }
}

/// Hitting concentration at time `t > 0`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_hitting_concentration(
    ch: *const MpChannel,
    t: f64,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    unsafe { scalar_out(out, || p.hitting_concentration(t)) }
}

/// Fraction of molecules captured by time `t >= 0`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_capture_cdf(
    ch: *const MpChannel,
    t: f64,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    unsafe { scalar_out(out, || p.capture_cdf(t)) }
}

/// Capture rate h(t) at time `t > 0`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_impulse_response(
    ch: *const MpChannel,
    t: f64,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    unsafe { scalar_out(out, || p.impulse_response(t)) }
}

/// Transfer function H(s) = exp(-x·sqrt(s/D)) for `s >= 0`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_transfer_function(
    ch: *const MpChannel,
    s: f64,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    unsafe { scalar_out(out, || p.transfer_function(s)) }
}

/// Fills `out[0..n_bins]` with per-bin capture fractions on a uniform grid
/// of width `dt`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must point to at least
/// `n_bins` doubles.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_binned_response(
    ch: *const MpChannel,
    dt: f64,
    n_bins: u64,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        let grid = match TimeGrid::new(dt, n_bins as usize) {
            Ok(g) => g,
            Err(e) => return status_of(&e),
        };
        let bins = p.binned_response(&grid);
        unsafe { std::ptr::copy_nonoverlapping(bins.as_ptr(), out, bins.len()) };
        MpStatus::Ok
    })
}

/// Numerically inverts H(s) at time `t`; `param` = 0 picks the method's
/// default order.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_channel_invert_transfer(
    ch: *const MpChannel,
    t: f64,
    method: MpInversionMethod,
    param: u32,
    out: *mut f64,
) -> MpStatus {
    let p = chan!(ch);
    let cfg = match method {
        MpInversionMethod::FixedTalbot => InversionConfig {
            method: InversionMethod::FixedTalbot,
            talbot_m: if param == 0 { 32 } else { param as usize },
            ..InversionConfig::default()
        },
        MpInversionMethod::GaverStehfest => InversionConfig {
            method: InversionMethod::GaverStehfest,
            stehfest_n: if param == 0 { 14 } else { param as usize },
            ..InversionConfig::default()
        },
    };
    unsafe { scalar_out(out, || invert(|s| p.transfer_function_complex(s), t, &cfg)) }
}

/// Builds the channel-inversion composite pulse for `ch`.
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid. The returned
/// handle must be released with [`mp_pulse_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_channel_inversion(
    ch: *const MpChannel,
    out: *mut *mut MpPulse,
) -> MpStatus {
    let p = chan!(ch);
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = Box::into_raw(Box::new(MpPulse(invert_channel_pulse(p)))) };
        MpStatus::Ok
    })
}

/// Builds the window-design composite pulse for `ch` (the erfc(1)-scaled
/// twin of the channel-inversion pulse).
///
/// # Safety
/// `ch` must be a live channel handle; `out` must be valid. The returned
/// handle must be released with [`mp_pulse_free`].
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_window_design(
    ch: *const MpChannel,
    out: *mut *mut MpPulse,
) -> MpStatus {
    let p = chan!(ch);
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        unsafe { *out = Box::into_raw(Box::new(MpPulse(windowed_composite(p)))) };
        MpStatus::Ok
    })
}

/// Releases a pulse handle; NULL is a no-op.
///
/// # Safety
/// `pulse` must have come from a pulse constructor and not been freed.
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_free(pulse: *mut MpPulse) {
    if !pulse.is_null() {
        drop(unsafe { Box::from_raw(pulse) });
    }
}

/// Reads the five analytic pulse fields at once. Any out pointer may be
/// NULL to skip that field.
///
/// # Safety
/// `pulse` must be a live pulse handle; non-NULL out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_fields(
    pulse: *const MpPulse,
    info_amplitude: *mut f64,
    poison_coefficient: *mut f64,
    poison_start: *mut f64,
    poison_horizon: *mut f64,
    scale: *mut f64,
) -> MpStatus {
    let cp = pulse!(pulse);
    unsafe {
        if !info_amplitude.is_null() {
            *info_amplitude = cp.info_amplitude();
        }
        if !poison_coefficient.is_null() {
            *poison_coefficient = cp.poison_coefficient();
        }
        if !poison_start.is_null() {
            *poison_start = cp.poison_start();
        }
        if !poison_horizon.is_null() {
            *poison_horizon = cp.poison_horizon();
        }
        if !scale.is_null() {
            *scale = cp.scale();
        }
    }
    MpStatus::Ok
}

/// Moves the poison emission window; requires 0 < start < horizon.
///
/// # Safety
/// `pulse` must be a live, uniquely held pulse handle.
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_set_poison_window(
    pulse: *mut MpPulse,
    start: f64,
    horizon: f64,
) -> MpStatus {
    let handle = match unsafe { pulse.as_mut() } {
        Some(h) => h,
        None => return MpStatus::NullArgument,
    };
    guarded(|| match handle.0.with_poison_window(start, horizon) {
        Ok(updated) => {
            handle.0 = updated;
            MpStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Realizes the pulse on a uniform grid: fills the two nonnegative
/// per-bin emission schedules (information compound and poison compound).
///
/// # Safety
/// `pulse` must be a live pulse handle; `compound_a` and `compound_b`
/// must each point to at least `n_bins` doubles.
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_realize(
    pulse: *const MpPulse,
    dt: f64,
    n_bins: u64,
    compound_a: *mut f64,
    compound_b: *mut f64,
) -> MpStatus {
    let cp = pulse!(pulse);
    if compound_a.is_null() || compound_b.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        let grid = match TimeGrid::new(dt, n_bins as usize) {
            Ok(g) => g,
            Err(e) => return status_of(&e),
        };
        let em = realize_emission(cp, &grid);
        unsafe {
            std::ptr::copy_nonoverlapping(em.compound_a().as_ptr(), compound_a, em.compound_a().len());
            std::ptr::copy_nonoverlapping(em.compound_b().as_ptr(), compound_b, em.compound_b().len());
        }
        MpStatus::Ok
    })
}

/// Net received mass per bin for the pulse through the channel.
///
/// # Safety
/// `pulse` and `ch` must be live handles; `out` must point to at least
/// `n_bins` doubles.
#[no_mangle]
pub unsafe extern "C" fn mp_pulse_shaped_response(
    pulse: *const MpPulse,
    ch: *const MpChannel,
    dt: f64,
    n_bins: u64,
    out: *mut f64,
) -> MpStatus {
    let cp = pulse!(pulse);
    let p = chan!(ch);
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        let grid = match TimeGrid::new(dt, n_bins as usize) {
            Ok(g) => g,
            Err(e) => return status_of(&e),
        };
        let resp = shaped_response(cp, p, &grid);
        unsafe { std::ptr::copy_nonoverlapping(resp.as_ptr(), out, resp.len()) };
        MpStatus::Ok
    })
}

/// Runs the on-off-keyed link with seeded pseudo-random bits and fills a
/// summary report.
///
/// # Safety
/// `ch`, `cfg`, and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mp_link_simulate(
    ch: *const MpChannel,
    cfg: *const MpLinkConfig,
    kind: MpPulseKind,
    out: *mut MpBerReport,
) -> MpStatus {
    let p = chan!(ch);
    let cfg = match unsafe { cfg.as_ref() } {
        Some(c) => c,
        None => return MpStatus::NullArgument,
    };
    if out.is_null() {
        return MpStatus::NullArgument;
    }
    guarded(|| {
        let link = LinkConfig {
            symbol_period: cfg.symbol_period,
            n_symbols: cfg.n_symbols as usize,
            bits: BitSource::Seeded,
            noise_sigma: cfg.noise_sigma,
            threshold: if cfg.threshold_auto {
                Threshold::Auto
            } else {
                Threshold::Fixed(cfg.threshold)
            },
            samples_per_symbol: cfg.samples_per_symbol as usize,
            seed: cfg.seed,
        };
        let kind = match kind {
            MpPulseKind::Raw => PulseKind::Raw,
            MpPulseKind::ChannelInversion => PulseKind::MethodA,
            MpPulseKind::WindowDesign => PulseKind::MethodB,
        };
        match simulate_link(p, &link, kind) {
            Ok(rep) => {
                unsafe {
                    *out = MpBerReport {
                        n_symbols: rep.n_symbols as u64,
                        n_errors: rep.n_errors as u64,
                        ber: rep.ber,
                        threshold: rep.threshold,
                        tail_energy_ratio: rep.tail_energy_ratio,
                    };
                }
                MpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
