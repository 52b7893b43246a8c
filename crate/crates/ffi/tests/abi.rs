//! Exercises the C ABI exactly as a foreign caller would: through the
//! exported extern "C" functions, raw pointers and status codes.

use std::ptr;

use molpulse_ffi::*;

fn new_channel(x: f64, d: f64) -> *mut MpChannel {
    let mut ch: *mut MpChannel = ptr::null_mut();
    let st = unsafe { mp_channel_new(x, d, &mut ch) };
    assert_eq!(st, MpStatus::Ok);
    assert!(!ch.is_null());
    ch
}

#[test]
fn channel_lifecycle_and_scalars() {
    let ch = new_channel(1.0, 1.0);
    unsafe {
        let mut v = 0.0f64;
        assert_eq!(mp_channel_peak_time(ch, &mut v), MpStatus::Ok);
        assert!((v - 1.0 / 6.0).abs() < 1e-15);

        assert_eq!(mp_channel_capture_cdf(ch, 0.25, &mut v), MpStatus::Ok);
        assert!((v - 0.15729920705028513066).abs() < 1e-15);

        assert_eq!(mp_channel_transfer_function(ch, 1.0, &mut v), MpStatus::Ok);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);

        // Domain violations come back as InvalidArgument, not poisoned data.
        let sentinel = 12345.0;
        v = sentinel;
        assert_eq!(
            mp_channel_impulse_response(ch, -1.0, &mut v),
            MpStatus::InvalidArgument
        );
        assert_eq!(v, sentinel);

        mp_channel_free(ch);
        mp_channel_free(ptr::null_mut()); // tolerated
    }
}

#[test]
fn constructor_validation_and_null_arguments() {
    let mut ch: *mut MpChannel = ptr::null_mut();
    unsafe {
        assert_eq!(mp_channel_new(-1.0, 1.0, &mut ch), MpStatus::InvalidArgument);
        assert_eq!(mp_channel_new(1.0, 1.0, ptr::null_mut()), MpStatus::NullArgument);
        let mut v = 0.0;
        assert_eq!(
            mp_channel_capture_cdf(ptr::null(), 1.0, &mut v),
            MpStatus::NullArgument
        );
    }
    let msg = unsafe { std::ffi::CStr::from_ptr(mp_status_message(MpStatus::NullArgument)) };
    assert!(msg.to_str().unwrap().contains("NULL"));
}

#[test]
fn binned_response_fills_caller_buffer() {
    let ch = new_channel(1.0, 1.0);
    let mut bins = vec![0.0f64; 4];
    unsafe {
        assert_eq!(
            mp_channel_binned_response(ch, 0.25, 4, bins.as_mut_ptr()),
            MpStatus::Ok
        );
        // First bin over [0, x²/4D] captures erfc(1).
        assert!((bins[0] - 0.15729920705028513066).abs() < 1e-15);
        assert!(bins.iter().all(|&b| b > 0.0));
        // Invalid grid is rejected.
        assert_eq!(
            mp_channel_binned_response(ch, 0.0, 4, bins.as_mut_ptr()),
            MpStatus::InvalidArgument
        );
        mp_channel_free(ch);
    }
}

#[test]
fn invert_transfer_both_methods() {
    let ch = new_channel(1.0, 1.0);
    let t = 1.0 / 6.0;
    let want = 0.92508197882261566087; // closed-form h at the peak
    unsafe {
        let mut talbot = 0.0;
        assert_eq!(
            mp_channel_invert_transfer(ch, t, MpInversionMethod::FixedTalbot, 0, &mut talbot),
            MpStatus::Ok
        );
        assert!(((talbot - want) / want).abs() < 1e-8);
        let mut stehfest = 0.0;
        assert_eq!(
            mp_channel_invert_transfer(ch, t, MpInversionMethod::GaverStehfest, 0, &mut stehfest),
            MpStatus::Ok
        );
        assert!(((stehfest - want) / want).abs() < 1e-2);
        // Bad order parameter.
        let mut v = 0.0;
        assert_eq!(
            mp_channel_invert_transfer(ch, t, MpInversionMethod::GaverStehfest, 13, &mut v),
            MpStatus::InvalidArgument
        );
        mp_channel_free(ch);
    }
}

#[test]
fn pulse_handles_and_method_scaling() {
    let ch = new_channel(1.0, std::f64::consts::PI);
    unsafe {
        let mut a: *mut MpPulse = ptr::null_mut();
        let mut b: *mut MpPulse = ptr::null_mut();
        assert_eq!(mp_pulse_channel_inversion(ch, &mut a), MpStatus::Ok);
        assert_eq!(mp_pulse_window_design(ch, &mut b), MpStatus::Ok);

        let (mut ca, mut cb, mut sa, mut sb) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(
            mp_pulse_fields(a, ptr::null_mut(), &mut ca, ptr::null_mut(), ptr::null_mut(), &mut sa),
            MpStatus::Ok
        );
        assert_eq!(
            mp_pulse_fields(b, ptr::null_mut(), &mut cb, ptr::null_mut(), ptr::null_mut(), &mut sb),
            MpStatus::Ok
        );
        assert_eq!(ca, cb);
        assert!((ca - 0.15915494309189533577).abs() < 1e-15); // 1/(2π)
        assert_eq!(sa, 1.0);
        assert!((sb - 0.15729920705028513066).abs() < 1e-15); // erfc(1)

        // Window override is validated.
        assert_eq!(mp_pulse_set_poison_window(a, 0.5, 0.1), MpStatus::InvalidArgument);
        assert_eq!(mp_pulse_set_poison_window(a, 1e-3, 10.0), MpStatus::Ok);

        mp_pulse_free(a);
        mp_pulse_free(b);
        mp_channel_free(ch);
    }
}

#[test]
fn realize_and_shaped_response_buffers() {
    let ch = new_channel(0.1, 1.0);
    unsafe {
        let mut pulse: *mut MpPulse = ptr::null_mut();
        assert_eq!(mp_pulse_channel_inversion(ch, &mut pulse), MpStatus::Ok);
        let mut tm = 0.0;
        mp_channel_peak_time(ch, &mut tm);
        let n = 256u64;
        let dt = tm / 10.0;
        let mut a = vec![0.0f64; n as usize];
        let mut b = vec![0.0f64; n as usize];
        assert_eq!(
            mp_pulse_realize(pulse, dt, n, a.as_mut_ptr(), b.as_mut_ptr()),
            MpStatus::Ok
        );
        assert!(a.iter().all(|&v| v >= 0.0));
        assert!(b.iter().all(|&v| v >= 0.0));
        assert!(a[0] > 1.0); // impulse carries the poison balance
        assert!(a[1..].iter().all(|&v| v == 0.0));

        let mut resp = vec![0.0f64; n as usize];
        assert_eq!(
            mp_pulse_shaped_response(pulse, ch, dt, n, resp.as_mut_ptr()),
            MpStatus::Ok
        );
        assert!(resp[0] > 0.0);

        mp_pulse_free(pulse);
        mp_channel_free(ch);
    }
}

#[test]
fn link_simulation_through_the_abi() {
    let ch = new_channel(0.1, 1.0);
    let mut tm = 0.0;
    unsafe {
        mp_channel_peak_time(ch, &mut tm);
        let cfg = MpLinkConfig {
            symbol_period: 2.0 * tm,
            n_symbols: 2000,
            samples_per_symbol: 8,
            noise_sigma: 0.01,
            threshold: 0.0,
            threshold_auto: true,
            seed: 42,
        };
        let mut raw = MpBerReport {
            n_symbols: 0,
            n_errors: 0,
            ber: 0.0,
            threshold: 0.0,
            tail_energy_ratio: 0.0,
        };
        let mut shaped = raw;
        assert_eq!(
            mp_link_simulate(ch, &cfg, MpPulseKind::Raw, &mut raw),
            MpStatus::Ok
        );
        assert_eq!(
            mp_link_simulate(ch, &cfg, MpPulseKind::ChannelInversion, &mut shaped),
            MpStatus::Ok
        );
        assert_eq!(raw.n_symbols, 2000);
        assert!(raw.ber > shaped.ber);
        assert!(shaped.tail_energy_ratio < raw.tail_energy_ratio);

        // Determinism through the ABI.
        let mut again = raw;
        assert_eq!(
            mp_link_simulate(ch, &cfg, MpPulseKind::Raw, &mut again),
            MpStatus::Ok
        );
        assert_eq!(again.n_errors, raw.n_errors);

        // Invalid config surfaces as InvalidArgument.
        let bad = MpLinkConfig {
            noise_sigma: -1.0,
            ..cfg
        };
        assert_eq!(
            mp_link_simulate(ch, &bad, MpPulseKind::Raw, &mut raw),
            MpStatus::InvalidArgument
        );
        mp_channel_free(ch);
    }
}

#[test]
fn generated_header_exists_and_compiles() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/molpulse.h");
    assert!(header.exists(), "cbindgen header missing");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "mp_channel_new",
        "mp_pulse_realize",
        "mp_link_simulate",
        "MpStatus",
        "MpBerReport",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    // Syntax-check with the system C compiler when one is around.
    if let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", header.to_str().unwrap()])
        .output()
    {
        assert!(
            out.status.success(),
            "header does not compile: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
