//! Discrete convolution of per-bin mass sequences.

use rustfft::{num_complex::Complex, FftPlanner};

/// First `a.len()` entries of the linear convolution a ⊛ b.
///
/// Small inputs go through the direct sum; longer ones through a zero-padded
/// FFT (exact linear convolution, no circular aliasing, deterministic).
pub(crate) fn convolve_prefix(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    if n == 0 {
        return Vec::new();
    }
    debug_assert_eq!(a.len(), b.len());
    if n <= 512 {
        let mut out = vec![0.0; n];
        for (j, &aj) in a.iter().enumerate() {
            if aj == 0.0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate().skip(j) {
                *o += aj * b[k - j];
            }
        }
        return out;
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = a
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut fb: Vec<Complex<f64>> = b
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= y;
    }
    ifft.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa.iter().take(n).map(|c| c.re * scale).collect()
}
