//! Closed forms for the 1-D semi-infinite diffusion channel.
//!
//! A point transmitter releases molecules at the origin; a perfectly
//! absorbing receiver sits at distance `x` in a medium with diffusivity
//! `D`. For a unit impulse release:
//!
//! ```text
//! hitting concentration  φ_h(x,t) = exp(-x²/(4Dt)) / √(πDt)
//! capture CDF            φ_c(x,t) = erfc(x / (2√(Dt)))
//! impulse response       h(t) = dφ_c/dt
//!                             = (x / (2√(πD))) · t^(-3/2) · exp(-x²/(4Dt))
//! transfer function      H(s) = exp(-x√(s/D))
//! response peak          t_max = x²/(6D)
//! ```
//!
//! All quantities are in one consistent but unspecified unit system; every
//! observable here depends on `x` and `D` only through the ratio `x/√D`
//! (up to an overall scale), which is what the accessors expose.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::erfc;

/// Exponent beyond which exp(-x²/(4Dt)) is treated as an exact zero
/// instead of letting the multiplication underflow noisily. Deep-tail
/// parameter sweeps hit this regime routinely; returning 0.0 is the
/// documented graceful-underflow policy.
const UNDERFLOW_EXPONENT: f64 = 700.0;

/// Transmitter-receiver geometry of the diffusion channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    distance: f64,
    diffusivity: f64,
    /// Cached x/√D; every dimensionless property routes through this so
    /// parameter pairs with equal ratio produce bit-identical results.
    ratio: f64,
}

impl ChannelParams {
    /// Validates `x > 0`, `D > 0`, both finite.
    pub fn new(distance: f64, diffusivity: f64) -> Result<Self> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::domain(format!(
                "distance must be positive and finite, got {distance}"
            )));
        }
        if !(diffusivity.is_finite() && diffusivity > 0.0) {
            return Err(Error::domain(format!(
                "diffusivity must be positive and finite, got {diffusivity}"
            )));
        }
        Ok(Self {
            distance,
            diffusivity,
            ratio: distance / diffusivity.sqrt(),
        })
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn diffusivity(&self) -> f64 {
        self.diffusivity
    }

    /// The small parameter x/√D of the short-distance expansions.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Time of the impulse-response maximum, t_max = x²/(6D).
    pub fn peak_time(&self) -> f64 {
        self.ratio * self.ratio / 6.0
    }

    /// Hitting concentration φ_h(x,t), per unit impulse (1/length).
    ///
    /// Rejects `t ≤ 0`; the limit for t → 0⁺ is 0 but the expression is
    /// singular there.
    pub fn hitting_concentration(&self, t: f64) -> Result<f64> {
        self.require_positive_time(t)?;
        let e = self.ratio * self.ratio / (4.0 * t);
        if e > UNDERFLOW_EXPONENT {
            return Ok(0.0);
        }
        Ok((-e).exp() / (std::f64::consts::PI * self.diffusivity * t).sqrt())
    }

    /// Fraction of released molecules captured by time `t`:
    /// erfc(x/(2√(Dt))). Defined as 0 at `t = 0`.
    pub fn capture_cdf(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::domain(format!(
                "capture_cdf needs t >= 0, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(erfc(self.ratio / (2.0 * t.sqrt())))
    }

    /// Capture rate h(t) = dφ_c/dt (1/time).
    ///
    /// Differentiating erfc(x/(2√(Dt))) in t gives
    /// h(t) = (x/(2√(πD))) · t^(-3/2) · exp(-x²/(4Dt)).
    pub fn impulse_response(&self, t: f64) -> Result<f64> {
        self.require_positive_time(t)?;
        let e = self.ratio * self.ratio / (4.0 * t);
        if e > UNDERFLOW_EXPONENT {
            return Ok(0.0);
        }
        let coeff = self.ratio / (2.0 * std::f64::consts::PI.sqrt());
        Ok(coeff * t.powf(-1.5) * (-e).exp())
    }

    /// Transfer function H(s) = exp(-x√(s/D)) on the nonnegative real axis.
    pub fn transfer_function(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::domain(format!(
                "transfer_function needs s >= 0, got {s}"
            )));
        }
        Ok((-self.ratio * s.sqrt()).exp())
    }

    /// H(s) continued to complex s (principal branch of √s), as required
    /// by contour-based Laplace inversion.
    pub fn transfer_function_complex(&self, s: Complex64) -> Complex64 {
        (-self.ratio * s.sqrt()).exp()
    }

    /// Per-bin capture fractions: entry k is φ_c((k+1)·dt) - φ_c(k·dt).
    pub fn binned_response(&self, grid: &TimeGrid) -> Vec<f64> {
        let mut prev = 0.0;
        (0..grid.n_bins())
            .map(|k| {
                let next = self
                    .capture_cdf(grid.edge(k + 1))
                    .expect("grid edges are positive");
                let mass = next - prev;
                prev = next;
                mass
            })
            .collect()
    }

    fn require_positive_time(&self, t: f64) -> Result<()> {
        if t.is_nan() || t <= 0.0 {
            return Err(Error::domain(format!("time must be positive, got {t}")));
        }
        Ok(())
    }
}

/// Uniform time discretization; bin k covers [k·dt, (k+1)·dt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_bins: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_bins: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::config(format!("bin width must be positive, got {dt}")));
        }
        if n_bins == 0 {
            return Err(Error::config("grid needs at least one bin"));
        }
        Ok(Self { dt, n_bins })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    /// Left edge of bin k; `edge(n_bins)` is the end of the grid.
    pub fn edge(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.dt
    }

    pub fn end(&self) -> f64 {
        self.edge(self.n_bins)
    }
}
