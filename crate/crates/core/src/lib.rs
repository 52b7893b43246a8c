//! molpulse: a 1-D molecular diffusion channel toolkit.
//!
//! Models the semi-infinite absorbing diffusion channel, designs composite
//! transmit pulses that cancel its heavy t^(-3/2) tail with a second
//! ("poison") compound, and verifies everything three independent ways:
//! closed forms ([`channel`], [`shaping`]), numerical Laplace transforms
//! ([`laplace`]), and Brownian first-passage Monte Carlo plus a link-level
//! ISI/BER simulator ([`simulate`]). The [`cli`] module wires it all into
//! the `molpulse` binary.

pub mod channel;
pub mod cli;
mod conv;
pub mod error;
pub mod laplace;
pub mod shaping;
pub mod simulate;
pub mod special;

pub use channel::{ChannelParams, TimeGrid};
pub use error::{Error, Result};
