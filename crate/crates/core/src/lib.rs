//! Post-beamforming GLRT detection for phased-array radar.
//!
//! The detector sums the `N` antenna outputs into a single complex waveform of
//! `M` samples, estimates the echo mean and noise variance from that waveform,
//! and compares
//!
//! ```text
//! Z = (M - 1) / (2N) * (mu_x^2 + mu_y^2) / sigma1^2
//! ```
//!
//! against a threshold. Under noise only `Z` is central-F with `(2, 2(M-1))`
//! degrees of freedom, so the false-alarm probability has a closed form that
//! depends on neither `N` nor the noise power. Under a nonfluctuating target the
//! detection probability is available three ways, and this crate implements
//! all of them so they can check each other:
//!
//! * [`analytic::pd_quadrature`]: a single finite integral of a Kummer function;
//! * [`analytic::pd_series`]: a residue series with a certified truncation bound;
//! * [`foxh::pd_foxh`]: a bivariate Fox H-function evaluated by contour quadrature.
//!
//! [`montecarlo`] simulates the array at the signal level and runs the
//! post-beamforming GLRT next to the pre-beamforming GLRT, square-law and
//! clairvoyant LRT detectors from [`detectors`].

pub mod analytic;
pub mod cli;
pub mod detectors;
pub mod distributions;
mod error;
pub mod foxh;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use special::ComplexValue;
