//! Received-probability analysis of ADS-B broadcasts from UAVs at a ground station, with other
//! UAVs and civil aircraft (CAs) as co-channel interferers.
//!
//! Two engines answer the same question:
//!
//! * [`analytic`] integrates the Poisson stochastic-geometry expression (Rayleigh fading) by
//!   adaptive quadrature;
//! * [`montecarlo`] samples populations and fading and thresholds the SINR directly.
//!
//! [`harness`] ties them together for configuration files, parameter sweeps and figure
//! reproduction.
//!
//! The numerical modules are generic over [`Real`] (`f32` or `f64`); the aliases below fix the
//! scalar to `f64`, which is what the harness and the file formats use.

// `!(x > 0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;
pub mod scenario;
pub mod sinr;

pub use error::{Error, Result};
pub use geometry::RangeBucket;
pub use scalar::Real;
pub use scenario::InterferenceRegion;

pub type Point3 = geometry::Point3<f64>;
pub type BoxSpace = geometry::BoxSpace<f64>;
pub type AltitudeBand = geometry::AltitudeBand<f64>;
pub type Intensity = geometry::Intensity<f64>;
pub type RadioParams = channel::RadioParams<f64>;
pub type ChannelParams = channel::ChannelParams<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type QuadratureSettings = scenario::QuadratureSettings<f64>;
pub type RealizedTransmitter = sinr::RealizedTransmitter<f64>;
pub type SinrBreakdown = sinr::SinrBreakdown<f64>;
