//! The full experiment description consumed by both engines.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, PathlossUnit, RadioParams};
use crate::error::{Error, Result};
use crate::geometry::{AltitudeBand, BoxSpace, Intensity, DEFAULT_RANGE_CUTOFF_KM};
use crate::scalar::Real;

/// Altitudes over which the analytic interference integrals run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceRegion {
    /// Each class over its own altitude band, as the populations are sampled.
    #[default]
    ClassBands,
    /// Both classes over `[0, Lz]`.
    FullHeight,
}

/// Tolerances and truncation rules for every numerical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings<T> {
    /// Relative tolerance of a standalone interference (Laplace exponent) integral.
    pub laplace_rel_tol: T,
    /// Relative tolerance of the outer integral over the target distance.
    pub outer_rel_tol: T,
    /// Nearest-distance tail mass left beyond the outer integration limit.
    pub truncation_mass: T,
    /// Segment budget of each adaptive one-dimensional integration.
    pub max_segments: usize,
}

impl<T: Real> Default for QuadratureSettings<T> {
    fn default() -> Self {
        Self {
            laplace_rel_tol: T::lit(1e-6),
            outer_rel_tol: T::lit(1e-7),
            truncation_mass: T::lit(1e-9),
            max_segments: 2000,
        }
    }
}

impl<T: Real> QuadratureSettings<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.laplace_rel_tol) {
            return Err(invalid("quadrature.laplace_rel_tol", "must be > 0"));
        }
        if !positive(self.outer_rel_tol) {
            return Err(invalid("quadrature.outer_rel_tol", "must be > 0"));
        }
        if !(self.truncation_mass > T::zero() && self.truncation_mass < T::one()) {
            return Err(invalid("quadrature.truncation_mass", "must lie in (0, 1)"));
        }
        if self.max_segments == 0 {
            return Err(invalid("quadrature.max_segments", "must be >= 1"));
        }
        Ok(())
    }

    /// Tolerance for interference integrals nested inside an outer distance integral.
    pub fn nested_laplace_rel_tol(&self) -> T {
        self.laplace_rel_tol.min(self.outer_rel_tol * T::lit(0.1))
    }
}

fn invalid(field: &str, constraint: &str) -> Error {
    Error::Validation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T> {
    pub space: BoxSpace<T>,
    pub uav_band: AltitudeBand<T>,
    pub ca_band: AltitudeBand<T>,
    /// Intensity driving the nearest-target distance law.
    pub lambda_pdf: Intensity<T>,
    /// Intensity of the interfering UAV field.
    pub lambda_uav: Intensity<T>,
    pub lambda_ca: Intensity<T>,
    pub uav_radio: RadioParams<T>,
    pub ca_radio: RadioParams<T>,
    pub channel: ChannelParams<T>,
    pub theta_db: T,
    pub range_cutoff_km: T,
    pub interference_region: InterferenceRegion,
}

impl<T: Real> Scenario<T> {
    /// Tabulated simulation defaults: 20 x 20 x 10 km box, UAVs at 1–6 km and CAs at 6–10 km,
    /// 30 UAVs and 15 CAs expected in the box, P_U = 16 W, P_C = 30 W, 23/20 dBi, alpha = 2,
    /// -174 dBm/Hz over 1 MHz, Rayleigh fading, 7 dB threshold.
    pub fn baseline() -> Self {
        let space = BoxSpace::new(T::lit(10.0), T::lit(10.0), T::lit(10.0)).expect("valid box");
        let volume = space.volume();
        let lambda1 = Intensity::from_count(T::lit(30.0), volume).expect("valid count");
        Self {
            space,
            uav_band: AltitudeBand::new(T::lit(1.0), T::lit(6.0)).expect("valid band"),
            ca_band: AltitudeBand::new(T::lit(6.0), T::lit(10.0)).expect("valid band"),
            lambda_pdf: lambda1,
            lambda_uav: lambda1,
            lambda_ca: Intensity::from_count(T::lit(15.0), volume).expect("valid count"),
            uav_radio: RadioParams::new(T::lit(16.0), T::lit(23.0)).expect("valid radio"),
            ca_radio: RadioParams::new(T::lit(30.0), T::lit(20.0)).expect("valid radio"),
            channel: ChannelParams {
                alpha: T::lit(2.0),
                noise_density_dbm_per_hz: T::lit(-174.0),
                bandwidth_hz: T::lit(1e6),
                fading_shape: T::one(),
                pathloss_unit: PathlossUnit::Meter,
            },
            theta_db: T::lit(7.0),
            range_cutoff_km: T::lit(DEFAULT_RANGE_CUTOFF_KM),
            interference_region: InterferenceRegion::ClassBands,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.uav_band
            .check_within(&self.space)
            .map_err(|e| with_field("uav_band_km", e))?;
        self.ca_band
            .check_within(&self.space)
            .map_err(|e| with_field("ca_band_km", e))?;
        self.channel
            .validate()
            .map_err(|e| with_field("channel", e))?;
        if !self.theta_db.is_finite() {
            return Err(invalid("theta_db", "must be finite"));
        }
        if !(self.range_cutoff_km >= T::zero() && self.range_cutoff_km.is_finite()) {
            return Err(invalid("range_cutoff_km", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn uav_interference_band(&self) -> AltitudeBand<T> {
        match self.interference_region {
            InterferenceRegion::ClassBands => self.uav_band,
            InterferenceRegion::FullHeight => self.space.full_band(),
        }
    }

    pub fn ca_interference_band(&self) -> AltitudeBand<T> {
        match self.interference_region {
            InterferenceRegion::ClassBands => self.ca_band,
            InterferenceRegion::FullHeight => self.space.full_band(),
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = self.channel.warnings();
        let pu = self.uav_radio.tx_power_w().as_f64();
        if !(1.0..=70.0).contains(&pu) {
            w.push(format!("P_U={pu} W outside [1, 70]"));
        }
        let pc = self.ca_radio.tx_power_w().as_f64();
        if !(15.0..=140.0).contains(&pc) {
            w.push(format!("P_C={pc} W outside [15, 140]"));
        }
        let theta = self.theta_db.as_f64();
        if !(7.0..=14.0).contains(&theta) {
            w.push(format!("theta={theta} dB outside [7, 14]"));
        }
        let count = self.lambda_uav.expected_count(self.space.volume()).as_f64();
        if count > 100.0 {
            w.push(format!("lambda1={count} UAVs in the box, above 100"));
        }
        w
    }
}

fn with_field(field: &str, e: Error) -> Error {
    Error::Validation {
        field: field.into(),
        constraint: e.to_string(),
    }
}
