//! SINR of a designated target UAV against one realised population.

use crate::channel::{db_to_linear, ChannelParams, RadioParams};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_gs, Point3};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AircraftClass {
    Uav,
    Ca,
}

/// A transmitter with its fading gain already drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedTransmitter<T> {
    pub position: Point3<T>,
    pub fading: T,
    pub class: AircraftClass,
}

impl<T: Real> RealizedTransmitter<T> {
    pub fn new(position: Point3<T>, fading: T, class: AircraftClass) -> Self {
        Self {
            position,
            fading,
            class,
        }
    }
}

/// Received powers (W) making up one SINR value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrBreakdown<T> {
    pub signal: T,
    pub noise: T,
    pub uav_interference: T,
    pub ca_interference: T,
    pub sinr: T,
}

/// `sum gain * h * d^-alpha` over the transmitters, skipping `exclude`.
///
/// Power-free: callers scale by the class transmit power.
pub fn interference_sum<T: Real>(
    transmitters: &[RealizedTransmitter<T>],
    gain: T,
    channel: &ChannelParams<T>,
    exclude: Option<usize>,
) -> Result<T> {
    let mut acc = T::zero();
    for (i, t) in transmitters.iter().enumerate() {
        if Some(i) == exclude {
            continue;
        }
        acc += gain * t.fading * channel.pathloss_km(distance_to_gs(&t.position))?;
    }
    Ok(acc)
}

/// SINR at the GS of `uavs[target]`, with every other UAV and every CA interfering.
pub fn compute_sinr<T: Real>(
    target: usize,
    uavs: &[RealizedTransmitter<T>],
    cas: &[RealizedTransmitter<T>],
    uav_radio: &RadioParams<T>,
    ca_radio: &RadioParams<T>,
    channel: &ChannelParams<T>,
) -> Result<SinrBreakdown<T>> {
    let tgt = uavs.get(target).ok_or(Error::NoTarget)?;
    let noise = channel.noise_w()?;
    let signal = uav_radio.tx_power_w()
        * uav_radio.gain_linear()
        * tgt.fading
        * channel.pathloss_km(distance_to_gs(&tgt.position))?;
    let uav_interference = uav_radio.tx_power_w()
        * interference_sum(uavs, uav_radio.gain_linear(), channel, Some(target))?;
    let ca_interference =
        ca_radio.tx_power_w() * interference_sum(cas, ca_radio.gain_linear(), channel, None)?;
    Ok(SinrBreakdown {
        signal,
        noise,
        uav_interference,
        ca_interference,
        sinr: signal / (noise + uav_interference + ca_interference),
    })
}

/// Decoding succeeds when the SINR reaches the threshold (inclusive).
#[inline]
pub fn success<T: Real>(sinr: T, theta_db: T) -> bool {
    sinr >= db_to_linear(theta_db)
}
