//! Radio-level scalar math: dB conversions, thermal noise, power-law pathloss and small-scale
//! fading.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn db_to_linear<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Real>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

/// Noise power in watts for a density in dBm/Hz over `bandwidth_hz`.
pub fn noise_power<T: Real>(density_dbm_per_hz: T, bandwidth_hz: T) -> Result<T> {
    if !(bandwidth_hz > T::zero()) {
        return Err(Error::domain("bandwidth", bandwidth_hz.as_f64()));
    }
    Ok(db_to_linear(density_dbm_per_hz - T::lit(30.0)) * bandwidth_hz)
}

/// `d^-alpha`, with `d` already expressed in the pathloss reference unit.
pub fn pathloss_factor<T: Real>(d: T, alpha: T) -> Result<T> {
    if d == T::zero() {
        return Err(Error::SingularDistance);
    }
    if !(d > T::zero()) {
        return Err(Error::domain("distance", d.as_f64()));
    }
    Ok(d.powf(-alpha))
}

/// Unit in which distances enter `d^-alpha`. Positions are always stored in km.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathlossUnit {
    #[default]
    Meter,
    Kilometer,
}

impl PathlossUnit {
    /// Multiplier taking km to this unit.
    pub fn per_km<T: Real>(self) -> T {
        match self {
            PathlossUnit::Meter => T::lit(1000.0),
            PathlossUnit::Kilometer => T::one(),
        }
    }
}

/// Transmit power and combined (transmitter x receiver) antenna gain of one aircraft class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams<T> {
    tx_power_w: T,
    gain_db: T,
    gain_linear: T,
}

impl<T: Real> RadioParams<T> {
    pub fn new(tx_power_w: T, gain_db: T) -> Result<Self> {
        if !(tx_power_w > T::zero() && tx_power_w.is_finite()) {
            return Err(Error::domain("transmit power", tx_power_w.as_f64()));
        }
        if !gain_db.is_finite() {
            return Err(Error::domain("gain", gain_db.as_f64()));
        }
        Ok(Self {
            tx_power_w,
            gain_db,
            gain_linear: db_to_linear(gain_db),
        })
    }

    pub fn tx_power_w(&self) -> T {
        self.tx_power_w
    }

    pub fn gain_db(&self) -> T {
        self.gain_db
    }

    pub fn gain_linear(&self) -> T {
        self.gain_linear
    }

    pub fn with_tx_power(&self, tx_power_w: T) -> Result<Self> {
        Self::new(tx_power_w, self.gain_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams<T> {
    pub alpha: T,
    pub noise_density_dbm_per_hz: T,
    pub bandwidth_hz: T,
    /// Gamma shape of the mean-one power fading; 1 is Rayleigh.
    pub fading_shape: T,
    pub pathloss_unit: PathlossUnit,
}

impl<T: Real> ChannelParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha.is_finite()) {
            return Err(Error::domain("pathloss exponent", self.alpha.as_f64()));
        }
        if !(self.bandwidth_hz > T::zero()) {
            return Err(Error::domain("bandwidth", self.bandwidth_hz.as_f64()));
        }
        if !(self.fading_shape > T::zero() && self.fading_shape.is_finite()) {
            return Err(Error::domain("fading shape", self.fading_shape.as_f64()));
        }
        if !self.noise_density_dbm_per_hz.is_finite() {
            return Err(Error::domain(
                "noise density",
                self.noise_density_dbm_per_hz.as_f64(),
            ));
        }
        Ok(())
    }

    pub fn noise_w(&self) -> Result<T> {
        noise_power(self.noise_density_dbm_per_hz, self.bandwidth_hz)
    }

    /// Pathloss of a distance given in km.
    pub fn pathloss_km(&self, d_km: T) -> Result<T> {
        pathloss_factor(d_km * self.pathloss_unit.per_km(), self.alpha)
    }

    pub fn is_rayleigh(&self) -> bool {
        self.fading_shape == T::one()
    }

    /// Non-fatal remarks about values outside the tabulated simulation ranges.
    pub fn warnings(&self) -> Vec<String> {
        let a = self.alpha.as_f64();
        if (2.0..=5.0).contains(&a) {
            Vec::new()
        } else {
            vec![format!("alpha={a} outside [2, 5]")]
        }
    }
}

/// Sampler of mean-one Gamma(shape) power gains; exponential when the shape is 1.
#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    Rayleigh,
    Gamma(Gamma<f64>),
}

impl FadingSampler {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::domain("fading shape", shape));
        }
        if shape == 1.0 {
            return Ok(FadingSampler::Rayleigh);
        }
        Gamma::new(shape, 1.0 / shape)
            .map(FadingSampler::Gamma)
            .map_err(|_| Error::domain("fading shape", shape))
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Rayleigh => Exp1.sample(rng),
            FadingSampler::Gamma(g) => g.sample(rng),
        }
    }
}

/// One mean-one fading power gain of shape `shape`.
pub fn sample_fading<T: Real, R: Rng + ?Sized>(shape: T, rng: &mut R) -> Result<T> {
    Ok(T::lit(FadingSampler::new(shape.as_f64())?.sample(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn db_values() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert!((db_to_linear(23.0f64) - 199.526).abs() < 1e-3);
        assert!((db_to_linear(7.0f64) - 5.0119).abs() < 1e-4);
        assert!((linear_to_db(db_to_linear(13.0f64)) - 13.0).abs() < 1e-12);
    }

    #[test]
    fn noise_values() {
        assert!((noise_power(-174.0f64, 1e6).unwrap() / 3.9811e-15 - 1.0).abs() < 1e-4);
        assert!((noise_power(-174.0f64, 1.0).unwrap() / 3.9811e-21 - 1.0).abs() < 1e-4);
        assert!((noise_power(0.0f64, 1.0).unwrap() - 1e-3).abs() < 1e-15);
        assert!(noise_power(-174.0, 0.0).is_err());
    }

    #[test]
    fn pathloss_values() {
        assert_eq!(pathloss_factor(1.0, 3.7).unwrap(), 1.0);
        assert!((pathloss_factor(100.0f64, 2.0).unwrap() - 1e-4).abs() < 1e-18);
        assert!((pathloss_factor(1000.0f64, 3.0).unwrap() / 1e-9 - 1.0).abs() < 1e-12);
        assert_eq!(
            pathloss_factor(0.0, 2.0).unwrap_err(),
            Error::SingularDistance
        );
    }

    #[test]
    fn fading_rejects_bad_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_fading(0.0, &mut rng).is_err());
        assert!(sample_fading(-2.0, &mut rng).is_err());
    }

    #[test]
    fn rayleigh_fading_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = FadingSampler::new(1.0).unwrap();
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let tail = draws.iter().filter(|&&h| h > 1.0).count() as f64 / n as f64;
        let e1 = (-1.0f64).exp();
        assert!((mean - 1.0).abs() < 3.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.01);
        assert!((tail - e1).abs() < 3.0 * (e1 * (1.0 - e1) / n as f64).sqrt());
    }

    #[test]
    fn gamma_fading_has_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for shape in [0.5, 2.0, 4.0] {
            let f = FadingSampler::new(shape).unwrap();
            let n = 200_000;
            let mean = (0..n).map(|_| f.sample(&mut rng)).sum::<f64>() / n as f64;
            let se = (1.0 / shape / n as f64).sqrt();
            assert!((mean - 1.0).abs() < 4.0 * se, "shape {shape}: {mean}");
        }
    }

    proptest! {
        #[test]
        fn db_sum_is_linear_product(a in -100.0f64..100.0, b in -100.0f64..100.0) {
            let lhs = db_to_linear(a + b);
            let rhs = db_to_linear(a) * db_to_linear(b);
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }

        #[test]
        fn noise_is_linear_in_bandwidth(n0 in -200.0f64..0.0, bw in 1.0f64..1e9, c in 1.0f64..100.0) {
            let lhs = noise_power(n0, c * bw).unwrap();
            let rhs = c * noise_power(n0, bw).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }

        #[test]
        fn pathloss_decreasing_and_scale_covariant(d in 0.01f64..1e5, c in 1.001f64..50.0, alpha in 0.5f64..6.0) {
            let base = pathloss_factor(d, alpha).unwrap();
            let far = pathloss_factor(c * d, alpha).unwrap();
            prop_assert!(far < base);
            prop_assert!(((far - c.powf(-alpha) * base) / far).abs() < 1e-12);
        }
    }
}
