//! Quadrature evaluation of the stochastic-geometry success probability under Rayleigh fading.
//!
//! For a target UAV at distance `d` the success probability factors into a noise term and one
//! Laplace transform per interferer class,
//!
//! ```text
//! P(sinr >= theta | d) = exp(-theta d^a N / (P_U G_U)) * exp(-lambda_U H_1(s_1)) * exp(-lambda_C H_2(s_2))
//! s_1 = theta d^a / G_U,   s_2 = s_1 P_C / P_U
//! H(s) = ∫_region 1 - 1 / (1 + s G r^-a) dV = ∫_region s G / (r^a + s G) dV
//! ```
//!
//! The interference sums exclude the target, yet `H` integrates the full intensity: by
//! Slivnyak's theorem the reduced Poisson process seen from a typical point has the same law.
//!
//! `H` is evaluated in cylindrical coordinates about the vertical axis through the ground
//! station. The integrand depends on `(rho, z)` only, and the azimuthal measure of the circle of
//! radius `rho` inside the rectangular footprint is known in closed form, so the volume integral
//! reduces to two nested adaptive integrals. [`laplace_exponent_cartesian`] keeps the plain
//! triple integral over one quadrant of the box (times four) as an independent route.

use crate::channel::{db_to_linear, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{
    azimuthal_coverage, bucket_distance_range, distance_range, nearest_distance_cdf,
    nearest_distance_pdf, nearest_distance_quantile, placement_distance_breakpoints,
    placement_distance_pdf, region_volume, AltitudeBand, BoxSpace, RangeBucket,
};
use crate::quadrature::{integrate, integrate_fn, Integral, Tolerance};
use crate::scalar::Real;
use crate::scenario::{QuadratureSettings, Scenario};

/// `k / (r^a + k)` with `r` in km and `k = s G` in pathloss units to the power `a`.
#[derive(Clone, Copy)]
struct Kernel<T> {
    k: T,
    half_alpha: T,
    alpha_is_two: bool,
    per_km_sq: T,
}

impl<T: Real> Kernel<T> {
    fn new(s: T, gain: T, channel: &ChannelParams<T>) -> Self {
        let per_km: T = channel.pathloss_unit.per_km();
        Self {
            k: s * gain,
            half_alpha: channel.alpha * T::lit(0.5),
            alpha_is_two: channel.alpha == T::lit(2.0),
            per_km_sq: per_km * per_km,
        }
    }

    /// Radius (km) where the kernel equals 1/2.
    fn knee_km(&self) -> T {
        self.k.powf(T::one() / (self.half_alpha * T::lit(2.0))) / self.per_km_sq.sqrt()
    }

    #[inline]
    fn at_r2(&self, r2_km: T) -> T {
        let r2 = r2_km * self.per_km_sq;
        let ra = if self.alpha_is_two {
            r2
        } else {
            r2.powf(self.half_alpha)
        };
        self.k / (ra + self.k)
    }
}

fn check_laplace_args<T: Real>(s: T, gain: T) -> Result<()> {
    if !(s >= T::zero() && s.is_finite()) {
        return Err(Error::domain("laplace argument s", s.as_f64()));
    }
    if !(gain > T::zero() && gain.is_finite()) {
        return Err(Error::domain("gain", gain.as_f64()));
    }
    Ok(())
}

/// `H(s)`: the Laplace exponent of the interference from a unit-intensity Poisson field over the
/// band-restricted box, so that `L(s) = exp(-lambda H(s))`.
///
/// `s` carries pathloss units to the power alpha (`s G` is compared with `r^alpha`). The result
/// is in km³ and lies in `[0, region volume]`.
pub fn laplace_exponent<T: Real>(
    s: T,
    gain: T,
    channel: &ChannelParams<T>,
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    rel_tol: T,
    max_segments: usize,
) -> Result<Integral<T>> {
    check_laplace_args(s, gain)?;
    let volume = region_volume(space, band)?;
    let kernel = Kernel::new(s, gain, channel);
    if kernel.k == T::zero() || volume == T::zero() {
        return Ok(zero_integral());
    }

    let (a, b) = (space.half_x(), space.half_y());
    let rho_max = (a * a + b * b).sqrt();
    let knee = kernel.knee_km();
    let mut rho_cuts = vec![a, b];
    let mut z_cuts = Vec::new();
    if knee.is_finite() {
        rho_cuts.push(knee);
        z_cuts.push(knee);
    }

    let abs_floor = volume * T::lit(1e-15);
    let inner_tol = Tolerance::relative(rel_tol * T::lit(0.1))
        .with_abs(abs_floor * T::lit(0.1) / band.thickness())
        .with_max_segments(max_segments);
    let outer_tol = Tolerance::relative(rel_tol)
        .with_abs(abs_floor)
        .with_max_segments(max_segments);

    let mut evaluations = 0;
    let mut result = integrate(
        |z: T| {
            let z2 = z * z;
            let slice = integrate_fn(
                |rho: T| rho * azimuthal_coverage(a, b, rho) * kernel.at_r2(rho * rho + z2),
                T::zero(),
                rho_max,
                &rho_cuts,
                &inner_tol,
            )?;
            evaluations += slice.evaluations;
            Ok(slice.value)
        },
        band.lo(),
        band.hi(),
        &z_cuts,
        &outer_tol,
    )?;
    result.evaluations = evaluations;
    Ok(result)
}

/// [`laplace_exponent`] as a nested Cartesian triple integral over the positive quadrant of the
/// footprint, multiplied by four.
pub fn laplace_exponent_cartesian<T: Real>(
    s: T,
    gain: T,
    channel: &ChannelParams<T>,
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    rel_tol: T,
    max_segments: usize,
) -> Result<Integral<T>> {
    check_laplace_args(s, gain)?;
    let volume = region_volume(space, band)?;
    let kernel = Kernel::new(s, gain, channel);
    if kernel.k == T::zero() || volume == T::zero() {
        return Ok(zero_integral());
    }

    let (a, b) = (space.half_x(), space.half_y());
    let knee = kernel.knee_km();
    let cuts: Vec<T> = if knee.is_finite() {
        vec![knee]
    } else {
        Vec::new()
    };
    let abs_floor = volume * T::lit(1e-15);
    let tol = |scale: T, extent: T| {
        Tolerance::relative(rel_tol * scale)
            .with_abs(abs_floor * scale / extent)
            .with_max_segments(max_segments)
    };
    let (tol_x, tol_y, tol_z) = (
        tol(T::lit(0.25), T::one()),
        tol(T::lit(0.025), a),
        tol(T::lit(0.0025), a * b),
    );

    let mut evaluations = 0;
    let quadrant = integrate(
        |x: T| {
            integrate(
                |y: T| {
                    let xy2 = x * x + y * y;
                    let col = integrate_fn(
                        |z: T| kernel.at_r2(xy2 + z * z),
                        band.lo(),
                        band.hi(),
                        &cuts,
                        &tol_z,
                    )?;
                    evaluations += col.evaluations;
                    Ok(col.value)
                },
                T::zero(),
                b,
                &cuts,
                &tol_y,
            )
            .map(|r| r.value)
        },
        T::zero(),
        a,
        &cuts,
        &tol_x,
    )?;
    let four = T::lit(4.0);
    Ok(Integral {
        value: four * quadrant.value,
        error: four * quadrant.error,
        evaluations,
    })
}

fn zero_integral<T: Real>() -> Integral<T> {
    Integral {
        value: T::zero(),
        error: T::zero(),
        evaluations: 0,
    }
}

/// The three factors of the conditional success probability at one distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalSuccess<T> {
    pub probability: T,
    pub noise_factor: T,
    /// `exp(-lambda_U H_1(s_1))`
    pub uav_laplace: T,
    /// `exp(-lambda_C H_2(s_2))`
    pub ca_laplace: T,
    pub h_uav: T,
    pub h_ca: T,
}

fn require_rayleigh<T: Real>(scenario: &Scenario<T>) -> Result<()> {
    if scenario.channel.is_rayleigh() {
        Ok(())
    } else {
        Err(Error::UnsupportedFading {
            shape: scenario.channel.fading_shape.as_f64(),
        })
    }
}

fn conditional_success_with_tol<T: Real>(
    d: T,
    scenario: &Scenario<T>,
    laplace_tol: T,
    max_segments: usize,
) -> Result<ConditionalSuccess<T>> {
    require_rayleigh(scenario)?;
    if !(d > T::zero() && d.is_finite()) {
        return Err(Error::domain("target distance", d.as_f64()));
    }
    let ch = &scenario.channel;
    let theta = db_to_linear(scenario.theta_db);
    let d_alpha = (d * ch.pathloss_unit.per_km()).powf(ch.alpha);
    let (pu, gu) = (
        scenario.uav_radio.tx_power_w(),
        scenario.uav_radio.gain_linear(),
    );
    let (pc, gc) = (
        scenario.ca_radio.tx_power_w(),
        scenario.ca_radio.gain_linear(),
    );

    let noise_factor = (-theta * d_alpha * ch.noise_w()? / (pu * gu)).exp();
    let s1 = theta * d_alpha / gu;
    let s2 = s1 * pc / pu;

    let h = |lambda: T, s: T, gain: T, band: AltitudeBand<T>| -> Result<T> {
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        laplace_exponent(
            s,
            gain,
            ch,
            &scenario.space,
            &band,
            laplace_tol,
            max_segments,
        )
        .map(|r| r.value)
    };
    let h_uav = h(
        scenario.lambda_uav.value(),
        s1,
        gu,
        scenario.uav_interference_band(),
    )?;
    let h_ca = h(
        scenario.lambda_ca.value(),
        s2,
        gc,
        scenario.ca_interference_band(),
    )?;
    let uav_laplace = (-scenario.lambda_uav.value() * h_uav).exp();
    let ca_laplace = (-scenario.lambda_ca.value() * h_ca).exp();
    Ok(ConditionalSuccess {
        probability: noise_factor * uav_laplace * ca_laplace,
        noise_factor,
        uav_laplace,
        ca_laplace,
        h_uav,
        h_ca,
    })
}

/// Success probability of a target UAV at distance `d` km (Rayleigh fading only).
pub fn conditional_success<T: Real>(
    d: T,
    scenario: &Scenario<T>,
    quad: &QuadratureSettings<T>,
) -> Result<T> {
    conditional_success_detail(d, scenario, quad).map(|c| c.probability)
}

pub fn conditional_success_detail<T: Real>(
    d: T,
    scenario: &Scenario<T>,
    quad: &QuadratureSettings<T>,
) -> Result<ConditionalSuccess<T>> {
    conditional_success_with_tol(d, scenario, quad.laplace_rel_tol, quad.max_segments)
}

fn outer_tol<T: Real>(quad: &QuadratureSettings<T>) -> Tolerance<T> {
    Tolerance::relative(quad.outer_rel_tol)
        .with_abs(T::lit(1e-300))
        .with_max_segments(quad.max_segments)
}

/// Integral of the conditional success against the nearest-distance density over `[lo, hi]`.
fn nearest_weighted<T: Real>(
    scenario: &Scenario<T>,
    quad: &QuadratureSettings<T>,
    lo: T,
    hi: T,
) -> Result<T> {
    let nested = quad.nested_laplace_rel_tol();
    let lambda = scenario.lambda_pdf;
    let r = integrate(
        |d| {
            let f = nearest_distance_pdf(d, &lambda)?;
            if f == T::zero() {
                return Ok(T::zero());
            }
            Ok(
                conditional_success_with_tol(d, scenario, nested, quad.max_segments)?.probability
                    * f,
            )
        },
        lo,
        hi,
        &[],
        &outer_tol(quad),
    )?;
    Ok(r.value)
}

fn nearest_upper_limit<T: Real>(scenario: &Scenario<T>, quad: &QuadratureSettings<T>) -> Result<T> {
    nearest_distance_quantile(T::one() - quad.truncation_mass, &scenario.lambda_pdf)
}

fn require_positive_pdf_intensity<T: Real>(scenario: &Scenario<T>) -> Result<()> {
    let v = scenario.lambda_pdf.value();
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::domain("nearest-distance intensity", v.as_f64()))
    }
}

/// Success probability of the UAV nearest to the GS, integrating the conditional success
/// against the nearest-distance density up to its `1 - truncation_mass` quantile.
///
/// The truncated tail is not renormalised.
pub fn p_suc_nearest<T: Real>(scenario: &Scenario<T>, quad: &QuadratureSettings<T>) -> Result<T> {
    require_rayleigh(scenario)?;
    require_positive_pdf_intensity(scenario)?;
    let hi = nearest_upper_limit(scenario, quad)?;
    nearest_weighted(scenario, quad, T::zero(), hi)
}

/// Nearest-distance success probability conditioned on the target falling in `bucket`.
pub fn p_suc_nearest_in_bucket<T: Real>(
    scenario: &Scenario<T>,
    bucket: RangeBucket,
    quad: &QuadratureSettings<T>,
) -> Result<T> {
    require_rayleigh(scenario)?;
    require_positive_pdf_intensity(scenario)?;
    let lambda = scenario.lambda_pdf;
    let cutoff = scenario.range_cutoff_km;
    let upper = nearest_upper_limit(scenario, quad)?;
    let (lo, hi) = match bucket {
        RangeBucket::Short => (T::zero(), cutoff),
        RangeBucket::Long => (cutoff, T::infinity()),
    };
    let mass = if hi.is_finite() {
        nearest_distance_cdf(hi, &lambda)?
    } else {
        T::one()
    } - nearest_distance_cdf(lo, &lambda)?;
    if !(mass > T::lit(1e-12)) || lo >= upper {
        return Err(Error::EmptyBucket {
            bucket: bucket.name(),
        });
    }
    Ok(nearest_weighted(scenario, quad, lo, hi.min(upper))? / mass)
}

fn placement_weighted<T: Real>(
    scenario: &Scenario<T>,
    quad: &QuadratureSettings<T>,
    lo: T,
    hi: T,
) -> Result<T> {
    let space = &scenario.space;
    let band = &scenario.uav_band;
    let nested = quad.nested_laplace_rel_tol();
    let pdf_tol = quad.outer_rel_tol * T::lit(0.1);
    let cuts = placement_distance_breakpoints(space, band);

    let mass = integrate(
        |d| placement_distance_pdf(space, band, d, pdf_tol),
        lo,
        hi,
        &cuts,
        &outer_tol(quad),
    )?;
    if !(mass.value > T::lit(1e-12)) {
        return Err(Error::EmptyBucket {
            bucket: "requested",
        });
    }
    let weighted = integrate(
        |d| {
            let g = placement_distance_pdf(space, band, d, pdf_tol)?;
            if g == T::zero() {
                return Ok(T::zero());
            }
            Ok(
                conditional_success_with_tol(d, scenario, nested, quad.max_segments)?.probability
                    * g,
            )
        },
        lo,
        hi,
        &cuts,
        &outer_tol(quad),
    )?;
    Ok(weighted.value / mass.value)
}

/// Success probability of a UAV placed uniformly in the UAV band, conditioned on its range
/// bucket.
pub fn p_suc_bucket<T: Real>(
    scenario: &Scenario<T>,
    bucket: RangeBucket,
    quad: &QuadratureSettings<T>,
) -> Result<T> {
    require_rayleigh(scenario)?;
    let (lo, hi) = bucket_distance_range(
        &scenario.space,
        &scenario.uav_band,
        bucket,
        scenario.range_cutoff_km,
    )
    .ok_or(Error::EmptyBucket {
        bucket: bucket.name(),
    })?;
    placement_weighted(scenario, quad, lo, hi).map_err(|e| match e {
        Error::EmptyBucket { .. } => Error::EmptyBucket {
            bucket: bucket.name(),
        },
        other => other,
    })
}

/// Success probability of a UAV placed uniformly in the UAV band, unconditioned.
pub fn p_suc_uniform<T: Real>(scenario: &Scenario<T>, quad: &QuadratureSettings<T>) -> Result<T> {
    require_rayleigh(scenario)?;
    let (lo, hi) = distance_range(&scenario.space, &scenario.uav_band);
    placement_weighted(scenario, quad, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PathlossUnit;
    use crate::geometry::Intensity;

    fn quad() -> QuadratureSettings<f64> {
        QuadratureSettings::default()
    }

    fn baseline_channel() -> ChannelParams<f64> {
        Scenario::<f64>::baseline().channel
    }

    fn uav_region() -> (BoxSpace<f64>, AltitudeBand<f64>) {
        (
            BoxSpace::new(10.0, 10.0, 10.0).unwrap(),
            AltitudeBand::new(1.0, 6.0).unwrap(),
        )
    }

    #[test]
    fn laplace_exponent_limits() {
        let (space, band) = uav_region();
        let ch = baseline_channel();
        let zero = laplace_exponent(0.0, 199.5, &ch, &space, &band, 1e-6, 2000).unwrap();
        assert_eq!(zero.value, 0.0);
        // s G far above r_max^alpha (in metres): integrand -> 1 everywhere
        let huge = laplace_exponent(1e16, 199.5, &ch, &space, &band, 1e-6, 2000).unwrap();
        assert!((huge.value / 2000.0 - 1.0).abs() < 1e-3, "{}", huge.value);
        assert!(huge.value <= 2000.0);
        assert!(laplace_exponent(-1.0, 1.0, &ch, &space, &band, 1e-6, 2000).is_err());
    }

    #[test]
    fn cylindrical_and_cartesian_routes_agree() {
        let (space, band) = uav_region();
        for (alpha, theta_d) in [
            (2.0, 5.0119 * 9e6),
            (3.0, 2.0 * 1.25e11),
            (4.5, 20.0 * 1e15),
        ] {
            let mut ch = baseline_channel();
            ch.alpha = alpha;
            let s = theta_d / 199.5;
            let cyl = laplace_exponent(s, 199.5, &ch, &space, &band, 1e-8, 2000).unwrap();
            let cart =
                laplace_exponent_cartesian(s, 199.5, &ch, &space, &band, 1e-7, 2000).unwrap();
            assert!(
                ((cyl.value - cart.value) / cyl.value).abs() < 1e-6,
                "alpha={alpha}: {} vs {}",
                cyl.value,
                cart.value
            );
        }
    }

    #[test]
    fn laplace_exponent_is_monotone_in_s() {
        let (space, band) = uav_region();
        let ch = baseline_channel();
        let mut last = 0.0;
        for s in [1e3, 1e5, 1e6, 1e7, 1e8, 1e9] {
            let h = laplace_exponent(s, 100.0, &ch, &space, &band, 1e-7, 2000)
                .unwrap()
                .value;
            assert!(h > last);
            last = h;
        }
    }

    #[test]
    fn laplace_exponent_is_unit_invariant() {
        let (space, band) = uav_region();
        let theta = db_to_linear(7.0);
        for alpha in [2.0, 3.3, 5.0] {
            let mut m = baseline_channel();
            m.alpha = alpha;
            let mut km = m;
            km.pathloss_unit = PathlossUnit::Kilometer;
            let d: f64 = 4.0;
            let hm = laplace_exponent(
                theta * (1000.0 * d).powf(alpha) / 199.5,
                199.5,
                &m,
                &space,
                &band,
                1e-10,
                4000,
            )
            .unwrap()
            .value;
            let hk = laplace_exponent(
                theta * d.powf(alpha) / 199.5,
                199.5,
                &km,
                &space,
                &band,
                1e-10,
                4000,
            )
            .unwrap()
            .value;
            assert!(((hm - hk) / hk).abs() < 1e-9, "alpha={alpha}: {hm} vs {hk}");
        }
    }

    #[test]
    fn noise_only_conditional_success_is_closed_form() {
        let mut s = Scenario::<f64>::baseline();
        s.lambda_uav = Intensity::zero();
        s.lambda_ca = Intensity::zero();
        s.channel.alpha = 4.0;
        let theta = db_to_linear(7.0);
        let n = s.channel.noise_w().unwrap();
        for d in [0.5f64, 2.0, 7.5, 12.0] {
            let expected =
                (-theta * (1000.0 * d).powf(4.0) * n / (16.0 * db_to_linear(23.0))).exp();
            let got = conditional_success(d, &s, &quad()).unwrap();
            assert!(((got - expected) / expected).abs() < 1e-9);
        }
    }

    #[test]
    fn conditional_success_near_gs_tends_to_one() {
        let s = Scenario::<f64>::baseline();
        let p = conditional_success(1e-4, &s, &quad()).unwrap();
        assert!(p > 0.9999 && p <= 1.0, "{p}");
    }

    #[test]
    fn conditional_success_rejects_bad_input() {
        let mut s = Scenario::<f64>::baseline();
        assert!(matches!(
            conditional_success(0.0, &s, &quad()),
            Err(Error::Domain { .. })
        ));
        s.channel.fading_shape = 2.0;
        assert!(matches!(
            conditional_success(3.0, &s, &quad()),
            Err(Error::UnsupportedFading { .. })
        ));
        assert!(matches!(
            p_suc_nearest(&s, &quad()),
            Err(Error::UnsupportedFading { .. })
        ));
    }

    #[test]
    fn nearest_without_interference_and_with_strong_power_is_one() {
        let mut s = Scenario::<f64>::baseline();
        s.lambda_uav = Intensity::zero();
        s.lambda_ca = Intensity::zero();
        s.uav_radio = s.uav_radio.with_tx_power(1e6).unwrap();
        let p = p_suc_nearest(&s, &quad()).unwrap();
        assert!((p - 1.0).abs() < 1e-6, "{p}");
    }

    #[test]
    fn unconditioned_bucket_equals_uniform_average() {
        let mut s = Scenario::<f64>::baseline();
        s.range_cutoff_km = 0.0;
        let long = p_suc_bucket(&s, RangeBucket::Long, &quad()).unwrap();
        let all = p_suc_uniform(&s, &quad()).unwrap();
        assert!((long - all).abs() <= 1e-12 * all.max(1e-300));
        assert!(matches!(
            p_suc_bucket(&s, RangeBucket::Short, &quad()),
            Err(Error::EmptyBucket { bucket: "short" })
        ));
    }

    #[test]
    fn short_range_beats_long_range() {
        let s = Scenario::<f64>::baseline();
        let short = p_suc_bucket(&s, RangeBucket::Short, &quad()).unwrap();
        let long = p_suc_bucket(&s, RangeBucket::Long, &quad()).unwrap();
        assert!(short > long, "{short} vs {long}");
    }

    #[test]
    fn long_bucket_beyond_reach_is_empty() {
        let mut s = Scenario::<f64>::baseline();
        s.range_cutoff_km = 20.0;
        assert!(matches!(
            p_suc_bucket(&s, RangeBucket::Long, &quad()),
            Err(Error::EmptyBucket { bucket: "long" })
        ));
    }

    #[test]
    fn single_precision_conditional_success() {
        let s64 = Scenario::<f64>::baseline();
        let s32 = Scenario::<f32>::baseline();
        let q32 = QuadratureSettings::<f32> {
            laplace_rel_tol: 1e-4,
            outer_rel_tol: 1e-4,
            ..Default::default()
        };
        let p64 = conditional_success(3.0, &s64, &quad()).unwrap();
        let p32 = conditional_success(3.0f32, &s32, &q32).unwrap();
        assert!(((p32 as f64 - p64) / p64).abs() < 1e-3, "{p32} vs {p64}");
    }
}
