//! Airspace geometry: the box around the ground station, altitude bands, homogeneous Poisson
//! populations inside them, and the two distance laws used to weight success probabilities.
//!
//! All lengths are kilometres. The ground station (GS) sits at the origin on the ground, so
//! every aircraft position has `z >= 0`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_fn, Tolerance};
use crate::scalar::Real;

pub const DEFAULT_RANGE_CUTOFF_KM: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Point3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::new(self.x * c, self.y * c, self.z * c)
    }
}

/// Euclidean distance from `p` to the ground station.
pub fn distance_to_gs<T: Real>(p: &Point3<T>) -> T {
    p.norm()
}

/// The finite airspace `[-Lx, Lx] x [-Ly, Ly] x [0, Lz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpace<T> {
    half_x: T,
    half_y: T,
    height: T,
}

impl<T: Real> BoxSpace<T> {
    pub fn new(half_x: T, half_y: T, height: T) -> Result<Self> {
        for (what, v) in [
            ("box half extent x", half_x),
            ("box half extent y", half_y),
            ("box height", height),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::domain(what, v.as_f64()));
            }
        }
        Ok(Self {
            half_x,
            half_y,
            height,
        })
    }

    pub fn half_x(&self) -> T {
        self.half_x
    }

    pub fn half_y(&self) -> T {
        self.half_y
    }

    pub fn height(&self) -> T {
        self.height
    }

    pub fn volume(&self) -> T {
        T::lit(4.0) * self.half_x * self.half_y * self.height
    }

    pub fn full_band(&self) -> AltitudeBand<T> {
        AltitudeBand {
            lo: T::zero(),
            hi: self.height,
        }
    }

    pub fn contains(&self, p: &Point3<T>) -> bool {
        p.x.abs() <= self.half_x
            && p.y.abs() <= self.half_y
            && p.z >= T::zero()
            && p.z <= self.height
    }
}

/// Altitude slice `[lo, hi]` of a [`BoxSpace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeBand<T> {
    lo: T,
    hi: T,
}

impl<T: Real> AltitudeBand<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo >= T::zero() && lo <= hi && hi.is_finite()) {
            return Err(Error::InvalidBand {
                lo: lo.as_f64(),
                hi: hi.as_f64(),
                height: f64::INFINITY,
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn thickness(&self) -> T {
        self.hi - self.lo
    }

    pub fn check_within(&self, space: &BoxSpace<T>) -> Result<()> {
        if self.hi > space.height {
            return Err(Error::InvalidBand {
                lo: self.lo.as_f64(),
                hi: self.hi.as_f64(),
                height: space.height.as_f64(),
            });
        }
        Ok(())
    }
}

/// Volume of the band-restricted box, `4 Lx Ly (hi - lo)`.
pub fn region_volume<T: Real>(space: &BoxSpace<T>, band: &AltitudeBand<T>) -> Result<T> {
    band.check_within(space)?;
    Ok(T::lit(4.0) * space.half_x * space.half_y * band.thickness())
}

/// How an [`Intensity`] was specified by the user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityOrigin {
    Density,
    Count { count: f64, region_volume: f64 },
}

/// Expected number of aircraft per km³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intensity<T> {
    value: T,
    origin: IntensityOrigin,
}

impl<T: Real> Intensity<T> {
    pub fn density(value: T) -> Result<Self> {
        if !(value >= T::zero() && value.is_finite()) {
            return Err(Error::domain("intensity", value.as_f64()));
        }
        Ok(Self {
            value,
            origin: IntensityOrigin::Density,
        })
    }

    /// Converts an expected aircraft count over a region of `region_volume` km³.
    pub fn from_count(count: T, region_volume: T) -> Result<Self> {
        if !(count >= T::zero() && count.is_finite()) {
            return Err(Error::domain("aircraft count", count.as_f64()));
        }
        if !(region_volume > T::zero()) {
            return Err(Error::domain("count region volume", region_volume.as_f64()));
        }
        Ok(Self {
            value: count / region_volume,
            origin: IntensityOrigin::Count {
                count: count.as_f64(),
                region_volume: region_volume.as_f64(),
            },
        })
    }

    pub fn zero() -> Self {
        Self {
            value: T::zero(),
            origin: IntensityOrigin::Density,
        }
    }

    pub fn value(&self) -> T {
        self.value
    }

    pub fn origin(&self) -> IntensityOrigin {
        self.origin
    }

    pub fn expected_count(&self, volume: T) -> T {
        self.value * volume
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeBucket {
    Short,
    Long,
}

impl RangeBucket {
    pub const ALL: [RangeBucket; 2] = [RangeBucket::Short, RangeBucket::Long];

    pub fn name(self) -> &'static str {
        match self {
            RangeBucket::Short => "short",
            RangeBucket::Long => "long",
        }
    }
}

impl std::fmt::Display for RangeBucket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RangeBucket {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "short" => Ok(RangeBucket::Short),
            "long" => Ok(RangeBucket::Long),
            other => Err(Error::Parse {
                field: "bucket".into(),
                message: format!("expected `short` or `long`, got `{other}`"),
            }),
        }
    }
}

/// Short strictly below the cutoff, Long at or beyond it.
pub fn classify_range<T: Real>(d: T, cutoff: T) -> RangeBucket {
    if d < cutoff {
        RangeBucket::Short
    } else {
        RangeBucket::Long
    }
}

/// Draws a homogeneous Poisson population of intensity `lambda` in the band-restricted box.
pub fn sample_population<T, R>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    lambda: &Intensity<T>,
    rng: &mut R,
) -> Result<Vec<Point3<T>>>
where
    T: Real,
    R: Rng + ?Sized,
{
    let mean = lambda.expected_count(region_volume(space, band)?).as_f64();
    if mean <= 0.0 {
        return Ok(Vec::new());
    }
    let n = Poisson::new(mean)
        .map_err(|_| Error::domain("poisson mean", mean))?
        .sample(rng) as usize;
    Ok((0..n)
        .map(|_| sample_uniform_point(space, band, rng))
        .collect())
}

/// One point uniformly distributed in the band-restricted box.
pub fn sample_uniform_point<T, R>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    rng: &mut R,
) -> Point3<T>
where
    T: Real,
    R: Rng + ?Sized,
{
    let mut u = || T::lit(rng.random::<f64>());
    let x = space.half_x * (T::lit(2.0) * u() - T::one());
    let y = space.half_y * (T::lit(2.0) * u() - T::one());
    let z = band.lo + band.thickness() * u();
    Point3::new(x, y, z)
}

fn check_distance<T: Real>(d: T) -> Result<()> {
    if d >= T::zero() {
        Ok(())
    } else {
        Err(Error::domain("distance", d.as_f64()))
    }
}

/// Ball volume coefficient `(4/3) pi lambda`.
fn ball_rate<T: Real>(lambda: &Intensity<T>) -> T {
    T::lit(4.0) / T::lit(3.0) * T::PI() * lambda.value
}

/// CDF of the distance from the GS to the nearest point of a PPP in R³: `1 - exp(-(4/3) pi lambda d³)`.
pub fn nearest_distance_cdf<T: Real>(d: T, lambda: &Intensity<T>) -> Result<T> {
    check_distance(d)?;
    Ok(-(-ball_rate(lambda) * d.powi(3)).exp_m1())
}

/// Density of the nearest-point distance, `4 pi lambda d² exp(-(4/3) pi lambda d³)`.
pub fn nearest_distance_pdf<T: Real>(d: T, lambda: &Intensity<T>) -> Result<T> {
    check_distance(d)?;
    Ok(T::lit(4.0) * T::PI() * lambda.value * d * d * (-ball_rate(lambda) * d.powi(3)).exp())
}

/// Distance below which the nearest point lies with probability `p`.
pub fn nearest_distance_quantile<T: Real>(p: T, lambda: &Intensity<T>) -> Result<T> {
    if !(p >= T::zero() && p < T::one()) {
        return Err(Error::domain("quantile probability", p.as_f64()));
    }
    if lambda.value <= T::zero() {
        return Err(Error::domain("intensity", lambda.value.as_f64()));
    }
    Ok((-(-p).ln_1p() / ball_rate(lambda)).cbrt())
}

/// Angle (radians) of the circle of radius `rho` about the origin that lies inside the rectangle
/// `[-a, a] x [-b, b]`.
pub fn azimuthal_coverage<T: Real>(a: T, b: T, rho: T) -> T {
    if rho <= a.min(b) {
        return T::TAU();
    }
    let outside = |h: T| {
        if rho <= h {
            T::zero()
        } else {
            (h / rho).acos()
        }
    };
    let (ax, by) = (outside(a), outside(b));
    let overlap = (ax + by - T::FRAC_PI_2()).max(T::zero());
    (T::lit(4.0) * (T::FRAC_PI_2() - ax - by + overlap)).max(T::zero())
}

/// Smallest and largest GS distance reachable inside the band-restricted box.
pub fn distance_range<T: Real>(space: &BoxSpace<T>, band: &AltitudeBand<T>) -> (T, T) {
    let a = space.half_x;
    let b = space.half_y;
    (band.lo, (a * a + b * b + band.hi * band.hi).sqrt())
}

/// Distances at which the uniform-placement distance density has kinks.
pub fn placement_distance_breakpoints<T: Real>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
) -> Vec<T> {
    let (a, b) = (space.half_x, space.half_y);
    let mut pts = Vec::with_capacity(8);
    for z in [band.lo, band.hi] {
        for r2 in [T::zero(), a * a, b * b, a * a + b * b] {
            pts.push((r2 + z * z).sqrt());
        }
    }
    pts
}

/// Interval of distances belonging to `bucket`, or `None` when the bucket is unreachable.
pub fn bucket_distance_range<T: Real>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    bucket: RangeBucket,
    cutoff: T,
) -> Option<(T, T)> {
    let (lo, hi) = distance_range(space, band);
    let (lo, hi) = match bucket {
        RangeBucket::Short => (lo, hi.min(cutoff)),
        RangeBucket::Long => (lo.max(cutoff), hi),
    };
    (lo < hi).then_some((lo, hi))
}

/// Density of `|P|` for `P` uniform in the band-restricted box.
///
/// The sphere of radius `d` meets the region in an area `d * ∫ coverage(sqrt(d² - z²)) dz`
/// (equal-area slicing of a sphere along its axis), and the density is that area over the
/// region volume.
pub fn placement_distance_pdf<T: Real>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    d: T,
    rel_tol: T,
) -> Result<T> {
    check_distance(d)?;
    let volume = region_volume(space, band)?;
    if volume <= T::zero() {
        return Err(Error::domain("placement region volume", volume.as_f64()));
    }
    let (dmin, dmax) = distance_range(space, band);
    if d <= dmin || d >= dmax {
        return Ok(T::zero());
    }
    let (a, b) = (space.half_x, space.half_y);
    let z_top = band.hi.min(d);
    let mut cuts = Vec::with_capacity(3);
    for rc in [a, b, (a * a + b * b).sqrt()] {
        if d > rc {
            cuts.push((d * d - rc * rc).sqrt());
        }
    }
    let tol = Tolerance::relative(rel_tol).with_abs(T::lit(1e-300));
    let area = integrate_fn(
        |z: T| azimuthal_coverage(a, b, (d * d - z * z).max(T::zero()).sqrt()),
        band.lo,
        z_top,
        &cuts,
        &tol,
    )?;
    Ok(d * area.value / volume)
}

/// Probability that a uniformly placed point falls in `bucket`.
pub fn placement_bucket_mass<T: Real>(
    space: &BoxSpace<T>,
    band: &AltitudeBand<T>,
    bucket: RangeBucket,
    cutoff: T,
    rel_tol: T,
) -> Result<T> {
    let Some((lo, hi)) = bucket_distance_range(space, band, bucket, cutoff) else {
        return Ok(T::zero());
    };
    let inner = rel_tol * T::lit(0.1);
    let tol = Tolerance::relative(rel_tol).with_abs(T::lit(1e-300));
    let r = integrate(
        |d| placement_distance_pdf(space, band, d, inner),
        lo,
        hi,
        &placement_distance_breakpoints(space, band),
        &tol,
    )?;
    Ok(r.value)
}
