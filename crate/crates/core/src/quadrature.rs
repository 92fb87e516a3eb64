//! Globally adaptive Gauss–Kronrod (10/21 point) integration on finite intervals.
//!
//! The interval is first cut at the caller's breakpoints (kinks of the integrand), then the
//! segment with the largest error estimate is bisected until the summed error estimate meets
//! `max(abs, rel * |value|)`. Error estimation follows QUADPACK's `qk21`.
//!
//! Integrands are fallible so that nested integrals can propagate the failure of an inner
//! integration instead of silently returning a poor value.

use crate::error::{Error, Result};
use crate::scalar::Real;

// Kronrod abscissae, descending; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_606_515,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub rel: T,
    pub abs: T,
    /// Maximum number of segments before giving up.
    pub max_segments: usize,
}

impl<T: Real> Tolerance<T> {
    pub fn relative(rel: T) -> Self {
        Self {
            rel,
            abs: T::zero(),
            max_segments: 2000,
        }
    }

    pub fn with_abs(mut self, abs: T) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_segments(mut self, max_segments: usize) -> Self {
        self.max_segments = max_segments;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral<T> {
    pub value: T,
    /// Summed error estimate over all segments.
    pub error: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gauss_kronrod<T, F>(f: &mut F, a: T, b: T) -> Result<Segment<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);

    let fc = f(center)?;
    let mut res_k = fc * T::lit(WGK[10]);
    let mut res_g = T::zero();
    let mut res_abs = res_k.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];

    for j in 0..10 {
        let dx = half_len * T::lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let w = T::lit(WGK[j]);
        res_k += w * (f1 + f2);
        res_abs += w * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += T::lit(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = res_k * half;
    let mut res_asc = T::lit(WGK[10]) * (fc - mean).abs();
    for j in 0..10 {
        res_asc += T::lit(WGK[j]) * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let scale = half_len.abs();
    let value = res_k * half_len;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half_len).abs();

    if res_asc > T::zero() && error > T::zero() {
        let ratio = (T::lit(200.0) * error / res_asc).powf(T::lit(1.5));
        error = res_asc * ratio.min(T::one());
    }
    let eps = T::epsilon();
    if res_abs > T::min_positive_value() / (T::lit(50.0) * eps) {
        error = error.max(T::lit(50.0) * eps * res_abs);
    }

    if !value.is_finite() {
        return Err(Error::domain("integrand value", value.as_f64()));
    }
    Ok(Segment { a, b, value, error })
}

/// Integrates `f` over `[a, b]`, splitting first at the `breakpoints` that fall strictly inside.
pub fn integrate<T, F>(
    mut f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: &Tolerance<T>,
) -> Result<Integral<T>>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(
            "integration limit",
            if a.is_finite() { b } else { a }.as_f64(),
        ));
    }
    if a == b {
        return Ok(Integral {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, breakpoints, tol)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let mut cuts: Vec<T> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > a && p < b)
        .collect();
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();

    let mut segments = Vec::with_capacity(cuts.len() + 64);
    let mut lo = a;
    for &c in cuts.iter().chain(std::iter::once(&b)) {
        segments.push(gauss_kronrod(&mut f, lo, c)?);
        lo = c;
    }
    let mut evaluations = 21 * segments.len();

    loop {
        let value = segments.iter().fold(T::zero(), |s, g| s + g.value);
        let error = segments.iter().fold(T::zero(), |s, g| s + g.error);
        let target = tol.abs.max(tol.rel * value.abs());
        if error <= target {
            return Ok(Integral {
                value,
                error,
                evaluations,
            });
        }

        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite errors"))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let Segment { a: sa, b: sb, .. } = segments[worst];
        let mid = T::lit(0.5) * (sa + sb);
        let too_narrow =
            (sb - sa) <= T::lit(100.0) * T::epsilon() * sa.abs().max(sb.abs()).max(T::one());
        if segments.len() >= tol.max_segments || too_narrow {
            return Err(Error::IntegrationAccuracy {
                value: value.as_f64(),
                achieved: error.as_f64(),
                requested: target.as_f64(),
            });
        }

        segments[worst] = gauss_kronrod(&mut f, sa, mid)?;
        segments.push(gauss_kronrod(&mut f, mid, sb)?);
        evaluations += 42;
    }
}

/// [`integrate`] for integrands that cannot fail.
pub fn integrate_fn<T, F>(
    mut f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    tol: &Tolerance<T>,
) -> Result<Integral<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    integrate(|x| Ok(f(x)), a, b, breakpoints, tol)
}
