//! Executable invariants of every module, reported as JSON.
//!
//! Each property returns a verdict and a short measurement string. A property that errors is
//! reported as failed with the error text. [`Fault`] deliberately breaks one ingredient so the
//! suite can be shown to notice.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sweep::{run_sweep, write_csv, Engines, Series, SweepSpec, SweepVar};
use super::Preset;
use crate::analytic::{conditional_success, laplace_exponent, p_suc_bucket, p_suc_nearest};
use crate::channel::{
    db_to_linear, noise_power, pathloss_factor, FadingSampler, PathlossUnit, RadioParams,
};
use crate::error::{Error, Result};
use crate::geometry::{
    distance_to_gs, nearest_distance_cdf, nearest_distance_pdf, nearest_distance_quantile,
    region_volume, sample_population, sample_uniform_point, Intensity, RangeBucket,
};
use crate::montecarlo::{
    derive_seed, run_fixed_distance, run_nearest, run_population, wilson_interval,
};
use crate::scenario::{QuadratureSettings, Scenario};
use crate::sinr::{compute_sinr, success, AircraftClass, RealizedTransmitter};

/// A deliberately injected defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Decoding succeeds when the SINR is *below* the threshold.
    FlippedThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub passed: bool,
    pub results: Vec<PropertyResult>,
    pub total_runtime_ms: f64,
}

impl PropertyReport {
    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.results.iter().filter(|r| !r.passed)
    }
}

struct Ctx {
    seed: u64,
    fault: Option<Fault>,
    quad: QuadratureSettings<f64>,
}

impl Ctx {
    fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, tag))
    }

    fn success(&self, sinr: f64, theta_db: f64) -> bool {
        match self.fault {
            Some(Fault::FlippedThreshold) => sinr < db_to_linear(theta_db),
            None => success(sinr, theta_db),
        }
    }
}

type Verdict = Result<(bool, String)>;
type Property = (&'static str, &'static str, fn(&Ctx) -> Verdict);

const PROPERTIES: [Property; 24] = [
    ("geometry", "poisson_counts", poisson_counts),
    ("geometry", "uniform_marginals", uniform_marginals),
    ("geometry", "nearest_law_shape", nearest_law_shape),
    (
        "geometry",
        "nearest_distance_matches_ball_sampling",
        nearest_distance_matches_ball_sampling,
    ),
    ("channel", "db_additivity", db_additivity),
    (
        "channel",
        "noise_linear_in_bandwidth",
        noise_linear_in_bandwidth,
    ),
    (
        "channel",
        "pathloss_monotone_and_scaling",
        pathloss_monotone_and_scaling,
    ),
    ("channel", "fading_moments", fading_moments),
    ("sinr", "threshold_inclusive", threshold_inclusive),
    ("sinr", "fading_monotonicity", fading_monotonicity),
    ("sinr", "uav_power_cancels", uav_power_cancels),
    ("sinr", "scale_invariance", scale_invariance),
    (
        "sinr",
        "noise_negligible_at_alpha_2",
        noise_negligible_at_alpha_2,
    ),
    (
        "analytic",
        "laplace_transform_bounds",
        laplace_transform_bounds,
    ),
    ("analytic", "success_monotonicity", success_monotonicity),
    ("analytic", "unit_invariance", unit_invariance),
    (
        "analytic",
        "h_matches_volume_sampling",
        h_matches_volume_sampling,
    ),
    ("analytic", "noise_only_closed_form", noise_only_closed_form),
    (
        "montecarlo",
        "worker_count_invariance",
        worker_count_invariance,
    ),
    ("montecarlo", "wilson_coverage", wilson_coverage),
    (
        "montecarlo",
        "standard_error_scaling",
        standard_error_scaling,
    ),
    ("montecarlo", "engine_agreement", engine_agreement),
    ("harness", "csv_round_trip", csv_round_trip),
    ("harness", "sweep_determinism", sweep_determinism),
];

/// Runs every property and writes `properties.json` into `outdir`.
pub fn run_property_suite(
    outdir: impl AsRef<Path>,
    options: &SuiteOptions,
) -> Result<PropertyReport> {
    let ctx = Ctx {
        seed: options.seed,
        fault: options.fault,
        quad: QuadratureSettings::default(),
    };
    let start = Instant::now();
    let results: Vec<PropertyResult> = PROPERTIES
        .iter()
        .map(|&(module, name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f(&ctx) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            PropertyResult {
                module,
                name,
                passed,
                detail,
                runtime_ms: t.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    let report = PropertyReport {
        seed: options.seed,
        fault: options.fault,
        passed: results.iter().all(|r| r.passed),
        results,
        total_runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let outdir = outdir.as_ref();
    std::fs::create_dir_all(outdir)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(outdir.join("properties.json"), json + "\n")?;
    Ok(report)
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
        let f = cdf(x);
        d.max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs())
    })
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

fn poisson_counts(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let mut rng = ctx.rng(1);
    let reps = 10_000;
    let counts: Vec<f64> = (0..reps)
        .map(|_| {
            sample_population(&s.space, &s.uav_band, &s.lambda_uav, &mut rng)
                .map(|p| p.len() as f64)
        })
        .collect::<Result<_>>()?;
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let expected = s
        .lambda_uav
        .expected_count(region_volume(&s.space, &s.uav_band)?);
    let se = (expected / reps as f64).sqrt();
    Ok((
        (mean - expected).abs() < 3.0 * se && (var / expected - 1.0).abs() < 0.1,
        format!("mean {mean:.4}, variance {var:.4}, expected {expected}"),
    ))
}

fn uniform_marginals(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let mut rng = ctx.rng(2);
    let n = 100_000;
    let pts: Vec<_> = (0..n)
        .map(|_| sample_uniform_point(&s.space, &s.uav_band, &mut rng))
        .collect();
    let uniform = |lo: f64, hi: f64| move |x: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    let dx = ks_statistic(pts.iter().map(|p| p.x).collect(), uniform(-10.0, 10.0));
    let dy = ks_statistic(pts.iter().map(|p| p.y).collect(), uniform(-10.0, 10.0));
    let dz = ks_statistic(pts.iter().map(|p| p.z).collect(), uniform(1.0, 6.0));
    let crit = ks_critical_1pct(n);
    Ok((
        dx < crit && dy < crit && dz < crit,
        format!("KS x {dx:.5}, y {dy:.5}, z {dz:.5}; 1% critical {crit:.5}"),
    ))
}

fn nearest_law_shape(_: &Ctx) -> Verdict {
    let l = Intensity::density(0.0075)?;
    let mut prev = nearest_distance_cdf(0.0, &l)?;
    let mut ok = prev == 0.0;
    for i in 1..=400 {
        let d = 0.05 * i as f64;
        let c = nearest_distance_cdf(d, &l)?;
        ok &= c >= prev && (0.0..=1.0).contains(&c) && nearest_distance_pdf(d, &l)? >= 0.0;
        prev = c;
    }
    Ok((ok, format!("cdf(20 km) = {prev}")))
}

fn nearest_distance_matches_ball_sampling(ctx: &Ctx) -> Verdict {
    let l = Intensity::density(0.0075)?;
    let radius = nearest_distance_quantile(1.0 - 1e-10, &l)?;
    let mean = l.value() * 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    let poisson =
        rand_distr::Poisson::new(mean).map_err(|_| Error::domain("poisson mean", mean))?;
    let mut rng = ctx.rng(4);
    let n = 20_000;
    let mut mins = Vec::with_capacity(n);
    while mins.len() < n {
        let k = rand_distr::Distribution::sample(&poisson, &mut rng) as usize;
        let nearest = (0..k)
            .map(|_| radius * rng.random::<f64>().cbrt())
            .fold(f64::INFINITY, f64::min);
        if nearest.is_finite() {
            mins.push(nearest);
        }
    }
    let d = ks_statistic(mins, |x| nearest_distance_cdf(x, &l).unwrap_or(f64::NAN));
    let crit = ks_critical_1pct(n);
    Ok((
        d < crit,
        format!("KS {d:.5}; 1% critical {crit:.5}; ball radius {radius:.3} km"),
    ))
}

fn db_additivity(ctx: &Ctx) -> Verdict {
    let mut rng = ctx.rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (a, b): (f64, f64) = (
            rng.random_range(-100.0..100.0),
            rng.random_range(-100.0..100.0),
        );
        let (lhs, rhs): (f64, f64) = (db_to_linear(a + b), db_to_linear(a) * db_to_linear(b));
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok((worst < 1e-12, format!("worst relative error {worst:e}")))
}

fn noise_linear_in_bandwidth(ctx: &Ctx) -> Verdict {
    let mut rng = ctx.rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (n0, bw, c): (f64, f64, f64) = (
            rng.random_range(-200.0..0.0),
            rng.random_range(1.0..1e9),
            rng.random_range(1.0..100.0),
        );
        let (lhs, rhs): (f64, f64) = (noise_power(n0, c * bw)?, c * noise_power(n0, bw)?);
        worst = worst.max(((lhs - rhs) / rhs).abs());
    }
    Ok((worst < 1e-12, format!("worst relative error {worst:e}")))
}

fn pathloss_monotone_and_scaling(ctx: &Ctx) -> Verdict {
    let mut rng = ctx.rng(7);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (d, c, alpha): (f64, f64, f64) = (
            rng.random_range(0.01..1e5),
            rng.random_range(1.001..50.0),
            rng.random_range(0.5..6.0),
        );
        let (near, far): (f64, f64) = (pathloss_factor(d, alpha)?, pathloss_factor(c * d, alpha)?);
        ok &= far < near;
        worst = worst.max(((far - c.powf(-alpha) * near) / far).abs());
    }
    Ok((
        ok && worst < 1e-12,
        format!("strictly decreasing: {ok}; worst scaling error {worst:e}"),
    ))
}

fn fading_moments(ctx: &Ctx) -> Verdict {
    let mut rng = ctx.rng(8);
    let f = FadingSampler::new(1.0)?;
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| f.sample(&mut rng)).collect();
    let nf = n as f64;
    let mean = draws.iter().sum::<f64>() / nf;
    let var = draws.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let tail = draws.iter().filter(|&&h| h > 1.0).count() as f64 / nf;
    let e1 = (-1.0f64).exp();
    // Exp(1): Var(h) = 1, Var((h - 1)²) = 8
    let ok = (mean - 1.0).abs() < 3.0 / nf.sqrt()
        && (var - 1.0).abs() < 3.0 * (8.0 / nf).sqrt()
        && (tail - e1).abs() < 3.0 * (e1 * (1.0 - e1) / nf).sqrt();
    Ok((
        ok,
        format!("mean {mean:.5}, variance {var:.5}, P(h>1) {tail:.5}"),
    ))
}

fn threshold_inclusive(ctx: &Ctx) -> Verdict {
    let mut ok = true;
    for theta in [-10.0, 0.0, 7.0, 14.0] {
        let t = db_to_linear(theta);
        ok &= ctx.success(t, theta);
        ok &= !ctx.success(t * (1.0 - 1e-9), theta);
        ok &= ctx.success(t * 2.0, theta);
    }
    ok &= ctx.success(5.0119, 7.0) && !ctx.success(5.0118, 7.0);
    Ok((ok, "success iff sinr >= 10^(theta/10)".into()))
}

type Sky = (Vec<RealizedTransmitter<f64>>, Vec<RealizedTransmitter<f64>>);

fn random_sky(ctx: &Ctx, tag: u64) -> Result<Sky> {
    let s = Scenario::<f64>::baseline();
    let mut rng = ctx.rng(tag);
    let f = FadingSampler::new(1.0)?;
    let mut uavs = Vec::new();
    while uavs.len() < 2 {
        uavs = sample_population(&s.space, &s.uav_band, &s.lambda_uav, &mut rng)?;
    }
    let cas = sample_population(&s.space, &s.ca_band, &s.lambda_ca, &mut rng)?;
    let mut realize = |pts: Vec<crate::geometry::Point3<f64>>, class| {
        pts.into_iter()
            .map(|p| RealizedTransmitter::new(p, f.sample(&mut rng), class))
            .collect::<Vec<_>>()
    };
    Ok((
        realize(uavs, AircraftClass::Uav),
        realize(cas, AircraftClass::Ca),
    ))
}

fn fading_monotonicity(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let mut ok = true;
    for tag in 0..50 {
        let (mut uavs, mut cas) = random_sky(ctx, 100 + tag)?;
        let sinr = |u: &[RealizedTransmitter<f64>], c: &[RealizedTransmitter<f64>]| {
            compute_sinr(0, u, c, &s.uav_radio, &s.ca_radio, &s.channel).map(|b| b.sinr)
        };
        let base = sinr(&uavs, &cas)?;
        uavs[0].fading *= 1.5;
        ok &= sinr(&uavs, &cas)? > base;
        uavs[0].fading /= 1.5;
        uavs[1].fading += 0.5;
        ok &= sinr(&uavs, &cas)? <= base;
        if let Some(c) = cas.first_mut() {
            uavs[1].fading -= 0.5;
            c.fading += 0.5;
            ok &= sinr(&uavs, &cas)? <= base;
        }
    }
    Ok((ok, "50 random skies".into()))
}

fn uav_power_cancels(ctx: &Ctx) -> Verdict {
    let mut ch = Scenario::<f64>::baseline().channel;
    ch.noise_density_dbm_per_hz = -1e9;
    let cr = RadioParams::new(30.0, 20.0)?;
    let mut worst: f64 = 0.0;
    for tag in 0..20 {
        let (uavs, _) = random_sky(ctx, 200 + tag)?;
        let at = |p: f64| -> Result<f64> {
            Ok(compute_sinr(0, &uavs, &[], &RadioParams::new(p, 23.0)?, &cr, &ch)?.sinr)
        };
        let (a, b) = (at(1.0)?, at(70.0)?);
        worst = worst.max(((a - b) / a).abs());
    }
    Ok((worst < 1e-12, format!("worst relative change {worst:e}")))
}

fn scale_invariance(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let mut ch = s.channel;
    ch.noise_density_dbm_per_hz = -1e9;
    let mut worst: f64 = 0.0;
    for (tag, c) in [(300, 0.3), (301, 2.0), (302, 7.5)] {
        ch.alpha = 2.0 + (tag - 300) as f64;
        let (uavs, cas) = random_sky(ctx, tag)?;
        let scale = |v: &[RealizedTransmitter<f64>]| {
            v.iter()
                .map(|t| RealizedTransmitter {
                    position: t.position.scaled(c),
                    ..*t
                })
                .collect::<Vec<_>>()
        };
        let a = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &ch)?.sinr;
        let b = compute_sinr(
            0,
            &scale(&uavs),
            &scale(&cas),
            &s.uav_radio,
            &s.ca_radio,
            &ch,
        )?
        .sinr;
        worst = worst.max(((a - b) / a).abs());
    }
    Ok((worst < 1e-9, format!("worst relative change {worst:e}")))
}

fn noise_negligible_at_alpha_2(_: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let n = s.channel.noise_w()?;
    let ratio = |alpha: f64| n / (1.0 * db_to_linear(23.0) * (17.33e3f64).powf(-alpha));
    let recorded: Vec<String> = [3.0, 4.0, 5.0]
        .iter()
        .map(|&a| format!("alpha {a}: {:.3e}", ratio(a)))
        .collect();
    Ok((
        ratio(2.0) < 1e-3,
        format!(
            "N/S at 1 W, 17.33 km: alpha 2: {:.3e}; {}",
            ratio(2.0),
            recorded.join(", ")
        ),
    ))
}

fn laplace_transform_bounds(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let gain = s.uav_radio.gain_linear();
    let h = |s_arg: f64| {
        laplace_exponent(
            s_arg,
            gain,
            &s.channel,
            &s.space,
            &s.uav_band,
            ctx.quad.laplace_rel_tol,
            ctx.quad.max_segments,
        )
        .map(|r| r.value)
    };
    let mut ok = h(0.0)? == 0.0;
    let mut prev_l = 1.0;
    let mut details = Vec::new();
    for s_arg in [1e2, 1e5, 1e7, 1e9] {
        let hv = h(s_arg)?;
        let mut prev_lambda = 1.0;
        for lambda in [0.001, 0.0075, 0.05] {
            let l = (-lambda * hv).exp();
            ok &= l > 0.0 && l <= 1.0 && l <= prev_lambda;
            prev_lambda = l;
        }
        let l = (-0.0075 * hv).exp();
        ok &= l <= prev_l;
        prev_l = l;
        details.push(format!("L({s_arg:e}) = {l:.4e}"));
    }
    Ok((ok, details.join(", ")))
}

fn success_monotonicity(ctx: &Ctx) -> Verdict {
    let base = Scenario::<f64>::baseline();
    let q = &ctx.quad;
    let eval = |s: &Scenario<f64>| -> Result<[f64; 2]> {
        Ok([
            p_suc_nearest(s, q)?,
            p_suc_bucket(s, RangeBucket::Short, q)?,
        ])
    };
    type Setter = fn(&mut Scenario<f64>, f64) -> Result<()>;
    let cases: [(&str, [f64; 3], Setter, bool); 5] = [
        (
            "theta",
            [7.0, 10.0, 14.0],
            |s, v| {
                s.theta_db = v;
                Ok(())
            },
            false,
        ),
        (
            "lambda_ca",
            [0.001, 0.00375, 0.01],
            |s, v| {
                s.lambda_ca = Intensity::density(v)?;
                Ok(())
            },
            false,
        ),
        (
            "P_C",
            [15.0, 40.0, 140.0],
            |s, v| {
                s.ca_radio = s.ca_radio.with_tx_power(v)?;
                Ok(())
            },
            false,
        ),
        (
            "P_U",
            [1.0, 16.0, 70.0],
            |s, v| {
                s.uav_radio = s.uav_radio.with_tx_power(v)?;
                Ok(())
            },
            true,
        ),
        (
            "lambda_uav",
            [0.0025, 0.0075, 0.015],
            |s, v| {
                s.lambda_uav = Intensity::density(v)?;
                Ok(())
            },
            false,
        ),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, grid, set, increasing) in cases {
        let values = grid
            .iter()
            .map(|&v| {
                let mut s = base;
                s.theta_db = -5.0;
                set(&mut s, v)?;
                eval(&s)
            })
            .collect::<Result<Vec<_>>>()?;
        for k in 0..2 {
            for w in values.windows(2) {
                ok &= if increasing {
                    w[1][k] >= w[0][k]
                } else {
                    w[1][k] < w[0][k]
                };
            }
        }
        detail.push(format!(
            "{name}: nearest {:.4?}",
            values.iter().map(|v| v[0]).collect::<Vec<_>>()
        ));
    }
    Ok((ok, detail.join("; ")))
}

fn unit_invariance(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let mut worst: f64 = 0.0;
    for alpha in [2.0, 3.0, 4.5] {
        let mut ch_m = s.channel;
        ch_m.alpha = alpha;
        let mut ch_km = ch_m;
        ch_km.pathloss_unit = PathlossUnit::Kilometer;
        let theta = db_to_linear(7.0);
        let d_km: f64 = 4.0;
        let gain = s.uav_radio.gain_linear();
        let h = |ch: &crate::channel::ChannelParams<f64>| {
            let d = d_km * ch.pathloss_unit.per_km::<f64>();
            laplace_exponent(
                theta * d.powf(alpha) / gain,
                gain,
                ch,
                &s.space,
                &s.uav_band,
                1e-11,
                4000,
            )
            .map(|r| r.value * s.lambda_uav.value())
        };
        let (m, km) = (h(&ch_m)?, h(&ch_km)?);
        worst = worst.max(((m - km) / km).abs());
    }
    let _ = ctx;
    Ok((worst < 1e-9, format!("worst relative difference {worst:e}")))
}

/// `H(s)` by uniform sampling of the band-restricted box: mean and standard error.
pub fn h_by_sampling<R: Rng>(
    k_pathloss: f64,
    alpha: f64,
    per_km: f64,
    space: &crate::geometry::BoxSpace<f64>,
    band: &crate::geometry::AltitudeBand<f64>,
    n: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let volume = region_volume(space, band)?;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let p = sample_uniform_point(space, band, rng);
        let r = distance_to_gs(&p) * per_km;
        let v = k_pathloss / (r.powf(alpha) + k_pathloss);
        sum += v;
        sum2 += v * v;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok((volume * mean, volume * (var / nf).sqrt()))
}

fn h_matches_volume_sampling(ctx: &Ctx) -> Verdict {
    let s = Scenario::<f64>::baseline();
    let gain = s.uav_radio.gain_linear();
    let mut rng = ctx.rng(9);
    let mut ok = true;
    let mut detail = Vec::new();
    for (d, alpha, band) in [
        (3.0, 2.0, s.uav_band),
        (8.0, 3.5, s.ca_band),
        (1.5, 4.5, s.space.full_band()),
    ] {
        let mut ch = s.channel;
        ch.alpha = alpha;
        let sarg = db_to_linear(7.0) * (d * 1000.0f64).powf(alpha) / gain;
        let h = laplace_exponent(
            sarg,
            gain,
            &ch,
            &s.space,
            &band,
            ctx.quad.laplace_rel_tol,
            ctx.quad.max_segments,
        )?;
        let (mc, se) = h_by_sampling(
            sarg * gain,
            alpha,
            1000.0,
            &s.space,
            &band,
            1_000_000,
            &mut rng,
        )?;
        ok &= (h.value - mc).abs() < 3.0 * se.max(1e-12 * h.value);
        detail.push(format!("H {:.5} vs {mc:.5} ± {se:.5}", h.value));
    }
    Ok((ok, detail.join("; ")))
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn noise_only_closed_form(ctx: &Ctx) -> Verdict {
    let mut s = Scenario::<f64>::baseline();
    s.lambda_uav = Intensity::zero();
    s.lambda_ca = Intensity::zero();
    s.lambda_pdf = Intensity::density(0.0075)?;
    s.channel.alpha = 4.5;
    s.uav_radio = RadioParams::new(1.0, 23.0)?;
    let p = p_suc_nearest(&s, &ctx.quad)?;
    let theta = db_to_linear(s.theta_db);
    let c = theta * s.channel.noise_w()? / s.uav_radio.gain_linear();
    let lambda = s.lambda_pdf;
    let hi = nearest_distance_quantile(1.0 - 1e-9, &lambda)?;
    let reference = simpson(
        |d| {
            (-c * (d * 1000.0).powf(4.5)).exp()
                * nearest_distance_pdf(d, &lambda).unwrap_or(f64::NAN)
        },
        0.0,
        hi,
        200_000,
    );
    Ok((
        (p - reference).abs() < 1e-6,
        format!("quadrature {p:.9}, Simpson {reference:.9}"),
    ))
}

fn worker_count_invariance(ctx: &Ctx) -> Verdict {
    let mut s = Scenario::<f64>::baseline();
    s.theta_db = -5.0;
    let run = |threads: usize| -> Result<Vec<(u64, u64)>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        pool.install(|| {
            let pop = run_population(&s, 2000, ctx.seed)?;
            let near = run_nearest(&s, 2000, ctx.seed)?;
            let mut v: Vec<(u64, u64)> = pop.values().map(|e| (e.successes, e.trials)).collect();
            v.push((near.successes, near.trials));
            Ok(v)
        })
    };
    let one = run(1)?;
    let ok = one == run(2)? && one == run(5)?;
    Ok((ok, format!("counts {one:?} for 1, 2 and 5 workers")))
}

fn wilson_coverage(ctx: &Ctx) -> Verdict {
    let mut rng = ctx.rng(10);
    let (reps, n) = (1000, 10_000u64);
    let mut worst: f64 = 1.0;
    let mut detail = Vec::new();
    for p in [0.02, 0.3, 0.5] {
        let mut covered = 0;
        for _ in 0..reps {
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = wilson_interval(k, n, 0.95)?;
            covered += u32::from(lo <= p && p <= hi);
        }
        let rate = f64::from(covered) / reps as f64;
        worst = worst.min(rate);
        detail.push(format!("p={p}: {rate:.3}"));
    }
    Ok((worst >= 0.93, detail.join(", ")))
}

fn standard_error_scaling(ctx: &Ctx) -> Verdict {
    let mut s = Scenario::<f64>::baseline();
    s.theta_db = -8.0;
    let ses = [1000u64, 4000, 16000, 64000]
        .iter()
        .map(|&n| run_nearest(&s, n, ctx.seed).map(|e| e.std_error()))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = ses.windows(2).map(|w| w[0] / w[1]).collect();
    Ok((
        ratios.iter().all(|r| (r - 2.0).abs() < 0.3),
        format!("successive SE ratios {ratios:.3?} (ideal 2)"),
    ))
}

fn engine_agreement(ctx: &Ctx) -> Verdict {
    let mut s = Scenario::<f64>::baseline();
    s.theta_db = -5.0;
    let mut ok = true;
    let mut detail = Vec::new();
    let pop = run_population(&s, 20_000, ctx.seed)?;
    for b in RangeBucket::ALL {
        let a = p_suc_bucket(&s, b, &ctx.quad)?;
        let e = pop[&b];
        ok &= e.within_wilson_se(a, 3.0)?;
        detail.push(format!(
            "{b}: analytic {a:.5}, mc {}/{}",
            e.successes, e.trials
        ));
    }
    let e = run_fixed_distance(5.0, &s, 20_000, ctx.seed)?;
    let a = conditional_success(5.0, &s, &ctx.quad)?;
    ok &= e.within_wilson_se(a, 3.0)?;
    detail.push(format!("d=5 km: analytic {a:.5}, mc {:.5}", e.p_hat));
    Ok((ok, detail.join("; ")))
}

fn small_sweep() -> SweepSpec {
    let mut spec = SweepSpec::new(
        "prop",
        SweepVar::Pu,
        vec![1.0, 30.0],
        Scenario::baseline(),
        Preset::SelfConsistent,
    );
    spec.series = Some(Series {
        variable: SweepVar::Theta,
        values: vec![-5.0, 7.0],
    });
    spec.engines = Engines::Both;
    spec.trials = 500;
    spec
}

fn csv_round_trip(ctx: &Ctx) -> Verdict {
    let rows = run_sweep(&small_sweep(), ctx.seed)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    let back = super::read_csv(buf.as_slice())?;
    Ok((back == rows, format!("{} rows", rows.len())))
}

fn sweep_determinism(ctx: &Ctx) -> Verdict {
    let csv = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(e.to_string()))?;
        let rows = pool.install(|| run_sweep(&small_sweep(), ctx.seed))?;
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf)?;
        Ok(buf)
    };
    let a = csv(1)?;
    Ok((a == csv(1)? && a == csv(3)?, format!("{} bytes", a.len())))
}
