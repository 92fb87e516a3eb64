//! Monte Carlo estimation of the received probability.
//!
//! A trial redraws the whole sky: both Poisson populations and every fading gain. Trial `t`
//! under seed `s` consumes its own ChaCha8 stream `(s, t)` and contributes only integer
//! counts, so estimates are bit-identical for any number of workers.
//!
//! The SINR threshold never influences what is drawn. The `*_multi` entry points exploit this
//! to score several thresholds on the same draws; each resulting estimate equals the one a
//! single-threshold run with the same seed would give.

mod streams;
mod wilson;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use streams::{derive_seed, init_thread_pool, threads_from_env, trial_rng, THREADS_ENV};
pub use wilson::{normal_quantile, wilson_interval, wilson_interval_z};

use crate::channel::{db_to_linear, FadingSampler};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_range, distance_range, distance_to_gs, sample_population, AltitudeBand, BoxSpace,
    Intensity, Point3, RangeBucket,
};
use crate::scalar::Real;
use crate::scenario::Scenario;

/// Default number of trials per estimate.
pub const DEFAULT_TRIALS: u64 = 100_000;

/// Confidence level of the interval stored in an [`Estimate`].
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Consecutive empty UAV draws tolerated before the nearest-target protocol gives up.
const MAX_EMPTY_DRAWS: u64 = 1_000_000;

/// Rejection attempts allowed when placing a target at a fixed distance.
const MAX_PLACEMENT_ATTEMPTS: u32 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialProtocol {
    /// Target at a fixed GS distance (km) in a random admissible direction.
    FixedDistance(f64),
    /// Target is the UAV nearest to the GS.
    NearestTarget,
    /// Every UAV of the population is scored once as target, per range bucket.
    Population,
}

impl TrialProtocol {
    pub fn name(&self) -> &'static str {
        match self {
            TrialProtocol::FixedDistance(_) => "fixed",
            TrialProtocol::NearestTarget => "nearest",
            TrialProtocol::Population => "population",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Population draws made (one per trial plus resamples).
    pub population_draws: u64,
    /// Draws discarded because no UAV was present.
    pub empty_draws: u64,
}

/// Success count with its Wilson interval.
///
/// For the population protocol `trials` counts target evaluations, not population draws. An
/// estimate with no trials is empty: `p_hat` is NaN and the interval is `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub bucket: Option<RangeBucket>,
    pub diagnostics: Diagnostics,
}

impl Estimate {
    pub fn from_counts(successes: u64, trials: u64, bucket: Option<RangeBucket>) -> Result<Self> {
        if trials == 0 {
            return Ok(Self {
                successes: 0,
                trials: 0,
                p_hat: f64::NAN,
                ci_low: 0.0,
                ci_high: 1.0,
                confidence: DEFAULT_CONFIDENCE,
                bucket,
                diagnostics: Diagnostics::default(),
            });
        }
        let (ci_low, ci_high) = wilson_interval(successes, trials, DEFAULT_CONFIDENCE)?;
        Ok(Self {
            successes,
            trials,
            p_hat: successes as f64 / trials as f64,
            ci_low,
            ci_high,
            confidence: DEFAULT_CONFIDENCE,
            bucket,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn is_empty(&self) -> bool {
        self.trials == 0
    }

    /// Binomial standard error `sqrt(p (1 - p) / n)`; NaN when empty.
    pub fn std_error(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    /// Wilson interval `z` standard errors wide.
    pub fn wilson_z(&self, z: f64) -> Result<(f64, f64)> {
        wilson_interval_z(self.successes, self.trials, z)
    }

    /// Whether `p0` passes the Wilson score test at `z` standard errors, i.e. lies in the
    /// z-wide Wilson interval. An empty estimate rejects nothing.
    pub fn within_wilson_se(&self, p0: f64, z: f64) -> Result<bool> {
        if self.is_empty() {
            return Ok(true);
        }
        let (lo, hi) = self.wilson_z(z)?;
        Ok(lo <= p0 && p0 <= hi)
    }
}

/// Scenario flattened to f64 with the per-class received power factors precomputed.
#[derive(Debug, Clone)]
pub(crate) struct Model {
    space: BoxSpace<f64>,
    uav_band: AltitudeBand<f64>,
    ca_band: AltitudeBand<f64>,
    lambda_uav: Intensity<f64>,
    lambda_ca: Intensity<f64>,
    /// `P_U G_U` and `P_C G_C`.
    uav_power: f64,
    ca_power: f64,
    per_km: f64,
    alpha: f64,
    noise: f64,
    cutoff: f64,
    fading: FadingSampler,
}

impl Model {
    pub(crate) fn new<T: Real>(s: &Scenario<T>) -> Result<Self> {
        s.validate()?;
        let band = |b: &AltitudeBand<T>| AltitudeBand::new(b.lo().as_f64(), b.hi().as_f64());
        let ch = &s.channel;
        Ok(Self {
            space: BoxSpace::new(
                s.space.half_x().as_f64(),
                s.space.half_y().as_f64(),
                s.space.height().as_f64(),
            )?,
            uav_band: band(&s.uav_band)?,
            ca_band: band(&s.ca_band)?,
            lambda_uav: Intensity::density(s.lambda_uav.value().as_f64())?,
            lambda_ca: Intensity::density(s.lambda_ca.value().as_f64())?,
            uav_power: (s.uav_radio.tx_power_w() * s.uav_radio.gain_linear()).as_f64(),
            ca_power: (s.ca_radio.tx_power_w() * s.ca_radio.gain_linear()).as_f64(),
            per_km: ch.pathloss_unit.per_km::<f64>(),
            alpha: ch.alpha.as_f64(),
            noise: ch.noise_w()?.as_f64(),
            cutoff: s.range_cutoff_km.as_f64(),
            fading: FadingSampler::new(ch.fading_shape.as_f64())?,
        })
    }

    #[inline]
    fn pathloss(&self, d_km: f64) -> Result<f64> {
        if d_km == 0.0 {
            return Err(Error::SingularDistance);
        }
        let d = d_km * self.per_km;
        Ok(if self.alpha == 2.0 {
            1.0 / (d * d)
        } else {
            d.powf(-self.alpha)
        })
    }

    fn weights(&self, points: &[Point3<f64>], power: f64, out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        for p in points {
            out.push(power * self.pathloss(distance_to_gs(p))?);
        }
        Ok(())
    }

    fn draw_fading<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..n).map(|_| self.fading.sample(rng)));
    }

    /// Target distance `d` in a uniformly random direction among those keeping the target in
    /// the UAV band of the box.
    ///
    /// `z / d` is uniform for a uniform direction, so `z` is drawn uniformly over the altitudes
    /// from which the footprint can be reached, the azimuth uniformly, and footprint misses are
    /// rejected.
    fn place_target<R: Rng + ?Sized>(&self, d: f64, rng: &mut R) -> Result<Point3<f64>> {
        let unreachable = Error::Placement { distance: d };
        let (a, b) = (self.space.half_x(), self.space.half_y());
        let z_hi = self.uav_band.hi().min(d);
        let z_lo = self
            .uav_band
            .lo()
            .max((d * d - a * a - b * b).max(0.0).sqrt());
        if !(d > 0.0 && d.is_finite()) || z_lo > z_hi {
            return Err(unreachable);
        }
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let z = z_lo + (z_hi - z_lo) * rng.random::<f64>();
            let rho = (d * d - z * z).max(0.0).sqrt();
            let phi = std::f64::consts::TAU * rng.random::<f64>();
            let (x, y) = (rho * phi.cos(), rho * phi.sin());
            if x.abs() <= a && y.abs() <= b {
                return Ok(Point3::new(x, y, z));
            }
        }
        Err(unreachable)
    }
}

/// SINR of UAV `target` given received power factors `w` and fading `h` for the UAVs and
/// `wc`, `hc` for the CAs.
#[inline]
fn sinr_of(target: usize, wu: &[f64], hu: &[f64], wc: &[f64], hc: &[f64], noise: f64) -> f64 {
    let mut interference = 0.0;
    for (i, (w, h)) in wu.iter().zip(hu).enumerate() {
        if i != target {
            interference += w * h;
        }
    }
    for (w, h) in wc.iter().zip(hc) {
        interference += w * h;
    }
    wu[target] * hu[target] / (noise + interference)
}

#[derive(Default)]
struct Scratch {
    wu: Vec<f64>,
    wc: Vec<f64>,
    hu: Vec<f64>,
    hc: Vec<f64>,
}

/// Integer counts of one or more trials, per threshold and range bucket.
#[derive(Debug, Clone, PartialEq)]
struct Tally {
    hits: Vec<[u64; 2]>,
    evaluated: [u64; 2],
    diagnostics: Diagnostics,
}

fn slot(bucket: RangeBucket) -> usize {
    match bucket {
        RangeBucket::Short => 0,
        RangeBucket::Long => 1,
    }
}

impl Tally {
    fn new(thresholds: usize) -> Self {
        Self {
            hits: vec![[0; 2]; thresholds],
            evaluated: [0; 2],
            diagnostics: Diagnostics::default(),
        }
    }

    #[inline]
    fn record(&mut self, sinr: f64, bucket: RangeBucket, thresholds: &[f64]) {
        let k = slot(bucket);
        self.evaluated[k] += 1;
        for (hits, &t) in self.hits.iter_mut().zip(thresholds) {
            if sinr >= t {
                hits[k] += 1;
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            a[0] += b[0];
            a[1] += b[1];
        }
        self.evaluated[0] += other.evaluated[0];
        self.evaluated[1] += other.evaluated[1];
        self.diagnostics.population_draws += other.diagnostics.population_draws;
        self.diagnostics.empty_draws += other.diagnostics.empty_draws;
        self
    }

    /// Estimates over both buckets pooled, one per threshold.
    fn pooled(&self) -> Result<Vec<Estimate>> {
        let n = self.evaluated[0] + self.evaluated[1];
        self.hits
            .iter()
            .map(|h| {
                let mut e = Estimate::from_counts(h[0] + h[1], n, None)?;
                e.diagnostics = self.diagnostics;
                Ok(e)
            })
            .collect()
    }

    fn per_bucket(&self) -> Result<Vec<BTreeMap<RangeBucket, Estimate>>> {
        self.hits
            .iter()
            .map(|h| {
                RangeBucket::ALL
                    .into_iter()
                    .map(|b| {
                        let k = slot(b);
                        let mut e = Estimate::from_counts(h[k], self.evaluated[k], Some(b))?;
                        e.diagnostics = self.diagnostics;
                        Ok((b, e))
                    })
                    .collect()
            })
            .collect()
    }
}

fn linear_thresholds<T: Real>(thresholds_db: &[T]) -> Result<Vec<f64>> {
    if thresholds_db.is_empty() {
        return Err(Error::domain("threshold count", 0.0));
    }
    thresholds_db
        .iter()
        .map(|&t| {
            if t.is_finite() {
                Ok(db_to_linear(t.as_f64()))
            } else {
                Err(Error::domain("threshold (dB)", t.as_f64()))
            }
        })
        .collect()
}

/// Runs `trials` independent trials in parallel and sums their tallies.
fn run_trials<F>(trials: u64, seed: u64, thresholds: usize, trial: F) -> Result<Tally>
where
    F: Fn(&mut Tally, &mut Scratch, &mut ChaCha8Rng) -> Result<()> + Sync,
{
    if trials == 0 {
        return Err(Error::domain("trials", 0.0));
    }
    (0..trials)
        .into_par_iter()
        .try_fold(
            || (Tally::new(thresholds), Scratch::default()),
            |(mut tally, mut scratch), t| {
                let mut rng = trial_rng(seed, t);
                trial(&mut tally, &mut scratch, &mut rng)?;
                Ok((tally, scratch))
            },
        )
        .map(|r: Result<(Tally, Scratch)>| r.map(|(tally, _)| tally))
        .try_reduce(|| Tally::new(thresholds), |a, b| Ok(a.merge(b)))
}

/// Success estimate for a target at `d` km, against fresh UAV and CA fields every trial.
pub fn run_fixed_distance<T: Real>(
    d: T,
    scenario: &Scenario<T>,
    trials: u64,
    seed: u64,
) -> Result<Estimate> {
    Ok(run_fixed_distance_multi(d, scenario, &[scenario.theta_db], trials, seed)?.remove(0))
}

/// [`run_fixed_distance`] scored against each of `thresholds_db` on the same draws.
pub fn run_fixed_distance_multi<T: Real>(
    d: T,
    scenario: &Scenario<T>,
    thresholds_db: &[T],
    trials: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let model = Model::new(scenario)?;
    let thresholds = linear_thresholds(thresholds_db)?;
    let d = d.as_f64();
    let (lo, hi) = distance_range(&model.space, &model.uav_band);
    if !(d > 0.0 && d >= lo && d <= hi) {
        return Err(Error::Placement { distance: d });
    }
    let bucket = classify_range(d, model.cutoff);
    let tally = run_trials(trials, seed, thresholds.len(), |tally, s, rng| {
        let target = model.place_target(d, rng)?;
        let uavs = sample_population(&model.space, &model.uav_band, &model.lambda_uav, rng)?;
        let cas = sample_population(&model.space, &model.ca_band, &model.lambda_ca, rng)?;
        tally.diagnostics.population_draws += 1;
        s.wu.clear();
        s.wu.push(model.uav_power * model.pathloss(distance_to_gs(&target))?);
        for p in &uavs {
            s.wu.push(model.uav_power * model.pathloss(distance_to_gs(p))?);
        }
        model.weights(&cas, model.ca_power, &mut s.wc)?;
        model.draw_fading(s.wu.len(), rng, &mut s.hu);
        model.draw_fading(s.wc.len(), rng, &mut s.hc);
        tally.record(
            sinr_of(0, &s.wu, &s.hu, &s.wc, &s.hc, model.noise),
            bucket,
            &thresholds,
        );
        Ok(())
    })?;
    tally.pooled()
}

/// Success estimate for the UAV nearest to the GS. Skies without UAVs are redrawn and counted
/// in the diagnostics.
pub fn run_nearest<T: Real>(scenario: &Scenario<T>, trials: u64, seed: u64) -> Result<Estimate> {
    Ok(run_nearest_multi(scenario, &[scenario.theta_db], trials, seed)?.remove(0))
}

/// [`run_nearest`] scored against each of `thresholds_db` on the same draws.
pub fn run_nearest_multi<T: Real>(
    scenario: &Scenario<T>,
    thresholds_db: &[T],
    trials: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    let model = Model::new(scenario)?;
    let thresholds = linear_thresholds(thresholds_db)?;
    if !(model.lambda_uav.value() > 0.0) {
        return Err(Error::NoTarget);
    }
    let tally = run_trials(trials, seed, thresholds.len(), |tally, s, rng| {
        let mut uavs = Vec::new();
        let mut empty = 0;
        while uavs.is_empty() {
            if empty == MAX_EMPTY_DRAWS {
                return Err(Error::NoTarget);
            }
            uavs = sample_population(&model.space, &model.uav_band, &model.lambda_uav, rng)?;
            if uavs.is_empty() {
                empty += 1;
            }
        }
        tally.diagnostics.population_draws += empty + 1;
        tally.diagnostics.empty_draws += empty;
        let cas = sample_population(&model.space, &model.ca_band, &model.lambda_ca, rng)?;
        model.weights(&uavs, model.uav_power, &mut s.wu)?;
        model.weights(&cas, model.ca_power, &mut s.wc)?;
        // the largest received power factor belongs to the nearest UAV
        let (target, _) =
            s.wu.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &w)| {
                    if w > best.1 {
                        (i, w)
                    } else {
                        best
                    }
                });
        model.draw_fading(s.wu.len(), rng, &mut s.hu);
        model.draw_fading(s.wc.len(), rng, &mut s.hc);
        let bucket = classify_range(distance_to_gs(&uavs[target]), model.cutoff);
        tally.record(
            sinr_of(target, &s.wu, &s.hu, &s.wc, &s.hc, model.noise),
            bucket,
            &thresholds,
        );
        Ok(())
    })?;
    tally.pooled()
}

/// Per-bucket success estimates with every UAV of each population scored as target.
///
/// Each target evaluation redraws the fading of all transmitters, so targets sharing a
/// population are not correlated through their interferers' gains.
pub fn run_population<T: Real>(
    scenario: &Scenario<T>,
    trials: u64,
    seed: u64,
) -> Result<BTreeMap<RangeBucket, Estimate>> {
    Ok(run_population_multi(scenario, &[scenario.theta_db], trials, seed)?.remove(0))
}

/// [`run_population`] scored against each of `thresholds_db` on the same draws.
pub fn run_population_multi<T: Real>(
    scenario: &Scenario<T>,
    thresholds_db: &[T],
    trials: u64,
    seed: u64,
) -> Result<Vec<BTreeMap<RangeBucket, Estimate>>> {
    let model = Model::new(scenario)?;
    let thresholds = linear_thresholds(thresholds_db)?;
    let tally = run_trials(trials, seed, thresholds.len(), |tally, s, rng| {
        let uavs = sample_population(&model.space, &model.uav_band, &model.lambda_uav, rng)?;
        let cas = sample_population(&model.space, &model.ca_band, &model.lambda_ca, rng)?;
        tally.diagnostics.population_draws += 1;
        if uavs.is_empty() {
            tally.diagnostics.empty_draws += 1;
            return Ok(());
        }
        model.weights(&uavs, model.uav_power, &mut s.wu)?;
        model.weights(&cas, model.ca_power, &mut s.wc)?;
        for (m, p) in uavs.iter().enumerate() {
            model.draw_fading(s.wu.len(), rng, &mut s.hu);
            model.draw_fading(s.wc.len(), rng, &mut s.hc);
            let bucket = classify_range(distance_to_gs(p), model.cutoff);
            tally.record(
                sinr_of(m, &s.wu, &s.hu, &s.wc, &s.hc, model.noise),
                bucket,
                &thresholds,
            );
        }
        Ok(())
    })?;
    tally.per_bucket()
}

/// Estimate under `protocol`, keyed by bucket for the population protocol and by `None`
/// otherwise.
pub fn run_protocol<T: Real>(
    protocol: TrialProtocol,
    scenario: &Scenario<T>,
    thresholds_db: &[T],
    trials: u64,
    seed: u64,
) -> Result<Vec<BTreeMap<Option<RangeBucket>, Estimate>>> {
    let keyed_none =
        |v: Vec<Estimate>| v.into_iter().map(|e| BTreeMap::from([(None, e)])).collect();
    Ok(match protocol {
        TrialProtocol::FixedDistance(d) => keyed_none(run_fixed_distance_multi(
            T::lit(d),
            scenario,
            thresholds_db,
            trials,
            seed,
        )?),
        TrialProtocol::NearestTarget => {
            keyed_none(run_nearest_multi(scenario, thresholds_db, trials, seed)?)
        }
        TrialProtocol::Population => run_population_multi(scenario, thresholds_db, trials, seed)?
            .into_iter()
            .map(|m| m.into_iter().map(|(b, e)| (Some(b), e)).collect())
            .collect(),
    })
}
