use std::f64::consts::PI;

use adsb_coexist::channel::db_to_linear;
use adsb_coexist::geometry::{
    classify_range, nearest_distance_cdf, nearest_distance_quantile, sample_population,
    sample_uniform_point,
};
use adsb_coexist::sinr::{compute_sinr, success, AircraftClass};
use adsb_coexist::{
    AltitudeBand, BoxSpace, Intensity, Point3, RadioParams, RangeBucket, RealizedTransmitter,
    Scenario,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ks(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

fn ks_crit(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

#[test]
fn uniform_points_pass_ks_on_every_axis() {
    let space = BoxSpace::new(7.0, 12.0, 10.0).unwrap();
    let band = AltitudeBand::new(2.0, 9.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 50_000;
    let pts: Vec<_> = (0..n)
        .map(|_| sample_uniform_point(&space, &band, &mut rng))
        .collect();
    let u = |lo: f64, hi: f64| move |x: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    assert!(ks(pts.iter().map(|p| p.x).collect(), u(-7.0, 7.0)) < ks_crit(n));
    assert!(ks(pts.iter().map(|p| p.y).collect(), u(-12.0, 12.0)) < ks_crit(n));
    assert!(ks(pts.iter().map(|p| p.z).collect(), u(2.0, 9.5)) < ks_crit(n));
}

#[test]
fn population_counts_are_poisson() {
    let s = Scenario::baseline();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let reps = 20_000;
    let counts: Vec<f64> = (0..reps)
        .map(|_| {
            sample_population(&s.space, &s.ca_band, &s.lambda_ca, &mut rng)
                .unwrap()
                .len() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / reps as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    // 15 aircraft in 4000 km³, 1600 km³ of which lie in the CA band
    assert!(
        (mean - 6.0).abs() < 3.0 * (6.0 / reps as f64).sqrt(),
        "{mean}"
    );
    assert!((var / 6.0 - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn nearest_of_a_ball_field_follows_the_nearest_law() {
    let lambda = Intensity::density(0.02).unwrap();
    let radius = nearest_distance_quantile(1.0 - 1e-12, &lambda).unwrap();
    let mean = 0.02 * 4.0 / 3.0 * PI * radius.powi(3);
    let poisson = rand_distr::Poisson::new(mean).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 20_000;
    let mut mins = Vec::with_capacity(n);
    while mins.len() < n {
        let k: f64 = rand_distr::Distribution::sample(&poisson, &mut rng);
        let m = (0..k as usize)
            .map(|_| {
                // rejection sampling from the enclosing cube
                loop {
                    let p: [f64; 3] = std::array::from_fn(|_| rng.random_range(-radius..radius));
                    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if r <= radius {
                        break r;
                    }
                }
            })
            .fold(f64::INFINITY, f64::min);
        if m.is_finite() {
            mins.push(m);
        }
    }
    let d = ks(mins, |x| nearest_distance_cdf(x, &lambda).unwrap());
    assert!(d < ks_crit(n), "KS {d}");
}

fn sky(seed: u64) -> (Vec<RealizedTransmitter>, Vec<RealizedTransmitter>) {
    let s = Scenario::baseline();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uavs = Vec::new();
    while uavs.len() < 2 {
        uavs = sample_population(&s.space, &s.uav_band, &s.lambda_uav, &mut rng).unwrap();
    }
    let cas = sample_population(&s.space, &s.ca_band, &s.lambda_ca, &mut rng).unwrap();
    let mut realize = |pts: Vec<Point3>, class| -> Vec<RealizedTransmitter> {
        pts.into_iter()
            .map(|p| RealizedTransmitter::new(p, rng.random_range(0.01..4.0), class))
            .collect()
    };
    (
        realize(uavs, AircraftClass::Uav),
        realize(cas, AircraftClass::Ca),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nearest_law_quantile_inverts_cdf(p in 1e-6f64..0.999_999, density in 1e-4f64..1.0) {
        let l = Intensity::density(density).unwrap();
        let d = nearest_distance_quantile(p, &l).unwrap();
        prop_assert!((nearest_distance_cdf(d, &l).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn range_buckets_split_at_the_cutoff(d in 0.0f64..30.0) {
        let b = classify_range(d, 15.0);
        prop_assert_eq!(b == RangeBucket::Short, d <= 15.0);
    }

    #[test]
    fn success_is_inclusive_at_threshold(theta in -20.0f64..30.0) {
        let t = db_to_linear(theta);
        prop_assert!(success(t, theta));
        prop_assert!(!success(t * (1.0 - 1e-12), theta));
    }

    #[test]
    fn sinr_grows_with_own_fading(seed in 0u64..10_000, boost in 1.01f64..10.0) {
        let s = Scenario::baseline();
        let (mut uavs, cas) = sky(seed);
        let a = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &s.channel).unwrap().sinr;
        uavs[0].fading *= boost;
        let b = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &s.channel).unwrap().sinr;
        prop_assert!(b > a);
    }

    #[test]
    fn sinr_falls_with_interferer_fading(seed in 0u64..10_000, boost in 1.01f64..10.0) {
        let s = Scenario::baseline();
        let (mut uavs, cas) = sky(seed);
        let a = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &s.channel).unwrap().sinr;
        uavs[1].fading *= boost;
        let b = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &s.channel).unwrap().sinr;
        prop_assert!(b <= a);
    }

    #[test]
    fn uav_power_cancels_without_noise_and_aircraft(seed in 0u64..10_000, p in 0.1f64..100.0) {
        let mut ch = Scenario::baseline().channel;
        ch.noise_density_dbm_per_hz = -1e6;
        let (uavs, _) = sky(seed);
        let cr = RadioParams::new(30.0, 20.0).unwrap();
        let a = compute_sinr(0, &uavs, &[], &RadioParams::new(1.0, 23.0).unwrap(), &cr, &ch).unwrap().sinr;
        let b = compute_sinr(0, &uavs, &[], &RadioParams::new(p, 23.0).unwrap(), &cr, &ch).unwrap().sinr;
        prop_assert!(((a - b) / a).abs() < 1e-12);
    }

    #[test]
    fn sinr_is_scale_invariant_without_noise(seed in 0u64..10_000, c in 0.1f64..10.0, alpha in 2.0f64..5.0) {
        let s = Scenario::baseline();
        let mut ch = s.channel;
        ch.noise_density_dbm_per_hz = -1e6;
        ch.alpha = alpha;
        let (uavs, cas) = sky(seed);
        let scale = |v: &[RealizedTransmitter]| -> Vec<RealizedTransmitter> {
            v.iter().map(|t| RealizedTransmitter { position: t.position.scaled(c), ..*t }).collect()
        };
        let a = compute_sinr(0, &uavs, &cas, &s.uav_radio, &s.ca_radio, &ch).unwrap().sinr;
        let b = compute_sinr(0, &scale(&uavs), &scale(&cas), &s.uav_radio, &s.ca_radio, &ch).unwrap().sinr;
        prop_assert!(((a - b) / a).abs() < 1e-9);
    }
}
