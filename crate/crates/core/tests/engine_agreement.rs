//! Monte Carlo against the analytic engine under the self-consistent conventions.

use adsb_coexist::analytic::{conditional_success, p_suc_bucket, p_suc_nearest};
use adsb_coexist::montecarlo::{run_fixed_distance, run_nearest, run_population};
use adsb_coexist::{QuadratureSettings, RangeBucket, Scenario};

const Z: f64 = 3.0;

fn scenario(theta_db: f64, alpha: f64) -> Scenario {
    let mut s = Scenario::baseline();
    s.theta_db = theta_db;
    s.channel.alpha = alpha;
    s
}

#[test]
fn fixed_distance_matches_conditional_success() {
    let q = QuadratureSettings::default();
    for (i, (theta, alpha, d)) in [
        (-5.0, 2.0, 2.0),
        (-10.0, 2.0, 3.0),
        (7.0, 3.0, 2.0),
        (0.0, 4.0, 3.0),
        (7.0, 4.5, 1.5),
    ]
    .into_iter()
    .enumerate()
    {
        let s = scenario(theta, alpha);
        let analytic = conditional_success(d, &s, &q).unwrap();
        let mc = run_fixed_distance(d, &s, 40_000, 100 + i as u64).unwrap();
        assert!(
            mc.within_wilson_se(analytic, Z).unwrap(),
            "theta {theta} alpha {alpha} d {d}: analytic {analytic}, mc {}/{}",
            mc.successes,
            mc.trials
        );
    }
}

#[test]
fn population_buckets_match_p_suc_bucket() {
    let q = QuadratureSettings::default();
    for (i, (theta, alpha)) in [(-10.0, 2.0), (-5.0, 2.0), (0.0, 4.0)]
        .into_iter()
        .enumerate()
    {
        let s = scenario(theta, alpha);
        let mc = run_population(&s, 20_000, 200 + i as u64).unwrap();
        for b in RangeBucket::ALL {
            let analytic = p_suc_bucket(&s, b, &q).unwrap();
            let e = mc[&b];
            if e.is_empty() {
                continue;
            }
            assert!(
                e.within_wilson_se(analytic, Z).unwrap(),
                "theta {theta} alpha {alpha} {b}: analytic {analytic}, mc {}/{}",
                e.successes,
                e.trials
            );
        }
    }
}

#[test]
fn baseline_population_fills_both_buckets() {
    let mc = run_population(&scenario(7.0, 2.0), 5_000, 3).unwrap();
    let short = mc[&RangeBucket::Short].trials as f64;
    let long = mc[&RangeBucket::Long].trials as f64;
    // 15 UAVs per draw on average; the long bucket holds about 1e-4 of the placements.
    assert!((short / 5_000.0 - 15.0).abs() < 0.5, "{short}");
    assert!(long < 0.002 * short, "{long}");
}

/// The nearest-distance law used by the analytic engine is that of an unbounded field; the
/// simulator draws the nearest UAV from the band-limited box, which has no UAV below 1 km and
/// thins out beyond 10 km. The two protocols are therefore not expected to agree.
#[test]
#[ignore = "analytic nearest law assumes an unbounded field; differs from box-limited sampling"]
fn nearest_target_matches_p_suc_nearest() {
    let q = QuadratureSettings::default();
    let s = scenario(-5.0, 2.0);
    let analytic = p_suc_nearest(&s, &q).unwrap();
    let mc = run_nearest(&s, 20_000, 7).unwrap();
    assert!(
        mc.within_wilson_se(analytic, Z).unwrap(),
        "analytic {analytic}, mc {}/{}",
        mc.successes,
        mc.trials
    );
}
