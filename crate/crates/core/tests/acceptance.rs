//! Acceptance report: one PASS/FAIL line per criterion, with the measured quantities.
//!
//! Runs with `cargo test -p adsb-coexist --test acceptance`. Failures are reported, not
//! raised, so that a criterion the model cannot meet stays visible without masking the rest.

use std::f64::consts::PI;
use std::time::Instant;

use adsb_coexist::analytic::{conditional_success, laplace_exponent, p_suc_nearest};
use adsb_coexist::channel::FadingSampler;
use adsb_coexist::harness::figures::{figure_spec, GridDensity, FIGURE_IDS, THETA_SERIES};
use adsb_coexist::harness::replication::{figure_point, replication_report};
use adsb_coexist::harness::{
    reproduce_figure, run_sweep, Engines, FigureOptions, Preset, SweepVar,
};
use adsb_coexist::montecarlo::wilson_interval_z;
use adsb_coexist::{
    AltitudeBand, BoxSpace, Intensity, QuadratureSettings, RadioParams, RangeBucket, Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines
            .push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    /// Recorded with its verdict but not gating.
    fn note(&mut self, ok: bool, line: String) {
        self.lines.push(format!(
            "{} {line} [not gating]",
            if ok { "ok  " } else { "fail" }
        ));
    }

    fn info(&mut self, line: String) {
        self.lines.push(format!("info {line}"));
    }
}

fn engine_cross_validation() -> Outcome {
    let mut out = Outcome::new();
    for id in FIGURE_IDS {
        let options = FigureOptions {
            grid: GridDensity::Coarse,
            trials: 100_000,
            engines: Some(Engines::Both),
            ..FigureOptions::default()
        };
        let spec = figure_spec(id, Preset::SelfConsistent, &options).unwrap();
        let rows = run_sweep(&spec, SEED).unwrap();
        let (mut inside, mut compared, mut empty) = (0, 0, 0);
        let mut misses = Vec::new();
        for r in &rows {
            let n = r.trials.unwrap_or(0);
            let (Some(p_mc), Some(p_a)) = (r.p_mc, r.p_analytic) else {
                empty += 1;
                continue;
            };
            let k = (p_mc * n as f64).round() as u64;
            let (lo, hi) = wilson_interval_z(k, n, 3.0).unwrap();
            compared += 1;
            if lo <= p_a && p_a <= hi {
                inside += 1;
            } else {
                misses.push(format!(
                    "{}={} {}={:?} {:?}: analytic {p_a:.6e}, mc {k}/{n}",
                    r.x_name, r.x_value, r.series_name, r.series_value, r.bucket
                ));
            }
        }
        out.check(
            inside == compared && compared > 0,
            format!(
                "fig{id}: {inside}/{compared} MC points within 3 Wilson SE, {empty} empty buckets"
            ),
        );
        for m in misses {
            out.info(format!("fig{id} miss: {m}"));
        }
    }
    out
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn degenerate_closed_form() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSettings::default();
    let noise_w = 1e-3 * 10f64.powf(-17.4) * 1e6;
    let g_u = 10f64.powf(2.3);
    for (alpha, p_u, theta) in [
        (2.0, 1.0, 7.0),
        (3.0, 16.0, 10.0),
        (4.5, 1.0, 7.0),
        (5.0, 70.0, 14.0),
    ] {
        let mut s = Scenario::baseline();
        s.lambda_uav = Intensity::zero();
        s.lambda_ca = Intensity::zero();
        s.channel.alpha = alpha;
        s.uav_radio = RadioParams::new(p_u, 23.0).unwrap();
        s.theta_db = theta;
        let lambda = s.lambda_pdf.value();
        let c = 10f64.powf(theta / 10.0) * noise_w / (p_u * g_u);
        let upper = (3.0 * 1e9f64.ln() / (4.0 * PI * lambda)).cbrt();
        let reference = simpson(
            |d| {
                let pdf = 4.0 * PI * lambda * d * d * (-4.0 / 3.0 * PI * lambda * d.powi(3)).exp();
                (-c * (1000.0 * d).powf(alpha)).exp() * pdf
            },
            0.0,
            upper,
            400_000,
        );
        let p = p_suc_nearest(&s, &q).unwrap();
        out.check(
            (p - reference).abs() < 1e-6,
            format!("nearest, alpha {alpha}, P_U {p_u} W, theta {theta} dB: {p:.9} vs Simpson {reference:.9} (|diff| {:.1e} < 1e-6)", (p - reference).abs()),
        );
        let mut worst: f64 = 0.0;
        for i in 0..10 {
            let d = 1.0 + 1.6 * i as f64;
            let exact = (-c * (1000.0 * d).powf(alpha)).exp();
            let cs = conditional_success(d, &s, &q).unwrap();
            worst = worst.max(((cs - exact) / exact).abs());
        }
        out.check(
            worst < 1e-9,
            format!("conditional at 10 distances: worst relative error {worst:.1e} < 1e-9"),
        );
    }
    out
}

fn quadrature_vs_sampling() -> Outcome {
    let mut out = Outcome::new();
    let space = BoxSpace::new(10.0, 10.0, 10.0).unwrap();
    let ch = Scenario::baseline().channel;
    let gain = 10f64.powf(2.3);
    let mut pick = ChaCha8Rng::seed_from_u64(SEED);
    let settings: Vec<(f64, f64, f64, f64, f64)> = (0..10)
        .map(|_| {
            let alpha = pick.random_range(2.0..5.0);
            let d = pick.random_range(0.5..15.0);
            let theta = pick.random_range(7.0..14.0);
            let lo = pick.random_range(0.0..9.0);
            let hi = pick.random_range(lo + 0.5..=10.0);
            (alpha, d, theta, lo, hi)
        })
        .collect();
    let results: Vec<(f64, f64, f64)> = settings
        .par_iter()
        .enumerate()
        .map(|(i, &(alpha, d, theta, lo, hi))| {
            let mut ch = ch;
            ch.alpha = alpha;
            let s = 10f64.powf(theta / 10.0) * (1000.0 * d).powf(alpha) / gain;
            let band = AltitudeBand::new(lo, hi).unwrap();
            let h = laplace_exponent(s, gain, &ch, &space, &band, 1e-9, 4000)
                .unwrap()
                .value;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let n = 10_000_000;
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..n {
                let x: f64 = rng.random_range(-10.0..10.0);
                let y: f64 = rng.random_range(-10.0..10.0);
                let z: f64 = rng.random_range(lo..hi);
                let r = 1000.0 * (x * x + y * y + z * z).sqrt();
                let v = s * gain / (r.powf(alpha) + s * gain);
                sum += v;
                sum2 += v * v;
            }
            let volume = 400.0 * (hi - lo);
            let mean = sum / n as f64;
            (
                h,
                volume * mean,
                volume * ((sum2 / n as f64 - mean * mean) / n as f64).sqrt(),
            )
        })
        .collect();
    for (&(alpha, d, theta, lo, hi), &(h, mc, se)) in settings.iter().zip(&results) {
        let z = (h - mc).abs() / se;
        out.check(
            z < 3.0,
            format!("alpha {alpha:.2}, d {d:.2} km, theta {theta:.2} dB, band [{lo:.2}, {hi:.2}]: H {h:.6} vs {mc:.6} ± {se:.6} ({z:.2} SE)"),
        );
    }
    out
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn monotonicity() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSettings::default();
    let point = |fig: u8, settings: Vec<(SweepVar, f64)>, bucket, preset| {
        figure_point(fig, &settings, bucket, preset, &q).unwrap()
    };
    let strictly_decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let nondecreasing = |v: &[f64]| v.windows(2).all(|w| w[1] >= w[0]);
    use RangeBucket::Short;
    use SweepVar::{Lambda1, Pc, Pu, Theta};

    // The qualitative findings are properties of the model, so the self-consistent preset gates;
    // the paper-literal conventions are reported alongside.
    for preset in Preset::ALL {
        let record = |out: &mut Outcome, ok: bool, line: String| match preset {
            Preset::SelfConsistent => out.check(ok, line),
            Preset::PaperLiteral => out.note(ok, line),
        };
        for bucket in RangeBucket::ALL {
            let v: Vec<f64> = THETA_SERIES
                .par_iter()
                .map(|&t| point(4, vec![(Pu, 16.0), (Theta, t)], bucket, preset))
                .collect();
            record(
                &mut out,
                strictly_decreasing(&v),
                format!("{preset} fig4 {bucket}: decreasing in theta {}", sci(&v)),
            );
        }

        let v: Vec<f64> = [10.0, 30.0, 60.0]
            .par_iter()
            .map(|&l| point(5, vec![(Lambda1, l), (Theta, 7.0)], Short, preset))
            .collect();
        record(
            &mut out,
            strictly_decreasing(&v),
            format!("{preset} fig5 short: decreasing in lambda1 {}", sci(&v)),
        );

        for theta in THETA_SERIES {
            let per_bucket: Vec<Vec<f64>> = RangeBucket::ALL
                .iter()
                .map(|&b| {
                    [1.0, 16.0, 30.0, 70.0]
                        .par_iter()
                        .map(|&pu| point(4, vec![(Pu, pu), (Theta, theta)], b, preset))
                        .collect()
                })
                .collect();
            for (b, v) in RangeBucket::ALL.iter().zip(&per_bucket) {
                record(
                    &mut out,
                    nondecreasing(v),
                    format!(
                        "{preset} fig4 {b} theta {theta}: nondecreasing in P_U {}",
                        sci(v)
                    ),
                );
            }
            let ok = per_bucket[0]
                .iter()
                .zip(&per_bucket[1])
                .all(|(s, l)| s >= l);
            record(
                &mut out,
                ok,
                format!("{preset} fig4 theta {theta}: short >= long at every P_U (alpha 2)"),
            );
        }

        for pu in [1.0, 15.0, 24.0, 40.0, 70.0] {
            let v: Vec<f64> = [15.0, 40.0, 73.0, 140.0]
                .par_iter()
                .map(|&pc| point(7, vec![(Pu, pu), (Pc, pc)], Short, preset))
                .collect();
            record(
                &mut out,
                strictly_decreasing(&v),
                format!("{preset} fig7 P_U {pu}: decreasing in P_C {}", sci(&v)),
            );
        }
    }
    out
}

fn replication() -> (Outcome, Outcome) {
    let dir = tempfile::tempdir().unwrap();
    let report = replication_report(&QuadratureSettings::default()).unwrap();
    report.write(dir.path()).unwrap();
    let mut a = Outcome::new();
    let files =
        dir.path().join("replication.json").exists() && dir.path().join("replication.txt").exists();
    a.check(
        files && report.all_anchors_listed() && report.anchors.len() == 13,
        format!(
            "{} anchors listed with finite deltas; report files written",
            report.anchors.len()
        ),
    );
    for r in &report.anchors {
        a.info(format!(
            "fig{} {:<30} {:<5} target {:>6.2}%  produced {:>6.2}%  delta {:>+7.2} pp  within 5 pp: {}",
            r.figure, r.label, r.bucket, r.target_percent, r.produced_percent, r.delta_pp, r.within_tolerance
        ));
    }
    a.info(format!(
        "{}/13 anchors within 5 pp",
        report.anchors_within_tolerance()
    ));
    let mut b = Outcome::new();
    for s in &report.shapes {
        b.check(s.passed, format!("{}: {}", s.name, s.detail));
    }
    (a, b)
}

fn reproducibility() -> Outcome {
    let mut out = Outcome::new();
    let files_under = |threads: usize, id: u8, preset: Preset| -> Vec<Vec<u8>> {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let options = FigureOptions {
            grid: GridDensity::Coarse,
            trials: 20_000,
            ..FigureOptions::default()
        };
        let summary = pool
            .install(|| reproduce_figure(id, preset, dir.path(), SEED, &options))
            .unwrap();
        std::iter::once(&summary.csv)
            .chain(&summary.plot_files)
            .map(|p| std::fs::read(p).unwrap())
            .collect()
    };
    for (id, preset) in [
        (4, Preset::SelfConsistent),
        (7, Preset::SelfConsistent),
        (5, Preset::PaperLiteral),
    ] {
        let one = files_under(1, id, preset);
        let again = files_under(1, id, preset);
        let four = files_under(4, id, preset);
        out.check(
            one == again && one == four,
            format!("fig{id} {preset}: CSV and {} plot files byte-identical across runs and 1 vs 4 workers", one.len() - 1),
        );
    }
    out
}

fn statistical_sanity() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let z95 = 1.959_963_984_540_054;
    for p in [0.01, 0.1, 0.5, 0.9] {
        let n = 10_000u64;
        let covered = (0..1000)
            .filter(|_| {
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson_interval_z(k, n, z95).unwrap();
                lo <= p && p <= hi
            })
            .count();
        let rate = covered as f64 / 1000.0;
        out.check(
            rate >= 0.93,
            format!("Wilson 95% coverage at p={p}: {rate:.3} >= 0.93"),
        );
    }
    let sampler = FadingSampler::new(1.0).unwrap();
    let n = 1_000_000;
    let draws: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
    let nf = n as f64;
    let mean = draws.iter().sum::<f64>() / nf;
    let var = draws.iter().map(|h| (h - 1.0).powi(2)).sum::<f64>() / nf;
    let e2 = (-2.0f64).exp();
    let tail = draws.iter().filter(|&&h| h > 2.0).count() as f64 / nf;
    let z_mean = (mean - 1.0) / (1.0 / nf).sqrt();
    // for h ~ Exp(1), (h - 1)² has mean 1 and variance 8
    let z_var = (var - 1.0) / (8.0 / nf).sqrt();
    let z_tail = (tail - e2) / (e2 * (1.0 - e2) / nf).sqrt();
    out.check(
        z_mean.abs() < 3.0,
        format!("fading mean {mean:.5} ({z_mean:+.2} SE)"),
    );
    out.check(
        z_var.abs() < 3.0,
        format!("fading variance {var:.5} ({z_var:+.2} SE)"),
    );
    out.check(
        z_tail.abs() < 3.0,
        format!("fading P(h > 2) {tail:.5} vs {e2:.5} ({z_tail:+.2} SE)"),
    );
    out
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 6] = [
        (
            "1 engine cross-validation (self-consistent, 5 points per curve, 1e5 trials)",
            engine_cross_validation,
        ),
        ("2 degenerate closed form", degenerate_closed_form),
        (
            "3 quadrature vs 1e7-sample volume integral",
            quadrature_vs_sampling,
        ),
        ("4 monotonicity suite", monotonicity),
        ("6 reproducibility", reproducibility),
        ("7 statistical sanity", statistical_sanity),
    ];
    let mut summary = Vec::new();
    let mut report = |name: &str, outcome: Outcome, secs: f64| {
        println!(
            "{} criterion {name} ({secs:.1} s)",
            if outcome.passed { "PASS" } else { "FAIL" }
        );
        for l in &outcome.lines {
            println!("    {l}");
        }
        summary.push((name.to_string(), outcome.passed));
    };
    for (name, run) in &criteria[..4] {
        let t = Instant::now();
        let o = run();
        report(name, o, t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let (a, b) = replication();
    let secs = t.elapsed().as_secs_f64();
    report("5a replication report lists every anchor", a, secs);
    report(
        "5b replication shapes and orderings (paper-literal)",
        b,
        0.0,
    );
    for (name, run) in &criteria[4..] {
        let t = Instant::now();
        let o = run();
        report(name, o, t.elapsed().as_secs_f64());
    }
    println!();
    for (name, passed) in &summary {
        println!("{} {name}", if *passed { "PASS" } else { "FAIL" });
    }
    let failed = summary.iter().filter(|(_, p)| !p).count();
    println!(
        "{} of {} criteria passed",
        summary.len() - failed,
        summary.len()
    );
}
