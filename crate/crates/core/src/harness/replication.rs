//! Reference anchor values against the paper-literal preset, plus the qualitative curve checks.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::figures::figure_base;
use super::sweep::SweepVar;
use super::{analytic_value, Preset};
use crate::error::{Error, Result};
use crate::geometry::RangeBucket;
use crate::montecarlo::TrialProtocol;
use crate::scenario::QuadratureSettings;

/// Agreement band for a quantitative match, percentage points.
pub const ANCHOR_TOLERANCE_PP: f64 = 5.0;

/// One reference value and where it sits on its figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub figure: u8,
    pub label: &'static str,
    pub settings: &'static [(SweepVar, f64)],
    pub bucket: RangeBucket,
    pub target_percent: f64,
}

const fn anchor(
    figure: u8,
    label: &'static str,
    settings: &'static [(SweepVar, f64)],
    bucket: RangeBucket,
    target_percent: f64,
) -> Anchor {
    Anchor {
        figure,
        label,
        settings,
        bucket,
        target_percent,
    }
}

use RangeBucket::{Long, Short};
use SweepVar::{Alpha, Lambda1, Pc, Pu, Theta};

pub const ANCHORS: [Anchor; 13] = [
    anchor(
        4,
        "theta=7 dB, P_U=16 W, short",
        &[(Theta, 7.0), (Pu, 16.0)],
        Short,
        84.77,
    ),
    anchor(
        4,
        "theta=11 dB, P_U=16 W, short",
        &[(Theta, 11.0), (Pu, 16.0)],
        Short,
        68.63,
    ),
    anchor(
        4,
        "theta=7 dB, P_U=16 W, long",
        &[(Theta, 7.0), (Pu, 16.0)],
        Long,
        49.40,
    ),
    anchor(
        5,
        "lambda1=30, theta=7 dB",
        &[(Lambda1, 30.0), (Theta, 7.0)],
        Short,
        83.68,
    ),
    anchor(
        5,
        "lambda1=30, theta=10 dB",
        &[(Lambda1, 30.0), (Theta, 10.0)],
        Short,
        75.05,
    ),
    anchor(
        5,
        "lambda1=30, theta=11 dB",
        &[(Lambda1, 30.0), (Theta, 11.0)],
        Short,
        67.69,
    ),
    anchor(
        5,
        "lambda1=30, theta=13 dB",
        &[(Lambda1, 30.0), (Theta, 13.0)],
        Short,
        60.61,
    ),
    anchor(
        5,
        "lambda1=30, theta=14 dB",
        &[(Lambda1, 30.0), (Theta, 14.0)],
        Short,
        54.86,
    ),
    anchor(
        6,
        "theta=7 dB, alpha=3",
        &[(Theta, 7.0), (Alpha, 3.0)],
        Short,
        85.1,
    ),
    anchor(
        6,
        "theta=7 dB, alpha=4.5",
        &[(Theta, 7.0), (Alpha, 4.5)],
        Short,
        24.1,
    ),
    anchor(
        7,
        "P_U=24 W, P_C=40 W",
        &[(Pu, 24.0), (Pc, 40.0)],
        Short,
        75.26,
    ),
    anchor(
        7,
        "P_U=15 W, P_C=40 W",
        &[(Pu, 15.0), (Pc, 40.0)],
        Short,
        70.98,
    ),
    anchor(
        7,
        "P_U=24 W, P_C=73 W",
        &[(Pu, 24.0), (Pc, 73.0)],
        Short,
        70.49,
    ),
];

/// Analytic value (probability) at `settings` on figure `figure` under `preset`.
pub fn figure_point(
    figure: u8,
    settings: &[(SweepVar, f64)],
    bucket: RangeBucket,
    preset: Preset,
    quad: &QuadratureSettings<f64>,
) -> Result<f64> {
    let mut s = figure_base(figure, preset)?;
    for &(var, v) in settings {
        var.apply(&mut s, preset, v)?;
    }
    analytic_value(preset, &s, TrialProtocol::Population, Some(bucket), quad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorResult {
    pub figure: u8,
    pub label: String,
    pub bucket: RangeBucket,
    pub target_percent: f64,
    pub produced_percent: f64,
    pub delta_pp: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationReport {
    pub preset: Preset,
    pub tolerance_pp: f64,
    pub anchors: Vec<AnchorResult>,
    pub shapes: Vec<ShapeCheck>,
}

impl ReplicationReport {
    pub fn all_anchors_listed(&self) -> bool {
        ANCHORS.iter().all(|a| {
            self.anchors
                .iter()
                .any(|r| r.figure == a.figure && r.label == a.label && r.delta_pp.is_finite())
        })
    }

    pub fn shapes_pass(&self) -> bool {
        self.shapes.iter().all(|s| s.passed)
    }

    pub fn anchors_within_tolerance(&self) -> usize {
        self.anchors.iter().filter(|a| a.within_tolerance).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("replication under preset {}\n", self.preset));
        out.push_str(&format!(
            "{:<4} {:<32} {:<6} {:>9} {:>9} {:>8}  within {} pp\n",
            "fig", "anchor", "bucket", "target%", "model%", "delta", self.tolerance_pp
        ));
        for a in &self.anchors {
            out.push_str(&format!(
                "{:<4} {:<32} {:<6} {:>9.2} {:>9.2} {:>+8.2}  {}\n",
                a.figure,
                a.label,
                a.bucket,
                a.target_percent,
                a.produced_percent,
                a.delta_pp,
                if a.within_tolerance { "yes" } else { "no" }
            ));
        }
        out.push_str("shape and ordering checks\n");
        for s in &self.shapes {
            out.push_str(&format!(
                "  [{}] {}: {}\n",
                if s.passed { "ok" } else { "FAIL" },
                s.name,
                s.detail
            ));
        }
        out
    }

    pub fn write(&self, outdir: impl AsRef<Path>) -> Result<()> {
        let outdir = outdir.as_ref();
        std::fs::create_dir_all(outdir)?;
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(outdir.join("replication.json"), json + "\n")?;
        let mut f = std::fs::File::create(outdir.join("replication.txt"))?;
        f.write_all(self.to_text().as_bytes())?;
        Ok(())
    }
}

fn check(name: &str, passed: bool, detail: String) -> ShapeCheck {
    ShapeCheck {
        name: name.into(),
        passed,
        detail,
    }
}

/// Qualitative checks; the thresholds were fixed before any value was computed.
///
/// * saturation: on every threshold curve of the short bucket, the gain from 30 to 70 W is at
///   most a quarter of the gain from 1 to 30 W;
/// * collapse: at 7 dB, `p(alpha = 4.5) <= p(alpha = 3) / 2` and `p(3) >= p(2) - 0.1`;
/// * orderings stated alongside the anchors.
fn shape_checks(preset: Preset, quad: &QuadratureSettings<f64>) -> Result<Vec<ShapeCheck>> {
    let p = |fig: u8, settings: &[(SweepVar, f64)], bucket| {
        figure_point(fig, settings, bucket, preset, quad)
    };
    let mut out = Vec::new();

    let mut worst = f64::NEG_INFINITY;
    let mut detail = Vec::new();
    for theta in super::figures::THETA_SERIES {
        let at = |pu: f64| p(4, &[(Theta, theta), (Pu, pu)], Short);
        let (p1, p30, p70) = (at(1.0)?, at(30.0)?, at(70.0)?);
        let early = p30 - p1;
        let late = p70 - p30;
        let ratio = if early > 0.0 {
            late / early
        } else {
            f64::INFINITY
        };
        worst = worst.max(ratio);
        detail.push(format!("{theta} dB: {:.4}/{:.4}", late, early));
    }
    out.push(check(
        "fig4 short curves flatten above 30 W",
        worst <= 0.25,
        format!(
            "gain(30..70 W)/gain(1..30 W) <= 0.25; worst {worst:.3} [{}]",
            detail.join(", ")
        ),
    ));

    let at = |alpha: f64| p(6, &[(Theta, 7.0), (Alpha, alpha)], Short);
    let (a2, a3, a45) = (at(2.0)?, at(3.0)?, at(4.5)?);
    out.push(check(
        "fig6 collapse beyond alpha 3",
        a45 <= 0.5 * a3 && a3 >= a2 - 0.1,
        format!("p(2)={a2:.4}, p(3)={a3:.4}, p(4.5)={a45:.4}; needs p(4.5) <= p(3)/2 and p(3) >= p(2) - 0.1"),
    ));

    for (fig, vary) in [(4u8, &[(Pu, 16.0)][..]), (5, &[(Lambda1, 30.0)][..])] {
        let values = super::figures::THETA_SERIES
            .iter()
            .map(|&t| {
                let mut settings = vary.to_vec();
                settings.push((Theta, t));
                p(fig, &settings, Short)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(check(
            &format!("fig{fig} strictly decreasing in theta"),
            values.windows(2).all(|w| w[0] > w[1]),
            format!("{values:.4?}"),
        ));
    }

    let short = p(4, &[(Theta, 7.0), (Pu, 16.0)], Short)?;
    let long = p(4, &[(Theta, 7.0), (Pu, 16.0)], Long)?;
    out.push(check(
        "fig4 short above long",
        short > long,
        format!("short {short:.4}, long {long:.4} at 7 dB, 16 W"),
    ));

    let f7 = |pu: f64, pc: f64| p(7, &[(Pu, pu), (Pc, pc)], Short);
    let (base, low_pu, high_pc) = (f7(24.0, 40.0)?, f7(15.0, 40.0)?, f7(24.0, 73.0)?);
    out.push(check(
        "fig7 triplet ordering",
        base > low_pu && base > high_pc,
        format!("(24,40)={base:.4}, (15,40)={low_pu:.4}, (24,73)={high_pc:.4}"),
    ));
    Ok(out)
}

pub fn replication_report(quad: &QuadratureSettings<f64>) -> Result<ReplicationReport> {
    let preset = Preset::PaperLiteral;
    let anchors = ANCHORS
        .iter()
        .map(|a| {
            let produced = 100.0 * figure_point(a.figure, a.settings, a.bucket, preset, quad)?;
            let delta = produced - a.target_percent;
            Ok(AnchorResult {
                figure: a.figure,
                label: a.label.into(),
                bucket: a.bucket,
                target_percent: a.target_percent,
                produced_percent: produced,
                delta_pp: delta,
                within_tolerance: delta.abs() <= ANCHOR_TOLERANCE_PP,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReplicationReport {
        preset,
        tolerance_pp: ANCHOR_TOLERANCE_PP,
        anchors,
        shapes: shape_checks(preset, quad)?,
    })
}
