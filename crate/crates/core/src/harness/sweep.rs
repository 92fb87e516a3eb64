//! One-variable parameter sweeps with an optional series variable, and their CSV form.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analytic_value, Preset};
use crate::error::{Error, Result};
use crate::geometry::{Intensity, RangeBucket};
use crate::montecarlo::{derive_seed, run_protocol, Estimate, TrialProtocol};
use crate::scenario::{QuadratureSettings, Scenario};

/// Column order of every CSV the harness writes.
pub const CSV_HEADER: [&str; 14] = [
    "figure",
    "x_name",
    "x_value",
    "series_name",
    "series_value",
    "bucket",
    "p_analytic",
    "p_mc",
    "ci_low",
    "ci_high",
    "trials",
    "seed",
    "preset",
    "warnings",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    /// UAV transmit power, W.
    Pu,
    /// CA transmit power, W.
    Pc,
    /// Expected UAV count in the box.
    Lambda1,
    Alpha,
    /// Decoding threshold, dB.
    Theta,
}

impl SweepVar {
    pub const ALL: [SweepVar; 5] = [
        SweepVar::Pu,
        SweepVar::Pc,
        SweepVar::Lambda1,
        SweepVar::Alpha,
        SweepVar::Theta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Pu => "pu",
            SweepVar::Pc => "pc",
            SweepVar::Lambda1 => "lambda1",
            SweepVar::Alpha => "alpha",
            SweepVar::Theta => "theta",
        }
    }

    /// Sets this variable to `value` in `scenario`. A new UAV count also moves the
    /// target-distance intensity according to `preset`.
    pub fn apply(self, scenario: &mut Scenario<f64>, preset: Preset, value: f64) -> Result<()> {
        match self {
            SweepVar::Pu => scenario.uav_radio = scenario.uav_radio.with_tx_power(value)?,
            SweepVar::Pc => scenario.ca_radio = scenario.ca_radio.with_tx_power(value)?,
            SweepVar::Lambda1 => {
                scenario.lambda_uav = Intensity::from_count(value, scenario.space.volume())?;
                scenario.lambda_pdf = preset.lambda_pdf(&scenario.lambda_uav, &scenario.space)?;
            }
            SweepVar::Alpha => scenario.channel.alpha = value,
            SweepVar::Theta => scenario.theta_db = value,
        }
        scenario.validate()
    }
}

impl std::fmt::Display for SweepVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVar::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Parse {
                field: "var".into(),
                message: format!("expected one of pu, pc, lambda1, alpha, theta; got `{s}`"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engines {
    Analytic,
    MonteCarlo,
    #[default]
    Both,
}

impl Engines {
    pub fn analytic(self) -> bool {
        matches!(self, Engines::Analytic | Engines::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, Engines::MonteCarlo | Engines::Both)
    }
}

impl std::str::FromStr for Engines {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engines::Analytic),
            "mc" | "montecarlo" => Ok(Engines::MonteCarlo),
            "both" => Ok(Engines::Both),
            other => Err(Error::Parse {
                field: "engine".into(),
                message: format!("expected analytic, mc or both; got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub variable: SweepVar,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Written to the `figure` column.
    pub id: String,
    pub variable: SweepVar,
    pub grid: Vec<f64>,
    pub series: Option<Series>,
    pub base: Scenario<f64>,
    pub preset: Preset,
    pub quadrature: QuadratureSettings<f64>,
    pub engines: Engines,
    pub protocol: TrialProtocol,
    /// Buckets reported under the population protocol.
    pub buckets: Vec<RangeBucket>,
    pub trials: u64,
    /// Remarks appended to every row.
    pub notes: Vec<String>,
}

impl SweepSpec {
    /// Analytic-only population sweep of `variable` over `grid` on `base`.
    pub fn new(
        id: impl Into<String>,
        variable: SweepVar,
        grid: Vec<f64>,
        base: Scenario<f64>,
        preset: Preset,
    ) -> Self {
        Self {
            id: id.into(),
            variable,
            grid,
            series: None,
            base,
            preset,
            quadrature: QuadratureSettings::default(),
            engines: Engines::Analytic,
            protocol: TrialProtocol::Population,
            buckets: RangeBucket::ALL.to_vec(),
            trials: crate::montecarlo::DEFAULT_TRIALS,
            notes: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, constraint: &str| Error::Validation {
            field: field.into(),
            constraint: constraint.into(),
        };
        let sorted =
            |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|x| x.is_finite());
        if self.grid.is_empty() || !sorted(&self.grid) {
            return Err(invalid(
                "grid",
                "must be nonempty, finite and strictly increasing",
            ));
        }
        if let Some(s) = &self.series {
            if s.values.is_empty() || !s.values.iter().all(|x| x.is_finite()) {
                return Err(invalid("series", "must list at least one finite value"));
            }
            if s.variable == self.variable {
                return Err(invalid("series", "must differ from the swept variable"));
            }
        }
        if self.protocol == TrialProtocol::Population && self.buckets.is_empty() {
            return Err(invalid("buckets", "at least one bucket is required"));
        }
        if self.engines.monte_carlo() && self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        self.quadrature.validate()?;
        self.base.validate()
    }

    fn series_values(&self) -> Vec<Option<f64>> {
        match &self.series {
            Some(s) => s.values.iter().copied().map(Some).collect(),
            None => vec![None],
        }
    }

    fn bucket_keys(&self) -> Vec<Option<RangeBucket>> {
        match self.protocol {
            TrialProtocol::Population => self.buckets.iter().copied().map(Some).collect(),
            _ => vec![None],
        }
    }
}

/// One CSV line. Empty optional fields stand for "not computed".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub figure: String,
    pub x_name: String,
    pub x_value: f64,
    pub series_name: String,
    pub series_value: Option<f64>,
    pub bucket: Option<RangeBucket>,
    pub p_analytic: Option<f64>,
    pub p_mc: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Target evaluations behind `p_mc`.
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub preset: Preset,
    pub warnings: String,
}

struct Point {
    xi: usize,
    si: usize,
    x: f64,
    series: Option<f64>,
    scenario: Scenario<f64>,
}

impl SweepSpec {
    fn annotate(&self, x: f64, series: Option<f64>, e: Error) -> Error {
        let series = match (&self.series, series) {
            (Some(s), Some(v)) => format!(", {}={v}", s.variable),
            _ => String::new(),
        };
        Error::SweepPoint {
            x_name: self.variable.name().into(),
            x_value: x,
            series,
            source: Box::new(e),
        }
    }

    fn points(&self) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for (xi, &x) in self.grid.iter().enumerate() {
            for (si, series) in self.series_values().into_iter().enumerate() {
                let mut scenario = self.base;
                let mut set = || -> Result<()> {
                    self.variable.apply(&mut scenario, self.preset, x)?;
                    if let (Some(s), Some(v)) = (&self.series, series) {
                        s.variable.apply(&mut scenario, self.preset, v)?;
                    }
                    Ok(())
                };
                set().map_err(|e| self.annotate(x, series, e))?;
                out.push(Point {
                    xi,
                    si,
                    x,
                    series,
                    scenario,
                });
            }
        }
        Ok(out)
    }

    /// Points differing only in the threshold share their draws.
    fn draw_key(&self, p: &Point) -> (usize, usize) {
        let xi = if self.variable == SweepVar::Theta {
            0
        } else {
            p.xi
        };
        let si = match &self.series {
            Some(s) if s.variable == SweepVar::Theta => 0,
            _ => p.si,
        };
        (xi, si)
    }
}

/// Seed of the Monte Carlo run behind the draw key `(xi, si)`.
pub fn point_seed(master: u64, key: (usize, usize)) -> u64 {
    derive_seed(master, ((key.0 as u64) << 32) | key.1 as u64)
}

/// Seed of a Monte Carlo run with its per-bucket estimates.
type SeededEstimates = (u64, BTreeMap<Option<RangeBucket>, Estimate>);

/// Runs every (grid point x series value x bucket) of `spec`; rows come back sorted by
/// (x, series, bucket).
///
/// Monte Carlo runs only under the self-consistent preset, whose analytic values it is meant
/// to check; under the paper-literal preset the MC fields stay empty and the rows say so.
pub fn run_sweep(spec: &SweepSpec, seed: u64) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points()?;
    let buckets = spec.bucket_keys();
    let quad = spec.quadrature;

    let analytic: Vec<Vec<Option<f64>>> = if spec.engines.analytic() {
        points
            .par_iter()
            .map(|p| {
                buckets
                    .iter()
                    .map(|&b| {
                        analytic_value(spec.preset, &p.scenario, spec.protocol, b, &quad)
                            .map(Some)
                            .map_err(|e| spec.annotate(p.x, p.series, e))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?
    } else {
        vec![vec![None; buckets.len()]; points.len()]
    };

    let run_mc = spec.engines.monte_carlo() && spec.preset == Preset::SelfConsistent;
    let mut mc: Vec<Option<SeededEstimates>> = vec![None; points.len()];
    if run_mc {
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            groups.entry(spec.draw_key(p)).or_default().push(i);
        }
        for (key, members) in groups {
            let first = &points[members[0]];
            let thresholds: Vec<f64> = members
                .iter()
                .map(|&i| points[i].scenario.theta_db)
                .collect();
            let s = point_seed(seed, key);
            let estimates =
                run_protocol(spec.protocol, &first.scenario, &thresholds, spec.trials, s)
                    .map_err(|e| spec.annotate(first.x, first.series, e))?;
            for (&i, est) in members.iter().zip(estimates) {
                mc[i] = Some((s, est));
            }
        }
    }

    let mut rows = Vec::with_capacity(points.len() * buckets.len());
    for (pi, p) in points.iter().enumerate() {
        let mut base_warnings = p.scenario.warnings();
        base_warnings.extend(spec.notes.iter().cloned());
        if let Some(note) = spec.preset.provenance() {
            base_warnings.push(note.into());
        }
        if spec.engines.monte_carlo() && !run_mc {
            base_warnings.push("monte carlo not run under the paper-literal preset".into());
        }
        for (bi, &bucket) in buckets.iter().enumerate() {
            let mut warnings = base_warnings.clone();
            let mut row = SweepRow {
                figure: spec.id.clone(),
                x_name: spec.variable.name().into(),
                x_value: p.x,
                series_name: spec
                    .series
                    .as_ref()
                    .map(|s| s.variable.name().to_string())
                    .unwrap_or_default(),
                series_value: p.series,
                bucket,
                p_analytic: analytic[pi][bi],
                p_mc: None,
                ci_low: None,
                ci_high: None,
                trials: None,
                seed: None,
                preset: spec.preset,
                warnings: String::new(),
            };
            if let Some((s, est)) = &mc[pi] {
                let e = est.get(&bucket).copied().ok_or(Error::NoTarget)?;
                row.trials = Some(e.trials);
                row.seed = Some(*s);
                if e.is_empty() {
                    warnings.push("no monte carlo targets in bucket".into());
                } else {
                    row.p_mc = Some(e.p_hat);
                    row.ci_low = Some(e.ci_low);
                    row.ci_high = Some(e.ci_high);
                }
                if e.diagnostics.empty_draws > 0 && spec.protocol == TrialProtocol::NearestTarget {
                    warnings.push(format!(
                        "{} empty UAV draws resampled",
                        e.diagnostics.empty_draws
                    ));
                }
            }
            row.warnings = warnings.join("; ");
            rows.push(row);
        }
    }
    rows.sort_by(|a, b| {
        a.x_value
            .total_cmp(&b.x_value)
            .then(cmp_opt(a.series_value, b.series_value))
            .then(a.bucket.cmp(&b.bucket))
    });
    Ok(rows)
}

fn cmp_opt(a: Option<f64>, b: Option<f64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(a), Some(b)) => a.total_cmp(&b),
        (a, b) => a.is_some().cmp(&b.is_some()),
    }
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse {
            field: "csv header".into(),
            message: format!("expected {}", CSV_HEADER.join(",")),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}
